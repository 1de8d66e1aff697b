#ifndef SKLAB_PARALLEL_HPP
#define SKLAB_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace sklab {

/// Worker count used when a caller passes 0.
[[nodiscard]] inline unsigned default_threads() noexcept {
    return std::max(1U, std::thread::hardware_concurrency());
}

/// Evaluates fn(i) for i in [0, count) on a bounded pool that pulls indices
/// from a shared counter. Results come back in index order regardless of which
/// worker produced them. The first exception is rethrown after all workers stop.
template <class Fn>
auto parallel_map(std::size_t count, unsigned threads, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
    using Result = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<std::optional<Result>> slots(count);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };

    const unsigned workers = std::min<std::size_t>(threads == 0 ? default_threads() : threads, std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    std::vector<Result> out;
    out.reserve(count);
    for (auto& slot : slots) out.push_back(std::move(*slot));
    return out;
}

}  // namespace sklab

#endif  // SKLAB_PARALLEL_HPP
