#ifndef SKLAB_STATS_HPP
#define SKLAB_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace sklab {

/// Running mean/variance of one scalar observable over disorder samples,
/// keyed by (observable, n, beta). Merging uses the parallel-variance update
/// so partial statistics combine exactly like the concatenated data.
struct EnsembleStats {
    std::string observable;
    int n = 0;
    std::optional<double> beta;
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;  // sum of squared deviations from the mean
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();

    EnsembleStats() = default;
    EnsembleStats(std::string name, int size, std::optional<double> inverse_temperature = std::nullopt)
        : observable(std::move(name)), n(size), beta(inverse_temperature) {}

    void push(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
        min = std::min(min, x);
        max = std::max(max, x);
    }

    [[nodiscard]] double variance() const noexcept {
        return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1);
    }
    [[nodiscard]] double stddev() const noexcept { return std::sqrt(variance()); }
    [[nodiscard]] double stderr_of_mean() const noexcept {
        return count < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(count));
    }

    [[nodiscard]] bool same_key(const EnsembleStats& other) const noexcept {
        return observable == other.observable && n == other.n && beta == other.beta;
    }
};

/// Combines two partial statistics of the same observable.
[[nodiscard]] inline EnsembleStats merge_stats(const EnsembleStats& a, const EnsembleStats& b) {
    if (!a.same_key(b)) {
        throw InvalidArgument("merge_stats: key mismatch (" + a.observable + ", n=" + std::to_string(a.n) + ") vs (" +
                              b.observable + ", n=" + std::to_string(b.n) + ")");
    }
    if (b.count == 0) return a;
    if (a.count == 0) return b;
    EnsembleStats out = a;
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    const double total = na + nb;
    const double delta = b.mean - a.mean;
    out.count = a.count + b.count;
    out.mean = (na * a.mean + nb * b.mean) / total;
    out.m2 = a.m2 + b.m2 + delta * delta * na * nb / total;
    out.min = std::min(a.min, b.min);
    out.max = std::max(a.max, b.max);
    return out;
}

/// Statistics of a sequence of values reduced by a balanced pairwise tree,
/// so the result depends only on the order of the input.
[[nodiscard]] inline EnsembleStats reduce_pairwise(std::span<const double> values, const EnsembleStats& key) {
    if (values.empty()) return key;
    if (values.size() == 1) {
        EnsembleStats single = key;
        single.push(values[0]);
        return single;
    }
    const auto half = values.size() / 2;
    return merge_stats(reduce_pairwise(values.first(half), key), reduce_pairwise(values.subspan(half), key));
}

}  // namespace sklab

#endif  // SKLAB_STATS_HPP
