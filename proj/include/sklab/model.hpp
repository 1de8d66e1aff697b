#ifndef SKLAB_MODEL_HPP
#define SKLAB_MODEL_HPP

// SK instance: Gaussian couplings, spin configurations and energy kernels.
//
//   H(sigma) = -(1/sqrt(n)) * sum_{i<j} J_ij sigma_i sigma_j
//
// Couplings are stored row-major upper-triangular: the pair (i, j), i < j,
// lives at i*(2n - i - 1)/2 + (j - i - 1). Spin i is bit i of the
// configuration; bit 0 means sigma_i = +1, so the all-zero word is all-up.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace sklab {

[[nodiscard]] constexpr std::size_t pair_count(int n) noexcept {
    return n < 2 ? 0 : static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
}

/// Triangular index of the pair (i, j) with i < j.
[[nodiscard]] constexpr std::size_t pair_index(int i, int j, int n) noexcept {
    const auto ii = static_cast<std::size_t>(i);
    return ii * (2 * static_cast<std::size_t>(n) - ii - 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

/// One disorder realization J together with the key that regenerates it.
class Disorder {
public:
    Disorder(int n, std::vector<double> couplings, std::uint64_t seed = 0, std::uint64_t sample_index = 0)
        : n_(n), couplings_(std::move(couplings)), seed_(seed), sample_index_(sample_index) {
        if (n_ < 1) throw InvalidArgument("disorder needs n >= 1, got " + std::to_string(n_));
        if (couplings_.size() != pair_count(n_)) {
            throw InvalidArgument("disorder with n=" + std::to_string(n_) + " needs " +
                                  std::to_string(pair_count(n_)) + " couplings, got " +
                                  std::to_string(couplings_.size()));
        }
    }

    /// All couplings zero.
    static Disorder zero(int n) { return Disorder(n, std::vector<double>(pair_count(n), 0.0)); }

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] std::span<const double> couplings() const noexcept { return couplings_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t sample_index() const noexcept { return sample_index_; }

    /// J_ij for i != j (symmetric); 0 on the diagonal.
    [[nodiscard]] double coupling(int i, int j) const noexcept {
        if (i == j) return 0.0;
        if (i > j) std::swap(i, j);
        return couplings_[pair_index(i, j, n_)];
    }

    /// 1/sqrt(n), the prefactor of the Hamiltonian.
    [[nodiscard]] double scale() const noexcept { return 1.0 / std::sqrt(static_cast<double>(n_)); }

    friend bool operator==(const Disorder&, const Disorder&) = default;

private:
    int n_;
    std::vector<double> couplings_;
    std::uint64_t seed_;
    std::uint64_t sample_index_;
};

/// Draws n(n-1)/2 i.i.d. standard normals from the stream keyed by (seed, sample_index).
[[nodiscard]] inline Disorder sample_disorder(int n, std::uint64_t seed, std::uint64_t sample_index) {
    if (n < 1) throw InvalidArgument("sample_disorder: n must be >= 1, got " + std::to_string(n));
    Xoshiro256 rng = make_stream(mix_seed(seed, static_cast<std::uint64_t>(n)), sample_index);
    std::vector<double> couplings(pair_count(n));
    for (double& c : couplings) c = rng.normal();
    return Disorder(n, std::move(couplings), seed, sample_index);
}

/// Symmetric dense copy of the couplings with zero diagonal; rows padded to a
/// multiple of 8 so the field-update loops vectorize.
class DenseCouplings {
public:
    explicit DenseCouplings(const Disorder& disorder)
        : n_(disorder.n()), stride_((disorder.n() + 7) / 8 * 8), scale_(disorder.scale()),
          data_(static_cast<std::size_t>(n_) * static_cast<std::size_t>(stride_), 0.0) {
        for (int i = 0; i < n_; ++i) {
            for (int j = i + 1; j < n_; ++j) {
                const double c = disorder.coupling(i, j);
                data_[index(i, j)] = c;
                data_[index(j, i)] = c;
            }
        }
    }

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] int stride() const noexcept { return stride_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] const double* row(int i) const noexcept {
        return data_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(stride_);
    }

private:
    [[nodiscard]] std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(stride_) + static_cast<std::size_t>(j);
    }

    int n_;
    int stride_;
    double scale_;
    std::vector<double> data_;
};

/// Number of incremental flips after which cached fields are rebuilt from scratch.
inline constexpr std::uint64_t kCacheRebuildInterval = std::uint64_t{1} << 20;

/// A spin configuration with an optional local-field cache
/// h_i = sum_{j != i} J_ij sigma_j (units of J, without the 1/sqrt(n) factor).
class SpinConfig {
public:
    explicit SpinConfig(int n) : n_(n), words_(word_count(n), 0) {
        if (n < 1) throw InvalidArgument("SpinConfig needs n >= 1");
    }

    /// Configuration from a packed word; only valid for n <= 64.
    static SpinConfig from_word(int n, std::uint64_t bits) {
        if (n > 64) throw InvalidArgument("from_word: n must be <= 64");
        SpinConfig s(n);
        s.words_[0] = n == 64 ? bits : bits & ((std::uint64_t{1} << n) - 1);
        return s;
    }

    /// Configuration from explicit spins (+1/-1).
    static SpinConfig from_spins(std::span<const int> spins) {
        SpinConfig s(static_cast<int>(spins.size()));
        for (int i = 0; i < s.n_; ++i) {
            if (spins[static_cast<std::size_t>(i)] == -1) {
                s.toggle_bit(i);
            } else if (spins[static_cast<std::size_t>(i)] != 1) {
                throw InvalidArgument("spins must be +1 or -1");
            }
        }
        return s;
    }

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] bool bit(int i) const noexcept {
        return (words_[static_cast<std::size_t>(i >> 6)] >> (i & 63)) & 1U;
    }
    [[nodiscard]] int spin(int i) const noexcept { return bit(i) ? -1 : 1; }
    [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }
    [[nodiscard]] std::uint64_t word() const noexcept { return words_[0]; }

    /// Toggles bit i; invalidates nothing (callers owning a cache go through apply_flip).
    void toggle_bit(int i) noexcept { words_[static_cast<std::size_t>(i >> 6)] ^= std::uint64_t{1} << (i & 63); }

    /// Global flip sigma -> -sigma; drops the cache.
    void invert() noexcept {
        for (int i = 0; i < n_; ++i) toggle_bit(i);
        cache_.reset();
    }

    [[nodiscard]] bool has_cache() const noexcept { return cache_.has_value(); }
    [[nodiscard]] std::span<const double> local_fields() const {
        if (!cache_) throw InvalidArgument("local-field cache not built");
        return cache_->fields;
    }
    [[nodiscard]] double cached_energy() const {
        if (!cache_) throw InvalidArgument("local-field cache not built");
        return cache_->energy;
    }

    /// Bits as a string, site 0 first ('0' = up).
    [[nodiscard]] std::string to_string() const {
        std::string out(static_cast<std::size_t>(n_), '0');
        for (int i = 0; i < n_; ++i) {
            if (bit(i)) out[static_cast<std::size_t>(i)] = '1';
        }
        return out;
    }

    static SpinConfig from_string(std::string_view text) {
        SpinConfig s(static_cast<int>(text.size()));
        for (int i = 0; i < s.n_; ++i) {
            const char c = text[static_cast<std::size_t>(i)];
            if (c == '1') {
                s.toggle_bit(i);
            } else if (c != '0') {
                throw InvalidArgument("spin string must contain only '0' and '1'");
            }
        }
        return s;
    }

    friend bool operator==(const SpinConfig& a, const SpinConfig& b) noexcept {
        return a.n_ == b.n_ && a.words_ == b.words_;
    }

private:
    struct FieldCache {
        std::vector<double> fields;
        double energy = 0.0;
        std::uint64_t flips_since_rebuild = 0;
    };

    static std::size_t word_count(int n) { return static_cast<std::size_t>(n < 1 ? 1 : (n + 63) / 64); }

    friend void build_cache(SpinConfig&, const Disorder&);
    friend void apply_flip(SpinConfig&, const Disorder&, int);

    int n_;
    std::vector<std::uint64_t> words_;
    std::optional<FieldCache> cache_;
};

namespace detail {

inline void check_dimensions(const SpinConfig& sigma, const Disorder& disorder) {
    if (sigma.n() != disorder.n()) {
        throw InvalidArgument("configuration has n=" + std::to_string(sigma.n()) + " but disorder has n=" +
                              std::to_string(disorder.n()));
    }
}

inline void check_site(const SpinConfig& sigma, int k) {
    if (k < 0 || k >= sigma.n()) {
        throw InvalidArgument("site index " + std::to_string(k) + " out of range [0, " + std::to_string(sigma.n()) +
                              ")");
    }
}

/// h_k computed directly from the couplings.
inline double direct_field(const SpinConfig& sigma, const Disorder& disorder, int k) {
    double h = 0.0;
    for (int j = 0; j < sigma.n(); ++j) {
        if (j != k) h += disorder.coupling(k, j) * sigma.spin(j);
    }
    return h;
}

}  // namespace detail

/// H(sigma) evaluated term by term.
[[nodiscard]] inline double hamiltonian(const SpinConfig& sigma, const Disorder& disorder) {
    detail::check_dimensions(sigma, disorder);
    const int n = disorder.n();
    const auto couplings = disorder.couplings();
    double sum = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
        const int si = sigma.spin(i);
        for (int j = i + 1; j < n; ++j) sum += couplings[idx++] * si * sigma.spin(j);
    }
    return -disorder.scale() * sum;
}

/// Fills the local-field cache and the cached energy from scratch.
inline void build_cache(SpinConfig& sigma, const Disorder& disorder) {
    detail::check_dimensions(sigma, disorder);
    SpinConfig::FieldCache cache;
    cache.fields.resize(static_cast<std::size_t>(sigma.n()));
    for (int i = 0; i < sigma.n(); ++i) cache.fields[static_cast<std::size_t>(i)] = detail::direct_field(sigma, disorder, i);
    cache.energy = hamiltonian(sigma, disorder);
    sigma.cache_ = std::move(cache);
}

/// H(sigma with spin k flipped) - H(sigma) = (2/sqrt(n)) sigma_k h_k.
/// Uses the cache when present, otherwise computes h_k directly.
[[nodiscard]] inline double flip_delta(const SpinConfig& sigma, const Disorder& disorder, int k) {
    detail::check_dimensions(sigma, disorder);
    detail::check_site(sigma, k);
    const double h = sigma.has_cache() ? sigma.local_fields()[static_cast<std::size_t>(k)]
                                       : detail::direct_field(sigma, disorder, k);
    return 2.0 * disorder.scale() * sigma.spin(k) * h;
}

/// Flips spin k in place, updating every cached field in O(n).
inline void apply_flip(SpinConfig& sigma, const Disorder& disorder, int k) {
    detail::check_dimensions(sigma, disorder);
    detail::check_site(sigma, k);
    if (!sigma.cache_) {
        sigma.toggle_bit(k);
        return;
    }
    auto& cache = *sigma.cache_;
    const int old_spin = sigma.spin(k);
    cache.energy += 2.0 * disorder.scale() * old_spin * cache.fields[static_cast<std::size_t>(k)];
    for (int j = 0; j < sigma.n(); ++j) {
        if (j != k) cache.fields[static_cast<std::size_t>(j)] -= 2.0 * old_spin * disorder.coupling(j, k);
    }
    sigma.toggle_bit(k);
    if (++cache.flips_since_rebuild >= kCacheRebuildInterval) build_cache(sigma, disorder);
}

/// Value-returning variant of apply_flip.
[[nodiscard]] inline SpinConfig flipped(SpinConfig sigma, const Disorder& disorder, int k) {
    apply_flip(sigma, disorder, k);
    return sigma;
}

/// FNV-1a over the coupling bytes; detects corrupted persisted instances.
[[nodiscard]] inline std::uint64_t coupling_checksum(const Disorder& disorder) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ static_cast<std::uint64_t>(disorder.n());
    for (double c : disorder.couplings()) {
        const auto bits = std::bit_cast<std::uint64_t>(c);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

}  // namespace sklab

#endif  // SKLAB_MODEL_HPP
