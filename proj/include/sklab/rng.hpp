#ifndef SKLAB_RNG_HPP
#define SKLAB_RNG_HPP

// Reproducible random streams.
//
// Every stream is keyed by a 64-bit seed and an ordinal. The key is mixed
// through splitmix64 into the 256-bit state of a xoshiro256** engine. Normal
// deviates use the polar-free Box-Muller transform with both outputs kept:
//
//   u1 = (k1 + 1) * 2^-53   in (0, 1]
//   u2 =  k2      * 2^-53   in [0, 1)
//   z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2)
//
// where k1, k2 are the top 53 bits of consecutive engine outputs. The
// standard library's normal_distribution is implementation defined, so it is
// not used anywhere a value is persisted or compared across runs.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace sklab {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Combines two 64-bit keys into one; order matters.
constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t s = a;
    std::uint64_t h = splitmix64(s);
    s = h ^ (b + 0x632be59bd9b4e019ULL);
    return splitmix64(s);
}

/// FNV-1a, used to fold experiment names into seeds.
constexpr std::uint64_t hash_string(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// xoshiro256** 1.0; satisfies UniformRandomBitGenerator.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed = 0) noexcept { reseed(seed); }

    void reseed(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
        has_spare_ = false;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = std::rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by multiply-shift; bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * bound) >> 64);
    }

    /// Standard normal via Box-Muller (see header comment).
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>((*this)() >> 11) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Engine for the stream identified by (seed, ordinal).
inline Xoshiro256 make_stream(std::uint64_t seed, std::uint64_t ordinal) noexcept {
    return Xoshiro256(mix_seed(seed, ordinal));
}

}  // namespace sklab

#endif  // SKLAB_RNG_HPP
