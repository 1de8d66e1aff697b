#ifndef SKLAB_FAST_EXP_HPP
#define SKLAB_FAST_EXP_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>

namespace sklab {

/// exp(x) for x <= 0 without branches or library calls, so loops over it
/// vectorize. Range reduction x = k ln2 + r (|r| <= ln2/2, Cody-Waite split of
/// ln2) and a degree-13 Taylor polynomial; relative error within a few ulp of
/// std::exp. Inputs below -708 are clamped (result ~3e-308).
[[nodiscard]] inline double exp_nonpositive(double x) noexcept {
    constexpr double kShift = 0x1.8p52;
    x = x < -708.0 ? -708.0 : x;
    const double shifted = x * 1.4426950408889634 + kShift;
    const double kf = shifted - kShift;
    const std::int64_t k = std::bit_cast<std::int64_t>(shifted) - std::bit_cast<std::int64_t>(kShift);
    double r = x - kf * 0x1.62e42fefa39efp-1;
    r = r - kf * 0x1.abc9e3b39803fp-56;
    double p = 1.0 / 6227020800.0;
    p = p * r + 1.0 / 479001600.0;
    p = p * r + 1.0 / 39916800.0;
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    return p * std::bit_cast<double>((k + 1023) << 52);
}

/// Sum with eight interleaved partial sums; fixed order, vectorizable.
[[nodiscard]] inline double lane_sum(std::span<const double> values) noexcept {
    double lanes[8] = {};
    const std::size_t full = values.size() / 8 * 8;
    for (std::size_t i = 0; i < full; i += 8) {
        for (std::size_t l = 0; l < 8; ++l) lanes[l] += values[i + l];
    }
    double tail = 0.0;
    for (std::size_t i = full; i < values.size(); ++i) tail += values[i];
    return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) + ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7])) + tail;
}

}  // namespace sklab

#endif  // SKLAB_FAST_EXP_HPP
