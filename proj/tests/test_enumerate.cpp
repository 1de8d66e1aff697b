#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include <sklab/enumerate.hpp>

#include "oracles.hpp"

using namespace sklab;

namespace {

struct Visit {
    std::uint64_t bits;
    double energy;
};

std::vector<Visit> gray_visits(const Disorder& d) {
    std::vector<Visit> v;
    gray_sweep(d, [&](double e, std::uint64_t bits) { v.push_back({bits, e}); });
    return v;
}

std::vector<Visit> block_visits(const Disorder& d) {
    std::vector<Visit> v;
    block_sweep(d, [&](std::span<const double> energies, std::uint64_t first) {
        for (std::size_t i = 0; i < energies.size(); ++i) v.push_back({first | i, energies[i]});
    });
    return v;
}

}  // namespace

class SweepVsOracle : public ::testing::TestWithParam<int> {};

TEST_P(SweepVsOracle, GrayVisitsHalfSpaceWithCorrectEnergies) {
    const int n = GetParam();
    const auto d = sample_disorder(n, 77, static_cast<std::uint64_t>(n));
    const auto visits = gray_visits(d);
    ASSERT_EQ(visits.size(), std::size_t{1} << (n - 1));
    std::set<std::uint64_t> seen;
    std::uint64_t prev = 0;
    for (std::size_t t = 0; t < visits.size(); ++t) {
        const auto& v = visits[t];
        EXPECT_EQ(v.bits >> (n - 1), 0U);
        EXPECT_TRUE(seen.insert(v.bits).second);
        if (t > 0) EXPECT_EQ(std::popcount(v.bits ^ prev), 1);
        prev = v.bits;
        EXPECT_NEAR(v.energy, oracle::energy(d, v.bits), 1e-12 * n);  // incremental drift grows with the energy scale
    }
}

TEST_P(SweepVsOracle, BlockVisitsHalfSpaceWithCorrectEnergies) {
    const int n = GetParam();
    const auto d = sample_disorder(n, 78, static_cast<std::uint64_t>(n));
    const auto visits = block_visits(d);
    ASSERT_EQ(visits.size(), std::size_t{1} << (n - 1));
    for (std::size_t t = 0; t < visits.size(); ++t) {
        EXPECT_EQ(visits[t].bits, t);
        EXPECT_NEAR(visits[t].energy, oracle::energy(d, visits[t].bits), 1e-12);
    }
}

INSTANTIATE_TEST_SUITE_P(SmallSizes, SweepVsOracle, ::testing::Values(1, 2, 3, 5, 8, 11, 12, 13, 18));

TEST(Sweeps, GlobalFlipPartnerHasSameEnergy) {
    const auto d = sample_disorder(9, 5, 0);
    for (const auto& v : block_visits(d)) EXPECT_NEAR(oracle::energy(d, invert_word(v.bits, 9)), v.energy, 1e-12);
}

TEST(Sweeps, GrayWalkAgreesWithBlockSweepPastRebuildInterval) {
    // 2^21 steps crosses the 2^20-step field rebuild twice.
    const int n = 22;
    const auto d = sample_disorder(n, 123, 0);
    std::vector<double> by_bits(std::size_t{1} << (n - 1));
    block_sweep(d, [&](std::span<const double> e, std::uint64_t first) {
        std::copy(e.begin(), e.end(), by_bits.begin() + static_cast<std::ptrdiff_t>(first));
    });
    double worst = 0.0;
    gray_sweep(d, [&](double e, std::uint64_t bits) { worst = std::max(worst, std::abs(e - by_bits[bits])); });
    EXPECT_LT(worst, 1e-9);
}

TEST(Sweeps, CapIsEnforced) {
    const auto d = sample_disorder(10, 1, 0);
    EnumerationOptions opts;
    opts.cap = 9;
    try {
        gray_sweep(d, [](double, std::uint64_t) {}, opts);
        FAIL() << "expected CapacityError";
    } catch (const CapacityError& e) {
        EXPECT_EQ(e.cap(), 9);
        EXPECT_NE(std::string(e.what()).find("cap of 9"), std::string::npos);
    }
    EXPECT_THROW(block_sweep(d, [](std::span<const double>, std::uint64_t) {}, opts), CapacityError);
}
