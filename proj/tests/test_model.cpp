#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include <sklab/model.hpp>
#include <sklab/rng.hpp>

#include "oracles.hpp"

using namespace sklab;

namespace {

Disorder single_pair(double j) { return Disorder(2, {j}); }

Disorder all_ones(int n) { return Disorder(n, std::vector<double>(pair_count(n), 1.0)); }

}  // namespace

TEST(SampleDisorder, SingleSiteHasNoCouplings) {
    EXPECT_TRUE(sample_disorder(1, 42, 0).couplings().empty());
    EXPECT_TRUE(sample_disorder(1, 7, 3).couplings().empty());
}

TEST(SampleDisorder, RejectsEmptyInstance) { EXPECT_THROW((void)sample_disorder(0, 1, 0), InvalidArgument); }

TEST(SampleDisorder, DeterministicInAllArguments) {
    const auto a = sample_disorder(4, 99, 0);
    const auto b = sample_disorder(4, 99, 0);
    ASSERT_EQ(a.couplings().size(), 6U);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(std::bit_cast<std::uint64_t>(a.couplings()[i]), std::bit_cast<std::uint64_t>(b.couplings()[i]));
    }
    EXPECT_NE(a.couplings()[0], sample_disorder(4, 99, 1).couplings()[0]);
    EXPECT_NE(a.couplings()[0], sample_disorder(4, 100, 0).couplings()[0]);
}

TEST(SampleDisorder, MomentsMatchStandardNormal) {
    // 10^4 samples of 15 couplings: mean within 4/sqrt(15e4), variance within 5%.
    constexpr std::size_t samples = 10000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const auto d = sample_disorder(6, 2024, i);
        for (double c : d.couplings()) {
            sum += c;
            sum_sq += c * c;
        }
    }
    const double count = 15.0 * samples;
    const double mean = sum / count;
    const double var = sum_sq / count - mean * mean;
    EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(count));
    EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(SampleDisorder, IndependentStreamsAreUncorrelated) {
    double cross = 0.0;
    constexpr std::size_t samples = 4000;
    for (std::size_t i = 0; i < samples; ++i) {
        cross += sample_disorder(2, 5, 2 * i).couplings()[0] * sample_disorder(2, 5, 2 * i + 1).couplings()[0];
    }
    EXPECT_LT(std::abs(cross / samples), 4.0 / std::sqrt(static_cast<double>(samples)));
}

TEST(Disorder, RejectsWrongCouplingCount) {
    EXPECT_THROW(Disorder(3, {1.0, 2.0}), InvalidArgument);
    EXPECT_THROW(Disorder(0, {}), InvalidArgument);
}

TEST(Disorder, TriangularIndexIsRowMajor) {
    const int n = 5;
    std::vector<double> c(pair_count(n));
    std::iota(c.begin(), c.end(), 0.0);
    const Disorder d(n, c);
    std::size_t expected = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            EXPECT_EQ(pair_index(i, j, n), expected);
            EXPECT_EQ(d.coupling(i, j), static_cast<double>(expected));
            EXPECT_EQ(d.coupling(j, i), static_cast<double>(expected));
            ++expected;
        }
    }
}

TEST(Hamiltonian, HandEvaluatedCases) {
    EXPECT_NEAR(hamiltonian(SpinConfig::from_spins(std::vector{1, 1}), single_pair(1.0)), -1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(hamiltonian(SpinConfig::from_spins(std::vector{1, 1, -1}), all_ones(3)), 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_EQ(hamiltonian(SpinConfig::from_word(7, 0b1011001), Disorder::zero(7)), 0.0);
}

TEST(Hamiltonian, RejectsDimensionMismatch) {
    EXPECT_THROW((void)hamiltonian(SpinConfig(3), single_pair(1.0)), InvalidArgument);
}

TEST(Hamiltonian, GaugeSymmetryIsExact) {
    const auto d = sample_disorder(11, 3, 0);
    Xoshiro256 rng(17);
    for (int t = 0; t < 50; ++t) {
        auto s = SpinConfig::from_word(11, rng());
        const double e = hamiltonian(s, d);
        s.invert();
        EXPECT_EQ(e, hamiltonian(s, d));
    }
}

TEST(Hamiltonian, AgreesWithOracle) {
    const auto d = sample_disorder(9, 8, 2);
    for (std::uint64_t x = 0; x < 512; x += 37) {
        EXPECT_NEAR(hamiltonian(SpinConfig::from_word(9, x), d), oracle::energy(d, x), 1e-13);
    }
}

TEST(FlipDelta, TwoSiteExample) {
    const auto d = single_pair(1.0);
    auto s = SpinConfig(2);
    build_cache(s, d);
    EXPECT_NEAR(flip_delta(s, d, 0), 2.0 / std::sqrt(2.0), 1e-15);
    EXPECT_EQ(s.word(), 0U);
}

TEST(FlipDelta, ZeroCouplings) {
    const auto d = Disorder::zero(6);
    auto s = SpinConfig::from_word(6, 0b101101);
    for (int k = 0; k < 6; ++k) EXPECT_EQ(flip_delta(s, d, k), 0.0);
}

TEST(FlipDelta, MatchesFullRecompute) {
    const auto d = sample_disorder(8, 11, 0);
    auto s = SpinConfig::from_word(8, 0b10110010);
    build_cache(s, d);
    const double e = hamiltonian(s, d);
    for (int k = 0; k < 8; ++k) {
        auto t = s;
        t.toggle_bit(k);
        EXPECT_NEAR(flip_delta(s, d, k), hamiltonian(t, d) - e, 1e-12);
    }
}

TEST(FlipDelta, WorksWithoutCache) {
    const auto d = sample_disorder(7, 12, 1);
    const auto s = SpinConfig::from_word(7, 0b0110101);
    for (int k = 0; k < 7; ++k) {
        auto t = s;
        t.toggle_bit(k);
        EXPECT_NEAR(flip_delta(s, d, k), hamiltonian(t, d) - hamiltonian(s, d), 1e-12);
    }
}

TEST(FlipDelta, RejectsSiteOutOfRange) {
    const auto d = sample_disorder(4, 1, 0);
    auto s = SpinConfig(4);
    EXPECT_THROW((void)flip_delta(s, d, 4), InvalidArgument);
    EXPECT_THROW((void)flip_delta(s, d, -1), InvalidArgument);
    EXPECT_THROW(apply_flip(s, d, 9), InvalidArgument);
}

TEST(ApplyFlip, TwoSiteFieldUpdate) {
    const auto d = single_pair(0.75);
    auto s = SpinConfig(2);
    build_cache(s, d);
    apply_flip(s, d, 0);
    EXPECT_EQ(s.spin(0), -1);
    EXPECT_EQ(s.spin(1), 1);
    EXPECT_DOUBLE_EQ(s.local_fields()[1], -0.75);
}

TEST(ApplyFlip, IsAnInvolution) {
    const auto d = sample_disorder(12, 5, 0);
    auto s = SpinConfig::from_word(12, 0xa5c);
    build_cache(s, d);
    const auto bits = s.word();
    const double e = s.cached_energy();
    for (int k = 0; k < 12; ++k) {
        apply_flip(s, d, k);
        apply_flip(s, d, k);
        EXPECT_EQ(s.word(), bits);
        EXPECT_NEAR(s.cached_energy(), e, 1e-12);
    }
}

TEST(ApplyFlip, RandomWalkKeepsCacheConsistent) {
    const auto d = sample_disorder(10, 21, 4);
    auto s = SpinConfig(10);
    build_cache(s, d);
    Xoshiro256 rng(3);
    for (int step = 0; step < 1000; ++step) {
        const int k = static_cast<int>(rng.below(10));
        const double predicted = s.cached_energy() + flip_delta(s, d, k);
        apply_flip(s, d, k);
        EXPECT_NEAR(s.cached_energy(), predicted, 1e-12);
    }
    const double scratch = hamiltonian(s, d);
    EXPECT_LE(std::abs(s.cached_energy() - scratch), 1e-9 * std::max(1.0, std::abs(scratch)));
    for (int i = 0; i < 10; ++i) {
        EXPECT_NEAR(s.local_fields()[static_cast<std::size_t>(i)], detail::direct_field(s, d, i),
                    1e-10 * std::max(1.0, std::abs(detail::direct_field(s, d, i))));
    }
}

TEST(ApplyFlip, FlippedReturnsNewValue) {
    const auto d = sample_disorder(5, 2, 0);
    const auto s = SpinConfig(5);
    const auto t = flipped(s, d, 3);
    EXPECT_EQ(s.word(), 0U);
    EXPECT_EQ(t.word(), 1U << 3);
}

TEST(SpinConfig, StringRoundTripAndWideConfigs) {
    auto s = SpinConfig(100);
    s.toggle_bit(0);
    s.toggle_bit(70);
    s.toggle_bit(99);
    EXPECT_EQ(s.spin(70), -1);
    EXPECT_EQ(s.spin(69), 1);
    EXPECT_EQ(SpinConfig::from_string(s.to_string()), s);
    EXPECT_THROW((void)SpinConfig::from_string("01x"), InvalidArgument);
}

TEST(Checksum, DetectsSingleBitChange) {
    const auto d = sample_disorder(6, 1, 0);
    auto c = std::vector<double>(d.couplings().begin(), d.couplings().end());
    c[3] = std::nextafter(c[3], 10.0);
    EXPECT_NE(coupling_checksum(d), coupling_checksum(Disorder(6, c)));
}
