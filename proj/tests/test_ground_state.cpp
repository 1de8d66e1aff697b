#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <sklab/ground_state.hpp>

#include "oracles.hpp"

using namespace sklab;

namespace {

void expect_consistent(const GroundStateResult& r, const Disorder& d) {
    EXPECT_NEAR(r.density * r.n, r.energy, 1e-12);
    EXPECT_NEAR(hamiltonian(r.argmin, d), r.energy, 1e-10);
}

AnnealSchedule quick_schedule(std::uint64_t seed) {
    AnnealSchedule s;
    s.sweeps = 200;
    s.restarts = 4;
    s.seed = seed;
    return s;
}

}  // namespace

TEST(ExactGroundState, TwoSites) {
    const Disorder d(2, {1.0});
    const auto r = exact_ground_state(d);
    EXPECT_NEAR(r.energy, -1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(r.density, -0.3535534, 1e-7);
    EXPECT_EQ(r.method, SolverMethod::exact);
    expect_consistent(r, d);
}

TEST(ExactGroundState, ZeroCouplings) {
    const auto r = exact_ground_state(Disorder::zero(7));
    EXPECT_EQ(r.energy, 0.0);
    EXPECT_EQ(r.argmin.word(), 0U);  // first found: all up
}

TEST(ExactGroundState, MatchesNaiveOracle) {
    for (std::uint64_t idx = 0; idx < 3; ++idx) {
        const auto d = sample_disorder(16, 4242, idx);
        const auto energies = oracle::all_energies(d);
        const auto r = exact_ground_state(d);
        EXPECT_NEAR(r.energy, oracle::min_energy(energies), 1e-12);
        expect_consistent(r, d);
        auto flipped = r.argmin;
        flipped.invert();
        EXPECT_NEAR(hamiltonian(flipped, d), r.energy, 1e-12);
    }
}

TEST(ExactGroundState, CapacityErrorPointsToHeuristics) {
    EnumerationOptions opts;
    opts.cap = 12;
    try {
        (void)exact_ground_state(sample_disorder(13, 1, 0), opts);
        FAIL();
    } catch (const CapacityError& e) {
        EXPECT_NE(std::string(e.what()).find("heuristic"), std::string::npos);
    }
}

TEST(AnnealSchedule, Validation) {
    AnnealSchedule s;
    EXPECT_NO_THROW(s.validate());
    EXPECT_DOUBLE_EQ(s.beta_at(0), 0.5);
    EXPECT_DOUBLE_EQ(s.beta_at(s.sweeps - 1), 5.0);
    s.beta_end = 0.4;
    EXPECT_THROW(s.validate(), ConfigError);
    s = AnnealSchedule{};
    s.sweeps = 0;
    EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Anneal, TrivialInstances) {
    EXPECT_EQ(anneal_ground_state(Disorder::zero(9), quick_schedule(1)).energy, 0.0);
    AnnealSchedule one;
    one.sweeps = 1;
    one.restarts = 1;
    const Disorder d(2, {1.0});
    EXPECT_NEAR(anneal_ground_state(d, one).energy, -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Anneal, DeterministicInSeed) {
    const auto d = sample_disorder(30, 3, 0);
    const auto a = anneal_ground_state(d, quick_schedule(5));
    const auto b = anneal_ground_state(d, quick_schedule(5));
    EXPECT_EQ(a.energy, b.energy);
    EXPECT_EQ(a.argmin, b.argmin);
    EXPECT_EQ(a.flips_used, b.flips_used);
}

TEST(Anneal, MatchesExactOnTwentySiteInstances) {
    int matches = 0;
    constexpr int instances = 50;
    for (int i = 0; i < instances; ++i) {
        const auto d = sample_disorder(20, 2020, static_cast<std::uint64_t>(i));
        const auto exact = exact_ground_state(d);
        AnnealSchedule s;
        s.seed = static_cast<std::uint64_t>(i);
        const auto heuristic = anneal_ground_state(d, s);
        expect_consistent(heuristic, d);
        EXPECT_GE(heuristic.energy, exact.energy - 1e-9);
        if (heuristic.energy <= exact.energy + 1e-9) ++matches;
    }
    EXPECT_GE(matches, 48);
}

TEST(Tempering, TrivialAndErrors) {
    EXPECT_EQ(tempering_ground_state(Disorder::zero(6), BetaGrid({0.3, 3.0}), 50, 1).energy, 0.0);
    EXPECT_THROW((void)tempering_ground_state(Disorder::zero(6), BetaGrid({1.0}), 50, 1), ConfigError);
}

TEST(Tempering, MatchesExactOnSixteenSiteInstances) {
    int matches = 0;
    constexpr int instances = 50;
    TemperingOptions opts;
    opts.sweeps = 500;
    for (int i = 0; i < instances; ++i) {
        const auto d = sample_disorder(16, 1616, static_cast<std::uint64_t>(i));
        const auto exact = exact_ground_state(d);
        opts.seed = static_cast<std::uint64_t>(i);
        const auto heuristic = tempering_ground_state(d, opts);
        expect_consistent(heuristic, d);
        EXPECT_EQ(heuristic.method, SolverMethod::tempering);
        EXPECT_GE(heuristic.energy, exact.energy - 1e-9);
        if (heuristic.energy <= exact.energy + 1e-9) ++matches;
    }
    EXPECT_GE(matches, 49);
}

TEST(DensityEnsemble, SingleSiteIsZero) {
    const auto e = density_ensemble(1, 10, SolverConfig{}, 3);
    EXPECT_EQ(e.stats.mean, 0.0);
    EXPECT_EQ(e.stats.count, 10U);
}

TEST(DensityEnsemble, TwoSitesHalfNormalMean) {
    // min H = -|J12|/sqrt 2, so the mean density is -E|J| / (2 sqrt 2) = -1 / (2 sqrt(pi)).
    const auto e = density_ensemble(2, 20000, SolverConfig{}, 11);
    const double expected = -1.0 / (2.0 * std::sqrt(std::numbers::pi));
    EXPECT_NEAR(expected, -0.28209479, 1e-8);
    EXPECT_LT(std::abs(e.stats.mean - expected), 3.0 * e.stats.stderr_of_mean());
    for (const auto& r : e.records) EXPECT_LE(r.density, 0.0);
}

TEST(DensityEnsemble, HeuristicRecordsNeverBeatExact) {
    SolverConfig exact;
    SolverConfig anneal;
    anneal.method = SolverMethod::annealing;
    anneal.anneal.sweeps = 300;
    anneal.anneal.restarts = 4;
    const auto a = density_ensemble(12, 20, exact, 9);
    const auto b = density_ensemble(12, 20, anneal, 9);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_GE(b.records[i].energy, a.records[i].energy - 1e-9);
}

TEST(SolverMethod, Parsing) {
    EXPECT_EQ(parse_solver_method("tempering"), SolverMethod::tempering);
    EXPECT_EQ(to_string(SolverMethod::annealing), "annealing");
    EXPECT_THROW((void)parse_solver_method("branch-and-bound"), ConfigError);
}
