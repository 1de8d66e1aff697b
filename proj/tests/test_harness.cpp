#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include <sklab/harness.hpp>
#include <sklab/rng.hpp>
#include <sklab/thermo.hpp>

using namespace sklab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("sklab_test_" + name);
    fs::remove_all(dir);
    return dir;
}

RunManifest thermo_manifest(std::uint64_t units) {
    RunManifest m;
    m.experiment_id = "free-energy-n10";
    m.master_seed = 2024;
    m.parameters = {{"n", 10}, {"beta", 1.0}};
    m.units = units;
    m.columns = {"n", "beta", "sample_index", "log_z", "free_energy"};
    m.observables = {"free_energy"};
    return m;
}

std::vector<Row> thermo_unit(std::uint64_t seed, std::uint64_t index) {
    const auto d = sample_disorder(10, seed, index);
    const auto r = enumerate_thermo(d, BetaGrid({1.0}))[0];
    return {Row{std::int64_t{10}, 1.0, static_cast<std::int64_t>(index), r.log_z, r.log_z / 10.0}};
}

}  // namespace

TEST(MergeStats, IdentityAndSingletons) {
    EnsembleStats x("e", 4);
    for (double v : {1.0, 2.0, 4.0}) x.push(v);
    const auto same = merge_stats(x, EnsembleStats("e", 4));
    EXPECT_EQ(same.count, 3U);
    EXPECT_EQ(same.mean, x.mean);
    EnsembleStats a("e", 4), b("e", 4);
    a.push(1.0);
    b.push(3.0);
    const auto m = merge_stats(a, b);
    EXPECT_EQ(m.count, 2U);
    EXPECT_EQ(m.mean, 2.0);
    EXPECT_NEAR(m.variance(), 2.0, 1e-15);
    EXPECT_THROW((void)merge_stats(a, EnsembleStats("other", 4)), InvalidArgument);
    EXPECT_THROW((void)merge_stats(a, EnsembleStats("e", 5)), InvalidArgument);
}

TEST(MergeStats, RandomPartitionsMatchWholeSet) {
    Xoshiro256 rng(99);
    std::vector<double> values(1000);
    for (auto& v : values) v = 3.0 + 2.0 * rng.normal();
    // Whole-set oracle by two-pass formulas.
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double var = ss / (values.size() - 1);

    for (int trial = 0; trial < 10; ++trial) {
        std::vector<EnsembleStats> parts(1 + rng.below(7), EnsembleStats("x", 1));
        for (double v : values) parts[rng.below(parts.size())].push(v);
        EnsembleStats total("x", 1);
        for (const auto& p : parts) total = merge_stats(total, p);
        EXPECT_EQ(total.count, values.size());
        EXPECT_NEAR(total.mean, mean, 1e-12);
        EXPECT_NEAR(total.variance(), var, 1e-12 * var);
        // Commutativity.
        EnsembleStats reversed("x", 1);
        for (auto it = parts.rbegin(); it != parts.rend(); ++it) reversed = merge_stats(reversed, *it);
        EXPECT_NEAR(reversed.mean, total.mean, 1e-12);
        EXPECT_NEAR(reversed.m2, total.m2, 1e-12 * total.m2);
    }
}

TEST(MergeStats, AssociativeWithinTolerance) {
    Xoshiro256 rng(5);
    EnsembleStats a("x", 1), b("x", 1), c("x", 1);
    for (int i = 0; i < 100; ++i) a.push(rng.normal());
    for (int i = 0; i < 37; ++i) b.push(10 + rng.normal());
    for (int i = 0; i < 3; ++i) c.push(-4 + rng.normal());
    const auto left = merge_stats(merge_stats(a, b), c);
    const auto right = merge_stats(a, merge_stats(b, c));
    EXPECT_NEAR(left.mean, right.mean, 1e-12);
    EXPECT_NEAR(left.m2, right.m2, 1e-12 * left.m2);
}

TEST(ParallelMap, OrderAndExceptions) {
    const auto v = parallel_map(100, 4, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], i * i);
    EXPECT_THROW(parallel_map(10, 3,
                              [](std::size_t i) {
                                  if (i == 7) throw std::runtime_error("boom");
                                  return i;
                              }),
                 std::runtime_error);
}

TEST(RunEnsemble, ConstantEvaluator) {
    const auto dir = fresh_dir("constant");
    RunManifest m;
    m.experiment_id = "constant";
    m.units = 100;
    m.columns = {"n", "sample_index", "value"};
    m.observables = {"value"};
    const auto out = run_ensemble(m, dir, [](std::uint64_t, std::uint64_t i) {
        return std::vector<Row>{Row{std::int64_t{3}, static_cast<std::int64_t>(i), 1.0}};
    });
    ASSERT_TRUE(out.complete);
    const auto* s = out.find("value", 3);
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(s->count, 100U);
    EXPECT_EQ(s->mean, 1.0);
    EXPECT_EQ(s->stderr_of_mean(), 0.0);
    EXPECT_TRUE(fs::exists(dir / "constant" / "records.csv"));
    EXPECT_TRUE(fs::exists(dir / "constant" / "summary.json"));
    EXPECT_TRUE(fs::exists(dir / "constant" / "manifest.json"));
}

TEST(RunEnsemble, ResumeEqualsUninterrupted) {
    const auto whole = fresh_dir("whole");
    const auto parts = fresh_dir("parts");
    const auto m = thermo_manifest(40);

    const auto a = run_ensemble(m, whole, thermo_unit);
    ASSERT_TRUE(a.complete);

    RunPolicy interrupted;
    interrupted.unit_budget = 15;
    const auto first = run_ensemble(m, parts, thermo_unit, interrupted);
    EXPECT_FALSE(first.complete);
    EXPECT_EQ(first.computed, 15U);
    EXPECT_FALSE(fs::exists(parts / m.experiment_id / "records.csv"));

    // A second interruption via a failing unit under the abort policy.
    int calls = 0;
    auto flaky = [&](std::uint64_t seed, std::uint64_t idx) {
        if (++calls == 6) throw std::runtime_error("killed");
        return thermo_unit(seed, idx);
    };
    RunPolicy serial;
    serial.threads = 1;
    EXPECT_THROW(run_ensemble(m, parts, flaky, serial), UnitError);

    int recomputed = 0;
    auto counting = [&](std::uint64_t seed, std::uint64_t idx) {
        ++recomputed;
        return thermo_unit(seed, idx);
    };
    const auto b = run_ensemble(m, parts, counting);
    ASSERT_TRUE(b.complete);
    EXPECT_EQ(static_cast<std::uint64_t>(recomputed), 40U - 15U - 5U);
    EXPECT_EQ(b.reused, 20U);

    EXPECT_EQ(read_text_file(whole / m.experiment_id / "records.csv"),
              read_text_file(parts / m.experiment_id / "records.csv"));
    EXPECT_EQ(read_text_file(whole / m.experiment_id / "summary.json"),
              read_text_file(parts / m.experiment_id / "summary.json"));
    EXPECT_EQ(a.stats[0].mean, b.stats[0].mean);
}

TEST(RunEnsemble, CompletedUnitsAreNeverRecomputed) {
    const auto dir = fresh_dir("norecompute");
    const auto m = thermo_manifest(10);
    (void)run_ensemble(m, dir, thermo_unit);
    int calls = 0;
    const auto again = run_ensemble(m, dir, [&](std::uint64_t s, std::uint64_t i) {
        ++calls;
        return thermo_unit(s, i);
    });
    EXPECT_EQ(calls, 0);
    EXPECT_EQ(again.reused, 10U);
}

TEST(RunEnsemble, MatchesSerialRerun) {
    const auto dir = fresh_dir("serial");
    const auto m = thermo_manifest(500);
    RunPolicy parallel;
    parallel.threads = 4;
    const auto out = run_ensemble(m, dir, thermo_unit, parallel);
    // Serial oracle: same seeds, plain loop, same pairwise reduction.
    std::vector<double> values;
    for (std::uint64_t i = 0; i < m.units; ++i) {
        values.push_back(std::get<double>(thermo_unit(m.unit_seed(i), i)[0][4]));
    }
    const auto serial = reduce_pairwise(values, EnsembleStats("free_energy", 10, 1.0));
    ASSERT_EQ(out.stats.size(), 1U);
    EXPECT_EQ(out.stats[0].mean, serial.mean);
    EXPECT_EQ(out.stats[0].m2, serial.m2);
    EXPECT_LE(out.stats[0].mean, annealed_free_energy(10, 1.0));
}

TEST(RunEnsemble, SkipPolicyRecordsFailures) {
    const auto dir = fresh_dir("skip");
    auto m = thermo_manifest(10);
    RunPolicy skip;
    skip.on_failure = FailurePolicy::skip;
    const auto out = run_ensemble(m, dir, [](std::uint64_t s, std::uint64_t i) {
        if (i == 3) throw ConsistencyError("bad sample");
        return thermo_unit(s, i);
    }, skip);
    ASSERT_EQ(out.failures.size(), 1U);
    EXPECT_EQ(out.failures[0].sample_index, 3U);
    EXPECT_EQ(out.failures[0].unit_seed, m.unit_seed(3));
    EXPECT_TRUE(out.complete);
    EXPECT_EQ(out.stats[0].count, 9U);
    EXPECT_NE(read_text_file(dir / m.experiment_id / "failures.csv").find("bad sample"), std::string::npos);
}

TEST(RunEnsemble, SeedsAreStableAndDistinct) {
    auto m = thermo_manifest(3);
    EXPECT_NE(m.unit_seed(0), m.unit_seed(1));
    const auto s0 = m.unit_seed(0);
    m.parameters["extra"] = 1;
    EXPECT_EQ(m.unit_seed(0), s0);  // seeds depend on id and index only
    m.experiment_id = "other";
    EXPECT_NE(m.unit_seed(0), s0);
}

TEST(RunEnsemble, ManifestRoundTrip) {
    const auto m = thermo_manifest(7);
    const RunManifest back = nlohmann::json(m).get<RunManifest>();
    EXPECT_EQ(back.experiment_id, m.experiment_id);
    EXPECT_EQ(back.master_seed, m.master_seed);
    EXPECT_EQ(back.parameters, m.parameters);
    EXPECT_EQ(back.columns, m.columns);
    EXPECT_EQ(back.unit_hash(3), m.unit_hash(3));
}

TEST(Csv, SplitHandlesQuotes) {
    const auto f = detail::split_csv_line("a,\"b,c\",\"d\"\"e\",");
    ASSERT_EQ(f.size(), 4U);
    EXPECT_EQ(f[1], "b,c");
    EXPECT_EQ(f[2], "d\"e");
    EXPECT_EQ(f[3], "");
    EXPECT_EQ(csv_escape("x,y"), "\"x,y\"");
}
