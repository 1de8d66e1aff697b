// sklab — command-line driver for the SK spin-glass experiments.
//
//   sklab constants
//   sklab verify [--check eq2 --check eq3 ...] [--disorder file.json]
//   sklab free-energy --n 12 16 --beta beta_one beta_star --samples 200
//   sklab ground-state --n 16 20 --solver auto --samples 50
//   sklab rem --n 12 16 --beta 0.5 beta_c --compare
//   sklab figure --beta-min 0 --beta-max 4 --points 81
//   sklab extrapolate --input out/ground-state
//
// Exit codes: 0 success, 1 unexpected error, 2 configuration error,
// 3 problem size above the enumeration cap, 4 failed check.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <sklab/sklab.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sklab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitCheck = 4;

struct RunConfig {
    std::string subcommand;
    std::vector<int> n;
    std::vector<std::string> beta;  // numbers or beta_one / beta_star / beta_c
    std::size_t samples = 0;        // 0 = subcommand default
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool reproducible = false;
    std::string output_dir;  // empty = $SKLAB_OUTPUT_DIR or ./sklab-out
    std::string format = "table";

    // Ground-state solver knobs.
    std::string solver = "auto";
    int enumeration_cap = 28;
    std::uint64_t anneal_sweeps = 2000;
    std::uint64_t anneal_restarts = 32;
    double anneal_beta_start = 0.5;
    double anneal_beta_end = 5.0;
    std::uint64_t tempering_sweeps = 4000;
    std::size_t tempering_rungs = 24;
    double tempering_beta_min = 0.3;
    double tempering_beta_max = 3.0;

    // verify
    std::vector<std::string> checks;
    std::string disorder_file;
    std::size_t annealed_samples = 100000;

    // rem
    bool compare = false;

    // figure
    double beta_min = 0.0;
    double beta_max = 4.0;
    std::size_t points = 81;
    bool to_stdout = false;

    // extrapolate
    std::vector<std::string> inputs;
    std::vector<std::string> fit_points;  // n:mean:stderr
    double omega = 2.0 / 3.0;
    bool assert_bound = false;
};

void to_json(json& j, const RunConfig& c) {
    j = json{{"subcommand", c.subcommand},
             {"n", c.n},
             {"beta", c.beta},
             {"samples", c.samples},
             {"seed", c.seed},
             {"threads", c.threads},
             {"reproducible", c.reproducible},
             {"output_dir", c.output_dir},
             {"format", c.format},
             {"solver",
              {{"method", c.solver},
               {"enumeration_cap", c.enumeration_cap},
               {"anneal_sweeps", c.anneal_sweeps},
               {"anneal_restarts", c.anneal_restarts},
               {"anneal_beta_start", c.anneal_beta_start},
               {"anneal_beta_end", c.anneal_beta_end},
               {"tempering_sweeps", c.tempering_sweeps},
               {"tempering_rungs", c.tempering_rungs},
               {"tempering_beta_min", c.tempering_beta_min},
               {"tempering_beta_max", c.tempering_beta_max}}},
             {"checks", c.checks},
             {"disorder_file", c.disorder_file},
             {"annealed_samples", c.annealed_samples},
             {"compare", c.compare},
             {"figure", {{"beta_min", c.beta_min}, {"beta_max", c.beta_max}, {"points", c.points}}},
             {"inputs", c.inputs},
             {"fit_points", c.fit_points},
             {"omega", c.omega},
             {"assert_bound", c.assert_bound}};
}

// Missing keys keep their defaults, so hand-written config files can be partial.
void from_json(const json& j, RunConfig& c) {
    auto get = [&](const json& obj, const char* key, auto& field) {
        if (obj.contains(key)) obj.at(key).get_to(field);
    };
    get(j, "subcommand", c.subcommand);
    get(j, "n", c.n);
    get(j, "beta", c.beta);
    get(j, "samples", c.samples);
    get(j, "seed", c.seed);
    get(j, "threads", c.threads);
    get(j, "reproducible", c.reproducible);
    get(j, "output_dir", c.output_dir);
    get(j, "format", c.format);
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        get(s, "method", c.solver);
        get(s, "enumeration_cap", c.enumeration_cap);
        get(s, "anneal_sweeps", c.anneal_sweeps);
        get(s, "anneal_restarts", c.anneal_restarts);
        get(s, "anneal_beta_start", c.anneal_beta_start);
        get(s, "anneal_beta_end", c.anneal_beta_end);
        get(s, "tempering_sweeps", c.tempering_sweeps);
        get(s, "tempering_rungs", c.tempering_rungs);
        get(s, "tempering_beta_min", c.tempering_beta_min);
        get(s, "tempering_beta_max", c.tempering_beta_max);
    }
    get(j, "checks", c.checks);
    get(j, "disorder_file", c.disorder_file);
    get(j, "annealed_samples", c.annealed_samples);
    get(j, "compare", c.compare);
    if (j.contains("figure")) {
        const auto& f = j.at("figure");
        get(f, "beta_min", c.beta_min);
        get(f, "beta_max", c.beta_max);
        get(f, "points", c.points);
    }
    get(j, "inputs", c.inputs);
    get(j, "fit_points", c.fit_points);
    get(j, "omega", c.omega);
    get(j, "assert_bound", c.assert_bound);
}

// Thrown when a check ran and failed; main() maps it to kExitCheck.
struct CheckFailed : Error {
    using Error::Error;
};

double resolve_beta(const std::string& token) {
    const auto& c = paper_constants();
    if (token == "beta_one") return c.beta_one;
    if (token == "beta_star") return c.beta_star;
    if (token == "beta_c") return c.beta_c_rem;
    const double value = parse_double(token);
    if (!(value >= 0.0) || !std::isfinite(value)) throw ConfigError("beta must be finite and >= 0, got " + token);
    return value;
}

std::vector<double> resolve_betas(const RunConfig& cfg, std::vector<std::string> fallback) {
    const auto& tokens = cfg.beta.empty() ? fallback : cfg.beta;
    std::vector<double> out;
    for (const auto& t : tokens) out.push_back(resolve_beta(t));
    return out;
}

std::vector<int> sizes_or(const RunConfig& cfg, std::vector<int> fallback) {
    auto sizes = cfg.n.empty() ? std::move(fallback) : cfg.n;
    for (int n : sizes) {
        if (n < 1) throw ConfigError("system size must be >= 1, got " + std::to_string(n));
    }
    return sizes;
}

fs::path output_root(const RunConfig& cfg) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("SKLAB_OUTPUT_DIR"); env && *env) return env;
    return "sklab-out";
}

RunPolicy run_policy(const RunConfig& cfg) {
    RunPolicy policy;
    policy.threads = cfg.threads;
    policy.reproducible = cfg.reproducible;
    return policy;
}

std::string fmt(double v, int digits = 7) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string pm(const EnsembleStats& s) { return fmt(s.mean) + " +- " + fmt(s.stderr_of_mean(), 2); }

// ---------------------------------------------------------------- constants

int cmd_constants(const RunConfig& cfg) {
    const auto& c = paper_constants();
    const std::vector<std::pair<const char*, double>> rows = {
        {"beta_star", c.beta_star},
        {"beta_one", c.beta_one},
        {"beta_c", c.beta_c_rem},
        {"f_one_limit", c.f_one_limit},
        {"f_star_claimed", c.f_star_claimed},
        {"annealed_at_star", c.annealed_at_star},
        {"epsilon_bound", c.epsilon_bound},
        {"spherical_bound", c.spherical_bound},
        {"simulated_ground_state", c.simulated_ground_state},
    };
    if (cfg.format == "json") {
        json j;
        for (const auto& [name, value] : rows) j["constants"][name] = value;
        for (const auto& id : constant_identities()) j["identities"].push_back({{"name", id.name}, {"residual", id.residual()}});
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }
    std::printf("%-24s %s\n", "constant", "value");
    for (const auto& [name, value] : rows) std::printf("%-24s %s\n", name, fmt(value).c_str());
    std::printf("\n%-48s %s\n", "identity", "residual");
    for (const auto& id : constant_identities()) std::printf("%-48s %.1e\n", id.name.c_str(), id.residual());
    return kExitOk;
}

// ---------------------------------------------------------------- verify

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

CheckResult check_crossing_algebra() {
    const auto& c = paper_constants();
    const double lhs = c.beta_star * (std::numbers::ln2 + 0.25);
    const double rhs = std::numbers::ln2 + c.beta_star * c.beta_star / 4.0;
    const double gap = std::abs(lhs - rhs);
    return {"eq2", gap < 1e-12, "|b*(log2+1/4) - (log2+b*^2/4)| = " + fmt(gap, 3)};
}

CheckResult check_root() {
    const auto roots = solve_beta_star();
    const double gap = std::max(std::abs(roots[0] - 1.0), std::abs(roots[1] - kBetaStar));
    return {"root", gap < 1e-9, "roots " + fmt(roots[0], 12) + ", " + fmt(roots[1], 12) + " (gap " + fmt(gap, 3) + ")"};
}

CheckResult check_identities() {
    double worst = 0.0;
    for (const auto& id : constant_identities()) worst = std::max(worst, id.residual());
    return {"constants", worst < 1e-12, "max identity residual " + fmt(worst, 3)};
}

std::vector<Disorder> verify_instances(const RunConfig& cfg, const std::vector<int>& sizes, std::size_t per_size) {
    std::vector<Disorder> out;
    if (!cfg.disorder_file.empty()) out.push_back(load_disorder(cfg.disorder_file));
    for (int n : sizes) {
        for (std::size_t i = 0; i < per_size; ++i) out.push_back(sample_disorder(n, cfg.seed, i));
    }
    return out;
}

CheckResult check_functional_equation(const std::vector<Disorder>& instances, const EnumerationOptions& opts) {
    double worst = 0.0;
    for (const auto& d : instances) worst = std::max(worst, functional_equation_residual(d, kBetaStar, 1.0, opts));
    return {"eq3", worst < 1e-12,
            "max log-space residual " + fmt(worst, 3) + " over " + std::to_string(instances.size()) + " instances"};
}

CheckResult check_thermo(const std::vector<Disorder>& instances, const EnumerationOptions& opts) {
    double worst = 0.0;
    for (const auto& d : instances) {
        const auto thermo = enumerate_thermo(d, BetaGrid({1.0, kBetaStar}), opts);
        for (const auto& t : thermo) {
            const double s = gibbs_entropy(d, t.beta, t.log_z, opts);
            worst = std::max(worst, std::abs(t.log_z - s + t.beta * t.mean_energy) / std::abs(t.log_z));
        }
    }
    return {"thermo", worst < 1e-9, "max |log Z - S + b<H>| / |log Z| = " + fmt(worst, 3)};
}

CheckResult check_jensen(const RunConfig& cfg, const std::vector<int>& sizes, std::size_t samples,
                         const EnsembleOptions& opts) {
    bool ok = true;
    std::string detail;
    for (int n : sizes) {
        const auto q = quenched_free_energy(n, 1.0, samples, cfg.seed, opts).stats;
        const double annealed = annealed_free_energy(n, 1.0);
        ok = ok && q.mean <= annealed + 3.0 * q.stderr_of_mean();
        detail += "n=" + std::to_string(n) + ": " + pm(q) + " <= " + fmt(annealed) + "; ";
    }
    return {"jensen", ok, detail};
}

CheckResult check_annealed(const RunConfig& cfg, const EnsembleOptions& opts) {
    bool ok = true;
    std::string detail;
    for (const auto& [n, beta] : std::vector<std::pair<int, double>>{{2, 1.0}, {8, 0.5}}) {
        const auto r = verify_annealed_moment(n, beta, cfg.annealed_samples, cfg.seed, opts);
        ok = ok && r.reliable && std::abs(r.z_score) <= 3.0;
        detail += "n=" + std::to_string(n) + " b=" + fmt(beta, 3) + ": " + fmt(r.mc_estimate) + " vs " +
                  fmt(r.closed_form) + " (z=" + fmt(r.z_score, 3) + "); ";
    }
    return {"annealed", ok, detail};
}

int cmd_verify(const RunConfig& cfg) {
    static const std::vector<std::string> all = {"eq2", "root", "constants", "eq3", "thermo", "jensen", "annealed"};
    const auto& checks = cfg.checks.empty() ? all : cfg.checks;
    for (const auto& c : checks) {
        if (std::find(all.begin(), all.end(), c) == all.end()) throw ConfigError("unknown check '" + c + "'");
    }
    const auto sizes = sizes_or(cfg, {8, 12});
    EnsembleOptions opts;
    opts.threads = cfg.threads;
    opts.enumeration.cap = cfg.enumeration_cap;
    for (int n : sizes) check_enumeration_cap(n, opts.enumeration);

    // Instances are built lazily: a corrupted --disorder file must be reported
    // as a named integrity failure even when only identity checks were asked for.
    std::optional<std::vector<Disorder>> instances;
    auto get_instances = [&]() -> const std::vector<Disorder>& {
        if (!instances) instances = verify_instances(cfg, sizes, cfg.samples ? cfg.samples : 20);
        return *instances;
    };

    std::vector<CheckResult> results;
    if (!cfg.disorder_file.empty()) {
        try {
            (void)load_disorder(cfg.disorder_file);
            results.push_back({"integrity", true, cfg.disorder_file});
        } catch (const IntegrityError& e) {
            results.push_back({"integrity", false, e.what()});
        }
    }
    const bool integrity_ok = results.empty() || results.front().pass;
    for (const auto& c : checks) {
        if (c == "eq2") results.push_back(check_crossing_algebra());
        if (c == "root") results.push_back(check_root());
        if (c == "constants") results.push_back(check_identities());
        if ((c == "eq3" || c == "thermo") && !integrity_ok) {
            results.push_back({c, false, "skipped: disorder file failed its integrity check"});
            continue;
        }
        if (c == "eq3") results.push_back(check_functional_equation(get_instances(), opts.enumeration));
        if (c == "thermo") results.push_back(check_thermo(get_instances(), opts.enumeration));
        if (c == "jensen") results.push_back(check_jensen(cfg, sizes, cfg.samples ? cfg.samples : 200, opts));
        if (c == "annealed") results.push_back(check_annealed(cfg, opts));
    }

    bool all_pass = true;
    for (const auto& r : results) all_pass = all_pass && r.pass;
    if (cfg.format == "json") {
        json j{{"pass", all_pass}, {"checks", json::array()}};
        for (const auto& r : results) j["checks"].push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        std::cout << j.dump(2) << "\n";
    } else {
        for (const auto& r : results) {
            std::printf("%-4s %-10s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        }
    }
    if (!all_pass) {
        std::string failed;
        for (const auto& r : results) {
            if (!r.pass) failed += (failed.empty() ? "" : ", ") + r.name;
        }
        throw CheckFailed("failed checks: " + failed);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- free-energy

void print_manifest_location(const RunOutcome& out) {
    std::printf("records: %s\n", (out.directory / "records.csv").string().c_str());
    std::printf("summary: %s\n", (out.directory / "summary.json").string().c_str());
}

int cmd_free_energy(const RunConfig& cfg) {
    const auto sizes = sizes_or(cfg, {12});
    const auto betas = resolve_betas(cfg, {"beta_one", "beta_star"});
    const std::size_t samples = cfg.samples ? cfg.samples : 50;
    EnumerationOptions enumeration;
    enumeration.cap = cfg.enumeration_cap;
    for (int n : sizes) check_enumeration_cap(n, enumeration);

    RunManifest manifest;
    manifest.experiment_id = "free-energy";
    manifest.master_seed = cfg.seed;
    manifest.parameters = {{"n", sizes}, {"beta", betas}, {"samples", samples}};
    manifest.units = samples;
    manifest.columns = {"n", "beta", "sample_index", "log_z", "free_energy", "energy_density", "entropy"};
    manifest.observables = {"free_energy", "entropy"};

    const BetaGrid grid(betas, true);
    const auto out = run_ensemble(
        manifest, output_root(cfg),
        [&](std::uint64_t, std::uint64_t index) {
            std::vector<Row> rows;
            for (int n : sizes) {
                const auto thermo = enumerate_thermo(sample_disorder(n, cfg.seed, index), grid, enumeration);
                for (const auto& t : thermo) {
                    rows.push_back({std::int64_t{n}, t.beta, static_cast<std::int64_t>(index), t.log_z, t.log_z / n,
                                    t.mean_energy / n, t.entropy / n});
                }
            }
            return rows;
        },
        run_policy(cfg));

    const auto& c = paper_constants();
    std::printf("%4s %10s %26s %12s %8s\n", "n", "beta", "f_n (mean +- stderr)", "annealed", "jensen");
    for (int n : sizes) {
        for (double b : betas) {
            const auto* s = out.find("free_energy", n, b);
            if (!s) continue;
            const double annealed = annealed_free_energy(n, b);
            std::printf("%4d %10s %26s %12s %8s\n", n, fmt(b).c_str(), pm(*s).c_str(), fmt(annealed).c_str(),
                        s->mean < annealed ? "holds" : "VIOLATED");
        }
    }
    for (int n : sizes) {
        const auto* s = out.find("free_energy", n, c.beta_star);
        if (!s) continue;
        std::printf("[reported] n=%d f_n(beta_star) = %s; claimed limit %s (not asserted), distance %s\n", n,
                    pm(*s).c_str(), fmt(c.f_star_claimed).c_str(), fmt(s->mean - c.f_star_claimed, 3).c_str());
    }
    print_manifest_location(out);
    return kExitOk;
}

// ---------------------------------------------------------------- ground-state

SolverConfig solver_config(const RunConfig& cfg, int n) {
    SolverConfig sc;
    sc.threads = 1;  // units already run in parallel
    sc.enumeration.cap = cfg.enumeration_cap;
    if (cfg.solver == "auto") {
        sc.method = n <= cfg.enumeration_cap ? SolverMethod::exact : SolverMethod::tempering;
    } else {
        sc.method = parse_solver_method(cfg.solver);
    }
    sc.anneal.sweeps = cfg.anneal_sweeps;
    sc.anneal.restarts = cfg.anneal_restarts;
    sc.anneal.beta_start = cfg.anneal_beta_start;
    sc.anneal.beta_end = cfg.anneal_beta_end;
    sc.anneal.validate();
    if (cfg.tempering_rungs < 2 || !(cfg.tempering_beta_min > 0.0) || !(cfg.tempering_beta_max > cfg.tempering_beta_min)) {
        throw ConfigError("tempering ladder needs >= 2 rungs and 0 < beta_min < beta_max");
    }
    sc.tempering.ladder = BetaGrid::geometric(cfg.tempering_beta_min, cfg.tempering_beta_max, cfg.tempering_rungs);
    sc.tempering.sweeps = cfg.tempering_sweeps;
    if (sc.method == SolverMethod::exact) check_enumeration_cap(n, sc.enumeration);
    return sc;
}

int cmd_ground_state(const RunConfig& cfg) {
    const auto sizes = sizes_or(cfg, {16});
    const std::size_t samples = cfg.samples ? cfg.samples : 50;
    std::map<int, SolverConfig> solvers;
    for (int n : sizes) solvers[n] = solver_config(cfg, n);

    RunManifest manifest;
    manifest.experiment_id = "ground-state";
    manifest.master_seed = cfg.seed;
    json solver_params = json::object();
    for (const auto& [n, sc] : solvers) solver_params[std::to_string(n)] = std::string(to_string(sc.method));
    manifest.parameters = {{"n", sizes}, {"samples", samples}, {"solver", solver_params}, {"config", json(cfg)["solver"]}};
    manifest.units = samples;
    manifest.columns = {"n", "sample_index", "method", "energy", "density", "proposals"};
    manifest.observables = {"density"};

    const auto out = run_ensemble(
        manifest, output_root(cfg),
        [&](std::uint64_t, std::uint64_t index) {
            std::vector<Row> rows;
            for (int n : sizes) {
                const auto r = solve_ground_state(sample_disorder(n, cfg.seed, index), solvers.at(n), cfg.seed);
                rows.push_back({std::int64_t{n}, static_cast<std::int64_t>(index), std::string(to_string(r.method)),
                                r.energy, r.density, static_cast<std::int64_t>(r.flips_used)});
            }
            return rows;
        },
        run_policy(cfg));

    std::printf("%4s %10s %26s\n", "n", "method", "density (mean +- stderr)");
    for (int n : sizes) {
        if (const auto* s = out.find("density", n)) {
            std::printf("%4d %10s %26s\n", n, std::string(to_string(solvers.at(n).method)).c_str(), pm(*s).c_str());
        }
    }
    std::printf("[reported] quoted simulation value for the limit: %s\n",
                fmt(paper_constants().simulated_ground_state).c_str());
    print_manifest_location(out);
    return kExitOk;
}

// ---------------------------------------------------------------- rem

int cmd_rem(const RunConfig& cfg) {
    const auto sizes = sizes_or(cfg, {12, 16});
    const auto betas = resolve_betas(cfg, {"0.5", "beta_c", "beta_star"});
    const std::size_t samples = cfg.samples ? cfg.samples : 50;
    RemOptions rem_options;
    for (int n : sizes) {
        if (n > rem_options.cap) throw CapacityError(n, rem_options.cap);
    }

    RunManifest manifest;
    manifest.experiment_id = "rem";
    manifest.master_seed = cfg.seed;
    manifest.parameters = {{"n", sizes}, {"beta", betas}, {"samples", samples}};
    manifest.units = samples;
    manifest.columns = {"n", "beta", "sample_index", "free_energy", "entropy"};
    manifest.observables = {"free_energy", "entropy"};

    const BetaGrid grid(betas, true);
    const auto out = run_ensemble(
        manifest, output_root(cfg),
        [&](std::uint64_t, std::uint64_t index) {
            std::vector<Row> rows;
            for (int n : sizes) {
                for (const auto& t : rem_thermo(sample_rem(n, cfg.seed, index, rem_options), grid, rem_options)) {
                    rows.push_back({std::int64_t{n}, t.beta, static_cast<std::int64_t>(index), t.log_z / n, t.entropy / n});
                }
            }
            return rows;
        },
        run_policy(cfg));

    std::printf("%4s %10s %26s\n", "n", "beta", "REM s_n (mean +- stderr)");
    for (int n : sizes) {
        for (double b : betas) {
            if (const auto* s = out.find("entropy", n, b)) std::printf("%4d %10s %26s\n", n, fmt(b).c_str(), pm(*s).c_str());
        }
    }
    if (cfg.compare) {
        EnsembleOptions opts;
        opts.threads = cfg.threads;
        opts.enumeration.cap = cfg.enumeration_cap;
        bool ok = true;
        std::printf("\n%4s %10s %24s %24s\n", "n", "point", "SK s_n", "REM s_n");
        for (int n : sizes) {
            check_enumeration_cap(n, opts.enumeration);
            const auto cmp = compare_sk_rem(n, samples, cfg.seed, opts);
            for (const auto& row : cmp.rows) {
                std::printf("%4d %10s %24s %24s\n", n, row.label.c_str(), pm(row.sk).c_str(), pm(row.rem).c_str());
            }
            std::printf("     separation at beta_c: %s sigma [%s%s]\n", fmt(cmp.separation_sigmas, 3).c_str(),
                        cmp.asserted ? "asserted" : "reported", cmp.asserted ? (cmp.pass ? ", pass" : ", FAIL") : "");
            ok = ok && cmp.pass;
        }
        if (!ok) throw CheckFailed("SK entropy does not exceed REM entropy at beta_c");
    }
    print_manifest_location(out);
    return kExitOk;
}

// ---------------------------------------------------------------- figure

int cmd_figure(const RunConfig& cfg) {
    if (cfg.points < 2 || !(cfg.beta_max > cfg.beta_min) || cfg.beta_min < 0.0) {
        throw ConfigError("figure grid needs >= 2 points and 0 <= beta_min < beta_max");
    }
    std::vector<double> betas(cfg.points);
    for (std::size_t i = 0; i < cfg.points; ++i) {
        betas[i] = cfg.beta_min + (cfg.beta_max - cfg.beta_min) * static_cast<double>(i) / static_cast<double>(cfg.points - 1);
    }
    std::string tsv = "beta\tannealed\tlinear\tmarker\n";
    for (const auto& row : emit_figure_data(betas)) {
        tsv += format_double(row.beta) + "\t" + format_double(row.annealed) + "\t" + format_double(row.linear) + "\t" +
               row.marker + "\n";
    }
    if (cfg.to_stdout) {
        std::cout << tsv;
        return kExitOk;
    }
    const auto path = output_root(cfg) / "figure" / "figure.tsv";
    fs::create_directories(path.parent_path());
    write_text_file_atomic(path, tsv);
    std::printf("figure: %s\n", path.string().c_str());
    return kExitOk;
}

// ---------------------------------------------------------------- extrapolate

std::vector<DensityPoint> collect_points(const RunConfig& cfg) {
    std::vector<DensityPoint> points;
    for (const auto& input : cfg.inputs) {
        fs::path path = input;
        if (fs::is_directory(path)) path /= "summary.json";
        json summary;
        try {
            summary = json::parse(read_text_file(path));
        } catch (const json::parse_error& e) {
            throw ConfigError("cannot parse " + path.string() + ": " + e.what());
        }
        for (const auto& s : summary.at("stats")) {
            if (s.at("observable") == "density") {
                points.push_back({s.at("n").get<int>(), s.at("mean").get<double>(), s.at("stderr").get<double>()});
            }
        }
    }
    for (const auto& text : cfg.fit_points) {
        const auto a = text.find(':');
        const auto b = text.find(':', a == std::string::npos ? a : a + 1);
        if (a == std::string::npos || b == std::string::npos) throw ConfigError("fit point must be n:mean:stderr, got " + text);
        points.push_back({static_cast<int>(parse_double(text.substr(0, a))), parse_double(text.substr(a + 1, b - a - 1)),
                          parse_double(text.substr(b + 1))});
    }
    if (points.empty()) throw ConfigError("extrapolate needs --input run directories or --point n:mean:stderr");
    return points;
}

int cmd_extrapolate(const RunConfig& cfg) {
    ExtrapolationFit fit;
    try {
        fit = extrapolate_density(collect_points(cfg), cfg.omega);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    const auto bound = check_paper_bound(fit);

    json j{{"omega", fit.omega},
           {"intercept", fit.intercept},
           {"intercept_stderr", fit.intercept_stderr},
           {"slope", fit.slope},
           {"slope_stderr", fit.slope_stderr},
           {"chi2", fit.chi2},
           {"residual_norm", fit.residual_norm},
           {"weighted", fit.weighted},
           {"bound", bound.bound},
           {"bound_pass", bound.pass},
           {"simulated_reference", bound.simulated}};
    for (const auto& p : fit.points) j["points"].push_back({{"n", p.n}, {"mean", p.mean}, {"stderr", p.stderr_of_mean}});
    const auto path = output_root(cfg) / "extrapolate" / "fit.json";
    fs::create_directories(path.parent_path());
    write_text_file_atomic(path, j.dump(2) + "\n");

    if (cfg.format == "json") {
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("%4s %14s %12s %12s\n", "n", "mean", "stderr", "fit");
        for (const auto& p : fit.points) {
            std::printf("%4d %14s %12s %12s\n", p.n, fmt(p.mean).c_str(), fmt(p.stderr_of_mean, 2).c_str(),
                        fmt(fit.predict(p.n)).c_str());
        }
        std::printf("intercept  %s +- %s (omega %s, chi2 %s)\n", fmt(fit.intercept).c_str(),
                    fmt(fit.intercept_stderr, 2).c_str(), fmt(fit.omega, 4).c_str(), fmt(fit.chi2, 4).c_str());
        std::printf("[%s] intercept >= %s - 3 stderr: %s\n", cfg.assert_bound ? "asserted" : "reported",
                    fmt(bound.bound).c_str(), bound.pass ? "yes" : "no");
        std::printf("[reported] quoted simulation value %s, distance %s\n", fmt(bound.simulated).c_str(),
                    fmt(bound.distance_to_simulated, 3).c_str());
        std::printf("fit: %s\n", path.string().c_str());
    }
    if (cfg.assert_bound && !bound.pass) throw CheckFailed("extrapolated intercept is below the bound");
    return kExitOk;
}

// ---------------------------------------------------------------- main

std::optional<std::string> find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return std::nullopt;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--n", cfg.n, "System sizes");
    sub->add_option("--samples", cfg.samples, "Disorder samples per size");
    sub->add_option("--enumeration-cap", cfg.enumeration_cap, "Largest n handled by exhaustive enumeration");
}

int run(int argc, char** argv) {
    RunConfig cfg;
    std::string config_path;
    std::string write_config;
    if (const auto path = find_config_arg(argc, argv)) {
        try {
            cfg = json::parse(read_text_file(*path)).get<RunConfig>();
        } catch (const json::exception& e) {
            throw ConfigError("bad config file " + *path + ": " + e.what());
        }
    }

    CLI::App app{"Exact and heuristic numerics for the Sherrington-Kirkpatrick spin glass"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", config_path, "JSON run configuration; flags override its values");
    app.add_option("--write-config", write_config, "Write the resolved configuration to this file");
    app.add_option("--seed", cfg.seed, "Master seed");
    app.add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
    app.add_option("--output-dir", cfg.output_dir, "Output root (default $SKLAB_OUTPUT_DIR or ./sklab-out)");
    app.add_flag("--reproducible", cfg.reproducible, "Fixed-order pairwise reductions");
    app.add_option("--format", cfg.format, "table or json")->check(CLI::IsMember({"table", "json"}));

    auto* constants = app.add_subcommand("constants", "Print the derived constants and their identities");

    auto* verify = app.add_subcommand("verify", "Run the identity suite");
    add_common(verify, cfg);
    verify->add_option("--check", cfg.checks, "eq2, root, constants, eq3, thermo, jensen, annealed (default: all)");
    verify->add_option("--disorder", cfg.disorder_file, "Disorder record to include in the checks");
    verify->add_option("--annealed-samples", cfg.annealed_samples, "Samples for the annealed-moment check");

    auto* free_energy = app.add_subcommand("free-energy", "Quenched free energy by exact enumeration");
    add_common(free_energy, cfg);
    free_energy->add_option("--beta", cfg.beta, "Inverse temperatures or beta_one/beta_star/beta_c");

    auto* ground = app.add_subcommand("ground-state", "Ground-state density ensembles");
    add_common(ground, cfg);
    ground->add_option("--solver", cfg.solver, "auto, exact, annealing or tempering")
        ->check(CLI::IsMember({"auto", "exact", "annealing", "tempering"}));
    ground->add_option("--anneal-sweeps", cfg.anneal_sweeps);
    ground->add_option("--anneal-restarts", cfg.anneal_restarts);
    ground->add_option("--anneal-beta-start", cfg.anneal_beta_start);
    ground->add_option("--anneal-beta-end", cfg.anneal_beta_end);
    ground->add_option("--tempering-sweeps", cfg.tempering_sweeps);
    ground->add_option("--tempering-rungs", cfg.tempering_rungs);
    ground->add_option("--tempering-beta-min", cfg.tempering_beta_min);
    ground->add_option("--tempering-beta-max", cfg.tempering_beta_max);

    auto* rem = app.add_subcommand("rem", "Random energy model entropy and the SK comparison");
    add_common(rem, cfg);
    rem->add_option("--beta", cfg.beta, "Inverse temperatures or beta_one/beta_star/beta_c");
    rem->add_flag("--compare", cfg.compare, "Compare against SK entropy at 0, beta_c and beta_star");

    auto* figure = app.add_subcommand("figure", "Annealed curve and the line through the origin as TSV");
    figure->add_option("--beta-min", cfg.beta_min);
    figure->add_option("--beta-max", cfg.beta_max);
    figure->add_option("--points", cfg.points);
    figure->add_flag("--stdout", cfg.to_stdout, "Print the TSV instead of writing it");

    auto* extrapolate = app.add_subcommand("extrapolate", "Fit density(n) = e0 + a n^-omega");
    extrapolate->add_option("--input", cfg.inputs, "Ground-state run directories or summary.json files");
    extrapolate->add_option("--point", cfg.fit_points, "Extra point n:mean:stderr");
    extrapolate->add_option("--omega", cfg.omega);
    extrapolate->add_flag("--assert-bound", cfg.assert_bound, "Fail when the intercept is below the bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        (void)app.exit(e);
        return kExitConfig;
    }

    for (auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();
    if (!write_config.empty()) write_text_file_atomic(write_config, json(cfg).dump(2) + "\n");

    if (constants->parsed()) return cmd_constants(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    if (free_energy->parsed()) return cmd_free_energy(cfg);
    if (ground->parsed()) return cmd_ground_state(cfg);
    if (rem->parsed()) return cmd_rem(cfg);
    if (figure->parsed()) return cmd_figure(cfg);
    if (extrapolate->parsed()) return cmd_extrapolate(cfg);
    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CheckFailed& e) {
        std::cerr << "check failure: " << e.what() << "\n";
        return kExitCheck;
    } catch (const IntegrityError& e) {
        std::cerr << "check failure: " << e.what() << "\n";
        return kExitCheck;
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UnitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
}
