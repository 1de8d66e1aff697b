#ifndef SKLAB_REM_HPP
#define SKLAB_REM_HPP

// Random Energy Model: 2^n i.i.d. Gaussian levels of variance n/2. With this
// normalization the annealed free energy is log 2 + beta^2/4, the same as SK,
// and the entropy collapses at beta_c = 2 sqrt(log 2).

#include <cmath>
#include <cstdint>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "thermo.hpp"

namespace sklab {

struct RemInstance {
    int n = 0;
    std::vector<double> energies;
    std::uint64_t seed = 0;
    std::uint64_t sample_index = 0;
};

struct RemOptions {
    int cap = 26;
};

[[nodiscard]] inline RemInstance sample_rem(int n, std::uint64_t seed, std::uint64_t sample_index,
                                            const RemOptions& options = {}) {
    if (n < 0) throw InvalidArgument("REM level exponent must be >= 0");
    if (n > options.cap) throw CapacityError(n, options.cap);
    RemInstance inst;
    inst.n = n;
    inst.seed = seed;
    inst.sample_index = sample_index;
    inst.energies.resize(std::size_t{1} << n);
    const double sd = std::sqrt(static_cast<double>(n) / 2.0);
    Xoshiro256 rng = make_stream(mix_seed(seed ^ 0x7e3a11ULL, static_cast<std::uint64_t>(n)), sample_index);
    for (double& e : inst.energies) e = sd * rng.normal();
    return inst;
}

/// Log-sum-exp thermodynamics over the levels of one instance.
[[nodiscard]] inline std::vector<ThermoResult> rem_thermo(const RemInstance& inst, const BetaGrid& betas,
                                                          const RemOptions& options = {}) {
    if (inst.n > options.cap) throw CapacityError(inst.n, options.cap);
    if (inst.energies.size() != (std::size_t{1} << inst.n)) {
        throw InvalidArgument("REM instance must hold 2^n levels");
    }
    ThermoAccumulator acc(betas.values());
    for (double e : inst.energies) acc.add(e);
    return acc.results(inst.n);
}

struct EntropyScanRow {
    double beta = 0.0;
    EnsembleStats entropy;  ///< per-site entropy S/n
};

/// Disorder-averaged per-site entropy on a beta grid (n >= 1).
[[nodiscard]] inline std::vector<EntropyScanRow> rem_entropy_scan(int n, std::size_t samples, const BetaGrid& betas,
                                                                  std::uint64_t seed, unsigned threads = 0,
                                                                  const RemOptions& options = {}) {
    if (n < 1) throw InvalidArgument("rem_entropy_scan needs n >= 1");
    auto per_sample = parallel_map(samples, threads, [&](std::size_t i) {
        return rem_thermo(sample_rem(n, seed, i, options), betas, options);
    });
    std::vector<EntropyScanRow> rows;
    for (std::size_t b = 0; b < betas.size(); ++b) {
        std::vector<double> values;
        values.reserve(samples);
        for (const auto& thermo : per_sample) values.push_back(thermo[b].entropy / n);
        rows.push_back({betas[b], reduce_pairwise(values, EnsembleStats("rem_entropy", n, betas[b]))});
    }
    return rows;
}

/// Per-site entropy of SK on the same kind of grid, by exact enumeration.
[[nodiscard]] inline std::vector<EntropyScanRow> sk_entropy_scan(int n, std::size_t samples, const BetaGrid& betas,
                                                                 std::uint64_t seed, const EnsembleOptions& options = {}) {
    auto per_sample = parallel_map(samples, options.threads, [&](std::size_t i) {
        return enumerate_thermo(sample_disorder(n, seed, i), betas, options.enumeration);
    });
    std::vector<EntropyScanRow> rows;
    for (std::size_t b = 0; b < betas.size(); ++b) {
        std::vector<double> values;
        values.reserve(samples);
        for (const auto& thermo : per_sample) values.push_back(thermo[b].entropy / n);
        rows.push_back({betas[b], reduce_pairwise(values, EnsembleStats("sk_entropy", n, betas[b]))});
    }
    return rows;
}

struct SkRemRow {
    std::string label;  ///< "zero", "beta_c", "beta_star"
    double beta = 0.0;
    EnsembleStats sk;
    EnsembleStats rem;
};

struct SkRemComparison {
    int n = 0;
    std::vector<SkRemRow> rows;
    double beta_star = 0.0;
    double beta_c_squared = 0.0;
    /// SK s_n(beta_c) - REM s_n(beta_c) in units of the combined stderr.
    double separation_sigmas = 0.0;
    /// Asserted only for n >= 16: SK entropy exceeds REM entropy at beta_c by 3 stderr.
    bool asserted = false;
    bool pass = true;
};

[[nodiscard]] inline SkRemComparison compare_sk_rem(int n, std::size_t samples, std::uint64_t seed,
                                                    const EnsembleOptions& options = {}) {
    const auto& c = paper_constants();
    const BetaGrid betas({0.0, c.beta_c_rem, c.beta_star}, true);
    const auto sk = sk_entropy_scan(n, samples, betas, seed, options);
    const auto rem = rem_entropy_scan(n, samples, betas, seed, options.threads);
    SkRemComparison out;
    out.n = n;
    const char* labels[] = {"zero", "beta_c", "beta_star"};
    for (std::size_t b = 0; b < betas.size(); ++b) out.rows.push_back({labels[b], betas[b], sk[b].entropy, rem[b].entropy});
    out.beta_star = c.beta_star;
    out.beta_c_squared = c.beta_c_rem * c.beta_c_rem;
    const auto& at_c = out.rows[1];
    const double se = std::hypot(at_c.sk.stderr_of_mean(), at_c.rem.stderr_of_mean());
    const double diff = at_c.sk.mean - at_c.rem.mean;
    out.separation_sigmas = se > 0.0 ? diff / se : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    out.asserted = n >= 16;
    out.pass = !out.asserted || diff > 3.0 * se;
    return out;
}

}  // namespace sklab

#endif  // SKLAB_REM_HPP
