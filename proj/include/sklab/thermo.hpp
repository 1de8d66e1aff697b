#ifndef SKLAB_THERMO_HPP
#define SKLAB_THERMO_HPP

// Exact finite-size thermodynamics by enumeration.
//
// All partition sums are accumulated in log space. Energies are buffered in
// blocks; each block is reduced against its own minimum energy and then
// folded into a running (max, scaled sum) pair, so no exponential ever
// exceeds 1. Entropy comes from S = log Z + beta <H>.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "constants.hpp"
#include "enumerate.hpp"
#include "fast_exp.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "stats.hpp"

namespace sklab {

/// Strictly increasing list of inverse temperatures. Zero is only accepted
/// when explicitly allowed (diagnostics and trivial-case checks).
class BetaGrid {
public:
    BetaGrid() = default;
    explicit BetaGrid(std::vector<double> values, bool allow_zero = false) : values_(std::move(values)) {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const double b = values_[i];
            if (!std::isfinite(b) || b < 0.0 || (b == 0.0 && !allow_zero)) {
                throw ConfigError("inverse temperature " + std::to_string(b) + " is not allowed in a beta grid");
            }
            if (i > 0 && !(b > values_[i - 1])) throw ConfigError("beta grid must be strictly increasing");
        }
    }

    /// n points evenly spaced on [lo, hi], endpoints included.
    static BetaGrid linspace(double lo, double hi, std::size_t count, bool allow_zero = false) {
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i) {
            v[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        }
        return BetaGrid(std::move(v), allow_zero);
    }

    /// count points geometrically spaced on [lo, hi].
    static BetaGrid geometric(double lo, double hi, std::size_t count) {
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i) {
            v[i] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1));
        }
        return BetaGrid(std::move(v));
    }

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

private:
    std::vector<double> values_;
};

struct ThermoResult {
    int n = 0;
    double beta = 0.0;
    double log_z = 0.0;           ///< log Z (nats)
    double mean_energy = 0.0;     ///< <H> under the Gibbs measure
    double entropy = 0.0;         ///< S = log Z + beta <H> (nats)
    double max_log_weight = 0.0;  ///< max_sigma(-beta H) - log Z, <= 0
};

/// Streaming log-sum-exp of exp(-beta E) and E exp(-beta E) for several betas.
class ThermoAccumulator {
public:
    static constexpr std::size_t kBlock = 2048;

    /// Each added energy stands for `multiplicity` configurations.
    explicit ThermoAccumulator(std::span<const double> betas, double multiplicity = 1.0)
        : betas_(betas.begin(), betas.end()), log_multiplicity_(std::log(multiplicity)),
          state_(betas.size()) {
        buffer_.reserve(kBlock);
    }

    void add(double energy) {
        buffer_.push_back(energy);
        if (buffer_.size() == kBlock) flush();
    }

    void add_block(std::span<const double> energies) {
        flush();
        accumulate(energies);
    }

    [[nodiscard]] double min_energy() {
        flush();
        return min_energy_;
    }

    [[nodiscard]] std::vector<ThermoResult> results(int n) {
        flush();
        std::vector<ThermoResult> out;
        out.reserve(betas_.size());
        for (std::size_t b = 0; b < betas_.size(); ++b) {
            const auto& s = state_[b];
            ThermoResult r;
            r.n = n;
            r.beta = betas_[b];
            r.log_z = s.max + std::log(s.sum) + log_multiplicity_;
            r.mean_energy = s.energy_sum / s.sum;
            r.entropy = r.log_z + r.beta * r.mean_energy;
            r.max_log_weight = -r.beta * min_energy_ - r.log_z;
            if (!std::isfinite(r.log_z) || !std::isfinite(r.mean_energy)) {
                throw ConsistencyError("non-finite partition sum at beta=" + std::to_string(r.beta));
            }
            out.push_back(r);
        }
        return out;
    }

private:
    struct Running {
        double max = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        double energy_sum = 0.0;
    };

    void flush() {
        if (buffer_.empty()) return;
        accumulate(buffer_);
        buffer_.clear();
    }

    void accumulate(std::span<const double> energies) {
        if (energies.empty()) return;
        double block_min = energies[0];
        for (double e : energies) block_min = e < block_min ? e : block_min;
        if (!std::isfinite(lane_sum(energies))) {
            throw ConsistencyError("non-finite energy encountered during enumeration");
        }
        min_energy_ = std::min(min_energy_, block_min);
        weights_.resize(energies.size());
        weighted_.resize(energies.size());
        for (std::size_t b = 0; b < betas_.size(); ++b) {
            const double beta = betas_[b];
            const double* __restrict e = energies.data();
            double* __restrict w = weights_.data();
            double* __restrict ew = weighted_.data();
            for (std::size_t i = 0; i < energies.size(); ++i) {
                w[i] = exp_nonpositive(-beta * (e[i] - block_min));
                ew[i] = e[i] * w[i];
            }
            const double sum = lane_sum(weights_);
            const double energy_sum = lane_sum(weighted_);
            const double block_max = -beta * block_min;
            auto& s = state_[b];
            if (block_max > s.max) {
                const double rescale = std::exp(s.max - block_max);
                s.sum = s.sum * rescale + sum;
                s.energy_sum = s.energy_sum * rescale + energy_sum;
                s.max = block_max;
            } else {
                const double rescale = std::exp(block_max - s.max);
                s.sum += sum * rescale;
                s.energy_sum += energy_sum * rescale;
            }
        }
    }

    std::vector<double> betas_;
    double log_multiplicity_;
    std::vector<Running> state_;
    std::vector<double> buffer_;
    std::vector<double> weights_;
    std::vector<double> weighted_;
    double min_energy_ = std::numeric_limits<double>::infinity();
};

/// Everything one enumeration sweep yields: per-beta thermodynamics plus the
/// exact minimum energy and its first-found argmin (top spin up).
struct ExactSweepResult {
    std::vector<ThermoResult> thermo;
    double min_energy = 0.0;
    std::uint64_t argmin_bits = 0;
};

[[nodiscard]] inline ExactSweepResult exact_sweep(const Disorder& disorder, const BetaGrid& betas,
                                                  const EnumerationOptions& options = {}) {
    ThermoAccumulator acc(betas.values(), 2.0);
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t best_bits = 0;
    block_sweep(
        disorder,
        [&](std::span<const double> energies, std::uint64_t first_bits) {
            double low = energies[0];
            for (double e : energies) low = e < low ? e : low;
            if (low < best) {
                std::size_t arg = 0;
                while (!(energies[arg] == low)) ++arg;
                best = low;
                best_bits = first_bits | arg;
            }
            if (!betas.empty()) acc.add_block(energies);
        },
        options);
    if (!std::isfinite(best)) throw ConsistencyError("non-finite energy encountered during enumeration");
    ExactSweepResult out;
    out.thermo = acc.results(disorder.n());
    out.min_energy = best;
    out.argmin_bits = best_bits;
    return out;
}

/// log Z, <H>, S and the largest Gibbs weight for every beta, in one sweep.
[[nodiscard]] inline std::vector<ThermoResult> enumerate_thermo(const Disorder& disorder, const BetaGrid& betas,
                                                                const EnumerationOptions& options = {}) {
    return exact_sweep(disorder, betas, options).thermo;
}

/// (1/n) log E_J Z_n = log 2 + beta^2 (n-1) / (4n).
[[nodiscard]] inline double annealed_free_energy(int n, double beta) {
    if (n < 1) throw InvalidArgument("annealed_free_energy: n must be >= 1");
    if (beta < 0.0) throw InvalidArgument("annealed_free_energy: beta must be >= 0");
    const double nn = static_cast<double>(n);
    return std::numbers::ln2 + beta * beta * (nn - 1.0) / (4.0 * nn);
}

/// n -> infinity limit of annealed_free_energy: log 2 + beta^2 / 4.
[[nodiscard]] inline double annealed_free_energy_limit(double beta) {
    if (beta < 0.0) throw InvalidArgument("annealed_free_energy: beta must be >= 0");
    return std::numbers::ln2 + beta * beta / 4.0;
}

/// Options shared by the disorder-ensemble operations.
struct EnsembleOptions {
    EnumerationOptions enumeration{};
    unsigned threads = 0;      ///< 0 = hardware concurrency
    bool skip_failed = false;  ///< exclude failing samples instead of aborting
};

/// Per-sample values plus their pairwise-reduced statistics.
struct DisorderEnsemble {
    EnsembleStats stats;
    std::vector<double> values;  ///< in sample order; failed samples omitted
    std::size_t failed = 0;
};

/// Evaluates fn(disorder) on samples (seed, 0..samples-1) of size n.
template <class Fn>
DisorderEnsemble disorder_ensemble(int n, std::size_t samples, std::uint64_t seed, const EnsembleOptions& options,
                                   EnsembleStats key, Fn&& fn) {
    struct Outcome {
        double value = 0.0;
        bool ok = true;
    };
    auto outcomes = parallel_map(samples, options.threads, [&](std::size_t i) {
        const Disorder disorder = sample_disorder(n, seed, i);
        if (!options.skip_failed) return Outcome{fn(disorder), true};
        try {
            return Outcome{fn(disorder), true};
        } catch (const ConsistencyError&) {
            return Outcome{0.0, false};
        }
    });
    DisorderEnsemble out;
    for (const auto& o : outcomes) {
        if (o.ok) {
            out.values.push_back(o.value);
        } else {
            ++out.failed;
        }
    }
    out.stats = reduce_pairwise(out.values, key);
    return out;
}

/// Disorder average of (1/n) log Z_n(beta, J) over `samples` instances.
[[nodiscard]] inline DisorderEnsemble quenched_free_energy(int n, double beta, std::size_t samples, std::uint64_t seed,
                                                           const EnsembleOptions& options = {}) {
    if (samples < 2) throw InvalidArgument("quenched_free_energy needs at least 2 samples");
    const BetaGrid grid({beta}, true);
    return disorder_ensemble(n, samples, seed, options, EnsembleStats("free_energy", n, beta),
                             [&](const Disorder& d) {
                                 return enumerate_thermo(d, grid, options.enumeration)[0].log_z / static_cast<double>(n);
                             });
}

struct AnnealedMomentReport {
    int n = 0;
    double beta = 0.0;
    std::size_t samples = 0;
    double mc_estimate = 0.0;  ///< sample mean of Z_n(beta, J)
    double closed_form = 0.0;  ///< 2^n exp(beta^2 (n-1) / 4)
    double stderr_of_mean = 0.0;
    double z_score = 0.0;
    bool reliable = true;  ///< false when the estimator's variance is not finite
};

/// Monte-Carlo check of E_J Z_n = 2^n exp(beta^2 (n-1)/4).
[[nodiscard]] inline AnnealedMomentReport verify_annealed_moment(int n, double beta, std::size_t samples,
                                                                 std::uint64_t seed,
                                                                 const EnsembleOptions& options = {}) {
    if (samples < 2) throw InvalidArgument("verify_annealed_moment needs at least 2 samples");
    const BetaGrid grid({beta}, true);
    const auto ensemble = disorder_ensemble(n, samples, seed, options, EnsembleStats("partition_function", n, beta),
                                            [&](const Disorder& d) {
                                                return std::exp(enumerate_thermo(d, grid, options.enumeration)[0].log_z);
                                            });
    AnnealedMomentReport report;
    report.n = n;
    report.beta = beta;
    report.samples = samples;
    report.mc_estimate = ensemble.stats.mean;
    report.closed_form = std::exp(static_cast<double>(n) * std::numbers::ln2 + beta * beta * (n - 1) / 4.0);
    report.stderr_of_mean = ensemble.stats.stderr_of_mean();
    report.reliable = std::isfinite(report.mc_estimate) && std::isfinite(ensemble.stats.m2);
    const double diff = report.mc_estimate - report.closed_form;
    if (report.stderr_of_mean > 0.0) {
        report.z_score = diff / report.stderr_of_mean;
    } else {
        // Zero spread: agreement is exact or it is not.
        report.z_score = std::abs(diff) <= 1e-12 * report.closed_form ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return report;
}

/// Largest |log mu_target(sigma) - [r log mu_base(sigma) + r log Z(base) - log Z(target)]|
/// with r = target/base: the Gibbs measure at `target` as a power of the one at `base`.
[[nodiscard]] inline double functional_equation_residual(const Disorder& disorder, double target_beta,
                                                         double base_beta = 1.0,
                                                         const EnumerationOptions& options = {}) {
    const std::vector<double> pair = base_beta < target_beta ? std::vector<double>{base_beta, target_beta}
                                                             : std::vector<double>{target_beta, base_beta};
    const auto thermo = enumerate_thermo(disorder, BetaGrid(pair, true), options);
    const double log_z_base = base_beta < target_beta ? thermo[0].log_z : thermo[1].log_z;
    const double log_z_target = base_beta < target_beta ? thermo[1].log_z : thermo[0].log_z;
    const double ratio = target_beta / base_beta;
    double worst = 0.0;
    gray_sweep(
        disorder,
        [&](double e, std::uint64_t) {
            const double lhs = -target_beta * e - log_z_target;
            const double log_mu_base = -base_beta * e - log_z_base;
            const double rhs = ratio * log_mu_base + ratio * log_z_base - log_z_target;
            worst = std::max(worst, std::abs(lhs - rhs));
        },
        options);
    return worst;
}

/// log sum_sigma mu_base(sigma)^exponent, accumulated configuration by configuration.
[[nodiscard]] inline double gibbs_power_log_sum(const Disorder& disorder, double base_beta, double exponent,
                                                double log_z_base, const EnumerationOptions& options = {}) {
    double max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    gray_sweep(
        disorder,
        [&](double e, std::uint64_t) {
            const double x = exponent * (-base_beta * e - log_z_base);
            if (x > max) {
                sum = sum * std::exp(max - x) + 1.0;
                max = x;
            } else {
                sum += std::exp(x - max);
            }
        },
        options);
    return max + std::log(sum) + std::numbers::ln2;
}

/// Gibbs entropy -sum mu log mu summed configuration by configuration, as an
/// independent check on the blocked accumulation in enumerate_thermo.
[[nodiscard]] inline double gibbs_entropy(const Disorder& disorder, double beta, double log_z,
                                          const EnumerationOptions& options = {}) {
    double sum = 0.0;
    gray_sweep(
        disorder,
        [&](double e, std::uint64_t) {
            const double log_mu = -beta * e - log_z;
            sum -= std::exp(log_mu) * log_mu;
        },
        options);
    return 2.0 * sum;  // the sweep covers one configuration of each +/- pair
}

struct AlphaSample {
    double alpha = 0.0;              ///< (b*/b1) f(b1) - f(b*) for one instance
    double alpha_from_powers = 0.0;  ///< -(1/n) log sum mu_b1^(b*/b1)
    [[nodiscard]] double gap() const noexcept { return std::abs(alpha - alpha_from_powers); }
};

[[nodiscard]] inline AlphaSample alpha_sample(const Disorder& disorder, double beta_star = kBetaStar,
                                              double beta_one = 1.0,
                                              const EnumerationOptions& options = {}) {
    const auto thermo = enumerate_thermo(disorder, BetaGrid({beta_one, beta_star}), options);
    const double n = disorder.n();
    const double ratio = beta_star / beta_one;
    AlphaSample s;
    s.alpha = ratio * thermo[0].log_z / n - thermo[1].log_z / n;
    s.alpha_from_powers = -gibbs_power_log_sum(disorder, beta_one, ratio, thermo[0].log_z, options) / n;
    return s;
}

struct AlphaEstimate {
    EnsembleStats alpha;
    double max_identity_gap = 0.0;
};

/// Finite-n deviation statistic averaged over disorder, with the per-sample
/// check against the sum-of-powers form.
[[nodiscard]] inline AlphaEstimate alpha_estimate(int n, std::size_t samples, std::uint64_t seed,
                                                  const EnsembleOptions& options = {},
                                                  double beta_star = kBetaStar) {
    double max_gap = 0.0;
    auto per_sample = parallel_map(samples, options.threads, [&](std::size_t i) {
        return alpha_sample(sample_disorder(n, seed, i), beta_star, 1.0, options.enumeration);
    });
    std::vector<double> values;
    values.reserve(per_sample.size());
    for (const auto& s : per_sample) {
        values.push_back(s.alpha);
        max_gap = std::max(max_gap, s.gap());
    }
    AlphaEstimate out;
    out.alpha = reduce_pairwise(values, EnsembleStats("alpha", n, beta_star));
    out.max_identity_gap = max_gap;
    return out;
}

}  // namespace sklab

#endif  // SKLAB_THERMO_HPP
