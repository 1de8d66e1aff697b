#ifndef SKLAB_GROUND_STATE_HPP
#define SKLAB_GROUND_STATE_HPP

// Ground-state energies: exhaustive minimum for small n, simulated annealing
// and parallel tempering for large n. Heuristic results are upper bounds on
// the true minimum by construction (they report an energy they visited).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "enumerate.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "thermo.hpp"

namespace sklab {

enum class SolverMethod { exact, annealing, tempering };

[[nodiscard]] inline std::string_view to_string(SolverMethod m) noexcept {
    switch (m) {
        case SolverMethod::exact: return "exact";
        case SolverMethod::annealing: return "annealing";
        case SolverMethod::tempering: return "tempering";
    }
    return "unknown";
}

[[nodiscard]] inline SolverMethod parse_solver_method(std::string_view text) {
    if (text == "exact") return SolverMethod::exact;
    if (text == "annealing" || text == "anneal") return SolverMethod::annealing;
    if (text == "tempering") return SolverMethod::tempering;
    throw ConfigError("unknown solver method '" + std::string(text) + "'");
}

struct GroundStateResult {
    int n = 0;
    double energy = 0.0;   ///< min H found
    double density = 0.0;  ///< energy / n
    SpinConfig argmin{1};
    SolverMethod method = SolverMethod::exact;
    std::uint64_t restarts_used = 0;
    std::uint64_t flips_used = 0;  ///< single-spin-flip proposals evaluated (configurations for exact)
};

namespace detail {

inline GroundStateResult finish_result(const Disorder& disorder, SpinConfig argmin, SolverMethod method,
                                       std::uint64_t restarts, std::uint64_t flips) {
    GroundStateResult r;
    r.n = disorder.n();
    r.energy = hamiltonian(argmin, disorder);
    r.density = r.energy / static_cast<double>(r.n);
    r.argmin = std::move(argmin);
    r.method = method;
    r.restarts_used = restarts;
    r.flips_used = flips;
    return r;
}

/// Single-spin-flip walker over dense couplings; spins and fields as doubles.
class Walker {
public:
    explicit Walker(const DenseCouplings& couplings)
        : couplings_(&couplings), spins_(static_cast<std::size_t>(couplings.stride()), 0.0),
          fields_(static_cast<std::size_t>(couplings.stride()), 0.0) {}

    void randomize(Xoshiro256& rng) {
        for (int i = 0; i < n(); ++i) spins_[static_cast<std::size_t>(i)] = (rng() >> 63) ? -1.0 : 1.0;
        rebuild();
    }

    void assign(std::span<const double> spins) {
        std::copy(spins.begin(), spins.end(), spins_.begin());
        rebuild();
    }

    void rebuild() {
        double twice = 0.0;
        for (int i = 0; i < n(); ++i) {
            const double* row = couplings_->row(i);
            double h = 0.0;
            for (int j = 0; j < n(); ++j) h += row[j] * spins_[static_cast<std::size_t>(j)];
            fields_[static_cast<std::size_t>(i)] = h;
            twice += spins_[static_cast<std::size_t>(i)] * h;
        }
        energy_ = -0.5 * couplings_->scale() * twice;
        flips_since_rebuild_ = 0;
    }

    [[nodiscard]] int n() const noexcept { return couplings_->n(); }
    [[nodiscard]] double energy() const noexcept { return energy_; }
    [[nodiscard]] std::span<const double> spins() const noexcept {
        return std::span<const double>(spins_).first(static_cast<std::size_t>(n()));
    }

    [[nodiscard]] double delta(int k) const noexcept {
        return 2.0 * couplings_->scale() * spins_[static_cast<std::size_t>(k)] * fields_[static_cast<std::size_t>(k)];
    }

    void flip(int k, double delta_energy) noexcept {
        const double old_spin = spins_[static_cast<std::size_t>(k)];
        const double c = -2.0 * old_spin;
        const double* row = couplings_->row(k);
        double* h = fields_.data();
        const int stride = couplings_->stride();
        for (int j = 0; j < stride; ++j) h[j] += c * row[j];
        spins_[static_cast<std::size_t>(k)] = -old_spin;
        energy_ += delta_energy;
        if (++flips_since_rebuild_ >= kCacheRebuildInterval) rebuild();
    }

    /// One Metropolis sweep in site order; returns proposals made.
    template <class OnImprove>
    std::uint64_t metropolis_sweep(double beta, Xoshiro256& rng, OnImprove&& on_energy) {
        for (int k = 0; k < n(); ++k) {
            const double d = delta(k);
            if (d <= 0.0 || rng.uniform() < std::exp(-beta * d)) {
                flip(k, d);
                if (d < 0.0) on_energy(*this);
            }
        }
        return static_cast<std::uint64_t>(n());
    }

    /// Zero-temperature descent to a local minimum; returns proposals made.
    std::uint64_t quench() {
        std::uint64_t proposals = 0;
        bool improved = true;
        while (improved) {
            improved = false;
            for (int k = 0; k < n(); ++k) {
                ++proposals;
                const double d = delta(k);
                if (d < 0.0) {
                    flip(k, d);
                    improved = true;
                }
            }
        }
        return proposals;
    }

private:
    const DenseCouplings* couplings_;
    std::vector<double> spins_;
    std::vector<double> fields_;
    double energy_ = 0.0;
    std::uint64_t flips_since_rebuild_ = 0;
};

/// Lowest configuration seen so far.
struct BestTracker {
    double energy = std::numeric_limits<double>::infinity();
    std::vector<double> spins;

    void offer(const Walker& w) {
        if (w.energy() < energy) {
            energy = w.energy();
            spins.assign(w.spins().begin(), w.spins().end());
        }
    }

    [[nodiscard]] SpinConfig config() const {
        SpinConfig s(static_cast<int>(spins.size()));
        for (std::size_t i = 0; i < spins.size(); ++i) {
            if (spins[i] < 0.0) s.toggle_bit(static_cast<int>(i));
        }
        return s;
    }
};

}  // namespace detail

/// Exhaustive minimum; the argmin has its top spin up (its global flip is degenerate).
[[nodiscard]] inline GroundStateResult exact_ground_state(const Disorder& disorder,
                                                          const EnumerationOptions& options = {}) {
    const auto sweep = exact_sweep(disorder, BetaGrid{}, options);
    return detail::finish_result(disorder, SpinConfig::from_word(disorder.n(), sweep.argmin_bits), SolverMethod::exact,
                                 0, std::uint64_t{1} << (disorder.n() - 1));
}

struct AnnealSchedule {
    double beta_start = 0.5;
    double beta_end = 5.0;
    std::uint64_t sweeps = 2000;
    std::uint64_t restarts = 32;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(beta_start > 0.0) || !(beta_end > beta_start)) {
            throw ConfigError("annealing schedule needs 0 < beta_start < beta_end");
        }
        if (sweeps < 1) throw ConfigError("annealing schedule needs at least one sweep");
        if (restarts < 1) throw ConfigError("annealing schedule needs at least one restart");
    }

    /// Inverse temperature at sweep s of a geometric ramp.
    [[nodiscard]] double beta_at(std::uint64_t s) const {
        if (sweeps == 1) return beta_end;
        const double t = static_cast<double>(s) / static_cast<double>(sweeps - 1);
        return beta_start * std::pow(beta_end / beta_start, t);
    }
};

/// Best energy over independent restarts of Metropolis annealing.
[[nodiscard]] inline GroundStateResult anneal_ground_state(const Disorder& disorder, const AnnealSchedule& schedule) {
    schedule.validate();
    const DenseCouplings couplings(disorder);
    detail::BestTracker best;
    std::uint64_t proposals = 0;
    for (std::uint64_t r = 0; r < schedule.restarts; ++r) {
        Xoshiro256 rng = make_stream(schedule.seed, r);
        detail::Walker walker(couplings);
        walker.randomize(rng);
        best.offer(walker);
        auto track = [&](const detail::Walker& w) { best.offer(w); };
        for (std::uint64_t s = 0; s < schedule.sweeps; ++s) {
            proposals += walker.metropolis_sweep(schedule.beta_at(s), rng, track);
        }
        proposals += walker.quench();
        best.offer(walker);
    }
    return detail::finish_result(disorder, best.config(), SolverMethod::annealing, schedule.restarts, proposals);
}

struct TemperingOptions {
    BetaGrid ladder = BetaGrid::geometric(0.3, 3.0, 24);
    std::uint64_t sweeps = 4000;
    std::uint64_t seed = 0;
};

/// Parallel tempering: one Metropolis walker per rung, adjacent swaps accepted
/// with min(1, exp((b_i - b_j)(E_i - E_j))). Returns the best energy seen.
[[nodiscard]] inline GroundStateResult tempering_ground_state(const Disorder& disorder, const BetaGrid& ladder,
                                                              std::uint64_t sweeps, std::uint64_t seed) {
    if (ladder.size() < 2) throw ConfigError("parallel tempering needs a ladder with at least two rungs");
    if (sweeps < 1) throw ConfigError("parallel tempering needs at least one sweep");
    const DenseCouplings couplings(disorder);
    const std::size_t rungs = ladder.size();
    Xoshiro256 swap_rng = make_stream(seed, rungs);
    std::vector<Xoshiro256> rngs;
    std::vector<detail::Walker> walkers;
    std::vector<std::size_t> walker_at(rungs);  // rung -> walker
    for (std::size_t r = 0; r < rungs; ++r) {
        rngs.push_back(make_stream(seed, r));
        walkers.emplace_back(couplings);
        walkers.back().randomize(rngs.back());
        walker_at[r] = r;
    }

    detail::BestTracker best;
    for (const auto& w : walkers) best.offer(w);
    auto track = [&](const detail::Walker& w) { best.offer(w); };
    std::uint64_t proposals = 0;
    for (std::uint64_t s = 0; s < sweeps; ++s) {
        for (std::size_t r = 0; r < rungs; ++r) {
            const std::size_t w = walker_at[r];
            proposals += walkers[w].metropolis_sweep(ladder[r], rngs[w], track);
        }
        for (std::size_t r = s % 2; r + 1 < rungs; r += 2) {
            auto& a = walkers[walker_at[r]];
            auto& b = walkers[walker_at[r + 1]];
            const double log_ratio = (ladder[r] - ladder[r + 1]) * (a.energy() - b.energy());
            if (log_ratio >= 0.0 || swap_rng.uniform() < std::exp(log_ratio)) std::swap(walker_at[r], walker_at[r + 1]);
        }
    }
    // Polish the best configuration with a zero-temperature descent.
    detail::Walker polish(couplings);
    polish.assign(best.spins);
    proposals += polish.quench();
    best.offer(polish);
    return detail::finish_result(disorder, best.config(), SolverMethod::tempering, rungs, proposals);
}

[[nodiscard]] inline GroundStateResult tempering_ground_state(const Disorder& disorder,
                                                              const TemperingOptions& options = {}) {
    return tempering_ground_state(disorder, options.ladder, options.sweeps, options.seed);
}

struct SolverConfig {
    SolverMethod method = SolverMethod::exact;
    AnnealSchedule anneal{};
    TemperingOptions tempering{};
    EnumerationOptions enumeration{};
    unsigned threads = 0;
};

/// Runs the configured solver on one instance; heuristic seeds are derived
/// from `seed` and the instance's sample index.
[[nodiscard]] inline GroundStateResult solve_ground_state(const Disorder& disorder, const SolverConfig& config,
                                                          std::uint64_t seed) {
    const std::uint64_t solver_seed = mix_seed(seed ^ 0x5eed5eed5eedULL, disorder.sample_index());
    switch (config.method) {
        case SolverMethod::exact: return exact_ground_state(disorder, config.enumeration);
        case SolverMethod::annealing: {
            AnnealSchedule schedule = config.anneal;
            schedule.seed = mix_seed(solver_seed, schedule.seed);
            return anneal_ground_state(disorder, schedule);
        }
        case SolverMethod::tempering:
            return tempering_ground_state(disorder, config.tempering.ladder, config.tempering.sweeps,
                                          mix_seed(solver_seed, config.tempering.seed));
    }
    throw ConfigError("unknown solver method");
}

struct DensityEnsemble {
    EnsembleStats stats;
    std::vector<GroundStateResult> records;
};

/// Disorder average of the ground-state density min H / n.
[[nodiscard]] inline DensityEnsemble density_ensemble(int n, std::size_t samples, const SolverConfig& config,
                                                      std::uint64_t seed) {
    DensityEnsemble out;
    out.records = parallel_map(samples, config.threads, [&](std::size_t i) {
        return solve_ground_state(sample_disorder(n, seed, i), config, seed);
    });
    std::vector<double> densities;
    densities.reserve(out.records.size());
    for (const auto& r : out.records) densities.push_back(r.density);
    out.stats = reduce_pairwise(densities, EnsembleStats("ground_state_density", n));
    return out;
}

}  // namespace sklab

#endif  // SKLAB_GROUND_STATE_HPP
