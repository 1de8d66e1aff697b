#ifndef SKLAB_ENUMERATE_HPP
#define SKLAB_ENUMERATE_HPP

// Exhaustive Gray-code walk over spin configurations.
//
// H is invariant under sigma -> -sigma, so only the 2^(n-1) configurations
// with spin n-1 up are visited; each stands for itself and its global flip.
// Consecutive configurations differ in one spin (bit ctz(t) at step t), so
// the energy moves by 2/sqrt(n) * sigma_k * h_k and the fields by one row of J.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "errors.hpp"
#include "model.hpp"

namespace sklab {

struct EnumerationOptions {
    int cap = 28;  ///< largest n accepted for exhaustive enumeration
};

inline void check_enumeration_cap(int n, const EnumerationOptions& options) {
    if (n > options.cap) throw CapacityError(n, options.cap);
    if (n > 63) throw CapacityError(n, 63);
}

/// Calls visit(energy, bits) once for each configuration with the top spin up,
/// in Gray-code order starting from all-up. Fields and energy are rebuilt from
/// scratch every kCacheRebuildInterval steps.
template <class Visitor>
void gray_sweep(const Disorder& disorder, Visitor&& visit, const EnumerationOptions& options = {}) {
    const int n = disorder.n();
    check_enumeration_cap(n, options);
    const DenseCouplings couplings(disorder);
    const int stride = couplings.stride();
    const double scale = couplings.scale();

    std::vector<double> spins(static_cast<std::size_t>(stride), 0.0);
    std::vector<double> fields(static_cast<std::size_t>(stride), 0.0);
    double energy = 0.0;

    auto rebuild = [&](std::uint64_t bits) {
        for (int i = 0; i < n; ++i) spins[static_cast<std::size_t>(i)] = ((bits >> i) & 1U) ? -1.0 : 1.0;
        double twice = 0.0;
        for (int i = 0; i < n; ++i) {
            const double* row = couplings.row(i);
            double h = 0.0;
            for (int j = 0; j < n; ++j) h += row[j] * spins[static_cast<std::size_t>(j)];
            fields[static_cast<std::size_t>(i)] = h;
            twice += spins[static_cast<std::size_t>(i)] * h;
        }
        energy = -0.5 * scale * twice;
    };

    std::uint64_t bits = 0;
    rebuild(bits);
    visit(energy, bits);

    const std::uint64_t steps = std::uint64_t{1} << (n - 1);
    constexpr std::uint64_t rebuild_mask = kCacheRebuildInterval - 1;
    double* __restrict const h = fields.data();
    for (std::uint64_t t = 1; t < steps; ++t) {
        const int k = std::countr_zero(t);
        const double old_spin = spins[static_cast<std::size_t>(k)];
        energy += 2.0 * scale * old_spin * h[k];
        const double* __restrict row = couplings.row(k);
        const double c = -2.0 * old_spin;
        for (int j = 0; j < stride; ++j) h[j] += c * row[j];
        spins[static_cast<std::size_t>(k)] = -old_spin;
        bits ^= std::uint64_t{1} << k;
        if ((t & rebuild_mask) == 0) rebuild(bits);
        visit(energy, bits);
    }
}

/// Exhaustive enumeration in blocks, without incremental updates.
///
/// With spin n-1 fixed up, the remaining sites split into a low block A
/// (bits [0, a)), a low block B (bits [a, a+b)) and the high sites. Writing
/// P for pair sums inside a set and f_i = sum_{j high} J_ij sigma_j,
///
///   -sqrt(n) H = P_low(x_low) + P_high + sum_{i in A} sigma_i f_i + sum_{i in B} sigma_i f_i.
///
/// P_low is tabulated once; the two cross sums are tabulated per high
/// configuration. Each energy is then a sum of four table entries, so there
/// is no drift and the inner loop vectorizes. Calls
/// visit(energies, first_bits) where energies[i] belongs to configuration
/// first_bits | i; blocks arrive in increasing bit order.
template <class BlockVisitor>
void block_sweep(const Disorder& disorder, BlockVisitor&& visit, const EnumerationOptions& options = {}) {
    const int n = disorder.n();
    check_enumeration_cap(n, options);
    const int free_sites = n - 1;
    const int a = std::min(free_sites, 10);
    const int b = std::min(free_sites - a, 6);
    const int low = a + b;
    const int high_free = free_sites - low;
    const double scale = disorder.scale();
    const DenseCouplings couplings(disorder);

    const std::size_t low_count = std::size_t{1} << low;
    std::vector<double> pair_low(low_count);
    std::vector<double> spin(static_cast<std::size_t>(n), 1.0);
    for (std::size_t x = 0; x < low_count; ++x) {
        for (int i = 0; i < low; ++i) spin[static_cast<std::size_t>(i)] = ((x >> i) & 1U) ? -1.0 : 1.0;
        double sum = 0.0;
        for (int i = 0; i < low; ++i) {
            const double* row = couplings.row(i);
            double partial = 0.0;
            for (int j = i + 1; j < low; ++j) partial += row[j] * spin[static_cast<std::size_t>(j)];
            sum += spin[static_cast<std::size_t>(i)] * partial;
        }
        pair_low[x] = sum;
    }

    const std::size_t a_count = std::size_t{1} << a;
    const std::size_t b_count = std::size_t{1} << b;
    std::vector<double> field(static_cast<std::size_t>(std::max(low, 1)));
    std::vector<double> cross_a(a_count);
    std::vector<double> cross_b(b_count);
    std::vector<double> energies(a_count);

    auto tabulate = [&](std::vector<double>& table, int first, int count) {
        for (std::size_t x = 0; x < table.size(); ++x) {
            double sum = 0.0;
            for (int i = 0; i < count; ++i) {
                const double f = field[static_cast<std::size_t>(first + i)];
                sum += ((x >> i) & 1U) ? -f : f;
            }
            table[x] = sum;
        }
    };

    const std::uint64_t high_count = std::uint64_t{1} << high_free;
    for (std::uint64_t hi = 0; hi < high_count; ++hi) {
        for (int i = 0; i < high_free; ++i) spin[static_cast<std::size_t>(low + i)] = ((hi >> i) & 1U) ? -1.0 : 1.0;
        spin[static_cast<std::size_t>(n - 1)] = 1.0;
        double pair_high = 0.0;
        for (int i = low; i < n; ++i) {
            const double* row = couplings.row(i);
            double partial = 0.0;
            for (int j = i + 1; j < n; ++j) partial += row[j] * spin[static_cast<std::size_t>(j)];
            pair_high += spin[static_cast<std::size_t>(i)] * partial;
        }
        for (int i = 0; i < low; ++i) {
            const double* row = couplings.row(i);
            double f = 0.0;
            for (int j = low; j < n; ++j) f += row[j] * spin[static_cast<std::size_t>(j)];
            field[static_cast<std::size_t>(i)] = f;
        }
        tabulate(cross_a, 0, a);
        tabulate(cross_b, a, b);

        for (std::size_t xb = 0; xb < b_count; ++xb) {
            const double base = pair_high + cross_b[xb];
            const double* __restrict pl = pair_low.data() + (xb << a);
            const double* __restrict ca = cross_a.data();
            double* __restrict out = energies.data();
            for (std::size_t xa = 0; xa < a_count; ++xa) out[xa] = -scale * ((pl[xa] + ca[xa]) + base);
            visit(std::span<const double>(energies), (hi << low) | (static_cast<std::uint64_t>(xb) << a));
        }
    }
}

/// Bits of the global flip of a configuration word.
[[nodiscard]] constexpr std::uint64_t invert_word(std::uint64_t bits, int n) noexcept {
    return n == 64 ? ~bits : bits ^ ((std::uint64_t{1} << n) - 1);
}

}  // namespace sklab

#endif  // SKLAB_ENUMERATE_HPP
