// Two-time-measurement statistics for the two-level cycle: the exact
// finite-support distributions of stochastic work and hot-stroke heat, exact
// moments by enumeration (the designated oracle for the closed forms), and a
// seeded Monte Carlo sampler.

#pragma once

#include "qotto/cycle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace qotto {

struct Atom {
    double value;
    double prob;
};

// Finite probability mass function over per-cycle work values, sorted by
// value with degenerate values merged.
struct WorkDistribution {
    std::vector<Atom> atoms;
};

struct HeatDistribution {
    std::vector<Atom> atoms;
};

namespace detail {

inline std::vector<Atom> merge_atoms(std::vector<Atom> atoms) {
    std::erase_if(atoms, [](const Atom& a) { return a.prob == 0.0; });
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.value < b.value; });
    double scale = 0.0;
    for (const auto& a : atoms) scale = std::max(scale, std::abs(a.value));
    const double tol = 1e-12 * scale;

    std::vector<Atom> merged;
    for (const auto& a : atoms) {
        if (!merged.empty() && a.value - merged.back().value <= tol) {
            merged.back().prob += a.prob;
        } else {
            merged.push_back(a);
        }
    }
    return merged;
}

}  // namespace detail

// Exact work pmf from the endpoint populations: outcomes (n at B, m at D)
// with weight p_{n,B} p_{m,D} and work
//   w = (eps_n^h - eps_n^c) + (eps_m^c - eps_m^h).
inline WorkDistribution work_pmf(const CycleConfig& config, const CycleEndpoints& e) {
    const auto at_b = populations_from_chi(e.chi_h);
    const auto at_d = populations_from_chi(e.chi_c);
    const std::array<double, 2> p_b{at_b.ground, at_b.excited};
    const std::array<double, 2> p_d{at_d.ground, at_d.excited};
    const std::array<double, 2> eps_h{config.omega_h, config.gamma_h() * config.omega_h};
    const std::array<double, 2> eps_c{config.omega_c, config.gamma_c() * config.omega_c};

    std::vector<Atom> atoms;
    atoms.reserve(4);
    for (int n = 0; n < 2; ++n)
        for (int m = 0; m < 2; ++m)
            atoms.push_back({(eps_h[n] - eps_c[n]) + (eps_c[m] - eps_h[m]), p_b[n] * p_d[m]});
    return {detail::merge_atoms(std::move(atoms))};
}

// Transition kernel of the hot isochore: kernel[m][n] is the probability of
// ending in n after starting in m.  Rows must be stochastic.
using HotStrokeKernel = std::array<std::array<double, 2>, 2>;

inline HeatDistribution heat_pmf(const CycleConfig& config, const CycleEndpoints& e,
                                 const HotStrokeKernel& kernel) {
    for (const auto& row : kernel) {
        if (row[0] < 0.0 || row[1] < 0.0 || std::abs(row[0] + row[1] - 1.0) > 1e-12)
            throw std::invalid_argument("heat_pmf: kernel rows must be stochastic");
    }
    const auto at_a = populations_from_chi(e.chi_c);  // A carries D's populations
    const std::array<double, 2> p_a{at_a.ground, at_a.excited};
    const std::array<double, 2> eps_h{config.omega_h, config.gamma_h() * config.omega_h};

    std::vector<Atom> atoms;
    atoms.reserve(4);
    for (int m = 0; m < 2; ++m)
        for (int n = 0; n < 2; ++n)
            atoms.push_back({eps_h[n] - eps_h[m], p_a[m] * kernel[m][n]});
    return {detail::merge_atoms(std::move(atoms))};
}

// Default heat statistics use the only kernel with a closed form, the fully
// thermalizing one: p_{m->n} -> p_n^eq(beta_h^r) regardless of m.  Any
// finite-time kernel must be supplied by the caller.
inline HeatDistribution heat_pmf(const CycleConfig& config, const CycleEndpoints& e) {
    const auto eq = populations(config.hot.beta_r() * config.omega_h, config.gamma_h());
    return heat_pmf(config, e, HotStrokeKernel{{{eq.ground, eq.excited},
                                                {eq.ground, eq.excited}}});
}

struct Moments {
    double mean;
    double variance;
};

// Exact weighted sums over the support; the brute-force oracle for the
// closed-form mean and variance.
inline Moments moments(const std::vector<Atom>& atoms) {
    double mean = 0.0;
    for (const auto& a : atoms) mean += a.prob * a.value;
    double var = 0.0;
    for (const auto& a : atoms) var += a.prob * (a.value - mean) * (a.value - mean);
    return {mean, var};
}

inline Moments moments(const WorkDistribution& pmf) { return moments(pmf.atoms); }
inline Moments moments(const HeatDistribution& pmf) { return moments(pmf.atoms); }

struct SampleStats {
    std::size_t n;
    double mean;
    double variance;
    std::vector<std::size_t> counts;  // per atom, in pmf order
};

// Seeded inverse-CDF sampling.  The uniform variate is built from the raw
// 64-bit output so results do not depend on the standard library's
// distribution implementation.
inline SampleStats sample_work(const WorkDistribution& pmf, std::size_t n, std::uint64_t seed) {
    if (pmf.atoms.empty())
        throw std::invalid_argument("sample_work: empty distribution");
    if (n < 1)
        throw std::invalid_argument("sample_work: need at least one sample");

    std::vector<double> cumulative;
    cumulative.reserve(pmf.atoms.size());
    double acc = 0.0;
    for (const auto& a : pmf.atoms) {
        acc += a.prob;
        cumulative.push_back(acc);
    }
    cumulative.back() = 1.0;

    std::mt19937_64 engine(seed);
    std::vector<std::size_t> counts(pmf.atoms.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
        std::size_t k = 0;
        while (u >= cumulative[k] && k + 1 < cumulative.size()) ++k;
        ++counts[k];
    }

    double mean = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k)
        mean += static_cast<double>(counts[k]) * pmf.atoms[k].value;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double d = pmf.atoms[k].value - mean;
        var += static_cast<double>(counts[k]) * d * d;
    }
    var /= static_cast<double>(n);
    return {n, mean, var, std::move(counts)};
}

namespace detail {

// Regularized incomplete gamma functions, series / continued-fraction split
// at x = a + 1 (Lentz's method for the fraction).
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= x / (a + k);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_fraction(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int k = 1; k < 500; ++k) {
        const double an = -k * (k - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

// Upper tail P(X > statistic) of a chi-square distribution with dof degrees
// of freedom.
inline double chi_square_pvalue(double statistic, int dof) {
    if (dof < 1)
        throw std::invalid_argument("chi_square_pvalue: dof must be >= 1");
    if (statistic <= 0.0) return 1.0;
    const double a = 0.5 * dof;
    const double x = 0.5 * statistic;
    return x < a + 1.0 ? 1.0 - detail::gamma_p_series(a, x) : detail::gamma_q_fraction(a, x);
}

// Pearson statistic of observed counts against the pmf.  Degrees of freedom
// for the usual test are (number of atoms) - 1.
inline double chi_square_statistic(const std::vector<std::size_t>& counts,
                                   const WorkDistribution& pmf) {
    if (counts.size() != pmf.atoms.size())
        throw std::invalid_argument("chi_square_statistic: counts do not match the pmf");
    std::size_t n = 0;
    for (auto c : counts) n += c;
    double stat = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double expected = pmf.atoms[k].prob * static_cast<double>(n);
        const double diff = static_cast<double>(counts[k]) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

}  // namespace qotto
