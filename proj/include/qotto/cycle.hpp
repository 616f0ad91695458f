// Cycle-level observables for the two-level machine: average work and heats,
// efficiency, power, work variance, relative power fluctuation, and the
// operation-mode classifier.
//
// Sign conventions: mean_work > 0 means work is delivered by the machine;
// heat_hot > 0 means heat flows from the hot bath into the system;
// heat_cold = mean_work - heat_hot is the heat absorbed from the cold bath
// and is negative in engine mode.
//
// Most quantities are provided along two algebraically independent routes
// (endpoint/closed-form vs the general xi parameterization) so transcription
// slips show up in the cross checks instead of in results.

#pragma once

#include "qotto/two_level.hpp"

#include <cmath>
#include <stdexcept>

namespace qotto {

enum class Mode { Heater, Engine, Refrigerator, Boundary };

inline const char* to_string(Mode mode) {
    switch (mode) {
        case Mode::Heater: return "heater";
        case Mode::Engine: return "engine";
        case Mode::Refrigerator: return "refrigerator";
        case Mode::Boundary: return "boundary";
    }
    return "unknown";
}

struct CompressionRatio {
    double r;         // sqrt(omega_h / omega_c)
    double r_carnot;  // sqrt(beta_c / beta_h), upper edge of the undeformed engine band
};

inline CompressionRatio compression_ratio(const CycleConfig& config) {
    return {std::sqrt(config.omega_h / config.omega_c),
            std::sqrt(config.cold.beta_r() / config.hot.beta_r())};
}

// ---------------------------------------------------------------------------
// Work and heat, endpoint route.

inline double mean_work(const CycleConfig& config, const CycleEndpoints& e) {
    return config.omega_h * (e.g_B - e.g_A) + config.omega_c * (e.g_D - e.g_C);
}

inline double mean_heat_hot(const CycleConfig& config, const CycleEndpoints& e) {
    return config.omega_h * (e.g_B - e.g_A);
}

inline double mean_heat_cold(const CycleConfig& config, const CycleEndpoints& e) {
    return mean_work(config, e) - mean_heat_hot(config, e);
}

// ---------------------------------------------------------------------------
// Work and heat, two-level closed form.  The relaxation factor
// G = (1-x)(1-y)/(1-xy) multiplies the quasi-static value; it tends to 1 in
// the quasi-static limit and to 0 when either contact vanishes.

inline double relaxation_factor(double x, double y) {
    if (x * y >= 1.0)
        throw std::domain_error("relaxation_factor: both contact times are zero");
    return (1.0 - x) * (1.0 - y) / (1.0 - x * y);
}

inline double mean_work_closed(const CycleConfig& config) {
    const double gamma_c = config.gamma_c();
    const double gamma_h = config.gamma_h();
    const double g_eq_h = g_hot_equilibrium(config);
    const double g_eq_c = g_cold_equilibrium(config);
    const double level_factor = g_eq_h - (gamma_h - 1.0) / (gamma_c - 1.0) * g_eq_c +
                                (gamma_h - gamma_c) / (gamma_c - 1.0);
    const double freq_factor = config.omega_h - (gamma_c - 1.0) / (gamma_h - 1.0) * config.omega_c;
    return level_factor * freq_factor * relaxation_factor(config.x(), config.y());
}

// ---------------------------------------------------------------------------
// Work, heat and efficiency in the general xi parameterization, written with
// the (1-x), (1-y) denominators cancelled so tau -> 0 contacts stay finite.

inline double mean_work_xi(const CycleConfig& config) {
    const auto xi = xi_factors(config);
    const double g_eq_h = g_hot_equilibrium(config);
    const double g_eq_c = g_cold_equilibrium(config);
    const double x = config.x();
    const double y = config.y();
    const double xx = xi.hc * xi.ch;
    const double hot_part =
        config.omega_h * ((1.0 - xx * y) * g_eq_h - xi.ch * (1.0 - y) * g_eq_c) * (1.0 - x);
    const double cold_part =
        config.omega_c * (xi.hc * (1.0 - x) * g_eq_h - (1.0 - xx * x) * g_eq_c) * (1.0 - y);
    return (hot_part - cold_part) / (1.0 - xx * x * y);
}

inline double mean_heat_hot_xi(const CycleConfig& config) {
    const auto xi = xi_factors(config);
    const double g_eq_h = g_hot_equilibrium(config);
    const double g_eq_c = g_cold_equilibrium(config);
    const double x = config.x();
    const double y = config.y();
    const double xx = xi.hc * xi.ch;
    return config.omega_h * ((1.0 - xx * y) * g_eq_h - xi.ch * (1.0 - y) * g_eq_c) * (1.0 - x) /
           (1.0 - xx * x * y);
}

inline double efficiency_xi(const CycleConfig& config) {
    const auto xi = xi_factors(config);
    const double g_eq_h = g_hot_equilibrium(config);
    const double g_eq_c = g_cold_equilibrium(config);
    const double x = config.x();
    const double y = config.y();
    const double xx = xi.hc * xi.ch;
    const double hot_bracket = ((1.0 - xx * y) * g_eq_h - xi.ch * (1.0 - y) * g_eq_c) * (1.0 - x);
    const double cold_bracket = (xi.hc * (1.0 - x) * g_eq_h - (1.0 - xx * x) * g_eq_c) * (1.0 - y);
    return 1.0 - (config.omega_c / config.omega_h) * cold_bracket / hot_bracket;
}

// ---------------------------------------------------------------------------
// Mode classification by signed energy flows.

inline Mode classify_mode(double work, double heat_hot, double heat_cold) {
    if (work > 0.0 && heat_hot > 0.0) return Mode::Engine;
    if (work < 0.0 && heat_cold > 0.0) return Mode::Refrigerator;
    if (work < 0.0 && heat_cold < 0.0) return Mode::Heater;
    return Mode::Boundary;
}

inline Mode classify_mode(const CycleConfig& config) {
    const auto e = relax_endpoints(config);
    const double w = mean_work(config, e);
    const double q_h = mean_heat_hot(config, e);
    return classify_mode(w, q_h, w - q_h);
}

// Two-level efficiency, 1 - (omega_c/omega_h)(gamma_c-1)/(gamma_h-1).  The
// contact times drop out entirely.  Outside engine mode the quantity is not
// an efficiency, so we refuse rather than return a coefficient of
// performance.
inline double efficiency(const CycleConfig& config) {
    if (classify_mode(config) != Mode::Engine)
        throw std::domain_error("efficiency: machine is not in engine mode");
    return 1.0 - (config.omega_c / config.omega_h) * (config.gamma_c() - 1.0) /
                     (config.gamma_h() - 1.0);
}

// ---------------------------------------------------------------------------
// Work fluctuations: variance of the per-cycle stochastic work.

// Endpoint (g) parameterization.
inline double work_variance(const CycleConfig& config, const CycleEndpoints& e) {
    const double gamma_c = config.gamma_c();
    const double gamma_h = config.gamma_h();
    const double freq_factor =
        config.omega_h - config.omega_c * (gamma_c - 1.0) / (gamma_h - 1.0);
    const double second_moment = (gamma_h - 1.0) / (gamma_c - 1.0) * freq_factor * freq_factor *
                                 ((e.g_B - 1.0) * (gamma_c - e.g_D) +
                                  (e.g_D - 1.0) * (gamma_h - e.g_B));
    const double mean_term = freq_factor / (gamma_c - 1.0) *
                             ((e.g_B - 1.0) * gamma_c - (e.g_D - 1.0) * gamma_h +
                              (e.g_D - e.g_B));
    return second_moment - mean_term * mean_term;
}

// Population-ratio (chi) parameterization of the same quantity.
inline double work_variance_chi(const CycleConfig& config, const CycleEndpoints& e) {
    const double gap = config.omega_c * (config.gamma_c() - 1.0) -
                       config.omega_h * (config.gamma_h() - 1.0);
    const double denom = (e.chi_c + 1.0) * (e.chi_h + 1.0);
    const double mean = (e.chi_c - e.chi_h) * gap / denom;
    return (e.chi_c + e.chi_h) * gap * gap / denom - mean * mean;
}

// ---------------------------------------------------------------------------
// Power and stability.

inline double power(const CycleConfig& config) {
    const double tau = config.tau_cyc();
    if (!(tau > 0.0))
        throw std::domain_error("power: cycle period must be positive");
    return mean_work(config, relax_endpoints(config)) / tau;
}

// Power from equilibrium population ratios alone; independent algebra from
// the endpoint route.
inline double power_closed(const CycleConfig& config) {
    const double chi_c = chi_equilibrium(config.cold.beta_r() * config.omega_c, config.gamma_c());
    const double chi_h = chi_equilibrium(config.hot.beta_r() * config.omega_h, config.gamma_h());
    const double gap = (config.gamma_h() - 1.0) * config.omega_h -
                       (config.gamma_c() - 1.0) * config.omega_c;
    const double quasi_static_work =
        gap * (chi_h - chi_c) / ((1.0 + chi_c) * (1.0 + chi_h));
    return quasi_static_work * relaxation_factor(config.x(), config.y()) / config.tau_cyc();
}

// f_P = sqrt(var) / |<w>|; undefined on the mode boundary where <w> = 0.
inline double rel_power_fluctuation(const CycleConfig& config) {
    const auto e = relax_endpoints(config);
    const double w = mean_work(config, e);
    if (w == 0.0)
        throw std::domain_error("rel_power_fluctuation: mean work vanishes (mode boundary)");
    return std::sqrt(work_variance(config, e)) / std::abs(w);
}

// ---------------------------------------------------------------------------
// Bundle.

struct CycleMetrics {
    double mean_work;
    double heat_hot;
    double heat_cold;
    double efficiency;       // NaN outside engine mode
    double power;
    double work_variance;
    double rel_power_fluct;  // NaN when mean work vanishes
    Mode mode;
};

inline CycleMetrics evaluate(const CycleConfig& config) {
    const auto e = relax_endpoints(config);
    const double w = mean_work(config, e);
    const double q_h = mean_heat_hot(config, e);
    const double q_c = w - q_h;
    const double var = work_variance(config, e);
    const Mode mode = classify_mode(w, q_h, q_c);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {w,
            q_h,
            q_c,
            mode == Mode::Engine
                ? 1.0 - (config.omega_c / config.omega_h) * (config.gamma_c() - 1.0) /
                            (config.gamma_h() - 1.0)
                : nan,
            w / config.tau_cyc(),
            var,
            w != 0.0 ? std::sqrt(var) / std::abs(w) : nan,
            mode};
}

}  // namespace qotto
