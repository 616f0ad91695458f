// Two-level working substance in closed form: equilibrium dimensionless
// energies, endpoint populations, the population-preserving links across an
// adiabatic shape deformation, the xi factors relating deformed endpoints,
// and the periodic steady state of the finite-time cycle.
//
// Cycle instants: A -> B hot isochore (trap omega_h, gamma_h), B -> C
// adiabatic expansion to the cold trap, C -> D cold isochore (omega_c,
// gamma_c), D -> A adiabatic compression back.  Populations are frozen on
// the adiabats, so chi = p_excited / p_ground is shared between D and A and
// between B and C.

#pragma once

#include "qotto/spectrum.hpp"

#include <cmath>
#include <stdexcept>

namespace qotto {

// One reservoir contact: inverse temperature, relaxation conductivity and
// contact time.  tau may be +infinity for a fully thermalized stroke.
class BathContact {
public:
    BathContact(double beta_r, double sigma, double tau)
        : beta_r_(beta_r), sigma_(sigma), tau_(tau) {
        if (!std::isfinite(beta_r) || beta_r <= 0.0)
            throw std::invalid_argument("BathContact: reservoir beta must be positive");
        if (!std::isfinite(sigma) || sigma <= 0.0)
            throw std::invalid_argument("BathContact: conductivity must be positive");
        if (std::isnan(tau) || tau < 0.0)
            throw std::invalid_argument("BathContact: contact time must be >= 0");
    }

    static BathContact quasi_static(double beta_r, double sigma = 1.0) {
        return BathContact(beta_r, sigma, std::numeric_limits<double>::infinity());
    }

    double beta_r() const { return beta_r_; }
    double sigma() const { return sigma_; }
    double tau() const { return tau_; }

    // Relaxation decay factor exp(-sigma*tau): 1 at tau = 0, 0 when fully
    // thermalized.
    double decay() const { return std::exp(-sigma_ * tau_); }

private:
    double beta_r_;
    double sigma_;
    double tau_;
};

// Full Otto cycle specification.
struct CycleConfig {
    double omega_c;
    double omega_h;
    TrapShape shape_c;
    TrapShape shape_h;
    BathContact cold;
    BathContact hot;
    double tau_adi;  // total time of the two adiabatic strokes

    CycleConfig(double omega_c_, double omega_h_, TrapShape shape_c_, TrapShape shape_h_,
                BathContact cold_, BathContact hot_, double tau_adi_ = 0.0)
        : omega_c(omega_c_), omega_h(omega_h_), shape_c(shape_c_), shape_h(shape_h_),
          cold(cold_), hot(hot_), tau_adi(tau_adi_) {
        if (!std::isfinite(omega_c) || omega_c <= 0.0 || !std::isfinite(omega_h) || omega_h <= 0.0)
            throw std::invalid_argument("CycleConfig: frequencies must be positive");
        if (!(cold.beta_r() > hot.beta_r()))
            throw std::invalid_argument("CycleConfig: cold bath must be colder (beta_c > beta_h)");
        if (std::isnan(tau_adi) || tau_adi < 0.0)
            throw std::invalid_argument("CycleConfig: adiabatic time must be >= 0");
        if (!(tau_cyc() > 0.0))
            throw std::invalid_argument("CycleConfig: cycle period must be positive");
    }

    double gamma_c() const { return shape_c.gamma(); }
    double gamma_h() const { return shape_h.gamma(); }
    double tau_cyc() const { return hot.tau() + cold.tau() + tau_adi; }
    double x() const { return hot.decay(); }
    double y() const { return cold.decay(); }
    double carnot_efficiency() const { return 1.0 - hot.beta_r() / cold.beta_r(); }
};

// chi = p_excited/p_ground = exp(-(gamma-1) * beta*omega) at equilibrium.
inline double chi_equilibrium(double beta_omega, double gamma) {
    return std::exp(-(gamma - 1.0) * beta_omega);
}

// Endpoint population ratio recovered from a dimensionless energy.
inline double chi_from_g(double g, double gamma) {
    if (!(g >= 1.0) || !(g < gamma))
        throw std::domain_error("chi_from_g: g must lie in [1, gamma)");
    return (g - 1.0) / (gamma - g);
}

// Equilibrium dimensionless energy of the two-level trap,
// g = (1 + gamma*chi)/(1 + chi), confined to (1, (1+gamma)/2).
inline double eq_g(double beta_omega, double gamma) {
    if (!(beta_omega > 0.0))
        throw std::invalid_argument("eq_g: beta*omega must be positive");
    if (!(gamma > 1.0))
        throw std::invalid_argument("eq_g: gamma must exceed 1");
    const double chi = chi_equilibrium(beta_omega, gamma);
    return (1.0 + gamma * chi) / (1.0 + chi);
}

struct Populations {
    double ground;
    double excited;
};

inline Populations populations(double beta_omega, double gamma) {
    if (!(beta_omega > 0.0) || !(gamma > 1.0))
        throw std::invalid_argument("populations: need beta*omega > 0 and gamma > 1");
    const double chi = chi_equilibrium(beta_omega, gamma);
    return {1.0 / (1.0 + chi), chi / (1.0 + chi)};
}

inline Populations populations_from_chi(double chi) {
    return {1.0 / (1.0 + chi), chi / (1.0 + chi)};
}

// Image of a dimensionless energy under an adiabatic deformation that
// freezes the level populations:
//   g_to = ((gamma_to - 1) g_from + gamma_from - gamma_to) / (gamma_from - 1).
// The identity deformation is a fixed point, and the map is its own inverse
// with the shapes swapped.
inline double deformation_link(double g_from, const TrapShape& from, const TrapShape& to) {
    const double gf = from.gamma();
    const double gt = to.gamma();
    if (gf == 1.0 || gt == 1.0)
        throw std::domain_error("deformation_link: degenerate level spacing (gamma == 1)");
    return ((gt - 1.0) * g_from + gf - gt) / (gf - 1.0);
}

namespace detail {

// Periodic steady state of the composed relaxation + deformation maps: the
// unique fixed point of
//   g_B = g_eq_h + (link_ch(g_D) - g_eq_h) * x,
//   g_D = g_eq_c + (link_hc(g_B) - g_eq_c) * y,
// solved in closed form.  x*y < 1 is required (some bath contact happens).
struct SteadyPair {
    double g_B;
    double g_D;
};

inline SteadyPair steady_endpoint_g(double g_eq_h, double g_eq_c, double gamma_c,
                                    double gamma_h, double x, double y) {
    if (x * y >= 1.0)
        throw std::domain_error("steady_endpoint_g: both contact times are zero");
    const double denom = 1.0 - x * y;
    const double bracket_h =
        (gamma_c - gamma_h) / (gamma_c - 1.0) + (gamma_h - 1.0) / (gamma_c - 1.0) * g_eq_c - g_eq_h;
    const double bracket_c =
        (gamma_h - gamma_c) / (gamma_h - 1.0) + (gamma_c - 1.0) / (gamma_h - 1.0) * g_eq_h - g_eq_c;
    return {g_eq_h + bracket_h * (1.0 - y) * x / denom,
            g_eq_c + bracket_c * (1.0 - x) * y / denom};
}

}  // namespace detail

struct XiFactors {
    double hc;  // g_C / g_B
    double ch;  // g_A / g_D
};

// Ratios linking the dimensionless energies across the two adiabats at the
// cycle's periodic steady state.  Both reduce to exactly 1 when the two
// shapes agree.
inline XiFactors xi_factors(double gamma_c, double gamma_h, double g_eq_h, double g_eq_c,
                            double x, double y) {
    const auto g = detail::steady_endpoint_g(g_eq_h, g_eq_c, gamma_c, gamma_h, x, y);
    if (g.g_B <= 0.0 || g.g_D <= 0.0)
        throw std::domain_error("xi_factors: degenerate endpoint energy");
    return {(gamma_c - 1.0) / (gamma_h - 1.0) + (gamma_h - gamma_c) / ((gamma_h - 1.0) * g.g_B),
            (gamma_h - 1.0) / (gamma_c - 1.0) + (gamma_c - gamma_h) / ((gamma_c - 1.0) * g.g_D)};
}

inline XiFactors xi_factors(const CycleConfig& config) {
    return xi_factors(config.gamma_c(), config.gamma_h(),
                      eq_g(config.hot.beta_r() * config.omega_h, config.gamma_h()),
                      eq_g(config.cold.beta_r() * config.omega_c, config.gamma_c()),
                      config.x(), config.y());
}

// Dimensionless energies at the four cycle instants plus the endpoint
// population ratios.  Effective temperatures, when needed, are derived from
// chi rather than stored.
struct CycleEndpoints {
    double g_A;
    double g_B;
    double g_C;
    double g_D;
    double chi_c;  // population ratio at D (and A)
    double chi_h;  // population ratio at B (and C)
};

inline double g_hot_equilibrium(const CycleConfig& config) {
    return eq_g(config.hot.beta_r() * config.omega_h, config.gamma_h());
}

inline double g_cold_equilibrium(const CycleConfig& config) {
    return eq_g(config.cold.beta_r() * config.omega_c, config.gamma_c());
}

inline CycleEndpoints relax_endpoints(const CycleConfig& config) {
    const double gamma_c = config.gamma_c();
    const double gamma_h = config.gamma_h();
    const auto g = detail::steady_endpoint_g(g_hot_equilibrium(config), g_cold_equilibrium(config),
                                             gamma_c, gamma_h, config.x(), config.y());
    return {deformation_link(g.g_D, config.shape_c, config.shape_h),
            g.g_B,
            deformation_link(g.g_B, config.shape_h, config.shape_c),
            g.g_D,
            chi_from_g(g.g_D, gamma_c),
            chi_from_g(g.g_B, gamma_h)};
}

}  // namespace qotto
