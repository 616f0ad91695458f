// Power-law trap spectra and their thermal functions: truncated partition
// sums, the dimensionless energy g = <H>/omega, entropy, and the
// entropy-preserving matcher that maps a thermal point across a change of
// trap shape.
//
// Levels are indexed from 1, eps_n = omega * n^theta, so eps_1 = omega and
// the first-gap ratio is gamma = eps_2/eps_1 = 2^theta.

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qotto {

// Shape of a 1-D power-law trap.  gamma is always derived from theta so the
// pair cannot get out of sync.
class TrapShape {
public:
    explicit TrapShape(double theta) : theta_(theta) {
        if (!std::isfinite(theta) || theta <= 0.0)
            throw std::invalid_argument("TrapShape: theta must be positive and finite");
        if (std::exp2(theta) <= 1.0)
            throw std::invalid_argument("TrapShape: theta so small that gamma rounds to 1");
    }

    static TrapShape from_gamma(double gamma) {
        if (!std::isfinite(gamma) || gamma <= 1.0)
            throw std::invalid_argument("TrapShape: gamma must exceed 1");
        return TrapShape(std::log2(gamma));
    }

    double theta() const { return theta_; }
    double gamma() const { return std::exp2(theta_); }

private:
    double theta_;
};

struct SpectrumParams {
    double omega;        // first-level energy, > 0 (hbar = 1)
    TrapShape shape;
    int truncation;      // retained level count, >= 2
};

// Thermal state of a trapped gas; all thermal functions depend on beta and
// omega only through their product.
struct ThermalPoint {
    double beta_omega;   // > 0, finite
    TrapShape shape;
};

inline constexpr int kDefaultTruncation = 200;
// A truncated sum counts as converged when its final term contributes less
// than this fraction of the total.
inline constexpr double kSeriesTailTolerance = 1e-14;

struct SeriesValue {
    double value;
    bool converged;
};

inline double energy_level(const SpectrumParams& params, int n) {
    if (n < 1)
        throw std::invalid_argument("energy_level: levels are indexed from 1");
    if (!(params.omega > 0.0))
        throw std::invalid_argument("energy_level: omega must be positive");
    return params.omega * std::pow(static_cast<double>(n), params.shape.theta());
}

namespace detail {

inline void check_thermal(const ThermalPoint& pt, int n_max) {
    if (!std::isfinite(pt.beta_omega) || pt.beta_omega <= 0.0)
        throw std::invalid_argument("thermal point: beta*omega must be positive and finite");
    if (n_max < 2)
        throw std::invalid_argument("thermal sums: truncation must keep at least 2 levels");
}

// Sums with the ground term factored out, t_n = exp(-bw*(n^theta - 1)).
// t_sum stays in [1, n_max] for any bw > 0, which keeps g and the entropy
// well conditioned even where Z itself underflows.
struct ScaledSums {
    double t_sum;
    double g_sum;       // sum of n^theta * t_n
    double last_term;
};

inline ScaledSums thermal_sums(const ThermalPoint& pt, int n_max) {
    check_thermal(pt, n_max);
    const double theta = pt.shape.theta();
    ScaledSums s{0.0, 0.0, 0.0};
    for (int n = 1; n <= n_max; ++n) {
        const double level = std::pow(static_cast<double>(n), theta);
        const double t = std::exp(-pt.beta_omega * (level - 1.0));
        s.t_sum += t;
        s.g_sum += level * t;
        s.last_term = t;
        if (t == 0.0)
            break;  // deeper levels underflow as well
    }
    return s;
}

inline bool tail_converged(const ScaledSums& s) {
    return s.last_term < kSeriesTailTolerance * s.t_sum;
}

}  // namespace detail

inline SeriesValue partition_function(const ThermalPoint& pt, int n_max = kDefaultTruncation) {
    const auto s = detail::thermal_sums(pt, n_max);
    return {std::exp(-pt.beta_omega) * s.t_sum, detail::tail_converged(s)};
}

// g = Z^{-1} sum n^theta exp(-bw n^theta); always >= 1.
inline SeriesValue g_value(const ThermalPoint& pt, int n_max = kDefaultTruncation) {
    const auto s = detail::thermal_sums(pt, n_max);
    return {s.g_sum / s.t_sum, detail::tail_converged(s)};
}

// S = bw*g + ln Z, computed in the scaled form bw*(g-1) + ln(t_sum).
inline SeriesValue entropy(const ThermalPoint& pt, int n_max = kDefaultTruncation) {
    const auto s = detail::thermal_sums(pt, n_max);
    const double g = s.g_sum / s.t_sum;
    return {pt.beta_omega * (g - 1.0) + std::log(s.t_sum), detail::tail_converged(s)};
}

// Adiabatic deformation: find the thermal point of the target shape with the
// same entropy.  S is strictly decreasing in beta*omega, so a bracketed
// bisection always converges once the target is bracketed.
inline ThermalPoint adiabatic_match(const ThermalPoint& from, const TrapShape& to_shape,
                                    int n_max = kDefaultTruncation) {
    detail::check_thermal(from, n_max);
    if (to_shape.theta() == from.shape.theta())
        return from;

    const double target = entropy(from, n_max).value;
    const auto s_of = [&](double bw) { return entropy({bw, to_shape}, n_max).value; };

    double lo = from.beta_omega;  // will hold the small-bw (high entropy) side
    double hi = from.beta_omega;
    while (s_of(lo) < target) {
        lo *= 0.5;
        if (lo < 1e-280)
            throw std::runtime_error("adiabatic_match: entropy target exceeds what the "
                                     "truncated spectrum can reach");
    }
    while (s_of(hi) > target) {
        hi *= 2.0;
        if (hi > 1e280)
            throw std::runtime_error("adiabatic_match: entropy target unreachable at any "
                                     "finite temperature");
    }

    for (int it = 0; it < 120 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (s_of(mid) > target ? lo : hi) = mid;
    }
    return {0.5 * (lo + hi), to_shape};
}

}  // namespace qotto
