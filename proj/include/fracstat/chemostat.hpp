#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracstat/dilution.hpp"

namespace fracstat {

// ============================================================================
// Chemostat model constants and Contois kinetics
//
// Reduced dynamics on the manifold x = Y(s_in - s):
//   D^alpha s = f(t, s) = theta^{1-alpha} [D(t) - nu(s)] (s_in - s),
//   nu(s) = mu_max s / (KY(s_in - s) + s).
// ============================================================================

struct ChemostatParams {
    double alpha = 0.8;
    double memory_length = 1.5;
    double period = 1.0;
    double theta = 1.0;
    double s_in = 1.0;
    double yield = 1.0;
    double saturation = 1.0;
    double mu_max = 3.1;

    void validate() const {
        if (!(alpha > 0.0) || !(alpha <= 1.0)) throw std::domain_error("params: alpha must lie in (0, 1]");
        const auto positive = [](double v, const char* what) {
            if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error(std::string("params: ") + what + " must be positive and finite");
        };
        positive(memory_length, "memory_length");
        positive(period, "period");
        positive(theta, "theta");
        positive(s_in, "s_in");
        positive(yield, "yield");
        positive(saturation, "saturation");
        positive(mu_max, "mu_max");
    }

    [[nodiscard]] double ky() const { return saturation * yield; }
    [[nodiscard]] double theta_power() const { return std::pow(theta, 1.0 - alpha); }

    [[nodiscard]] bool operator==(const ChemostatParams&) const = default;
};

struct EquilibriumReport {
    double s_bar = 0.0;
    double x_bar = 0.0;
    bool exists = false;
    bool washout_predicted = false;
};

// ============================================================================
// Kinetics
// ============================================================================

/// Contois growth rate mu_max s / (Kx + s); the 0/0 corner (0,0) is 0, the
/// limit along x = 0.
[[nodiscard]] inline double contois_mu(double s, double x, const ChemostatParams& p) {
    if (!(s >= 0.0) || !(x >= 0.0)) throw std::domain_error("contois_mu: s and x must be non-negative");
    if (s == 0.0) return 0.0;
    return p.mu_max * s / (p.saturation * x + s);
}

namespace detail {
inline void check_substrate(double s, const ChemostatParams& p, const char* who) {
    if (!(s >= 0.0) || !(s <= p.s_in)) {
        throw std::domain_error(std::string(who) + ": s must lie in [0, s_in]");
    }
}
}  // namespace detail

/// Effective growth rate on the reduction manifold; strictly increasing from
/// nu(0) = 0 to nu(s_in) = mu_max.
[[nodiscard]] inline double nu(double s, const ChemostatParams& p) {
    detail::check_substrate(s, p, "nu");
    if (s == 0.0) return 0.0;
    return p.mu_max * s / (p.ky() * (p.s_in - s) + s);
}

[[nodiscard]] inline double nu_prime(double s, const ChemostatParams& p) {
    detail::check_substrate(s, p, "nu_prime");
    const double den = p.ky() * (p.s_in - s) + s;
    return p.ky() * p.mu_max * p.s_in / (den * den);
}

/// Second derivative; its sign is the sign of (KY - 1) on all of [0, s_in].
[[nodiscard]] inline double nu_second(double s, const ChemostatParams& p) {
    detail::check_substrate(s, p, "nu_second");
    const double den = p.ky() * (p.s_in - s) + s;
    return 2.0 * p.ky() * p.mu_max * p.s_in * (p.ky() - 1.0) / (den * den * den);
}

/// sup |nu'| on [0, s_in]; attained at an endpoint.
[[nodiscard]] inline double nu_max_lipschitz(const ChemostatParams& p) {
    return (p.mu_max / p.s_in) * std::max(p.ky(), 1.0 / p.ky());
}

// ============================================================================
// Reduced right-hand side
// ============================================================================

[[nodiscard]] inline double rhs_f(double t, double s, const ChemostatParams& p, const DilutionSchedule& schedule) {
    detail::check_substrate(s, p, "rhs_f");
    return p.theta_power() * (schedule.evaluate(t) - nu(s, p)) * (p.s_in - s);
}

[[nodiscard]] inline double rhs_df_ds(double t, double s, const ChemostatParams& p, const DilutionSchedule& schedule) {
    detail::check_substrate(s, p, "rhs_df_ds");
    return p.theta_power() * (nu(s, p) - schedule.evaluate(t) - (p.s_in - s) * nu_prime(s, p));
}

/// Uniform bound on |rhs_f| over [0, T] x [0, s_in].
[[nodiscard]] inline double rhs_bound(const ChemostatParams& p, const DilutionSchedule& schedule) {
    return p.theta_power() * (schedule.max() + p.mu_max) * p.s_in;
}

/// Lipschitz constant of rhs_f in s, uniform in t.
[[nodiscard]] inline double lipschitz_Lf(const ChemostatParams& p, const DilutionSchedule& schedule) {
    return p.theta_power() * (schedule.max() + p.mu_max + 2.0 * p.s_in * nu_max_lipschitz(p));
}

// ============================================================================
// Equilibria and thresholds
// ============================================================================

/// Constant state solving nu(s_bar) = mean dilution; exists iff the mean
/// dilution stays below mu_max, otherwise washout is the only equilibrium.
[[nodiscard]] inline EquilibriumReport equilibrium(const ChemostatParams& p, const DilutionSchedule& schedule) {
    const double d_mean = schedule.mean();
    EquilibriumReport report;
    if (d_mean < p.mu_max) {
        report.s_bar = d_mean * p.ky() * p.s_in / (d_mean * p.ky() + p.mu_max - d_mean);
        report.x_bar = p.yield * (p.s_in - report.s_bar);
        report.exists = true;
    } else {
        report.s_bar = p.s_in;
        report.x_bar = 0.0;
        report.washout_predicted = true;
    }
    return report;
}

/// Threshold substrate: the maximizer of nu(s)(s_in - s).
[[nodiscard]] inline double s_star(const ChemostatParams& p) {
    const double root = std::sqrt(p.ky());
    return p.s_in * root / (root + 1.0);
}

[[nodiscard]] inline double nu_s_star(const ChemostatParams& p) {
    return p.mu_max / (1.0 + std::sqrt(p.ky()));
}

/// Substrate uptake flux h(s) = nu(s)(s_in - s), increasing on [0, s*).
[[nodiscard]] inline double uptake_rate(double s, const ChemostatParams& p) {
    detail::check_substrate(s, p, "uptake_rate");
    return nu(s, p) * (p.s_in - s);
}

[[nodiscard]] inline double uptake_rate_prime(double s, const ChemostatParams& p) {
    detail::check_substrate(s, p, "uptake_rate_prime");
    const double den = p.ky() * (p.s_in - s) + s;
    const double rem = p.s_in - s;
    return p.mu_max * (p.ky() * rem * rem - s * s) / (den * den);
}

// ============================================================================
// Reduction transforms
// ============================================================================

[[nodiscard]] inline double biomass_from_substrate(double s, const ChemostatParams& p) {
    return p.yield * (p.s_in - s);
}

[[nodiscard]] inline std::vector<double> biomass_from_substrate(std::span<const double> s_values,
                                                                const ChemostatParams& p) {
    std::vector<double> x(s_values.size());
    for (std::size_t j = 0; j < s_values.size(); ++j) x[j] = biomass_from_substrate(s_values[j], p);
    return x;
}

[[nodiscard]] inline std::vector<double> z_transform(std::span<const double> s_values,
                                                     std::span<const double> x_values, const ChemostatParams& p) {
    if (s_values.size() != x_values.size()) throw std::invalid_argument("z_transform: length mismatch");
    std::vector<double> z(s_values.size());
    for (std::size_t j = 0; j < s_values.size(); ++j) {
        z[j] = p.yield * (p.s_in - s_values[j]) - x_values[j];
    }
    return z;
}

// ============================================================================
// Theorem-condition predicates (used by run verification)
// ============================================================================

/// Window covers a period, growth saturated by crowding, and dilution always
/// above the maximum growth rate: only the washout state can persist.
[[nodiscard]] inline bool washout_certified(const ChemostatParams& p, const DilutionSchedule& schedule) {
    return p.memory_length >= p.period && p.ky() > 1.0 && schedule.min() > p.mu_max;
}

/// With the dilution rate capped by nu(s*) and the solution starting at or
/// below s*, at most one non-trivial periodic profile exists.
[[nodiscard]] inline bool uniqueness_certified(double s_at_zero, const ChemostatParams& p,
                                               const DilutionSchedule& schedule) {
    return s_at_zero <= s_star(p) && schedule.max() <= nu_s_star(p);
}

}  // namespace fracstat
