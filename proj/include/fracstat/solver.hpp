#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracstat/cfds.hpp"
#include "fracstat/chemostat.hpp"
#include "fracstat/dilution.hpp"
#include "fracstat/grid.hpp"
#include "fracstat/trig.hpp"

namespace fracstat {

// ============================================================================
// Periodic collocation solver
// ============================================================================

enum class Classification { NonTrivial, TrivialWashout, NotConverged };

[[nodiscard]] inline std::string to_string(Classification c) {
    switch (c) {
        case Classification::NonTrivial: return "non-trivial";
        case Classification::TrivialWashout: return "trivial-washout";
        case Classification::NotConverged: return "not-converged";
    }
    throw std::logic_error("unknown classification");
}

struct SolveConfig {
    std::size_t node_count = 100;
    std::size_t interpolation_count = 200;
    double newton_tol = 1e-12;
    std::size_t max_iterations = 200;
    double backtrack_factor = 0.5;
    double min_step = 0x1p-20;
    double trivial_threshold = 1e-6;
    std::uint64_t seed = 42;

    void validate() const {
        if (node_count < 4 || node_count % 2 != 0) throw std::domain_error("config: node_count must be even and >= 4");
        if (interpolation_count < node_count) throw std::domain_error("config: interpolation_count must be >= node_count");
        if (!(newton_tol > 0.0)) throw std::domain_error("config: newton_tol must be positive");
        if (max_iterations == 0) throw std::domain_error("config: max_iterations must be positive");
        if (!(backtrack_factor > 0.0) || !(backtrack_factor < 1.0)) throw std::domain_error("config: backtrack_factor must lie in (0, 1)");
        if (!(min_step > 0.0) || !(min_step <= 1.0)) throw std::domain_error("config: min_step must lie in (0, 1]");
        if (!(trivial_threshold > 0.0)) throw std::domain_error("config: trivial_threshold must be positive");
    }

    [[nodiscard]] bool operator==(const SolveConfig&) const = default;
};

struct PeriodicSolution {
    PeriodicGrid grid{4, 1.0};
    std::vector<double> s_nodes;
    std::vector<double> x_nodes;
    double residual_sup = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    Classification classification = Classification::NotConverged;
    double s_at_zero = std::numeric_limits<double>::quiet_NaN();
};

// ============================================================================
// Collocation residual and Jacobian
// ============================================================================

[[nodiscard]] inline std::vector<double> residual(std::span<const double> s_nodes, const ChemostatParams& p,
                                                  const DilutionSchedule& schedule, const CfdsOperator& op) {
    const std::size_t n = op.grid.size();
    if (s_nodes.size() != n) throw std::invalid_argument("residual: value count does not match grid");
    std::vector<double> r = fracstat::apply(op, s_nodes);
    for (std::size_t j = 0; j < n; ++j) r[j] -= rhs_f(op.grid.node(j), s_nodes[j], p, schedule);
    return r;
}

/// Dense nodal matrix of the operator; column l is apply() of the l-th unit
/// nodal vector, realized from the circulant coefficients.
[[nodiscard]] inline Eigen::MatrixXd nodal_matrix(const CfdsOperator& op) {
    const std::size_t n = op.grid.size();
    Eigen::MatrixXd a(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < n; ++l) a(j, l) = op.circulant[(j + n - l) % n];
    }
    return a;
}

[[nodiscard]] inline Eigen::MatrixXd jacobian(std::span<const double> s_nodes, const ChemostatParams& p,
                                              const DilutionSchedule& schedule, const CfdsOperator& op) {
    const std::size_t n = op.grid.size();
    if (s_nodes.size() != n) throw std::invalid_argument("jacobian: value count does not match grid");
    Eigen::MatrixXd j = nodal_matrix(op);
    for (std::size_t i = 0; i < n; ++i) j(i, i) -= rhs_df_ds(op.grid.node(i), s_nodes[i], p, schedule);
    return j;
}

// ============================================================================
// Damped Newton driver
// ============================================================================

namespace detail {

struct NewtonOutcome {
    bool converged = false;
    std::size_t iterations = 0;
    double residual_sup = std::numeric_limits<double>::infinity();
};

/// residual_fn(state) -> (residual vector, rhs sup used in the stopping
/// scale); jacobian_fn(state) -> matrix; clamp_fn projects onto the feasible
/// box. Iterates in place.
template <typename ResidualFn, typename JacobianFn, typename ClampFn>
NewtonOutcome damped_newton(Eigen::VectorXd& state, ResidualFn&& residual_fn, JacobianFn&& jacobian_fn,
                            ClampFn&& clamp_fn, const SolveConfig& config) {
    NewtonOutcome outcome;
    clamp_fn(state);
    auto [r, f_sup] = residual_fn(state);
    for (std::size_t iter = 0; iter <= config.max_iterations; ++iter) {
        outcome.residual_sup = r.template lpNorm<Eigen::Infinity>();
        outcome.iterations = iter;
        if (outcome.residual_sup <= config.newton_tol * (1.0 + f_sup)) {
            outcome.converged = true;
            return outcome;
        }
        if (iter == config.max_iterations) break;

        Eigen::MatrixXd j = jacobian_fn(state);
        Eigen::VectorXd delta;
        const double r_norm = r.norm();
        bool solved = false;
        for (int attempt = 0; attempt < 2 && !solved; ++attempt) {
            if (attempt == 1) j.diagonal().array() += 1e-12;
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(j);
            delta = lu.solve(-r);
            solved = delta.allFinite() && (j * delta + r).norm() <= 1e-6 * r_norm;
        }
        if (!solved) break;

        bool accepted = false;
        for (double step = 1.0; step >= config.min_step; step *= config.backtrack_factor) {
            Eigen::VectorXd candidate = state + step * delta;
            clamp_fn(candidate);
            auto [r_cand, f_cand] = residual_fn(candidate);
            if (r_cand.norm() <= (1.0 - 1e-4 * step) * r_norm) {
                state = std::move(candidate);
                r = std::move(r_cand);
                f_sup = f_cand;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    return outcome;
}

}  // namespace detail

// ============================================================================
// 1-D solve
// ============================================================================

[[nodiscard]] inline PeriodicSolution solve(std::span<const double> initial_guess, const ChemostatParams& p,
                                            const DilutionSchedule& schedule, const SolveConfig& config,
                                            const CfdsOperator& op) {
    p.validate();
    config.validate();
    const std::size_t n = op.grid.size();
    if (initial_guess.size() != n) throw std::invalid_argument("solve: guess length does not match grid");

    Eigen::VectorXd state(n);
    for (std::size_t j = 0; j < n; ++j) state(static_cast<Eigen::Index>(j)) = initial_guess[j];

    const auto clamp_fn = [&p](Eigen::VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::clamp(v(i), 0.0, p.s_in);
    };
    const auto residual_fn = [&](const Eigen::VectorXd& v) {
        std::vector<double> s(v.data(), v.data() + v.size());
        std::vector<double> cfds = fracstat::apply(op, s);
        Eigen::VectorXd r(v.size());
        double f_sup = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            const double f = rhs_f(op.grid.node(j), s[j], p, schedule);
            f_sup = std::max(f_sup, std::abs(f));
            r(static_cast<Eigen::Index>(j)) = cfds[j] - f;
        }
        return std::make_pair(std::move(r), f_sup);
    };
    const auto jacobian_fn = [&](const Eigen::VectorXd& v) {
        std::vector<double> s(v.data(), v.data() + v.size());
        return jacobian(s, p, schedule, op);
    };

    const auto outcome = detail::damped_newton(state, residual_fn, jacobian_fn, clamp_fn, config);

    PeriodicSolution sol;
    sol.grid = op.grid;
    sol.s_nodes.assign(state.data(), state.data() + state.size());
    sol.x_nodes = biomass_from_substrate(sol.s_nodes, p);
    sol.residual_sup = outcome.residual_sup;
    sol.iterations = outcome.iterations;
    if (!outcome.converged) {
        sol.classification = Classification::NotConverged;
    } else {
        double washout_gap = 0.0;
        for (double s : sol.s_nodes) washout_gap = std::max(washout_gap, std::abs(s - p.s_in));
        sol.classification = (washout_gap <= config.trivial_threshold) ? Classification::TrivialWashout
                                                                       : Classification::NonTrivial;
    }
    sol.s_at_zero = sol.s_nodes.empty() ? std::numeric_limits<double>::quiet_NaN() : sol.s_nodes[0];
    return sol;
}

[[nodiscard]] inline PeriodicSolution solve(std::span<const double> initial_guess, const ChemostatParams& p,
                                            const DilutionSchedule& schedule, const SolveConfig& config) {
    const PeriodicGrid grid(config.node_count, p.period);
    const CfdsOperator op = build_operator(grid, p.alpha, p.memory_length);
    return solve(initial_guess, p, schedule, config, op);
}

// ============================================================================
// Multistart
// ============================================================================

/// Elementwise-uniform guess on [0, s_in]; each start draws from its own
/// generator seeded seed + start_index, so results are scheduling-independent.
[[nodiscard]] inline std::vector<double> uniform_guess(std::uint64_t seed, std::size_t start_index, std::size_t n,
                                                       double s_in) {
    std::mt19937_64 engine(seed + start_index);
    std::vector<double> g(n);
    for (double& v : g) v = static_cast<double>(engine() >> 11) * 0x1.0p-53 * s_in;
    return g;
}

inline constexpr double kClusterRadius = 1e-6;

struct SolutionBucket {
    std::size_t representative = 0;  // index into solutions
    std::size_t count = 0;
    Classification classification = Classification::NotConverged;
};

struct MultistartResult {
    std::vector<PeriodicSolution> solutions;
    std::vector<SolutionBucket> buckets;  // converged solutions only
    std::size_t not_converged = 0;
};

[[nodiscard]] inline MultistartResult multistart_from_guesses(std::span<const std::vector<double>> guesses,
                                                              const ChemostatParams& p,
                                                              const DilutionSchedule& schedule,
                                                              const SolveConfig& config) {
    const PeriodicGrid grid(config.node_count, p.period);
    const CfdsOperator op = build_operator(grid, p.alpha, p.memory_length);
    MultistartResult result;
    result.solutions.reserve(guesses.size());
    for (const auto& guess : guesses) {
        result.solutions.push_back(solve(guess, p, schedule, config, op));
    }
    for (std::size_t i = 0; i < result.solutions.size(); ++i) {
        const auto& sol = result.solutions[i];
        if (sol.classification == Classification::NotConverged) {
            ++result.not_converged;
            continue;
        }
        bool placed = false;
        for (auto& bucket : result.buckets) {
            const auto& rep = result.solutions[bucket.representative].s_nodes;
            double dist = 0.0;
            for (std::size_t j = 0; j < rep.size(); ++j) dist = std::max(dist, std::abs(rep[j] - sol.s_nodes[j]));
            if (dist <= kClusterRadius) {
                ++bucket.count;
                placed = true;
                break;
            }
        }
        if (!placed) result.buckets.push_back({i, 1, sol.classification});
    }
    return result;
}

[[nodiscard]] inline MultistartResult multistart(std::size_t n_starts, const ChemostatParams& p,
                                                 const DilutionSchedule& schedule, const SolveConfig& config) {
    if (n_starts == 0) throw std::domain_error("multistart: n_starts must be positive");
    std::vector<std::vector<double>> guesses;
    guesses.reserve(n_starts);
    for (std::size_t i = 0; i < n_starts; ++i) {
        guesses.push_back(uniform_guess(config.seed, i, config.node_count, p.s_in));
    }
    return multistart_from_guesses(guesses, p, schedule, config);
}

// ============================================================================
// Dense interpolation
// ============================================================================

/// Trigonometric interpolation of nodal values onto t_j = jT/M, j = 0..M-1.
[[nodiscard]] inline std::vector<double> interpolate(const PeriodicGrid& grid, std::span<const double> nodal,
                                                     std::size_t m) {
    if (m == 0) throw std::domain_error("interpolate: M must be positive");
    const TrigInterpolant interp(grid, nodal);
    std::vector<double> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        out[j] = interp.value(grid.period() * static_cast<double>(j) / static_cast<double>(m));
    }
    return out;
}

[[nodiscard]] inline std::vector<double> interpolate(const PeriodicSolution& sol, std::size_t m) {
    return interpolate(sol.grid, sol.s_nodes, m);
}

// ============================================================================
// Coupled 2-D solve (reduction witness)
// ============================================================================

struct Solution2d {
    PeriodicGrid grid{4, 1.0};
    std::vector<double> s_nodes;
    std::vector<double> x_nodes;
    double z_sup = std::numeric_limits<double>::infinity();
    double residual_sup = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    Classification classification = Classification::NotConverged;
};

namespace detail {

struct ContoisLocal {
    double mu = 0.0;
    double dmu_ds = 0.0;
    double dmu_dx = 0.0;
};

[[nodiscard]] inline ContoisLocal contois_with_partials(double s, double x, const ChemostatParams& p) {
    ContoisLocal out;
    const double den = p.saturation * x + s;
    if (den <= 0.0) return out;
    out.mu = p.mu_max * s / den;
    out.dmu_ds = p.mu_max * p.saturation * x / (den * den);
    out.dmu_dx = -p.mu_max * p.saturation * s / (den * den);
    return out;
}

}  // namespace detail

[[nodiscard]] inline Solution2d solve_2d(std::span<const double> initial_s, std::span<const double> initial_x,
                                         const ChemostatParams& p, const DilutionSchedule& schedule,
                                         const SolveConfig& config) {
    p.validate();
    config.validate();
    const std::size_t n = config.node_count;
    if (initial_s.size() != n || initial_x.size() != n) {
        throw std::invalid_argument("solve_2d: guess length does not match node_count");
    }
    const PeriodicGrid grid(n, p.period);
    const CfdsOperator op = build_operator(grid, p.alpha, p.memory_length);
    const Eigen::MatrixXd a = nodal_matrix(op);
    const double scale = p.theta_power();
    const double x_cap = p.yield * p.s_in;

    Eigen::VectorXd state(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
        state(static_cast<Eigen::Index>(j)) = initial_s[j];
        state(static_cast<Eigen::Index>(n + j)) = initial_x[j];
    }

    const auto clamp_fn = [&](Eigen::VectorXd& v) {
        for (std::size_t j = 0; j < n; ++j) {
            auto& s = v(static_cast<Eigen::Index>(j));
            auto& x = v(static_cast<Eigen::Index>(n + j));
            s = std::clamp(s, 0.0, p.s_in);
            x = std::clamp(x, 0.0, x_cap);
        }
    };
    const auto residual_fn = [&](const Eigen::VectorXd& v) {
        std::vector<double> s(n), x(n);
        for (std::size_t j = 0; j < n; ++j) {
            s[j] = v(static_cast<Eigen::Index>(j));
            x[j] = v(static_cast<Eigen::Index>(n + j));
        }
        const std::vector<double> cfds_s = fracstat::apply(op, s);
        const std::vector<double> cfds_x = fracstat::apply(op, x);
        Eigen::VectorXd r(2 * n);
        double f_sup = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = schedule.evaluate(grid.node(j));
            const auto local = detail::contois_with_partials(s[j], x[j], p);
            const double g1 = scale * (d * (p.s_in - s[j]) - local.mu * x[j] / p.yield);
            const double g2 = scale * (local.mu - d) * x[j];
            f_sup = std::max({f_sup, std::abs(g1), std::abs(g2)});
            r(static_cast<Eigen::Index>(j)) = cfds_s[j] - g1;
            r(static_cast<Eigen::Index>(n + j)) = cfds_x[j] - g2;
        }
        return std::make_pair(std::move(r), f_sup);
    };
    const auto jacobian_fn = [&](const Eigen::VectorXd& v) {
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        j.topLeftCorner(n, n) = a;
        j.bottomRightCorner(n, n) = a;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = v(static_cast<Eigen::Index>(i));
            const double x = v(static_cast<Eigen::Index>(n + i));
            const double d = schedule.evaluate(grid.node(i));
            const auto local = detail::contois_with_partials(s, x, p);
            const double dg1_ds = scale * (-d - x * local.dmu_ds / p.yield);
            const double dg1_dx = scale * (-(local.mu + x * local.dmu_dx) / p.yield);
            const double dg2_ds = scale * x * local.dmu_ds;
            const double dg2_dx = scale * (local.mu - d + x * local.dmu_dx);
            const auto ei = static_cast<Eigen::Index>(i);
            const auto ni = static_cast<Eigen::Index>(n + i);
            j(ei, ei) -= dg1_ds;
            j(ei, ni) = -dg1_dx;
            j(ni, ei) = -dg2_ds;
            j(ni, ni) -= dg2_dx;
        }
        return j;
    };

    const auto outcome = detail::damped_newton(state, residual_fn, jacobian_fn, clamp_fn, config);

    Solution2d sol;
    sol.grid = grid;
    sol.s_nodes.resize(n);
    sol.x_nodes.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        sol.s_nodes[j] = state(static_cast<Eigen::Index>(j));
        sol.x_nodes[j] = state(static_cast<Eigen::Index>(n + j));
    }
    sol.residual_sup = outcome.residual_sup;
    sol.iterations = outcome.iterations;
    sol.z_sup = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        sol.z_sup = std::max(sol.z_sup, std::abs(p.yield * (p.s_in - sol.s_nodes[j]) - sol.x_nodes[j]));
    }
    if (!outcome.converged) {
        sol.classification = Classification::NotConverged;
    } else {
        double washout_gap = 0.0;
        for (double s : sol.s_nodes) washout_gap = std::max(washout_gap, std::abs(s - p.s_in));
        sol.classification = (washout_gap <= config.trivial_threshold) ? Classification::TrivialWashout
                                                                       : Classification::NonTrivial;
    }
    return sol;
}

/// | integral_0^T z * (D^alpha z) dt + theta^{1-alpha} integral_0^T D z^2 dt |
/// on the periodic grid (rectangle rule, exact for trigonometric data).
[[nodiscard]] inline double energy_residual(std::span<const double> s_nodes, std::span<const double> x_nodes,
                                            const ChemostatParams& p, const DilutionSchedule& schedule,
                                            const CfdsOperator& op) {
    const std::vector<double> z = z_transform(s_nodes, x_nodes, p);
    const std::vector<double> cfds_z = fracstat::apply(op, z);
    const double weight = op.grid.period() / static_cast<double>(op.grid.size());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double d = schedule.evaluate(op.grid.node(j));
        lhs += z[j] * cfds_z[j];
        rhs += d * z[j] * z[j];
    }
    return std::abs(weight * (lhs + p.theta_power() * rhs));
}

// ============================================================================
// Integral-form residual (independent of the collocation residual)
// ============================================================================

/// sup_j | s(t_j - L + kT) + I^alpha[f(., s(.))](t_j) - s(t_j) | with k the
/// smallest integer placing the shifted time in [0, T]. The integrand uses
/// the exact schedule (split at its jumps) and the trigonometric interpolant
/// of s clamped to [0, s_in].
[[nodiscard]] inline double volterra_residual(const PeriodicSolution& sol, const ChemostatParams& p,
                                              const DilutionSchedule& schedule) {
    const PeriodicGrid& grid = sol.grid;
    const double period = grid.period();
    const double memory = p.memory_length;
    const TrigInterpolant interp(grid, sol.s_nodes);
    const auto f_of = [&](double tau) {
        const double s = std::clamp(interp.value(tau), 0.0, p.s_in);
        return rhs_f(tau, s, p, schedule);
    };
    const std::vector<double> base_jumps = schedule.discontinuities();

    double sup = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double t = grid.node(j);
        const double k = std::ceil((memory - t) / period);
        const double shifted = t - memory + k * period;
        std::vector<double> jumps;
        const long long n_lo = static_cast<long long>(std::floor((t - memory) / period)) - 1;
        const long long n_hi = static_cast<long long>(std::ceil(t / period)) + 1;
        for (double d : base_jumps) {
            for (long long nn = n_lo; nn <= n_hi; ++nn) {
                jumps.push_back(d + static_cast<double>(nn) * period);
            }
        }
        const double integral = sliding_rl_piecewise(f_of, p.alpha, memory, t, jumps);
        const double lhs = interp.value(shifted) + integral;
        sup = std::max(sup, std::abs(lhs - sol.s_nodes[j]));
    }
    return sup;
}

/// Sup over the nodes of the mode-by-mode prediction of the integral-form
/// defect of a converged collocation solution: each mode coefficient is
/// multiplied by the window-shift defect of its frequency.
[[nodiscard]] inline double volterra_defect_predicted(const PeriodicSolution& sol, const ChemostatParams& p) {
    const PeriodicGrid& grid = sol.grid;
    const std::size_t n = grid.size();
    const TrigInterpolant interp(grid, sol.s_nodes);
    std::vector<std::complex<double>> weighted(n / 2 + 1, 0.0);
    for (std::size_t k = 1; k < n / 2; ++k) {
        const std::complex<double> coeff(0.5 * interp.cosine_coefficient(k), -0.5 * interp.sine_coefficient(k));
        weighted[k] = coeff * window_shift_defect(p.alpha, p.memory_length, grid.frequency(static_cast<long long>(k)));
    }
    {
        const double w_ny = grid.frequency(-static_cast<long long>(n / 2));
        const std::complex<double> defect_ny =
            memory_multiplier(p.alpha, p.memory_length, w_ny).real() * rl_multiplier(p.alpha, p.memory_length, w_ny) -
            (1.0 - std::polar(1.0, -w_ny * p.memory_length));
        weighted[n / 2] = interp.nyquist_coefficient() * defect_ny;
    }
    double sup = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double t = grid.node(j);
        double defect = 0.0;
        for (std::size_t k = 1; k < n / 2; ++k) {
            const double angle = grid.frequency(static_cast<long long>(k)) * t;
            defect += 2.0 * (weighted[k] * std::polar(1.0, angle)).real();
        }
        const double angle_ny = grid.frequency(-static_cast<long long>(n / 2)) * t;
        defect += (weighted[n / 2] * std::polar(1.0, angle_ny)).real();
        sup = std::max(sup, std::abs(defect));
    }
    return sup;
}

}  // namespace fracstat
