#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "fracstat/solver.hpp"
#include "support/properties.hpp"

using fracstat::ChemostatParams;
using fracstat::Classification;
using fracstat::DilutionSchedule;
using fracstat::PeriodicGrid;
using fracstat::SolveConfig;

namespace {

ChemostatParams baseline() { return ChemostatParams{}; }

DilutionSchedule baseline_schedule() { return DilutionSchedule::sinusoid(1.0, 0.5, 1.0); }

ChemostatParams washout_params() {
    auto p = baseline();
    p.mu_max = 0.25;
    p.saturation = 2.0;
    return p;
}

SolveConfig config_with(std::size_t n) {
    SolveConfig c;
    c.node_count = n;
    c.interpolation_count = 2 * n;
    return c;
}

std::vector<double> constant_nodes(std::size_t n, double value) { return std::vector<double>(n, value); }

double sup_distance(std::span<const double> a, std::span<const double> b) {
    double out = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) out = std::max(out, std::abs(a[j] - b[j]));
    return out;
}

}  // namespace

TEST_CASE("solve config validation") {
    REQUIRE_NOTHROW(SolveConfig{}.validate());
    SolveConfig c;
    c.node_count = 7;
    REQUIRE_THROWS_AS(c.validate(), std::domain_error);
    c = SolveConfig{};
    c.interpolation_count = 10;
    REQUIRE_THROWS_AS(c.validate(), std::domain_error);
    c = SolveConfig{};
    c.newton_tol = 0.0;
    REQUIRE_THROWS_AS(c.validate(), std::domain_error);
    c = SolveConfig{};
    c.backtrack_factor = 1.0;
    REQUIRE_THROWS_AS(c.validate(), std::domain_error);
}

TEST_CASE("collocation residual vanishes on exact constant solutions") {
    const auto p = baseline();
    const PeriodicGrid grid(32, p.period);
    const auto op = fracstat::build_operator(grid, p.alpha, p.memory_length);

    const auto washout = constant_nodes(32, p.s_in);
    for (const double r : fracstat::residual(washout, p, baseline_schedule(), op)) {
        REQUIRE(std::abs(r) <= 1e-12);
    }

    const auto report = fracstat::equilibrium(p, DilutionSchedule::constant(1.0, 1.0));
    const auto steady = constant_nodes(32, report.s_bar);
    for (const double r : fracstat::residual(steady, p, DilutionSchedule::constant(1.0, 1.0), op)) {
        REQUIRE(std::abs(r) <= 1e-12);
    }

    REQUIRE_THROWS_AS(fracstat::residual(constant_nodes(16, 0.5), p, baseline_schedule(), op), std::invalid_argument);
}

TEST_CASE("residual at the steady level under periodic forcing opposes the dilution swing") {
    const auto p = baseline();
    const auto schedule = baseline_schedule();
    const PeriodicGrid grid(32, p.period);
    const auto op = fracstat::build_operator(grid, p.alpha, p.memory_length);
    const auto report = fracstat::equilibrium(p, schedule);
    const auto r = fracstat::residual(constant_nodes(32, report.s_bar), p, schedule, op);
    for (std::size_t j = 0; j < 32; ++j) {
        const double t = grid.node(j);
        const double expected = -fracstat::rhs_f(t, report.s_bar, p, schedule);
        REQUIRE(r[j] == Catch::Approx(expected).margin(1e-12));
        const double swing = schedule.evaluate(t) - schedule.mean();
        if (std::abs(swing) > 0.01) {
            REQUIRE(r[j] * swing < 0.0);
        }
    }
}

TEST_CASE("nodal matrix realizes the spectral operator") {
    const auto p = baseline();
    const PeriodicGrid grid(16, p.period);
    const auto op = fracstat::build_operator(grid, p.alpha, p.memory_length);
    const Eigen::MatrixXd a = fracstat::nodal_matrix(op);
    std::mt19937_64 engine(5);
    std::vector<double> values(16);
    for (double& v : values) v = properties::unit_draw(engine) - 0.5;
    const auto spectral = fracstat::apply(op, values);
    Eigen::VectorXd vec(16);
    for (int j = 0; j < 16; ++j) vec(j) = values[static_cast<std::size_t>(j)];
    const Eigen::VectorXd direct = a * vec;
    for (int j = 0; j < 16; ++j) {
        REQUIRE(direct(j) == Catch::Approx(spectral[static_cast<std::size_t>(j)]).margin(1e-11));
    }
}

TEST_CASE("jacobian matches directional finite differences") {
    const auto p = baseline();
    const auto schedule = baseline_schedule();
    const std::size_t n = 32;
    const PeriodicGrid grid(n, p.period);
    const auto op = fracstat::build_operator(grid, p.alpha, p.memory_length);
    std::mt19937_64 engine(7);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> s(n), v(n);
        for (std::size_t j = 0; j < n; ++j) {
            s[j] = 0.05 + 0.9 * properties::unit_draw(engine);
            v[j] = properties::unit_draw(engine) - 0.5;
        }
        const double h = 1e-7;
        std::vector<double> plus(n), minus(n);
        for (std::size_t j = 0; j < n; ++j) {
            plus[j] = s[j] + h * v[j];
            minus[j] = s[j] - h * v[j];
        }
        const auto r_plus = fracstat::residual(plus, p, schedule, op);
        const auto r_minus = fracstat::residual(minus, p, schedule, op);
        const Eigen::MatrixXd jac = fracstat::jacobian(s, p, schedule, op);
        Eigen::VectorXd dir(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j) dir(static_cast<Eigen::Index>(j)) = v[j];
        const Eigen::VectorXd analytic = jac * dir;
        double worst = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double fd = (r_plus[j] - r_minus[j]) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - analytic(static_cast<Eigen::Index>(j))));
            scale = std::max(scale, std::abs(analytic(static_cast<Eigen::Index>(j))));
        }
        INFO("trial " << trial << ": worst " << worst << " scale " << scale);
        REQUIRE(worst <= 1e-6 * std::max(scale, 1.0));
    }
}

TEST_CASE("exact roots are accepted without iterating") {
    const auto p = baseline();
    const auto config = config_with(32);

    const auto washout = fracstat::solve(constant_nodes(32, p.s_in), p, baseline_schedule(), config);
    REQUIRE(washout.classification == Classification::TrivialWashout);
    REQUIRE(washout.iterations == 0);
    REQUIRE(washout.residual_sup <= 1e-12);
    REQUIRE(washout.s_at_zero == p.s_in);

    const auto constant_d = DilutionSchedule::constant(1.0, 1.0);
    const auto report = fracstat::equilibrium(p, constant_d);
    const auto steady = fracstat::solve(constant_nodes(32, report.s_bar), p, constant_d, config);
    REQUIRE(steady.classification == Classification::NonTrivial);
    REQUIRE(steady.iterations == 0);
    REQUIRE(sup_distance(steady.s_nodes, constant_nodes(32, report.s_bar)) == 0.0);
}

TEST_CASE("constant dilution converges to the closed-form equilibrium from a flat start") {
    const auto p = baseline();
    const auto constant_d = DilutionSchedule::constant(1.0, 1.0);
    const auto report = fracstat::equilibrium(p, constant_d);
    const auto sol = fracstat::solve(constant_nodes(32, 0.5), p, constant_d, config_with(32));
    REQUIRE(sol.classification == Classification::NonTrivial);
    REQUIRE(sup_distance(sol.s_nodes, constant_nodes(32, report.s_bar)) <= 1e-9);
}

TEST_CASE("baseline periodic solve from the steady guess") {
    const auto p = baseline();
    const auto schedule = baseline_schedule();
    const auto report = fracstat::equilibrium(p, schedule);
    const auto sol = fracstat::solve(constant_nodes(100, report.s_bar), p, schedule, config_with(100));

    REQUIRE(sol.classification == Classification::NonTrivial);
    REQUIRE(sol.residual_sup <= 1e-10);
    REQUIRE(sol.iterations > 0);
    REQUIRE(sol.s_at_zero >= 0.25);
    REQUIRE(sol.s_at_zero <= 0.30);
    double mean = 0.0;
    for (std::size_t j = 0; j < sol.s_nodes.size(); ++j) {
        REQUIRE(sol.s_nodes[j] > 0.0);
        REQUIRE(sol.s_nodes[j] < p.s_in);
        REQUIRE(sol.x_nodes[j] == p.yield * (p.s_in - sol.s_nodes[j]));
        mean += sol.s_nodes[j];
    }
    mean /= static_cast<double>(sol.s_nodes.size());
    REQUIRE(std::abs(mean - report.s_bar) <= 0.05);
    REQUIRE(fracstat::uniqueness_certified(sol.s_at_zero, p, schedule));
}

TEST_CASE("newton reports non-convergence instead of lying") {
    const auto p = baseline();
    auto config = config_with(32);
    config.max_iterations = 1;
    const auto sol = fracstat::solve(constant_nodes(32, 0.01), p, baseline_schedule(), config);
    REQUIRE(sol.classification == Classification::NotConverged);
    REQUIRE(sol.iterations == 1);
    REQUIRE(sol.residual_sup > 1e-12);
}

TEST_CASE("uniform guesses are reproducible and in range") {
    const auto a = fracstat::uniform_guess(42, 3, 16, 1.0);
    const auto b = fracstat::uniform_guess(42, 3, 16, 1.0);
    const auto c = fracstat::uniform_guess(42, 4, 16, 1.0);
    REQUIRE(a == b);
    REQUIRE(a != c);
    for (const double v : a) {
        REQUIRE(v >= 0.0);
        REQUIRE(v < 1.0);
    }
}

TEST_CASE("multistart buckets the two coexisting solutions") {
    const auto p = baseline();
    const auto schedule = baseline_schedule();
    auto config = config_with(64);
    std::vector<std::vector<double>> guesses;
    for (std::size_t i = 0; i < 4; ++i) guesses.push_back(fracstat::uniform_guess(config.seed, i, 64, p.s_in));
    guesses.push_back(constant_nodes(64, p.s_in - 1e-3));
    guesses.push_back(constant_nodes(64, 1.0 / 3.1));
    const auto result = fracstat::multistart_from_guesses(guesses, p, schedule, config);

    REQUIRE(result.not_converged == 0);
    REQUIRE(result.buckets.size() == 2);
    std::size_t total = 0;
    bool saw_nontrivial = false, saw_washout = false;
    for (const auto& bucket : result.buckets) {
        total += bucket.count;
        saw_nontrivial = saw_nontrivial || bucket.classification == Classification::NonTrivial;
        saw_washout = saw_washout || bucket.classification == Classification::TrivialWashout;
        REQUIRE(bucket.count >= 1);
    }
    REQUIRE(total == guesses.size());
    REQUIRE(saw_nontrivial);
    REQUIRE(saw_washout);
}

TEST_CASE("multistart is deterministic for a fixed seed") {
    const auto p = baseline();
    const auto schedule = baseline_schedule();
    auto config = config_with(32);
    config.seed = 2024;
    const auto first = fracstat::multistart(6, p, schedule, config);
    const auto second = fracstat::multistart(6, p, schedule, config);
    REQUIRE(first.solutions.size() == second.solutions.size());
    for (std::size_t i = 0; i < first.solutions.size(); ++i) {
        REQUIRE(first.solutions[i].s_nodes == second.solutions[i].s_nodes);
        REQUIRE(first.solutions[i].classification == second.solutions[i].classification);
    }
    REQUIRE(first.buckets.size() == second.buckets.size());
}

TEST_CASE("washout parameters send every start to the trivial state") {
    const auto p = washout_params();
    const auto result = fracstat::multistart(8, p, baseline_schedule(), config_with(32));
    REQUIRE(result.not_converged == 0);
    REQUIRE(result.buckets.size() == 1);
    REQUIRE(result.buckets[0].classification == Classification::TrivialWashout);
    REQUIRE(result.buckets[0].count == 8);
    REQUIRE(fracstat::washout_certified(p, baseline_schedule()));
}

TEST_CASE("dense interpolation reproduces nodes and refines band-limited data") {
    const PeriodicGrid grid(16, 1.0);
    std::vector<double> values(16);
    for (std::size_t j = 0; j < 16; ++j) {
        const double t = grid.node(j);
        values[j] = 0.3 + 0.2 * std::cos(2.0 * std::numbers::pi * t) - 0.1 * std::sin(4.0 * std::numbers::pi * t);
    }
    const auto identity = fracstat::interpolate(grid, values, 16);
    REQUIRE(sup_distance(identity, values) <= 1e-12);
    const auto fine = fracstat::interpolate(grid, values, 48);
    const fracstat::TrigInterpolant interp(grid, values);
    for (std::size_t j = 0; j < 48; ++j) {
        const double t = static_cast<double>(j) / 48.0;
        REQUIRE(fine[j] == Catch::Approx(interp.value(t)).margin(1e-12));
    }
    REQUIRE_THROWS_AS(fracstat::interpolate(grid, values, 0), std::domain_error);
}

TEST_CASE("coupled solve certifies the reduction on the baseline") {
    const auto p = baseline();
    const auto schedule = baseline_schedule();
    const auto config = config_with(64);
    const auto report = fracstat::equilibrium(p, schedule);
    const auto one_d = fracstat::solve(constant_nodes(64, report.s_bar), p, schedule, config);
    REQUIRE(one_d.classification == Classification::NonTrivial);

    const auto two_d = fracstat::solve_2d(constant_nodes(64, report.s_bar), constant_nodes(64, report.x_bar), p,
                                          schedule, config);
    REQUIRE(two_d.classification == Classification::NonTrivial);
    REQUIRE(two_d.z_sup <= 1e-8);
    REQUIRE(sup_distance(two_d.s_nodes, one_d.s_nodes) <= 1e-8);

    const auto op = fracstat::build_operator(two_d.grid, p.alpha, p.memory_length);
    REQUIRE(fracstat::energy_residual(two_d.s_nodes, two_d.x_nodes, p, schedule, op) <= 1e-8);
}

TEST_CASE("coupled solve sits exactly on the washout equilibrium") {
    const auto p = washout_params();
    const auto config = config_with(32);
    const auto sol = fracstat::solve_2d(constant_nodes(32, p.s_in), constant_nodes(32, 0.0), p, baseline_schedule(),
                                        config);
    REQUIRE(sol.classification == Classification::TrivialWashout);
    REQUIRE(sol.iterations == 0);
    REQUIRE(sol.z_sup <= 1e-10);
}

TEST_CASE("integral-form residual vanishes on exact constant solutions") {
    const auto p = baseline();
    const auto config = config_with(32);

    const auto washout = fracstat::solve(constant_nodes(32, p.s_in), p, baseline_schedule(), config);
    REQUIRE(fracstat::volterra_residual(washout, p, baseline_schedule()) <= 1e-10);

    const auto constant_d = DilutionSchedule::constant(1.0, 1.0);
    const auto report = fracstat::equilibrium(p, constant_d);
    const auto steady = fracstat::solve(constant_nodes(32, report.s_bar), p, constant_d, config);
    REQUIRE(fracstat::volterra_residual(steady, p, constant_d) <= 1e-10);
}

TEST_CASE("integral-form defect matches its mode-by-mode prediction") {
    const auto p = baseline();
    const auto schedule = baseline_schedule();
    const auto report = fracstat::equilibrium(p, schedule);
    const auto sol = fracstat::solve(constant_nodes(100, report.s_bar), p, schedule, config_with(100));
    REQUIRE(sol.classification == Classification::NonTrivial);

    const double measured = fracstat::volterra_residual(sol, p, schedule);
    const double predicted = fracstat::volterra_defect_predicted(sol, p);
    INFO("measured " << measured << " predicted " << predicted);
    // The window-shift identity fails for alpha < 1, so the integral-form
    // defect of a converged collocation solution is large and predictable.
    REQUIRE(predicted > 1e-3);
    REQUIRE(std::abs(measured - predicted) <= 1e-6 + 1e-3 * predicted);
}

TEST_CASE("integral-form residual is small in the classical limit") {
    auto p = baseline();
    p.alpha = 1.0;
    const auto schedule = baseline_schedule();
    const auto report = fracstat::equilibrium(p, schedule);
    const auto sol = fracstat::solve(constant_nodes(100, report.s_bar), p, schedule, config_with(100));
    REQUIRE(sol.classification == Classification::NonTrivial);
    REQUIRE(fracstat::volterra_residual(sol, p, schedule) <= 1e-7);
}

TEST_CASE("profiles at alpha just below one match the classical profile") {
    auto near = baseline();
    near.alpha = 1.0 - 1e-6;
    auto classical = baseline();
    classical.alpha = 1.0;
    const auto schedule = baseline_schedule();
    const auto config = config_with(64);
    const auto report = fracstat::equilibrium(near, schedule);
    const auto guess = constant_nodes(64, report.s_bar);
    const auto a = fracstat::solve(guess, near, schedule, config);
    const auto b = fracstat::solve(guess, classical, schedule, config);
    REQUIRE(a.classification == Classification::NonTrivial);
    REQUIRE(b.classification == Classification::NonTrivial);
    REQUIRE(sup_distance(a.s_nodes, b.s_nodes) <= 1e-3);
}

TEST_CASE("doubling the mesh leaves the smooth baseline solution unchanged") {
    const auto p = baseline();
    const auto schedule = baseline_schedule();
    const auto report = fracstat::equilibrium(p, schedule);
    const auto coarse = fracstat::solve(constant_nodes(100, report.s_bar), p, schedule, config_with(100));
    const auto fine = fracstat::solve(constant_nodes(200, report.s_bar), p, schedule, config_with(200));
    const auto coarse_dense = fracstat::interpolate(coarse, 200);
    REQUIRE(sup_distance(coarse_dense, fine.s_nodes) <= 1e-8);
}
