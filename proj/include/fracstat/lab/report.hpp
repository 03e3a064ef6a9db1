#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "fracstat/cfds.hpp"
#include "fracstat/chemostat.hpp"
#include "fracstat/lab/scenario.hpp"
#include "fracstat/solver.hpp"

namespace fracstat::lab {

// ============================================================================
// Report data model
// ============================================================================

/// One solve inside a study. Nodal vectors are kept only for solves whose
/// series are reported: single solves, sweep points, bucket representatives.
struct SolveRecord {
    std::string label;
    double parameter_value = std::numeric_limits<double>::quiet_NaN();  // sweep value
    Classification classification = Classification::NotConverged;
    double residual_sup = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    double s_at_zero = std::numeric_limits<double>::quiet_NaN();
    double min_s = std::numeric_limits<double>::quiet_NaN();
    double max_s = std::numeric_limits<double>::quiet_NaN();
    double min_x = std::numeric_limits<double>::quiet_NaN();
    bool has_nodes = false;
    std::vector<double> s_nodes;
    std::vector<double> x_nodes;
    std::vector<double> residual_nodes;
    double volterra_measured = std::numeric_limits<double>::quiet_NaN();
    double volterra_predicted = std::numeric_limits<double>::quiet_NaN();
};

struct BucketSummary {
    std::string label;
    std::size_t record_index = 0;  // representative's index into records
    std::size_t count = 0;
    Classification classification = Classification::NotConverged;

    [[nodiscard]] bool operator==(const BucketSummary&) const = default;
};

/// Dense output on the interpolation grid t_i = i*T/M, i = 0 .. M-1.
struct SeriesBlock {
    std::string label;
    std::vector<double> t;
    std::vector<double> s;
    std::vector<double> x;
    std::vector<double> d;

    [[nodiscard]] bool operator==(const SeriesBlock&) const = default;
};

enum class CheckStatus { Pass, Fail, NotApplicable };

[[nodiscard]] inline std::string to_string(CheckStatus status) {
    switch (status) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::NotApplicable: return "not-applicable";
    }
    throw std::logic_error("unknown check status");
}

[[nodiscard]] inline CheckStatus check_status_from(std::string_view text) {
    if (text == "pass") return CheckStatus::Pass;
    if (text == "fail") return CheckStatus::Fail;
    if (text == "not-applicable") return CheckStatus::NotApplicable;
    throw std::runtime_error("unknown check status '" + std::string(text) + "'");
}

struct CheckResult {
    std::string name;
    std::string subject;  // record label, or "study" for study-level checks
    CheckStatus status = CheckStatus::NotApplicable;
    double measured = std::numeric_limits<double>::quiet_NaN();
    double bound = std::numeric_limits<double>::quiet_NaN();
    std::string detail;
};

struct RunReport {
    Scenario scenario;
    std::uint64_t seed = 0;
    std::vector<SolveRecord> records;
    std::vector<BucketSummary> buckets;
    std::size_t not_converged = 0;
    std::vector<SeriesBlock> series;
    std::vector<CheckResult> checks;
    bool converged = false;  // every solve in the study converged
    bool passed = false;     // no check failed
};

// ============================================================================
// Running a study
// ============================================================================

namespace detail {

[[nodiscard]] inline CheckResult make_check(std::string name, std::string subject) {
    CheckResult c;
    c.name = std::move(name);
    c.subject = std::move(subject);
    return c;
}

[[nodiscard]] inline std::vector<double> default_guess(const ChemostatParams& p, const DilutionSchedule& schedule,
                                                       std::size_t n) {
    const EquilibriumReport eq = equilibrium(p, schedule);
    return std::vector<double>(n, eq.exists ? eq.s_bar : p.s_in);
}

[[nodiscard]] inline SolveRecord record_from(const PeriodicSolution& sol, std::string label,
                                             const ChemostatParams& p, const DilutionSchedule& schedule,
                                             const CfdsOperator& op, bool keep_nodes) {
    SolveRecord rec;
    rec.label = std::move(label);
    rec.classification = sol.classification;
    rec.residual_sup = sol.residual_sup;
    rec.iterations = sol.iterations;
    rec.s_at_zero = sol.s_at_zero;
    rec.min_s = *std::min_element(sol.s_nodes.begin(), sol.s_nodes.end());
    rec.max_s = *std::max_element(sol.s_nodes.begin(), sol.s_nodes.end());
    rec.min_x = *std::min_element(sol.x_nodes.begin(), sol.x_nodes.end());
    if (keep_nodes) {
        rec.has_nodes = true;
        rec.s_nodes = sol.s_nodes;
        rec.x_nodes = sol.x_nodes;
        rec.residual_nodes = residual(sol.s_nodes, p, schedule, op);
        if (sol.classification != Classification::NotConverged) {
            rec.volterra_measured = volterra_residual(sol, p, schedule);
            rec.volterra_predicted = volterra_defect_predicted(sol, p);
        }
    }
    return rec;
}

[[nodiscard]] inline SeriesBlock series_from(const PeriodicSolution& sol, const ChemostatParams& p,
                                             const DilutionSchedule& schedule, std::size_t m, std::string label) {
    SeriesBlock block;
    block.label = std::move(label);
    block.t.resize(m);
    const double period = sol.grid.period();
    for (std::size_t i = 0; i < m; ++i) {
        block.t[i] = period * static_cast<double>(i) / static_cast<double>(m);
    }
    block.s = interpolate(sol, m);
    block.x = biomass_from_substrate(block.s, p);
    block.d.resize(m);
    for (std::size_t i = 0; i < m; ++i) block.d[i] = schedule.evaluate(block.t[i]);
    return block;
}

/// Model parameters a record was solved with: sweep records override one field.
[[nodiscard]] inline ChemostatParams effective_params(const Scenario& scenario, const SolveRecord& rec) {
    ChemostatParams p = scenario.params;
    if (scenario.study.kind == StudyKind::Sweep && std::isfinite(rec.parameter_value)) {
        switch (scenario.study.parameter) {
            case SweepParameter::Alpha: p.alpha = rec.parameter_value; break;
            case SweepParameter::MemoryLength: p.memory_length = rec.parameter_value; break;
            case SweepParameter::Theta: p.theta = rec.parameter_value; break;
        }
    }
    return p;
}

}  // namespace detail

// ============================================================================
// Verification: every check is recomputed from the data embedded in the
// report, so a saved report can be re-verified without its solver state.
// ============================================================================

inline constexpr double kResidualBoundSmooth = 1e-10;
inline constexpr double kResidualBoundJumpy = 1e-8;
inline constexpr double kMeshRefinementBound = 1e-8;
inline constexpr double kAnchorBoundFactor = 0.1;  // of s_in

[[nodiscard]] inline std::vector<CheckResult> verify(const RunReport& report) {
    const Scenario& scenario = report.scenario;
    const DilutionSchedule& schedule = scenario.schedule;
    const bool smooth = schedule.discontinuities().empty();
    std::vector<CheckResult> checks;

    for (const SolveRecord& rec : report.records) {
        if (!rec.has_nodes || rec.classification == Classification::NotConverged) continue;
        const ChemostatParams p = detail::effective_params(scenario, rec);
        if (rec.s_nodes.size() < 4 || rec.s_nodes.size() % 2 != 0 || rec.x_nodes.size() != rec.s_nodes.size()) {
            CheckResult c = detail::make_check("record-integrity", rec.label);
            c.status = CheckStatus::Fail;
            c.detail = "stored node vectors are not a valid even-length grid";
            checks.push_back(std::move(c));
            continue;
        }
        const PeriodicGrid grid(rec.s_nodes.size(), p.period);
        const CfdsOperator op = build_operator(grid, p.alpha, p.memory_length);

        {
            CheckResult c = detail::make_check("bounded-in-domain", rec.label);
            double margin = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < rec.s_nodes.size(); ++j) {
                margin = std::min({margin, rec.s_nodes[j], p.s_in - rec.s_nodes[j], rec.x_nodes[j],
                                   p.yield * p.s_in - rec.x_nodes[j]});
            }
            c.measured = margin;
            c.bound = 0.0;
            c.status = margin >= 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
            c.detail = "min distance of (s, x) to the box [0, s_in] x [0, Y*s_in]";
            checks.push_back(std::move(c));
        }
        {
            CheckResult c = detail::make_check("strict-positivity", rec.label);
            if (rec.classification != Classification::NonTrivial) {
                c.status = CheckStatus::NotApplicable;
                c.detail = "solution is the washout state";
            } else if (!(schedule.max() < p.mu_max)) {
                c.status = CheckStatus::NotApplicable;
                c.detail = "dilution exceeds the growth ceiling somewhere, persistence not expected";
            } else {
                double margin = std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < rec.s_nodes.size(); ++j) {
                    margin = std::min({margin, rec.s_nodes[j], p.s_in - rec.s_nodes[j], rec.x_nodes[j]});
                }
                c.measured = margin;
                c.bound = 0.0;
                c.status = margin > 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
                c.detail = "strict interior margin of s in (0, s_in) and x > 0";
            }
            checks.push_back(std::move(c));
        }
        {
            // out-of-domain node data counts as a failure, not a crash
            CheckResult c = detail::make_check("differential-residual", rec.label);
            c.bound = smooth ? kResidualBoundSmooth : kResidualBoundJumpy;
            try {
                const std::vector<double> r = residual(rec.s_nodes, p, schedule, op);
                double sup = 0.0;
                for (const double v : r) sup = std::max(sup, std::abs(v));
                c.measured = sup;
                c.status = sup <= c.bound ? CheckStatus::Pass : CheckStatus::Fail;
                c.detail = "collocation residual recomputed from the stored nodes";
            } catch (const std::exception& error) {
                c.status = CheckStatus::Fail;
                c.detail = error.what();
            }
            checks.push_back(std::move(c));
        }
        {
            // The memory operator and the sliding integral do not invert each
            // other over a finite window, so the integral-form defect of a
            // converged solution is large; what must hold is that it matches
            // the mode-by-mode prediction from the stored spectrum.
            CheckResult c = detail::make_check("volterra-consistency", rec.label);
            if (!smooth) {
                c.status = CheckStatus::NotApplicable;
                c.detail = "schedule jumps alias the nodal forcing, mode prediction assumes a band-limited rhs";
            } else {
                PeriodicSolution sol;
                sol.grid = grid;
                sol.s_nodes = rec.s_nodes;
                sol.x_nodes = rec.x_nodes;
                sol.classification = rec.classification;
                const double measured =
                    std::isfinite(rec.volterra_measured) ? rec.volterra_measured : volterra_residual(sol, p, schedule);
                const double predicted = volterra_defect_predicted(sol, p);
                c.measured = std::abs(measured - predicted);
                c.bound = 1e-6 + 1e-3 * predicted;
                c.status = c.measured <= c.bound ? CheckStatus::Pass : CheckStatus::Fail;
                c.detail = "measured " + config::format_double(measured) + " vs predicted " +
                           config::format_double(predicted);
            }
            checks.push_back(std::move(c));
        }
        {
            CheckResult c = detail::make_check("equilibrium-anchor", rec.label);
            const EquilibriumReport eq = equilibrium(p, schedule);
            if (rec.classification != Classification::NonTrivial || !eq.exists) {
                c.status = CheckStatus::NotApplicable;
                c.detail = "no interior equilibrium to anchor to";
            } else {
                const double mean =
                    std::accumulate(rec.s_nodes.begin(), rec.s_nodes.end(), 0.0) / static_cast<double>(rec.s_nodes.size());
                c.measured = std::abs(mean - eq.s_bar);
                c.bound = kAnchorBoundFactor * p.s_in;
                c.status = c.measured <= c.bound ? CheckStatus::Pass : CheckStatus::Fail;
                c.detail = "distance of mean(s) from the mean-dilution equilibrium";
            }
            checks.push_back(std::move(c));
        }
        {
            CheckResult c = detail::make_check("mesh-refinement", rec.label);
            if (!smooth) {
                c.status = CheckStatus::NotApplicable;
                c.detail = "schedule has jumps, spectral refinement comparison not meaningful";
            } else {
                c.bound = kMeshRefinementBound;
                try {
                    const std::size_t fine_n = 2 * rec.s_nodes.size();
                    const std::vector<double> fine_guess = interpolate(grid, rec.s_nodes, fine_n);
                    const PeriodicGrid fine_grid(fine_n, p.period);
                    const CfdsOperator fine_op = build_operator(fine_grid, p.alpha, p.memory_length);
                    const PeriodicSolution fine = solve(fine_guess, p, schedule, scenario.config, fine_op);
                    double sup = 0.0;
                    for (std::size_t j = 0; j < fine_n; ++j) {
                        sup = std::max(sup, std::abs(fine.s_nodes[j] - fine_guess[j]));
                    }
                    c.measured = sup;
                    c.status = fine.classification != Classification::NotConverged && sup <= c.bound
                                   ? CheckStatus::Pass
                                   : CheckStatus::Fail;
                    c.detail = "sup change of s when the node count doubles";
                } catch (const std::exception& error) {
                    c.status = CheckStatus::Fail;
                    c.detail = error.what();
                }
            }
            checks.push_back(std::move(c));
        }
    }

    {
        CheckResult c = detail::make_check("convergence", "study");
        c.measured = static_cast<double>(report.not_converged);
        c.bound = 0.0;
        c.status = report.not_converged == 0 ? CheckStatus::Pass : CheckStatus::Fail;
        c.detail = "number of starts that failed to converge";
        checks.push_back(std::move(c));
    }
    if (scenario.study.kind == StudyKind::Washout) {
        CheckResult c = detail::make_check("washout-dichotomy", "study");
        std::size_t interior = 0;
        for (const BucketSummary& b : report.buckets) {
            if (b.classification != Classification::TrivialWashout) ++interior;
        }
        c.measured = static_cast<double>(interior);
        c.bound = 0.0;
        c.status = interior == 0 ? CheckStatus::Pass : CheckStatus::Fail;
        c.detail = "buckets that are not the washout state under washout parameters";
        checks.push_back(std::move(c));
    }
    if (scenario.study.kind == StudyKind::Multistart || scenario.study.kind == StudyKind::Washout) {
        CheckResult c = detail::make_check("uniqueness-collapse", "study");
        if (!(schedule.max() <= nu_s_star(scenario.params))) {
            c.status = CheckStatus::NotApplicable;
            c.detail = "dilution exceeds the uptake peak, uniqueness certificate out of scope";
        } else {
            const double threshold = s_star(scenario.params);
            std::size_t certified = 0;
            for (const BucketSummary& b : report.buckets) {
                if (b.classification != Classification::NonTrivial) continue;
                const SolveRecord& rep = report.records[b.record_index];
                if (rep.s_at_zero <= threshold) ++certified;
            }
            c.measured = static_cast<double>(certified);
            c.bound = 1.0;
            c.status = certified <= 1 ? CheckStatus::Pass : CheckStatus::Fail;
            c.detail = "interior buckets starting below the uptake-peak substrate level";
        }
        checks.push_back(std::move(c));
    }
    return checks;
}

[[nodiscard]] inline bool all_checks_pass(const std::vector<CheckResult>& checks) {
    return std::none_of(checks.begin(), checks.end(),
                        [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

// ============================================================================
// Study execution
// ============================================================================

[[nodiscard]] inline RunReport run_scenario(const Scenario& scenario) {
    scenario.validate();
    RunReport report;
    report.scenario = scenario;
    report.seed = scenario.config.seed;
    const ChemostatParams& p = scenario.params;
    const DilutionSchedule& schedule = scenario.schedule;
    const SolveConfig& config = scenario.config;
    const std::size_t m = config.interpolation_count;

    switch (scenario.study.kind) {
        case StudyKind::Single:
        case StudyKind::BangBang: {
            const PeriodicGrid grid(config.node_count, p.period);
            const CfdsOperator op = build_operator(grid, p.alpha, p.memory_length);
            const std::vector<double> guess = detail::default_guess(p, schedule, config.node_count);
            const PeriodicSolution sol = solve(guess, p, schedule, config, op);
            report.records.push_back(detail::record_from(sol, "solve", p, schedule, op, true));
            if (sol.classification != Classification::NotConverged) {
                report.series.push_back(detail::series_from(sol, p, schedule, m, "solve"));
            }
            break;
        }
        case StudyKind::Multistart:
        case StudyKind::Washout: {
            const PeriodicGrid grid(config.node_count, p.period);
            const CfdsOperator op = build_operator(grid, p.alpha, p.memory_length);
            const MultistartResult result = multistart(scenario.study.starts, p, schedule, config);
            report.not_converged = result.not_converged;
            std::vector<bool> keep(result.solutions.size(), false);
            for (const SolutionBucket& b : result.buckets) keep[b.representative] = true;
            for (std::size_t i = 0; i < result.solutions.size(); ++i) {
                report.records.push_back(detail::record_from(result.solutions[i], "start-" + std::to_string(i), p,
                                                             schedule, op, keep[i]));
            }
            for (std::size_t b = 0; b < result.buckets.size(); ++b) {
                const SolutionBucket& bucket = result.buckets[b];
                const std::string label = "bucket-" + std::to_string(b);
                report.buckets.push_back(
                    BucketSummary{label, bucket.representative, bucket.count, bucket.classification});
                report.series.push_back(
                    detail::series_from(result.solutions[bucket.representative], p, schedule, m, label));
            }
            break;
        }
        case StudyKind::Sweep: {
            for (const double value : scenario.study.values) {
                ChemostatParams pv = p;
                switch (scenario.study.parameter) {
                    case SweepParameter::Alpha: pv.alpha = value; break;
                    case SweepParameter::MemoryLength: pv.memory_length = value; break;
                    case SweepParameter::Theta: pv.theta = value; break;
                }
                pv.validate();
                const PeriodicGrid grid(config.node_count, pv.period);
                const CfdsOperator op = build_operator(grid, pv.alpha, pv.memory_length);
                const std::vector<double> guess = detail::default_guess(pv, schedule, config.node_count);
                const PeriodicSolution sol = solve(guess, pv, schedule, config, op);
                const std::string label = to_string(scenario.study.parameter) + "=" + config::format_double(value);
                SolveRecord rec = detail::record_from(sol, label, pv, schedule, op, true);
                rec.parameter_value = value;
                report.records.push_back(std::move(rec));
                if (sol.classification != Classification::NotConverged) {
                    report.series.push_back(detail::series_from(sol, pv, schedule, m, label));
                }
            }
            break;
        }
    }

    if (scenario.study.kind != StudyKind::Multistart && scenario.study.kind != StudyKind::Washout) {
        report.not_converged = static_cast<std::size_t>(
            std::count_if(report.records.begin(), report.records.end(), [](const SolveRecord& rec) {
                return rec.classification == Classification::NotConverged;
            }));
    }
    report.converged = report.not_converged == 0;
    report.checks = verify(report);
    report.passed = all_checks_pass(report.checks);
    return report;
}

}  // namespace fracstat::lab
