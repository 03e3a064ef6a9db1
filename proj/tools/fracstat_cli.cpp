#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fracstat/lab/export.hpp"
#include "fracstat/lab/report.hpp"
#include "fracstat/lab/scenario.hpp"

namespace {

using namespace fracstat;
using namespace fracstat::lab;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitUsage = 64;

[[nodiscard]] std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

[[nodiscard]] Scenario load_scenario(const std::string& arg) {
    if (std::filesystem::exists(arg)) return parse_scenario(read_file(arg), arg);
    return catalog_scenario(arg);
}

/// "first:last:step" inclusive range, or a plain comma-separated list.
[[nodiscard]] std::vector<double> parse_value_list(const std::string& text) {
    const std::size_t c1 = text.find(':');
    if (c1 == std::string::npos) return config::to_double_list(text, "--values");
    const std::size_t c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw std::runtime_error("--values range needs the form first:last:step");
    const double first = config::to_double(text.substr(0, c1), "--values");
    const double last = config::to_double(text.substr(c1 + 1, c2 - c1 - 1), "--values");
    const double step = config::to_double(text.substr(c2 + 1), "--values");
    if (!(step > 0.0)) throw std::runtime_error("--values step must be positive");
    if (last < first) throw std::runtime_error("--values range must be non-decreasing");
    const auto count = static_cast<long long>(std::llround((last - first) / step));
    const double landing = first + static_cast<double>(count) * step;
    if (std::abs(landing - last) > 1e-9 * std::max({1.0, std::abs(first), std::abs(last)})) {
        throw std::runtime_error("--values range does not divide into whole steps");
    }
    std::vector<double> values(static_cast<std::size_t>(count) + 1);
    for (long long i = 0; i <= count; ++i) {
        values[static_cast<std::size_t>(i)] = first + static_cast<double>(i) * step;
    }
    values.back() = last;
    return values;
}

[[nodiscard]] std::string status_tag(CheckStatus status) {
    switch (status) {
        case CheckStatus::Pass: return "[PASS]";
        case CheckStatus::Fail: return "[FAIL]";
        case CheckStatus::NotApplicable: return "[ N/A]";
    }
    return "[????]";
}

void print_checks(const std::vector<CheckResult>& checks) {
    std::cout << "checks:\n";
    for (const CheckResult& c : checks) {
        std::cout << "  " << status_tag(c.status) << ' ' << c.name << " (" << c.subject << ")";
        if (std::isfinite(c.measured)) {
            std::printf(": measured %.6g", c.measured);
            if (std::isfinite(c.bound)) std::printf(" vs bound %.6g", c.bound);
        }
        if (c.status == CheckStatus::NotApplicable && !c.detail.empty()) std::cout << ": " << c.detail;
        std::cout << '\n';
    }
}

void print_report(const RunReport& report, double elapsed_seconds) {
    const Scenario& sc = report.scenario;
    std::cout << "scenario " << sc.name << " (study " << to_string(sc.study.kind) << ", seed " << report.seed
              << ")\n";
    for (const SolveRecord& rec : report.records) {
        if (!rec.has_nodes) continue;
        std::cout << "  " << rec.label << ": " << to_string(rec.classification);
        if (std::isfinite(rec.residual_sup)) std::printf(", residual %.3g", rec.residual_sup);
        std::printf(", %zu iterations", rec.iterations);
        if (std::isfinite(rec.s_at_zero)) std::printf(", s(0) = %.6g", rec.s_at_zero);
        std::cout << '\n';
    }
    if (!report.buckets.empty()) {
        std::cout << "buckets:\n";
        for (const BucketSummary& b : report.buckets) {
            const SolveRecord& rep = report.records[b.record_index];
            std::cout << "  " << b.label << ": " << b.count << " starts -> " << to_string(b.classification);
            if (std::isfinite(rep.s_at_zero)) std::printf(", s(0) = %.6g", rep.s_at_zero);
            std::cout << '\n';
        }
    }
    std::cout << "not converged: " << report.not_converged << '\n';
    print_checks(report.checks);
    std::cout << "verdict: "
              << (!report.converged ? "NOT CONVERGED" : (report.passed ? "pass" : "CHECKS FAILED")) << '\n';
    std::printf("elapsed: %.2f s\n", elapsed_seconds);
}

int run_study(const Scenario& scenario, const std::string& out_dir, const std::string& formats_text) {
    const auto start = std::chrono::steady_clock::now();
    const RunReport report = run_scenario(scenario);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    print_report(report, elapsed.count());
    if (!formats_text.empty()) {
        const ExportFormats formats = parse_formats(formats_text);
        for (const std::string& path : export_report(report, out_dir, formats)) {
            std::cout << "wrote " << path << '\n';
        }
    }
    if (!report.converged) return kExitNotConverged;
    if (!report.passed) return kExitCheckFailed;
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"periodic solutions of a chemostat with a sliding-memory fractional derivative"};
    app.require_subcommand(1);

    std::string scenario_arg;
    std::string out_dir = ".";
    std::string formats_text;
    std::uint64_t seed = 0;
    bool seed_given = false;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("scenario", scenario_arg, "scenario file or catalog name")->required();
        cmd->add_option("--seed", seed, "override the scenario seed")->each([&](const std::string&) {
            seed_given = true;
        });
        cmd->add_option("--out", out_dir, "output directory for exports");
        cmd->add_option("--format", formats_text, "comma list of csv,json,svg to export");
    };

    CLI::App* solve_cmd = app.add_subcommand("solve", "run a scenario as written");
    add_common(solve_cmd);

    CLI::App* multistart_cmd = app.add_subcommand("multistart", "run a scenario as a multistart study");
    add_common(multistart_cmd);
    std::size_t n_starts = 100;
    multistart_cmd->add_option("--n", n_starts, "number of random starts");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a scenario as a parameter sweep");
    add_common(sweep_cmd);
    std::string sweep_param = "alpha";
    std::string sweep_values_text;
    sweep_cmd->add_option("--param", sweep_param, "alpha, memory_length, or theta");
    sweep_cmd->add_option("--values", sweep_values_text, "first:last:step or a comma list")->required();

    CLI::App* verify_cmd = app.add_subcommand("verify", "re-verify a saved JSON report");
    std::string report_path;
    verify_cmd->add_option("report", report_path, "path to a report JSON file")->required();

    CLI::App* export_cmd = app.add_subcommand("export", "render a saved JSON report to files");
    export_cmd->add_option("report", report_path, "path to a report JSON file")->required();
    export_cmd->add_option("--out", out_dir, "output directory");
    std::string export_formats = "csv,svg";
    export_cmd->add_option("--format", export_formats, "comma list of csv,json,svg");

    CLI::App* catalog_cmd = app.add_subcommand("catalog", "list built-in scenarios");

    CLI11_PARSE(app, argc, argv);

    try {
        if (catalog_cmd->parsed()) {
            for (const Scenario& sc : fracstat::lab::catalog()) {
                std::printf("%-18s %-10s alpha %.3g, window %.3g, schedule %s, %zu nodes\n", sc.name.c_str(),
                            to_string(sc.study.kind).c_str(), sc.params.alpha, sc.params.memory_length,
                            to_string(sc.schedule.kind()).c_str(), sc.config.node_count);
            }
            std::printf("catalog checksum %016llx\n",
                        static_cast<unsigned long long>(fracstat::lab::catalog_checksum()));
            return kExitPass;
        }
        if (verify_cmd->parsed()) {
            const RunReport report = report_from_json_text(read_file(report_path));
            const std::vector<CheckResult> checks = verify(report);
            print_checks(checks);
            const bool ok = all_checks_pass(checks);
            std::cout << "verdict: " << (ok ? "pass" : "CHECKS FAILED") << '\n';
            return ok ? kExitPass : kExitCheckFailed;
        }
        if (export_cmd->parsed()) {
            const RunReport report = report_from_json_text(read_file(report_path));
            for (const std::string& path : export_report(report, out_dir, parse_formats(export_formats))) {
                std::cout << "wrote " << path << '\n';
            }
            return kExitPass;
        }

        Scenario scenario = load_scenario(scenario_arg);
        if (seed_given) scenario.config.seed = seed;
        if (multistart_cmd->parsed()) {
            scenario.study = Study{};
            scenario.study.kind = StudyKind::Multistart;
            scenario.study.starts = n_starts;
        }
        if (sweep_cmd->parsed()) {
            scenario.study = Study{};
            scenario.study.kind = StudyKind::Sweep;
            scenario.study.parameter = sweep_parameter_from(sweep_param);
            scenario.study.values = parse_value_list(sweep_values_text);
        }
        if (solve_cmd->parsed() || multistart_cmd->parsed() || sweep_cmd->parsed()) {
            return run_study(scenario, out_dir, formats_text);
        }
        throw std::runtime_error("no subcommand handled");
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << '\n';
        return kExitUsage;
    }
}
