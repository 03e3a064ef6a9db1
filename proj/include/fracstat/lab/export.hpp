#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fracstat/lab/report.hpp"
#include "fracstat/lab/scenario.hpp"

namespace fracstat::lab {

// ============================================================================
// CSV: one file per series block, columns t,s,x,D, 17 significant digits
// ============================================================================

[[nodiscard]] inline std::string format_sig17(double value) {
    std::array<char, 64> buffer{};
    const auto [ptr, ec] =
        std::to_chars(buffer.data(), buffer.data() + buffer.size(), value, std::chars_format::general, 17);
    if (ec != std::errc{}) throw std::runtime_error("format_sig17: conversion failed");
    return std::string(buffer.data(), ptr);
}

inline void write_series_csv(std::ostream& os, const SeriesBlock& block) {
    os << "t,s,x,D\n";
    for (std::size_t i = 0; i < block.t.size(); ++i) {
        os << format_sig17(block.t[i]) << ',' << format_sig17(block.s[i]) << ',' << format_sig17(block.x[i])
           << ',' << format_sig17(block.d[i]) << '\n';
    }
}

[[nodiscard]] inline std::string series_csv(const SeriesBlock& block) {
    std::ostringstream os;
    write_series_csv(os, block);
    return os.str();
}

// ============================================================================
// JSON: a full report that loads back for re-verification
// ============================================================================

[[nodiscard]] inline Classification classification_from(std::string_view text) {
    if (text == "non-trivial") return Classification::NonTrivial;
    if (text == "trivial-washout") return Classification::TrivialWashout;
    if (text == "not-converged") return Classification::NotConverged;
    throw std::runtime_error("unknown classification '" + std::string(text) + "'");
}

namespace detail {

// Non-finite values have no JSON literal; they are omitted on write and the
// struct defaults (NaN or infinity) are restored on read.
inline void put_finite(nlohmann::json& j, const char* key, double value) {
    if (std::isfinite(value)) j[key] = value;
}

[[nodiscard]] inline double take_double(const nlohmann::json& j, const char* key, double fallback) {
    const auto it = j.find(key);
    return it == j.end() ? fallback : it->get<double>();
}

}  // namespace detail

[[nodiscard]] inline nlohmann::json scenario_to_json(const Scenario& sc) {
    nlohmann::json j;
    j["name"] = sc.name;
    nlohmann::json study;
    study["kind"] = to_string(sc.study.kind);
    if (sc.study.kind == StudyKind::Multistart || sc.study.kind == StudyKind::Washout) {
        study["starts"] = sc.study.starts;
    }
    if (sc.study.kind == StudyKind::Sweep) {
        study["parameter"] = to_string(sc.study.parameter);
        study["values"] = sc.study.values;
    }
    j["study"] = std::move(study);
    const ChemostatParams& p = sc.params;
    j["params"] = {{"alpha", p.alpha},   {"memory_length", p.memory_length}, {"period", p.period},
                   {"theta", p.theta},   {"s_in", p.s_in},                   {"yield", p.yield},
                   {"saturation", p.saturation}, {"mu_max", p.mu_max}};
    nlohmann::json schedule;
    schedule["kind"] = to_string(sc.schedule.kind());
    switch (sc.schedule.kind()) {
        case ScheduleKind::Constant:
            schedule["level"] = sc.schedule.constant_level();
            break;
        case ScheduleKind::Sinusoid:
            schedule["mean"] = sc.schedule.sinusoid_mean();
            schedule["amplitude"] = sc.schedule.sinusoid_amplitude();
            break;
        case ScheduleKind::BangBang:
            schedule["d_min"] = sc.schedule.bang_d_min();
            schedule["d_max"] = sc.schedule.bang_d_max();
            schedule["on_start"] = sc.schedule.bang_on_start();
            schedule["on_end"] = sc.schedule.bang_on_end();
            break;
        case ScheduleKind::Table:
            schedule["values"] = sc.schedule.table_values();
            break;
    }
    j["schedule"] = std::move(schedule);
    const SolveConfig& c = sc.config;
    j["solver"] = {{"node_count", c.node_count},
                   {"interpolation_count", c.interpolation_count},
                   {"newton_tol", c.newton_tol},
                   {"max_iterations", c.max_iterations},
                   {"backtrack_factor", c.backtrack_factor},
                   {"min_step", c.min_step},
                   {"trivial_threshold", c.trivial_threshold},
                   {"seed", c.seed}};
    return j;
}

[[nodiscard]] inline Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario sc;
    sc.name = j.at("name").get<std::string>();
    const nlohmann::json& params = j.at("params");
    sc.params.alpha = params.at("alpha").get<double>();
    sc.params.memory_length = params.at("memory_length").get<double>();
    sc.params.period = params.at("period").get<double>();
    sc.params.theta = params.at("theta").get<double>();
    sc.params.s_in = params.at("s_in").get<double>();
    sc.params.yield = params.at("yield").get<double>();
    sc.params.saturation = params.at("saturation").get<double>();
    sc.params.mu_max = params.at("mu_max").get<double>();
    const nlohmann::json& schedule = j.at("schedule");
    const auto kind = schedule.at("kind").get<std::string>();
    const double period = sc.params.period;
    if (kind == "constant") {
        sc.schedule = DilutionSchedule::constant(schedule.at("level").get<double>(), period);
    } else if (kind == "sinusoid") {
        sc.schedule = DilutionSchedule::sinusoid(schedule.at("mean").get<double>(),
                                                 schedule.at("amplitude").get<double>(), period);
    } else if (kind == "bangbang") {
        sc.schedule = DilutionSchedule::bang_bang(schedule.at("d_min").get<double>(),
                                                  schedule.at("d_max").get<double>(),
                                                  schedule.at("on_start").get<double>(),
                                                  schedule.at("on_end").get<double>(), period);
    } else if (kind == "table") {
        sc.schedule = DilutionSchedule::table(schedule.at("values").get<std::vector<double>>(), period);
    } else {
        throw std::runtime_error("unknown schedule kind '" + kind + "'");
    }
    const nlohmann::json& solver = j.at("solver");
    sc.config.node_count = solver.at("node_count").get<std::size_t>();
    sc.config.interpolation_count = solver.at("interpolation_count").get<std::size_t>();
    sc.config.newton_tol = solver.at("newton_tol").get<double>();
    sc.config.max_iterations = solver.at("max_iterations").get<std::size_t>();
    sc.config.backtrack_factor = solver.at("backtrack_factor").get<double>();
    sc.config.min_step = solver.at("min_step").get<double>();
    sc.config.trivial_threshold = solver.at("trivial_threshold").get<double>();
    sc.config.seed = solver.at("seed").get<std::uint64_t>();
    const nlohmann::json& study = j.at("study");
    sc.study.kind = study_kind_from(study.at("kind").get<std::string>());
    if (study.contains("starts")) sc.study.starts = study.at("starts").get<std::size_t>();
    if (study.contains("parameter")) sc.study.parameter = sweep_parameter_from(study.at("parameter").get<std::string>());
    if (study.contains("values")) sc.study.values = study.at("values").get<std::vector<double>>();
    sc.validate();
    return sc;
}

[[nodiscard]] inline nlohmann::json report_to_json(const RunReport& report) {
    nlohmann::json j;
    j["scenario"] = scenario_to_json(report.scenario);
    j["seed"] = report.seed;
    j["not_converged"] = report.not_converged;
    j["converged"] = report.converged;
    j["passed"] = report.passed;
    j["records"] = nlohmann::json::array();
    for (const SolveRecord& rec : report.records) {
        nlohmann::json r;
        r["label"] = rec.label;
        r["classification"] = to_string(rec.classification);
        r["iterations"] = rec.iterations;
        detail::put_finite(r, "parameter_value", rec.parameter_value);
        detail::put_finite(r, "residual_sup", rec.residual_sup);
        detail::put_finite(r, "s_at_zero", rec.s_at_zero);
        detail::put_finite(r, "min_s", rec.min_s);
        detail::put_finite(r, "max_s", rec.max_s);
        detail::put_finite(r, "min_x", rec.min_x);
        if (rec.has_nodes) {
            r["s_nodes"] = rec.s_nodes;
            r["x_nodes"] = rec.x_nodes;
            r["residual_nodes"] = rec.residual_nodes;
        }
        detail::put_finite(r, "volterra_measured", rec.volterra_measured);
        detail::put_finite(r, "volterra_predicted", rec.volterra_predicted);
        j["records"].push_back(std::move(r));
    }
    j["buckets"] = nlohmann::json::array();
    for (const BucketSummary& b : report.buckets) {
        j["buckets"].push_back({{"label", b.label},
                                {"record_index", b.record_index},
                                {"count", b.count},
                                {"classification", to_string(b.classification)}});
    }
    j["series"] = nlohmann::json::array();
    for (const SeriesBlock& block : report.series) {
        j["series"].push_back(
            {{"label", block.label}, {"t", block.t}, {"s", block.s}, {"x", block.x}, {"d", block.d}});
    }
    j["checks"] = nlohmann::json::array();
    for (const CheckResult& c : report.checks) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["subject"] = c.subject;
        jc["status"] = to_string(c.status);
        detail::put_finite(jc, "measured", c.measured);
        detail::put_finite(jc, "bound", c.bound);
        jc["detail"] = c.detail;
        j["checks"].push_back(std::move(jc));
    }
    return j;
}

[[nodiscard]] inline RunReport report_from_json(const nlohmann::json& j) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    constexpr double inf = std::numeric_limits<double>::infinity();
    RunReport report;
    report.scenario = scenario_from_json(j.at("scenario"));
    report.seed = j.at("seed").get<std::uint64_t>();
    report.not_converged = j.at("not_converged").get<std::size_t>();
    report.converged = j.at("converged").get<bool>();
    report.passed = j.at("passed").get<bool>();
    for (const nlohmann::json& r : j.at("records")) {
        SolveRecord rec;
        rec.label = r.at("label").get<std::string>();
        rec.classification = classification_from(r.at("classification").get<std::string>());
        rec.iterations = r.at("iterations").get<std::size_t>();
        rec.parameter_value = detail::take_double(r, "parameter_value", nan);
        rec.residual_sup = detail::take_double(r, "residual_sup", inf);
        rec.s_at_zero = detail::take_double(r, "s_at_zero", nan);
        rec.min_s = detail::take_double(r, "min_s", nan);
        rec.max_s = detail::take_double(r, "max_s", nan);
        rec.min_x = detail::take_double(r, "min_x", nan);
        if (r.contains("s_nodes")) {
            rec.has_nodes = true;
            rec.s_nodes = r.at("s_nodes").get<std::vector<double>>();
            rec.x_nodes = r.at("x_nodes").get<std::vector<double>>();
            rec.residual_nodes = r.at("residual_nodes").get<std::vector<double>>();
        }
        rec.volterra_measured = detail::take_double(r, "volterra_measured", nan);
        rec.volterra_predicted = detail::take_double(r, "volterra_predicted", nan);
        report.records.push_back(std::move(rec));
    }
    for (const nlohmann::json& b : j.at("buckets")) {
        BucketSummary bucket;
        bucket.label = b.at("label").get<std::string>();
        bucket.record_index = b.at("record_index").get<std::size_t>();
        bucket.count = b.at("count").get<std::size_t>();
        bucket.classification = classification_from(b.at("classification").get<std::string>());
        report.buckets.push_back(std::move(bucket));
    }
    for (const nlohmann::json& s : j.at("series")) {
        SeriesBlock block;
        block.label = s.at("label").get<std::string>();
        block.t = s.at("t").get<std::vector<double>>();
        block.s = s.at("s").get<std::vector<double>>();
        block.x = s.at("x").get<std::vector<double>>();
        block.d = s.at("d").get<std::vector<double>>();
        report.series.push_back(std::move(block));
    }
    for (const nlohmann::json& c : j.at("checks")) {
        CheckResult check;
        check.name = c.at("name").get<std::string>();
        check.subject = c.at("subject").get<std::string>();
        check.status = check_status_from(c.at("status").get<std::string>());
        check.measured = detail::take_double(c, "measured", nan);
        check.bound = detail::take_double(c, "bound", nan);
        check.detail = c.at("detail").get<std::string>();
        report.checks.push_back(std::move(check));
    }
    return report;
}

[[nodiscard]] inline std::string report_json_text(const RunReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

[[nodiscard]] inline RunReport report_from_json_text(std::string_view text) {
    return report_from_json(nlohmann::json::parse(text));
}

// ============================================================================
// SVG: four panels (substrate, dilution, biomass, nodal residual)
// ============================================================================

namespace detail {

inline const std::array<const char*, 10> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                                     "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

[[nodiscard]] inline std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

[[nodiscard]] inline std::string fixed2(double v) {
    std::array<char, 32> buffer{};
    const int written = std::snprintf(buffer.data(), buffer.size(), "%.2f", v);
    return std::string(buffer.data(), static_cast<std::size_t>(written));
}

[[nodiscard]] inline std::string short3(double v) {
    std::array<char, 32> buffer{};
    const int written = std::snprintf(buffer.data(), buffer.size(), "%.3g", v);
    return std::string(buffer.data(), static_cast<std::size_t>(written));
}

struct Curve {
    std::string label;
    std::vector<double> t;
    std::vector<double> y;
};

inline void render_panel(std::ostream& os, const std::string& id, const std::string& title,
                         const std::vector<Curve>& curves, double x0, double y0) {
    constexpr double width = 430.0;
    constexpr double height = 230.0;
    constexpr double pad_left = 46.0;
    constexpr double pad_top = 24.0;
    constexpr double pad_bottom = 20.0;
    constexpr double pad_right = 10.0;
    const double plot_w = width - pad_left - pad_right;
    const double plot_h = height - pad_top - pad_bottom;

    double t_min = 0.0, t_max = 1.0, y_min = 0.0, y_max = 1.0;
    bool first = true;
    for (const Curve& curve : curves) {
        for (std::size_t i = 0; i < curve.t.size(); ++i) {
            if (first) {
                t_min = t_max = curve.t[i];
                y_min = y_max = curve.y[i];
                first = false;
            } else {
                t_min = std::min(t_min, curve.t[i]);
                t_max = std::max(t_max, curve.t[i]);
                y_min = std::min(y_min, curve.y[i]);
                y_max = std::max(y_max, curve.y[i]);
            }
        }
    }
    if (t_max <= t_min) t_max = t_min + 1.0;
    const double y_pad = (y_max - y_min) * 0.05 + 1e-12;
    y_min -= y_pad;
    y_max += y_pad;

    os << "<g id=\"" << id << "\" transform=\"translate(" << fixed2(x0) << "," << fixed2(y0) << ")\">\n";
    os << "  <rect x=\"" << fixed2(pad_left) << "\" y=\"" << fixed2(pad_top) << "\" width=\"" << fixed2(plot_w)
       << "\" height=\"" << fixed2(plot_h) << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    os << "  <text x=\"" << fixed2(pad_left) << "\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">"
       << xml_escape(title) << "</text>\n";
    os << "  <text x=\"4\" y=\"" << fixed2(pad_top + 10.0) << "\" font-family=\"sans-serif\" font-size=\"10\">"
       << xml_escape(short3(y_max)) << "</text>\n";
    os << "  <text x=\"4\" y=\"" << fixed2(pad_top + plot_h) << "\" font-family=\"sans-serif\" font-size=\"10\">"
       << xml_escape(short3(y_min)) << "</text>\n";
    os << "  <text x=\"" << fixed2(pad_left + plot_w - 8.0) << "\" y=\"" << fixed2(height - 4.0)
       << "\" font-family=\"sans-serif\" font-size=\"10\">" << xml_escape(short3(t_max)) << "</text>\n";
    for (std::size_t k = 0; k < curves.size(); ++k) {
        const Curve& curve = curves[k];
        if (curve.t.empty()) continue;
        os << "  <polyline fill=\"none\" stroke=\"" << kPalette[k % kPalette.size()]
           << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < curve.t.size(); ++i) {
            const double px = pad_left + (curve.t[i] - t_min) / (t_max - t_min) * plot_w;
            const double py = pad_top + (y_max - curve.y[i]) / (y_max - y_min) * plot_h;
            if (i > 0) os << ' ';
            os << fixed2(px) << ',' << fixed2(py);
        }
        os << "\"/>\n";
    }
    os << "</g>\n";
}

}  // namespace detail

[[nodiscard]] inline std::string render_svg(const RunReport& report) {
    std::vector<detail::Curve> state_s, state_d, state_x, residual_curves;
    for (const SeriesBlock& block : report.series) {
        state_s.push_back({block.label, block.t, block.s});
        state_d.push_back({block.label, block.t, block.d});
        state_x.push_back({block.label, block.t, block.x});
    }
    const double period = report.scenario.params.period;
    for (const SolveRecord& rec : report.records) {
        if (!rec.has_nodes) continue;
        detail::Curve curve;
        curve.label = rec.label;
        const std::size_t n = rec.residual_nodes.size();
        curve.t.resize(n);
        curve.y.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            curve.t[j] = period * static_cast<double>(j) / static_cast<double>(n);
            curve.y[j] = std::log10(std::max(std::abs(rec.residual_nodes[j]), 1e-18));
        }
        residual_curves.push_back(std::move(curve));
    }

    const std::size_t legend_rows = state_s.size();
    const double height = 500.0 + 18.0 * static_cast<double>(legend_rows) + 12.0;
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"" << detail::fixed2(height)
       << "\" viewBox=\"0 0 900 " << detail::fixed2(height) << "\">\n";
    os << "<title>" << detail::xml_escape(report.scenario.name) << "</title>\n";
    os << "<rect x=\"0\" y=\"0\" width=\"900\" height=\"" << detail::fixed2(height) << "\" fill=\"#ffffff\"/>\n";
    detail::render_panel(os, "panel-substrate", "substrate s(t)", state_s, 10.0, 10.0);
    detail::render_panel(os, "panel-dilution", "dilution D(t)", state_d, 455.0, 10.0);
    detail::render_panel(os, "panel-biomass", "biomass x(t)", state_x, 10.0, 255.0);
    detail::render_panel(os, "panel-residual", "log10 |residual| at nodes", residual_curves, 455.0, 255.0);
    os << "<g id=\"legend\">\n";
    for (std::size_t k = 0; k < state_s.size(); ++k) {
        const double y = 505.0 + 18.0 * static_cast<double>(k);
        os << "  <rect x=\"14\" y=\"" << detail::fixed2(y) << "\" width=\"12\" height=\"12\" fill=\""
           << detail::kPalette[k % detail::kPalette.size()] << "\"/>\n";
        os << "  <text x=\"32\" y=\"" << detail::fixed2(y + 10.0)
           << "\" font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(state_s[k].label)
           << "</text>\n";
    }
    os << "</g>\n";
    os << "</svg>\n";
    return os.str();
}

// ============================================================================
// File export
// ============================================================================

struct ExportFormats {
    bool csv = false;
    bool json = false;
    bool svg = false;
};

[[nodiscard]] inline ExportFormats parse_formats(std::string_view text) {
    ExportFormats formats;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        std::string_view item = text.substr(start, comma - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (item == "csv") formats.csv = true;
        else if (item == "json") formats.json = true;
        else if (item == "svg") formats.svg = true;
        else if (!item.empty()) throw std::runtime_error("unknown export format '" + std::string(item) + "'");
        start = comma + 1;
    }
    return formats;
}

[[nodiscard]] inline std::string sanitize_label(std::string_view label) {
    std::string out;
    out.reserve(label.size());
    for (const char c : label) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                          c == '.' || c == '_' || c == '-';
        out += keep ? c : '-';
    }
    return out;
}

[[nodiscard]] inline std::vector<std::string> export_report(const RunReport& report,
                                                            const std::filesystem::path& directory,
                                                            const ExportFormats& formats) {
    std::filesystem::create_directories(directory);
    std::vector<std::string> written;
    const auto emit = [&written](const std::filesystem::path& path, const std::string& payload) {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
        os << payload;
        written.push_back(path.string());
    };
    const std::string base = sanitize_label(report.scenario.name);
    if (formats.csv) {
        for (const SeriesBlock& block : report.series) {
            emit(directory / (base + "-" + sanitize_label(block.label) + ".csv"), series_csv(block));
        }
    }
    if (formats.json) emit(directory / (base + ".json"), report_json_text(report));
    if (formats.svg) emit(directory / (base + ".svg"), render_svg(report));
    return written;
}

}  // namespace fracstat::lab
