#pragma once

#include <cstdint>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fracstat/chemostat.hpp"
#include "fracstat/config.hpp"
#include "fracstat/dilution.hpp"
#include "fracstat/solver.hpp"

namespace fracstat::lab {

// ============================================================================
// Scenario: a named, fully serializable description of one study
// ============================================================================

enum class StudyKind { Single, Multistart, Sweep, Washout, BangBang };

[[nodiscard]] inline std::string to_string(StudyKind kind) {
    switch (kind) {
        case StudyKind::Single: return "single";
        case StudyKind::Multistart: return "multistart";
        case StudyKind::Sweep: return "sweep";
        case StudyKind::Washout: return "washout";
        case StudyKind::BangBang: return "bangbang";
    }
    throw std::logic_error("unknown study kind");
}

[[nodiscard]] inline StudyKind study_kind_from(std::string_view text) {
    if (text == "single") return StudyKind::Single;
    if (text == "multistart") return StudyKind::Multistart;
    if (text == "sweep") return StudyKind::Sweep;
    if (text == "washout") return StudyKind::Washout;
    if (text == "bangbang") return StudyKind::BangBang;
    throw std::runtime_error("unknown study kind '" + std::string(text) + "'");
}

enum class SweepParameter { Alpha, MemoryLength, Theta };

[[nodiscard]] inline std::string to_string(SweepParameter parameter) {
    switch (parameter) {
        case SweepParameter::Alpha: return "alpha";
        case SweepParameter::MemoryLength: return "memory_length";
        case SweepParameter::Theta: return "theta";
    }
    throw std::logic_error("unknown sweep parameter");
}

[[nodiscard]] inline SweepParameter sweep_parameter_from(std::string_view text) {
    if (text == "alpha") return SweepParameter::Alpha;
    if (text == "memory_length") return SweepParameter::MemoryLength;
    if (text == "theta") return SweepParameter::Theta;
    throw std::runtime_error("unknown sweep parameter '" + std::string(text) + "'");
}

struct Study {
    StudyKind kind = StudyKind::Single;
    std::size_t starts = 0;  // multistart and washout studies
    SweepParameter parameter = SweepParameter::Alpha;
    std::vector<double> values;  // sweep grid

    [[nodiscard]] bool operator==(const Study&) const = default;
};

struct Scenario {
    std::string name;
    ChemostatParams params;
    DilutionSchedule schedule = DilutionSchedule::constant(1.0, 1.0);
    SolveConfig config;
    Study study;

    void validate() const {
        if (name.empty()) throw std::domain_error("scenario: name must not be empty");
        params.validate();
        config.validate();
        if (schedule.period() != params.period) {
            throw std::domain_error("scenario: schedule period must match the model period");
        }
        switch (study.kind) {
            case StudyKind::Multistart:
            case StudyKind::Washout:
                if (study.starts == 0) throw std::domain_error("scenario: study needs a positive start count");
                break;
            case StudyKind::Sweep: {
                if (study.values.empty()) throw std::domain_error("scenario: sweep needs at least one value");
                for (const double v : study.values) {
                    if (!(v > 0.0)) throw std::domain_error("scenario: sweep values must be positive");
                    if (study.parameter == SweepParameter::Alpha && !(v <= 1.0)) {
                        throw std::domain_error("scenario: alpha sweep values must lie in (0, 1]");
                    }
                }
                break;
            }
            default:
                break;
        }
    }

    [[nodiscard]] bool operator==(const Scenario&) const = default;
};

// ============================================================================
// Plain-text serialization (the same format the CLI accepts as input)
// ============================================================================

inline void write_scenario(std::ostream& os, const Scenario& sc) {
    os << "name = " << sc.name << "\n";
    os << "study = " << to_string(sc.study.kind) << "\n";
    if (sc.study.kind == StudyKind::Multistart || sc.study.kind == StudyKind::Washout) {
        os << "starts = " << sc.study.starts << "\n";
    }
    if (sc.study.kind == StudyKind::Sweep) {
        os << "sweep_parameter = " << to_string(sc.study.parameter) << "\n";
        os << "sweep_values = ";
        for (std::size_t i = 0; i < sc.study.values.size(); ++i) {
            if (i > 0) os << ", ";
            os << config::format_double(sc.study.values[i]);
        }
        os << "\n";
    }
    config::write_params(os, sc.params);
    config::write_schedule(os, sc.schedule);
    os << "[solver]\n";
    os << "node_count = " << sc.config.node_count << "\n";
    os << "interpolation_count = " << sc.config.interpolation_count << "\n";
    os << "newton_tol = " << config::format_double(sc.config.newton_tol) << "\n";
    os << "max_iterations = " << sc.config.max_iterations << "\n";
    os << "backtrack_factor = " << config::format_double(sc.config.backtrack_factor) << "\n";
    os << "min_step = " << config::format_double(sc.config.min_step) << "\n";
    os << "trivial_threshold = " << config::format_double(sc.config.trivial_threshold) << "\n";
    os << "seed = " << sc.config.seed << "\n";
}

[[nodiscard]] inline std::string serialize_scenario(const Scenario& sc) {
    std::ostringstream os;
    write_scenario(os, sc);
    return os.str();
}

[[nodiscard]] inline Scenario scenario_from(const config::ParsedConfig& cfg) {
    Scenario sc;
    sc.name = cfg.require("", "name");
    sc.params = config::params_from(cfg);
    sc.schedule = config::schedule_from(cfg, sc.params.period);

    // absent solver keys keep their defaults, so hand-written files stay short
    const auto number = [&cfg](const std::string& key, double fallback) {
        const auto text = cfg.find("solver", key);
        return text ? config::to_double(*text, cfg.context("solver", key)) : fallback;
    };
    const auto count = [&cfg](const std::string& key, std::size_t fallback) {
        const auto text = cfg.find("solver", key);
        if (!text) return fallback;
        const long long v = config::to_integer(*text, cfg.context("solver", key));
        if (v < 0) throw std::runtime_error(cfg.context("solver", key) + ": expected a non-negative integer");
        return static_cast<std::size_t>(v);
    };
    sc.config.node_count = count("node_count", sc.config.node_count);
    sc.config.interpolation_count = count("interpolation_count", sc.config.interpolation_count);
    sc.config.newton_tol = number("newton_tol", sc.config.newton_tol);
    sc.config.max_iterations = count("max_iterations", sc.config.max_iterations);
    sc.config.backtrack_factor = number("backtrack_factor", sc.config.backtrack_factor);
    sc.config.min_step = number("min_step", sc.config.min_step);
    sc.config.trivial_threshold = number("trivial_threshold", sc.config.trivial_threshold);
    sc.config.seed = static_cast<std::uint64_t>(count("seed", static_cast<std::size_t>(sc.config.seed)));

    sc.study.kind = study_kind_from(cfg.find("", "study").value_or("single"));
    if (sc.study.kind == StudyKind::Multistart || sc.study.kind == StudyKind::Washout) {
        const long long starts = config::to_integer(cfg.require("", "starts"), cfg.context("", "starts"));
        if (starts <= 0) throw std::runtime_error(cfg.context("", "starts") + ": expected a positive integer");
        sc.study.starts = static_cast<std::size_t>(starts);
    }
    if (sc.study.kind == StudyKind::Sweep) {
        sc.study.parameter = sweep_parameter_from(cfg.require("", "sweep_parameter"));
        sc.study.values = config::to_double_list(cfg.require("", "sweep_values"), cfg.context("", "sweep_values"));
    }
    sc.validate();
    return sc;
}

[[nodiscard]] inline Scenario parse_scenario(std::string_view text, std::string origin = "<scenario>") {
    return scenario_from(config::parse(text, std::move(origin)));
}

// ============================================================================
// Built-in catalog
// ============================================================================

[[nodiscard]] inline std::vector<Scenario> catalog() {
    std::vector<Scenario> out;
    {
        Scenario sc;
        sc.name = "fig1-baseline";
        sc.schedule = DilutionSchedule::sinusoid(1.0, 0.5, 1.0);
        sc.study.kind = StudyKind::Single;
        out.push_back(std::move(sc));
    }
    {
        Scenario sc;
        sc.name = "fig2-multistart";
        sc.schedule = DilutionSchedule::sinusoid(1.0, 0.5, 1.0);
        sc.study.kind = StudyKind::Multistart;
        sc.study.starts = 100;
        out.push_back(std::move(sc));
    }
    {
        Scenario sc;
        sc.name = "fig3-alpha-sweep";
        sc.schedule = DilutionSchedule::sinusoid(1.0, 0.5, 1.0);
        sc.study.kind = StudyKind::Sweep;
        sc.study.parameter = SweepParameter::Alpha;
        sc.study.values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
        out.push_back(std::move(sc));
    }
    {
        Scenario sc;
        sc.name = "fig4-memory-sweep";
        sc.schedule = DilutionSchedule::sinusoid(1.0, 0.5, 1.0);
        sc.study.kind = StudyKind::Sweep;
        sc.study.parameter = SweepParameter::MemoryLength;
        sc.study.values = {0.1, 0.3, 0.5, 1.0, 3.0, 5.0};
        out.push_back(std::move(sc));
    }
    {
        Scenario sc;
        sc.name = "fig5-theta-sweep";
        sc.schedule = DilutionSchedule::sinusoid(1.0, 0.5, 1.0);
        sc.study.kind = StudyKind::Sweep;
        sc.study.parameter = SweepParameter::Theta;
        sc.study.values = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
        out.push_back(std::move(sc));
    }
    {
        Scenario sc;
        sc.name = "fig6-washout";
        sc.params.mu_max = 0.25;
        sc.params.saturation = 2.0;
        sc.schedule = DilutionSchedule::sinusoid(1.0, 0.5, 1.0);
        sc.study.kind = StudyKind::Washout;
        sc.study.starts = 100;
        out.push_back(std::move(sc));
    }
    {
        Scenario sc;
        sc.name = "fig7-bangbang";
        sc.schedule = DilutionSchedule::bang_bang(0.5, 1.5, 0.25, 0.75, 1.0);
        sc.config.node_count = 300;
        sc.config.interpolation_count = 400;
        sc.study.kind = StudyKind::BangBang;
        out.push_back(std::move(sc));
    }
    return out;
}

[[nodiscard]] inline Scenario catalog_scenario(std::string_view name) {
    for (auto& sc : catalog()) {
        if (sc.name == name) return sc;
    }
    std::string known;
    for (const auto& sc : catalog()) {
        if (!known.empty()) known += ", ";
        known += sc.name;
    }
    throw std::runtime_error("no catalog scenario named '" + std::string(name) + "' (known: " + known + ")");
}

[[nodiscard]] inline std::string serialize_catalog() {
    std::string out;
    for (const auto& sc : catalog()) {
        out += serialize_scenario(sc);
        out += "\n";
    }
    return out;
}

[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (const char c : text) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ull;
    }
    return hash;
}

[[nodiscard]] inline std::uint64_t catalog_checksum() { return fnv1a64(serialize_catalog()); }

}  // namespace fracstat::lab
