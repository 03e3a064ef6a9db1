#pragma once

#include <charconv>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fracstat/chemostat.hpp"
#include "fracstat/dilution.hpp"

namespace fracstat::config {

// ============================================================================
// Plain-text configuration: `key = value` lines grouped under `[section]`
// headers, `#` comments, keys before any header live in the "" section.
// ============================================================================

struct ParsedConfig {
    std::string origin;  // file name used in error messages
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::map<std::string, std::map<std::string, std::size_t>> lines;  // key -> 1-based line

    [[nodiscard]] std::optional<std::string> find(const std::string& section, const std::string& key) const {
        auto s = sections.find(section);
        if (s == sections.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second;
    }

    [[nodiscard]] const std::string& require(const std::string& section, const std::string& key) const {
        auto s = sections.find(section);
        if (s == sections.end()) {
            throw std::runtime_error(origin + ": missing section [" + section + "]");
        }
        auto k = s->second.find(key);
        if (k == s->second.end()) {
            throw std::runtime_error(origin + ": missing key '" + key + "' in section [" + section + "]");
        }
        return k->second;
    }

    [[nodiscard]] std::string context(const std::string& section, const std::string& key) const {
        auto s = lines.find(section);
        if (s != lines.end()) {
            auto k = s->second.find(key);
            if (k != s->second.end()) return origin + ":" + std::to_string(k->second);
        }
        return origin;
    }
};

namespace detail {

[[nodiscard]] inline std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t' || text.front() == '\r')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    return text;
}

}  // namespace detail

[[nodiscard]] inline ParsedConfig parse(std::string_view text, std::string origin = "<config>") {
    ParsedConfig out;
    out.origin = std::move(origin);
    std::string section;
    std::size_t line_number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_number;

        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw std::runtime_error(out.origin + ":" + std::to_string(line_number) + ": malformed section header");
            }
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            out.sections[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::runtime_error(out.origin + ":" + std::to_string(line_number) + ": expected 'key = value'");
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw std::runtime_error(out.origin + ":" + std::to_string(line_number) + ": empty key");
        }
        if (out.sections[section].contains(key)) {
            throw std::runtime_error(out.origin + ":" + std::to_string(line_number) + ": duplicate key '" + key + "'");
        }
        out.sections[section][key] = value;
        out.lines[section][key] = line_number;
    }
    return out;
}

// ============================================================================
// Scalar conversions (shortest round-trip output)
// ============================================================================

[[nodiscard]] inline double to_double(std::string_view text, const std::string& context) {
    const std::string_view trimmed = detail::trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
    if (ec != std::errc() || ptr != trimmed.data() + trimmed.size()) {
        throw std::runtime_error(context + ": cannot parse '" + std::string(trimmed) + "' as a number");
    }
    return value;
}

[[nodiscard]] inline long long to_integer(std::string_view text, const std::string& context) {
    const std::string_view trimmed = detail::trim(text);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
    if (ec != std::errc() || ptr != trimmed.data() + trimmed.size()) {
        throw std::runtime_error(context + ": cannot parse '" + std::string(trimmed) + "' as an integer");
    }
    return value;
}

[[nodiscard]] inline std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
    return std::string(buffer, ptr);
}

[[nodiscard]] inline std::vector<double> to_double_list(std::string_view text, const std::string& context) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        const std::string_view item = detail::trim(text.substr(start, comma - start));
        if (!item.empty()) out.push_back(to_double(item, context));
        start = comma + 1;
    }
    if (out.empty()) throw std::runtime_error(context + ": expected a comma-separated list of numbers");
    return out;
}

// ============================================================================
// Model-parameter and schedule sections
// ============================================================================

[[nodiscard]] inline ChemostatParams params_from(const ParsedConfig& cfg) {
    ChemostatParams p;
    const auto get = [&cfg](const std::string& key) {
        return to_double(cfg.require("params", key), cfg.context("params", key));
    };
    p.alpha = get("alpha");
    p.memory_length = get("memory_length");
    p.period = get("period");
    p.theta = get("theta");
    p.s_in = get("s_in");
    p.yield = get("yield");
    p.saturation = get("saturation");
    p.mu_max = get("mu_max");
    p.validate();
    return p;
}

[[nodiscard]] inline DilutionSchedule schedule_from(const ParsedConfig& cfg, double period) {
    const std::string& kind = cfg.require("schedule", "kind");
    const auto get = [&cfg](const std::string& key) {
        return to_double(cfg.require("schedule", key), cfg.context("schedule", key));
    };
    if (kind == "constant") return DilutionSchedule::constant(get("level"), period);
    if (kind == "sinusoid") return DilutionSchedule::sinusoid(get("mean"), get("amplitude"), period);
    if (kind == "bangbang") {
        return DilutionSchedule::bang_bang(get("d_min"), get("d_max"), get("on_start"), get("on_end"), period);
    }
    if (kind == "table") {
        const std::string& raw = cfg.require("schedule", "values");
        return DilutionSchedule::table(to_double_list(raw, cfg.context("schedule", "values")), period);
    }
    throw std::runtime_error(cfg.context("schedule", "kind") + ": unknown schedule kind '" + kind + "'");
}

inline void write_params(std::ostream& os, const ChemostatParams& p) {
    os << "[params]\n";
    os << "alpha = " << format_double(p.alpha) << "\n";
    os << "memory_length = " << format_double(p.memory_length) << "\n";
    os << "period = " << format_double(p.period) << "\n";
    os << "theta = " << format_double(p.theta) << "\n";
    os << "s_in = " << format_double(p.s_in) << "\n";
    os << "yield = " << format_double(p.yield) << "\n";
    os << "saturation = " << format_double(p.saturation) << "\n";
    os << "mu_max = " << format_double(p.mu_max) << "\n";
}

inline void write_schedule(std::ostream& os, const DilutionSchedule& d) {
    os << "[schedule]\n";
    os << "kind = " << to_string(d.kind()) << "\n";
    switch (d.kind()) {
        case ScheduleKind::Constant:
            os << "level = " << format_double(d.constant_level()) << "\n";
            break;
        case ScheduleKind::Sinusoid:
            os << "mean = " << format_double(d.sinusoid_mean()) << "\n";
            os << "amplitude = " << format_double(d.sinusoid_amplitude()) << "\n";
            break;
        case ScheduleKind::BangBang:
            os << "d_min = " << format_double(d.bang_d_min()) << "\n";
            os << "d_max = " << format_double(d.bang_d_max()) << "\n";
            os << "on_start = " << format_double(d.bang_on_start()) << "\n";
            os << "on_end = " << format_double(d.bang_on_end()) << "\n";
            break;
        case ScheduleKind::Table: {
            os << "values = ";
            const auto& values = d.table_values();
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (i > 0) os << ", ";
                os << format_double(values[i]);
            }
            os << "\n";
            break;
        }
    }
}

}  // namespace fracstat::config
