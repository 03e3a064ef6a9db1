#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracstat {

// ============================================================================
// T-periodic dilution-rate schedules
// ============================================================================

enum class ScheduleKind { Constant, Sinusoid, BangBang, Table };

[[nodiscard]] inline std::string to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::Constant: return "constant";
        case ScheduleKind::Sinusoid: return "sinusoid";
        case ScheduleKind::BangBang: return "bangbang";
        case ScheduleKind::Table: return "table";
    }
    throw std::logic_error("unknown schedule kind");
}

/// D(t), strictly positive and T-periodic. Construction goes through the
/// named factories; evaluate() wraps any real t into [0, T).
class DilutionSchedule {
public:
    [[nodiscard]] static DilutionSchedule constant(double level, double period) {
        DilutionSchedule d(ScheduleKind::Constant, period);
        if (!(level > 0.0)) throw std::domain_error("constant schedule: level must be positive");
        d.level_ = level;
        return d;
    }

    /// D(t) = mean + amplitude * sin(2*pi*t/T); requires mean - amplitude > 0.
    [[nodiscard]] static DilutionSchedule sinusoid(double mean, double amplitude, double period) {
        DilutionSchedule d(ScheduleKind::Sinusoid, period);
        if (!(amplitude >= 0.0)) throw std::domain_error("sinusoid schedule: amplitude must be non-negative");
        if (!(mean - amplitude > 0.0)) throw std::domain_error("sinusoid schedule: mean - amplitude must be positive");
        d.mean_ = mean;
        d.amplitude_ = amplitude;
        return d;
    }

    /// D = d_max on [on_start*T, on_end*T), d_min elsewhere in the period
    /// (half-open switching intervals).
    [[nodiscard]] static DilutionSchedule bang_bang(double d_min, double d_max, double on_start, double on_end,
                                                    double period) {
        DilutionSchedule d(ScheduleKind::BangBang, period);
        if (!(d_min > 0.0) || !(d_max >= d_min)) {
            throw std::domain_error("bangbang schedule: need 0 < d_min <= d_max");
        }
        if (!(on_start >= 0.0) || !(on_end > on_start) || !(on_end <= 1.0)) {
            throw std::domain_error("bangbang schedule: need 0 <= on_start < on_end <= 1");
        }
        d.d_min_ = d_min;
        d.d_max_ = d_max;
        d.on_start_ = on_start;
        d.on_end_ = on_end;
        return d;
    }

    /// Piecewise-constant nearest-node lookup of values at t_j = jT/P.
    [[nodiscard]] static DilutionSchedule table(std::vector<double> values, double period) {
        DilutionSchedule d(ScheduleKind::Table, period);
        if (values.empty()) throw std::domain_error("table schedule: needs at least one value");
        for (double v : values) {
            if (!(v > 0.0)) throw std::domain_error("table schedule: all values must be positive");
        }
        d.values_ = std::move(values);
        return d;
    }

    [[nodiscard]] ScheduleKind kind() const { return kind_; }
    [[nodiscard]] double period() const { return period_; }

    [[nodiscard]] double evaluate(double t) const {
        const double u = wrap(t);
        switch (kind_) {
            case ScheduleKind::Constant:
                return level_;
            case ScheduleKind::Sinusoid:
                return mean_ + amplitude_ * std::sin(2.0 * std::numbers::pi * u / period_);
            case ScheduleKind::BangBang: {
                const double frac = u / period_;
                return (frac >= on_start_ && frac < on_end_) ? d_max_ : d_min_;
            }
            case ScheduleKind::Table: {
                const std::size_t p = values_.size();
                const std::size_t j = static_cast<std::size_t>(std::llround(u * static_cast<double>(p) / period_)) % p;
                return values_[j];
            }
        }
        throw std::logic_error("unknown schedule kind");
    }

    /// Exact period average (trapezoid rule on tables, which for periodic
    /// nodal data is the plain average).
    [[nodiscard]] double mean() const {
        switch (kind_) {
            case ScheduleKind::Constant:
                return level_;
            case ScheduleKind::Sinusoid:
                return mean_;
            case ScheduleKind::BangBang:
                return d_max_ * (on_end_ - on_start_) + d_min_ * (1.0 - (on_end_ - on_start_));
            case ScheduleKind::Table: {
                double sum = 0.0;
                for (double v : values_) sum += v;
                return sum / static_cast<double>(values_.size());
            }
        }
        throw std::logic_error("unknown schedule kind");
    }

    [[nodiscard]] double min() const {
        switch (kind_) {
            case ScheduleKind::Constant: return level_;
            case ScheduleKind::Sinusoid: return mean_ - amplitude_;
            case ScheduleKind::BangBang: return d_min_;
            case ScheduleKind::Table: return *std::min_element(values_.begin(), values_.end());
        }
        throw std::logic_error("unknown schedule kind");
    }

    [[nodiscard]] double max() const {
        switch (kind_) {
            case ScheduleKind::Constant: return level_;
            case ScheduleKind::Sinusoid: return mean_ + amplitude_;
            case ScheduleKind::BangBang: return d_max_;
            case ScheduleKind::Table: return *std::max_element(values_.begin(), values_.end());
        }
        throw std::logic_error("unknown schedule kind");
    }

    /// Jump locations within [0, T). Table midpoints are listed even when
    /// adjacent values coincide; quadrature splitting tolerates that.
    [[nodiscard]] std::vector<double> discontinuities() const {
        std::vector<double> out;
        if (kind_ == ScheduleKind::BangBang) {
            if (d_max_ > d_min_) {
                out.push_back(on_start_ * period_);
                if (on_end_ < 1.0) out.push_back(on_end_ * period_);
                else out.push_back(0.0);
            }
        } else if (kind_ == ScheduleKind::Table) {
            const double h = period_ / static_cast<double>(values_.size());
            for (std::size_t j = 0; j < values_.size(); ++j) {
                out.push_back(wrap((static_cast<double>(j) + 0.5) * h));
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // Parameter accessors for serialization; each checks the kind.
    [[nodiscard]] double constant_level() const { return require(ScheduleKind::Constant), level_; }
    [[nodiscard]] double sinusoid_mean() const { return require(ScheduleKind::Sinusoid), mean_; }
    [[nodiscard]] double sinusoid_amplitude() const { return require(ScheduleKind::Sinusoid), amplitude_; }
    [[nodiscard]] double bang_d_min() const { return require(ScheduleKind::BangBang), d_min_; }
    [[nodiscard]] double bang_d_max() const { return require(ScheduleKind::BangBang), d_max_; }
    [[nodiscard]] double bang_on_start() const { return require(ScheduleKind::BangBang), on_start_; }
    [[nodiscard]] double bang_on_end() const { return require(ScheduleKind::BangBang), on_end_; }
    [[nodiscard]] const std::vector<double>& table_values() const {
        require(ScheduleKind::Table);
        return values_;
    }

    [[nodiscard]] bool operator==(const DilutionSchedule& other) const = default;

private:
    DilutionSchedule(ScheduleKind kind, double period) : kind_(kind), period_(period) {
        if (!(period > 0.0) || !std::isfinite(period)) {
            throw std::domain_error("schedule period must be positive and finite");
        }
    }

    void require(ScheduleKind expected) const {
        if (kind_ != expected) throw std::logic_error("schedule parameter accessor used on wrong kind");
    }

    [[nodiscard]] double wrap(double t) const {
        double u = std::fmod(t, period_);
        if (u < 0.0) u += period_;
        if (u >= period_) u = 0.0;
        return u;
    }

    ScheduleKind kind_;
    double period_;
    double level_ = 0.0;
    double mean_ = 0.0;
    double amplitude_ = 0.0;
    double d_min_ = 0.0;
    double d_max_ = 0.0;
    double on_start_ = 0.0;
    double on_end_ = 0.0;
    std::vector<double> values_;
};

}  // namespace fracstat
