#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace fracstat {

// ============================================================================
// Equispaced periodic collocation grid
// ============================================================================

/// Equispaced nodes t_j = j*T/N on one period [0, T), N even, with the
/// trigonometric mode set k = -N/2 .. N/2-1 (single Nyquist mode at -N/2).
class PeriodicGrid {
public:
    PeriodicGrid(std::size_t node_count, double period)
        : node_count_(node_count), period_(period) {
        if (node_count_ < 4 || node_count_ % 2 != 0) {
            throw std::domain_error("PeriodicGrid: node count must be even and >= 4");
        }
        if (!(period_ > 0.0) || !std::isfinite(period_)) {
            throw std::domain_error("PeriodicGrid: period must be positive and finite");
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return node_count_; }
    [[nodiscard]] double period() const noexcept { return period_; }
    [[nodiscard]] double spacing() const noexcept {
        return period_ / static_cast<double>(node_count_);
    }

    [[nodiscard]] double node(std::size_t j) const noexcept {
        return period_ * static_cast<double>(j) / static_cast<double>(node_count_);
    }

    [[nodiscard]] std::vector<double> nodes() const {
        std::vector<double> t(node_count_);
        for (std::size_t j = 0; j < node_count_; ++j) t[j] = node(j);
        return t;
    }

    /// DFT bin -> signed mode index: bins [0, N/2) map to k = bin, bins
    /// [N/2, N) map to k = bin - N. The Nyquist bin N/2 maps to -N/2.
    [[nodiscard]] int signed_mode(std::size_t bin) const {
        if (bin >= node_count_) throw std::out_of_range("PeriodicGrid: bin out of range");
        const auto n = static_cast<int>(node_count_);
        const auto k = static_cast<int>(bin);
        return k < n / 2 ? k : k - n;
    }

    /// Angular frequency of signed mode k: omega_k = 2*pi*k/T.
    [[nodiscard]] double frequency(int mode) const noexcept {
        return 2.0 * std::numbers::pi * static_cast<double>(mode) / period_;
    }

    [[nodiscard]] std::size_t nyquist_bin() const noexcept { return node_count_ / 2; }

    friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) noexcept {
        return a.node_count_ == b.node_count_ && a.period_ == b.period_;
    }

private:
    std::size_t node_count_;
    double period_;
};

}  // namespace fracstat
