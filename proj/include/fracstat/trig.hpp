#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracstat/grid.hpp"

namespace fracstat {

// ============================================================================
// Discrete Fourier transform (naive, exact-index twiddle table)
// ============================================================================

/// F_k = sum_j values[j] * exp(-2*pi*i*j*k/N), k = 0..N-1.
[[nodiscard]] inline std::vector<std::complex<double>> dft(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::complex<double>> twiddle(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
        twiddle[m] = {std::cos(angle), std::sin(angle)};
    }
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += values[j] * twiddle[(j * k) % n];
        out[k] = sum;
    }
    return out;
}

/// v_j = (1/N) sum_k coeffs[k] * exp(+2*pi*i*j*k/N); imaginary parts returned
/// alongside so callers can police the conjugate-symmetry residue.
struct InverseDftResult {
    std::vector<double> values;
    double imaginary_residue = 0.0;  // sup-norm of the discarded imaginary part
};

[[nodiscard]] inline InverseDftResult inverse_dft(std::span<const std::complex<double>> coeffs) {
    const std::size_t n = coeffs.size();
    std::vector<std::complex<double>> twiddle(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
        twiddle[m] = {std::cos(angle), std::sin(angle)};
    }
    InverseDftResult result;
    result.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::complex<double> sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) sum += coeffs[k] * twiddle[(j * k) % n];
        sum /= static_cast<double>(n);
        result.values[j] = sum.real();
        result.imaginary_residue = std::max(result.imaginary_residue, std::abs(sum.imag()));
    }
    return result;
}

// ============================================================================
// Trigonometric interpolant
// ============================================================================

/// Interpolates nodal data v_j = v(jT/N) by
///   v(t) = c0 + sum_{k=1}^{N/2-1} [a_k cos(w_k t) + b_k sin(w_k t)]
///        + c_ny cos(w_{N/2} t),
/// the unique band-limited representation with the Nyquist mode as a pure
/// cosine (sine at the Nyquist frequency vanishes on the grid).
class TrigInterpolant {
public:
    TrigInterpolant(const PeriodicGrid& grid, std::span<const double> values) : grid_(grid) {
        const std::size_t n = grid.size();
        if (values.size() != n) {
            throw std::invalid_argument("TrigInterpolant: value count does not match grid");
        }
        const auto coeffs = dft(values);
        const double inv_n = 1.0 / static_cast<double>(n);
        constant_ = coeffs[0].real() * inv_n;
        const std::size_t half = n / 2;
        cosine_.resize(half - 1);
        sine_.resize(half - 1);
        for (std::size_t k = 1; k < half; ++k) {
            cosine_[k - 1] = 2.0 * coeffs[k].real() * inv_n;
            sine_[k - 1] = -2.0 * coeffs[k].imag() * inv_n;
        }
        nyquist_ = coeffs[half].real() * inv_n;
    }

    [[nodiscard]] const PeriodicGrid& grid() const { return grid_; }
    [[nodiscard]] double constant_coefficient() const { return constant_; }
    /// k = 1 .. N/2-1
    [[nodiscard]] double cosine_coefficient(std::size_t k) const { return cosine_.at(k - 1); }
    [[nodiscard]] double sine_coefficient(std::size_t k) const { return sine_.at(k - 1); }
    [[nodiscard]] double nyquist_coefficient() const { return nyquist_; }

    [[nodiscard]] double value(double t) const {
        const double base = 2.0 * std::numbers::pi * t / grid_.period();
        double c = 1.0, s = 0.0;
        const double cb = std::cos(base), sb = std::sin(base);
        double sum = constant_;
        for (std::size_t k = 1; k < grid_.size() / 2; ++k) {
            const double cn = c * cb - s * sb;
            const double sn = s * cb + c * sb;
            c = cn;
            s = sn;
            sum += cosine_[k - 1] * c + sine_[k - 1] * s;
        }
        sum += nyquist_ * (c * cb - s * sb);
        return sum;
    }

    [[nodiscard]] double derivative(double t) const {
        const double base = 2.0 * std::numbers::pi * t / grid_.period();
        const double w1 = 2.0 * std::numbers::pi / grid_.period();
        double c = 1.0, s = 0.0;
        const double cb = std::cos(base), sb = std::sin(base);
        double sum = 0.0;
        for (std::size_t k = 1; k < grid_.size() / 2; ++k) {
            const double cn = c * cb - s * sb;
            const double sn = s * cb + c * sb;
            c = cn;
            s = sn;
            const double wk = w1 * static_cast<double>(k);
            sum += wk * (sine_[k - 1] * c - cosine_[k - 1] * s);
        }
        const double w_ny = w1 * static_cast<double>(grid_.size() / 2);
        sum -= nyquist_ * w_ny * (s * cb + c * sb);
        return sum;
    }

private:
    PeriodicGrid grid_;
    double constant_ = 0.0;
    std::vector<double> cosine_;
    std::vector<double> sine_;
    double nyquist_ = 0.0;
};

}  // namespace fracstat
