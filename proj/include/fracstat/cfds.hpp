#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fracstat/grid.hpp"
#include "fracstat/quadrature.hpp"
#include "fracstat/trig.hpp"

namespace fracstat {

// ============================================================================
// Sliding-memory fractional operators on T-periodic functions
//
// The derivative D^alpha with window L acts on e^{iwt} as multiplication by
//   m(w) = (iw / Gamma(1-alpha)) * integral_0^L u^{-alpha} e^{-iwu} du,
// and the sliding integral I^alpha acts as multiplication by
//   r(w) = (1 / Gamma(alpha)) * integral_0^L u^{alpha-1} e^{-iwu} du.
// ============================================================================

namespace detail {

inline void check_fractional_params(double alpha, double memory_length) {
    if (!(alpha > 0.0) || !(alpha <= 1.0)) {
        throw std::domain_error("fractional order must lie in (0, 1]");
    }
    if (!(memory_length > 0.0) || !std::isfinite(memory_length)) {
        throw std::domain_error("memory length must be positive and finite");
    }
}

/// integral_0^L u^exponent e^{-iwu} du via the mapped Gauss-Jacobi rule.
[[nodiscard]] inline std::complex<double> windowed_oscillatory_integral(double exponent, double memory_length, double omega) {
    const double half = 0.5 * memory_length;
    const auto integrand = [half, omega](double x) {
        return std::polar(1.0, -omega * half * (1.0 + x));
    };
    return std::pow(half, exponent + 1.0) * adaptive_gauss_jacobi(integrand, exponent);
}

}  // namespace detail

/// Multiplier of the sliding-memory derivative on the mode e^{iwt}.
/// alpha = 1 is the classical limit m(w) = iw; m(0) = 0 exactly;
/// m(-w) = conj(m(w)).
[[nodiscard]] inline std::complex<double> memory_multiplier(double alpha, double memory_length, double omega) {
    detail::check_fractional_params(alpha, memory_length);
    if (!std::isfinite(omega)) throw std::domain_error("omega must be finite");
    if (omega == 0.0) return {0.0, 0.0};
    if (alpha == 1.0) return {0.0, omega};
    const std::complex<double> kernel = detail::windowed_oscillatory_integral(-alpha, memory_length, omega);
    return std::complex<double>(0.0, omega) * kernel / std::tgamma(1.0 - alpha);
}

/// Multiplier of the sliding-memory integral on the mode e^{iwt}.
[[nodiscard]] inline std::complex<double> rl_multiplier(double alpha, double memory_length, double omega) {
    detail::check_fractional_params(alpha, memory_length);
    if (!std::isfinite(omega)) throw std::domain_error("omega must be finite");
    const std::complex<double> kernel = detail::windowed_oscillatory_integral(alpha - 1.0, memory_length, omega);
    return kernel / std::tgamma(alpha);
}

/// Defect of the window-shift identity on one mode:
///   E(w) = m(w) * r(w) - (1 - e^{-iwL}).
/// E vanishes at w = 0 and, up to quadrature accuracy, at alpha = 1; for
/// alpha < 1 the sliding integral of the sliding derivative of e^{iwt}
/// differs from e^{iwt} - e^{iw(t-L)} by exactly E(w) e^{iwt}.
[[nodiscard]] inline std::complex<double> window_shift_defect(double alpha, double memory_length, double omega) {
    const std::complex<double> product = memory_multiplier(alpha, memory_length, omega) * rl_multiplier(alpha, memory_length, omega);
    const std::complex<double> shift = 1.0 - std::polar(1.0, -omega * memory_length);
    return product - shift;
}

// ============================================================================
// Operator on nodal values
// ============================================================================

/// Diagonal action in the trigonometric basis of a PeriodicGrid, together
/// with its equivalent (circulant) nodal matrix, stored as first-column
/// coefficients: matrix[j][l] = circulant[(j - l) mod N].
struct CfdsOperator {
    double alpha = 0.0;
    double memory_length = 0.0;
    PeriodicGrid grid{4, 1.0};
    std::vector<std::complex<double>> multipliers;  // per DFT bin, conjugate-even
    std::vector<double> circulant;
};

/// Assembles one multiplier per grid frequency. The Nyquist bin carries the
/// real part of m(w_{N/2}): that mode is a pure cosine on the grid, and the
/// real part is exactly its nodal derivative coefficient.
[[nodiscard]] inline CfdsOperator build_operator(const PeriodicGrid& grid, double alpha, double memory_length) {
    detail::check_fractional_params(alpha, memory_length);
    const std::size_t n = grid.size();
    CfdsOperator op;
    op.alpha = alpha;
    op.memory_length = memory_length;
    op.grid = grid;
    op.multipliers.assign(n, {0.0, 0.0});
    for (std::size_t k = 1; k < n / 2; ++k) {
        const std::complex<double> m = memory_multiplier(alpha, memory_length, grid.frequency(static_cast<long long>(k)));
        op.multipliers[k] = m;
        op.multipliers[n - k] = std::conj(m);
    }
    const std::complex<double> m_ny = memory_multiplier(alpha, memory_length, grid.frequency(-static_cast<long long>(n / 2)));
    op.multipliers[n / 2] = {m_ny.real(), 0.0};

    op.circulant.resize(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t d = 0; d < n; ++d) {
        double sum = 0.0;
        for (std::size_t k = 1; k < n / 2; ++k) {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(d * k % n) / static_cast<double>(n);
            const std::complex<double> rotated = op.multipliers[k] * std::polar(1.0, angle);
            sum += 2.0 * rotated.real();
        }
        sum += op.multipliers[n / 2].real() * (d % 2 == 0 ? 1.0 : -1.0);
        op.circulant[d] = sum * inv_n;
    }
    return op;
}

/// Transform, multiply, transform back. The inverse transform of a
/// conjugate-even spectrum is real up to rounding; the imaginary residue is
/// checked against roundoff scale (operator gain times input size) and
/// discarded.
[[nodiscard]] inline std::vector<double> apply(const CfdsOperator& op, std::span<const double> nodal_values) {
    const std::size_t n = op.grid.size();
    if (nodal_values.size() != n) throw std::invalid_argument("apply: value count does not match grid");
    auto coeffs = dft(nodal_values);
    for (std::size_t k = 0; k < n; ++k) coeffs[k] *= op.multipliers[k];
    auto inverse = inverse_dft(coeffs);
    double gain = 0.0, input_sup = 0.0, output_sup = 0.0;
    for (const auto& m : op.multipliers) gain = std::max(gain, std::abs(m));
    for (double v : nodal_values) input_sup = std::max(input_sup, std::abs(v));
    for (double v : inverse.values) output_sup = std::max(output_sup, std::abs(v));
    if (inverse.imaginary_residue > 1e-12 * (output_sup + gain * input_sup)) {
        throw std::runtime_error("apply: imaginary residue above rounding scale");
    }
    return std::move(inverse.values);
}

// ============================================================================
// Direct quadrature paths (oracles for the spectral route)
// ============================================================================

/// (1/Gamma(1-alpha)) * integral_{t-L}^{t} (t-tau)^{-alpha} v'(tau) dtau for
/// the trigonometric interpolant v of the samples; v' extends periodically.
[[nodiscard]] inline double cfds_direct(std::span<const double> sample_values, const PeriodicGrid& grid,
                                        double alpha, double memory_length, double t_eval) {
    detail::check_fractional_params(alpha, memory_length);
    if (!(t_eval >= 0.0) || !(t_eval < grid.period())) {
        throw std::domain_error("cfds_direct: t_eval must lie in [0, T)");
    }
    const TrigInterpolant interp(grid, sample_values);
    if (alpha == 1.0) return interp.derivative(t_eval);
    const double half = 0.5 * memory_length;
    const double integral = adaptive_gauss_jacobi(
        [&interp, t_eval, half](double x) { return interp.derivative(t_eval - half * (1.0 + x)); }, -alpha);
    return std::pow(half, 1.0 - alpha) * integral / std::tgamma(1.0 - alpha);
}

/// (1/Gamma(alpha)) * integral_{t-L}^{t} (t-tau)^{alpha-1} v(tau) dtau for
/// the trigonometric interpolant v of the samples.
[[nodiscard]] inline double sliding_rl_integral(std::span<const double> sample_values, const PeriodicGrid& grid,
                                                double alpha, double memory_length, double t_eval) {
    detail::check_fractional_params(alpha, memory_length);
    if (!(t_eval >= 0.0) || !(t_eval < grid.period())) {
        throw std::domain_error("sliding_rl_integral: t_eval must lie in [0, T)");
    }
    const TrigInterpolant interp(grid, sample_values);
    const double half = 0.5 * memory_length;
    const double integral = adaptive_gauss_jacobi(
        [&interp, t_eval, half](double x) { return interp.value(t_eval - half * (1.0 + x)); }, alpha - 1.0);
    return std::pow(half, alpha) * integral / std::tgamma(alpha);
}

/// (1/Gamma(alpha)) * integral_{t-L}^{t} (t-tau)^{alpha-1} g(tau) dtau for a
/// piecewise-smooth g: the window is split at the given interior breakpoints,
/// the piece touching tau = t uses the weakly singular rule, earlier pieces
/// use plain Gauss panels graded dyadically toward their right endpoint
/// (where the kernel varies fastest).
template <typename G>
[[nodiscard]] double sliding_rl_piecewise(G&& g, double alpha, double memory_length, double t_eval,
                                          std::span<const double> interior_breakpoints) {
    detail::check_fractional_params(alpha, memory_length);
    const double lo = t_eval - memory_length;
    std::vector<double> cuts{lo};
    for (double b : interior_breakpoints) {
        if (b > lo + 1e-13 * memory_length && b < t_eval - 1e-13 * memory_length) cuts.push_back(b);
    }
    cuts.push_back(t_eval);
    std::sort(cuts.begin(), cuts.end());

    double total = 0.0;
    const auto plain_panel = [&](double a, double b) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        return half * adaptive_gauss_jacobi(
                          [&](double x) {
                              const double tau = mid + half * x;
                              return std::pow(t_eval - tau, alpha - 1.0) * g(tau);
                          },
                          0.0);
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b - a <= 1e-14 * memory_length) continue;
        if (i + 2 == cuts.size()) {
            const double half = 0.5 * (b - a);
            total += std::pow(half, alpha) * adaptive_gauss_jacobi(
                                                 [&](double x) { return g(t_eval - half * (1.0 + x)); }, alpha - 1.0);
        } else {
            const double gap = t_eval - b;
            double left = a;
            double width = b - a;
            while (width > gap && width > 1e-13 * memory_length) {
                width *= 0.5;
                total += plain_panel(left, b - width);
                left = b - width;
            }
            total += plain_panel(left, b);
        }
    }
    return total / std::tgamma(alpha);
}

}  // namespace fracstat
