#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fracstat {

// ============================================================================
// Gauss-Jacobi quadrature on [-1, 1] with weight (1+x)^exponent
// ============================================================================

/// Nodes/weights such that  integral_{-1}^{1} (1+x)^exponent g(x) dx
/// ~= sum_i weights[i] * g(nodes[i]).  Requires exponent > -1.
struct GaussJacobiRule {
    std::size_t order = 0;
    double exponent = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

/// Symmetric tridiagonal QL with implicit shifts, rotating the first
/// eigenvector component alongside (the Golub-Welsch reduction: only the
/// first row of the eigenvector matrix is needed for quadrature weights).
inline void tridiagonal_ql_first_component(std::vector<double>& diag,
                                           std::vector<double>& off,
                                           std::vector<double>& first) {
    const std::size_t n = diag.size();
    off.push_back(0.0);
    for (std::size_t l = 0; l < n; ++l) {
        int iterations = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(diag[m]) + std::abs(diag[m + 1]);
                if (std::abs(off[m]) <= 1e-15 * dd) break;
            }
            if (m != l) {
                if (iterations++ == 60) {
                    throw std::runtime_error("gauss_jacobi_rule: QL iteration failed to converge");
                }
                double g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
                double r = std::hypot(g, 1.0);
                g = diag[m] - diag[l] + off[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * off[i];
                    const double b = c * off[i];
                    r = std::hypot(f, g);
                    off[i + 1] = r;
                    if (r == 0.0) {
                        diag[i + 1] -= p;
                        off[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = diag[i + 1] - p;
                    r = (diag[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    diag[i + 1] = g + p;
                    g = c * r - b;
                    f = first[i + 1];
                    first[i + 1] = s * first[i] + c * f;
                    first[i] = c * first[i] - s * f;
                }
                if (underflow) continue;
                diag[l] -= p;
                off[l] = g;
                off[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace detail

/// Builds the rule by Golub-Welsch from the Jacobi-polynomial three-term
/// recurrence for the weight (1-x)^0 (1+x)^b, b = exponent.
[[nodiscard]] inline GaussJacobiRule make_gauss_jacobi_rule(std::size_t order, double exponent) {
    if (order == 0) throw std::domain_error("gauss_jacobi_rule: order must be positive");
    if (!(exponent > -1.0)) throw std::domain_error("gauss_jacobi_rule: exponent must exceed -1");
    const double b = exponent;

    std::vector<double> diag(order), off(order > 1 ? order - 1 : 0);
    diag[0] = b / (b + 2.0);
    for (std::size_t k = 1; k < order; ++k) {
        const double n = static_cast<double>(k);
        diag[k] = b * b / ((2.0 * n + b) * (2.0 * n + b + 2.0));
    }
    if (order > 1) {
        off[0] = std::sqrt(4.0 * (b + 1.0) / ((b + 2.0) * (b + 2.0) * (b + 3.0)));
        for (std::size_t k = 2; k < order; ++k) {
            const double n = static_cast<double>(k);
            const double num = 4.0 * n * n * (n + b) * (n + b);
            const double den = (2.0 * n + b) * (2.0 * n + b) * (2.0 * n + b + 1.0) * (2.0 * n + b - 1.0);
            off[k - 1] = std::sqrt(num / den);
        }
    }

    std::vector<double> first(order, 0.0);
    first[0] = 1.0;
    detail::tridiagonal_ql_first_component(diag, off, first);

    const double total_mass = std::pow(2.0, b + 1.0) / (b + 1.0);
    GaussJacobiRule rule;
    rule.order = order;
    rule.exponent = exponent;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    std::vector<std::size_t> perm(order);
    for (std::size_t i = 0; i < order; ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(),
              [&diag](std::size_t a2, std::size_t b2) { return diag[a2] < diag[b2]; });
    for (std::size_t i = 0; i < order; ++i) {
        rule.nodes[i] = diag[perm[i]];
        rule.weights[i] = total_mass * first[perm[i]] * first[perm[i]];
    }
    return rule;
}

/// Memoized access; rules are immutable and shared. Thread-safe.
[[nodiscard]] inline const GaussJacobiRule& gauss_jacobi_rule(std::size_t order, double exponent) {
    using Key = std::pair<std::size_t, std::uint64_t>;
    static std::map<Key, std::unique_ptr<GaussJacobiRule>> cache;
    static std::mutex mutex;
    const Key key{order, std::bit_cast<std::uint64_t>(exponent)};
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, std::make_unique<GaussJacobiRule>(make_gauss_jacobi_rule(order, exponent))).first;
    }
    return *it->second;
}

// ============================================================================
// Adaptive order doubling
// ============================================================================

inline constexpr std::size_t kQuadratureBaseOrder = 64;
inline constexpr std::size_t kQuadratureMaxOrder = 2048;

/// integral_{-1}^{1} (1+x)^exponent g(x) dx with the order doubled from 64
/// until two successive results agree to rel_tol, capped at kQuadratureMaxOrder.
/// Kahan compensation keeps the sum accurate under oscillatory cancellation.
template <typename F>
[[nodiscard]] auto adaptive_gauss_jacobi(F&& g, double exponent, double rel_tol = 1e-13) {
    using Value = decltype(g(0.0));
    Value previous{};
    bool have_previous = false;
    for (std::size_t order = kQuadratureBaseOrder; order <= kQuadratureMaxOrder; order *= 2) {
        const GaussJacobiRule& rule = gauss_jacobi_rule(order, exponent);
        Value sum{};
        Value compensation{};
        for (std::size_t i = 0; i < rule.order; ++i) {
            const Value term = rule.weights[i] * g(rule.nodes[i]) - compensation;
            const Value next = sum + term;
            compensation = (next - sum) - term;
            sum = next;
        }
        if (have_previous && std::abs(sum - previous) <= rel_tol * std::abs(sum)) return sum;
        previous = sum;
        have_previous = true;
    }
    return previous;
}

}  // namespace fracstat
