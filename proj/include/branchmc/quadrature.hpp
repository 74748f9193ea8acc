#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "branchmc/errors.hpp"

namespace branchmc {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [a, b] (Newton iteration on P_n).
inline QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
    if (n == 0) throw argument_error("gauss_legendre: n must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t m = (n + 1) / 2;
    const long double xm = 0.5L * (static_cast<long double>(b) + a);
    const long double xl = 0.5L * (static_cast<long double>(b) - a);
    for (std::size_t i = 0; i < m; ++i) {
        long double z = std::cos(3.141592653589793238L * (static_cast<long double>(i) + 0.75L) /
                                 (static_cast<long double>(n) + 0.5L));
        long double pp = 0.0L;
        for (int iter = 0; iter < 100; ++iter) {
            long double p1 = 1.0L, p2 = 0.0L;
            for (std::size_t j = 0; j < n; ++j) {
                const long double p3 = p2;
                p2 = p1;
                p1 = ((2.0L * j + 1.0L) * z * p2 - static_cast<long double>(j) * p3) / (j + 1.0L);
            }
            pp = static_cast<long double>(n) * (z * p1 - p2) / (z * z - 1.0L);
            const long double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(static_cast<double>(z - z1)) < 1e-16) break;
        }
        rule.nodes[i] = static_cast<double>(xm - xl * z);
        rule.nodes[n - 1 - i] = static_cast<double>(xm + xl * z);
        const double w = static_cast<double>(2.0L * xl / ((1.0L - z * z) * pp * pp));
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

/// Gauss-Hermite rule for integrals against exp(-z^2) on the real line
/// (orthonormal Hermite recurrence, so no overflow at large n).
inline QuadratureRule gauss_hermite(std::size_t n) {
    if (n == 0) throw argument_error("gauss_hermite: n must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const long double pim4 = 0.7511255444649424828587L;  // pi^{-1/4}
    const std::size_t m = (n + 1) / 2;
    std::vector<long double> zs(m), ws(m);
    long double z = 0.0L;
    for (std::size_t i = 0; i < m; ++i) {
        // initial guesses for the positive roots in descending order
        if (i == 0) {
            z = std::sqrt(2.0L * n + 1.0L) - 1.85575L * std::pow(2.0L * n + 1.0L, -0.16667L);
        } else if (i == 1) {
            z -= 1.14L * std::pow(static_cast<long double>(n), 0.426L) / z;
        } else if (i == 2) {
            z = 1.86L * z - 0.86L * zs[0];
        } else if (i == 3) {
            z = 1.91L * z - 0.91L * zs[1];
        } else {
            z = 2.0L * z - zs[i - 2];
        }
        long double pp = 0.0L;
        for (int iter = 0; iter < 200; ++iter) {
            long double p1 = pim4, p2 = 0.0L;
            for (std::size_t j = 1; j <= n; ++j) {
                const long double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0L / j) * p2 -
                     std::sqrt(static_cast<long double>(j - 1) / j) * p3;
            }
            pp = std::sqrt(2.0L * n) * p2;
            const long double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(static_cast<double>(z - z1)) < 1e-16) break;
        }
        zs[i] = z;
        ws[i] = 2.0L / (pp * pp);
    }
    for (std::size_t i = 0; i < m; ++i) {
        // zs[0] is the largest root; fill nodes in ascending order
        const double node = static_cast<double>(zs[i]);
        rule.nodes[n - 1 - i] = node;
        rule.nodes[i] = -node;
        rule.weights[n - 1 - i] = static_cast<double>(ws[i]);
        rule.weights[i] = static_cast<double>(ws[i]);
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;  // exact by symmetry
    return rule;
}

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (std::fabs(err) <= 15.0 * tol) return left + right + err / 15.0;
    if (depth <= 0)
        throw numerical_error("adaptive quadrature failed to converge on [" + std::to_string(a) +
                              ", " + std::to_string(b) + "]");
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double tol = 1e-11, int max_depth = 48) {
    if (!(b > a)) throw argument_error("integrate_adaptive: requires b > a");
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace branchmc
