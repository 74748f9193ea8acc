#pragma once

#include <cmath>
#include <functional>

#include "branchmc/errors.hpp"
#include "branchmc/expr.hpp"
#include "branchmc/quadrature.hpp"

namespace branchmc {

/// Heat kernel for the generator (1/2) d^2/dx^2: density of N(x, t).
inline double heat_kernel(double x, double y, double t) {
    const double d = x - y;
    return std::exp(-d * d / (2.0 * t)) / std::sqrt(2.0 * 3.14159265358979323846 * t);
}

/// Solution of u_t = (1/2) u_xx with u(0,.) = f, evaluated at (t, x):
///   integral of the N(x,t) density against f, by adaptive quadrature.
///
/// The kernel variance is t (consistent with the (1/2) d^2 generator), not 2t.
/// Integration window of 10 standard deviations leaves < 1e-22 of the mass out.
inline double heat_solution(double x, double t, const std::function<double(double)>& f,
                            double tol = 1e-11) {
    if (!(t > 0.0)) throw argument_error("heat_solution: t must be > 0");
    const double w = 10.0 * std::sqrt(t);
    const auto integrand = [&](double y) { return heat_kernel(x, y, t) * f(y); };
    return integrate_adaptive(integrand, x - w, x + w, tol);
}

inline double heat_solution(double x, double t, const ScalarField& f, double tol = 1e-11) {
    return heat_solution(x, t, [&](double y) { return f(y, 0.0); }, tol);
}

}  // namespace branchmc
