#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "branchmc/brownian.hpp"
#include "branchmc/engine.hpp"
#include "branchmc/errors.hpp"
#include "branchmc/expr.hpp"
#include "branchmc/fd.hpp"
#include "branchmc/quadrature.hpp"

namespace branchmc {

// ---------------------------------------------------------------------------
// Consistency checks that the deterministic and stochastic routes agree:
//
//  * verify_integral_equation: the FD solution u of u_t = (1/2) u_xx - psi(u)
//    must satisfy u + G_Q psi(u) = K_Q f, where G_Q h = E int_0^tau h along a
//    plain Brownian path and K_Q f = E f(exit point). Both operators are
//    estimated by (non-branching) Monte Carlo with u interpolated from the
//    grid, and the residual is reported with its Monte Carlo error.
//
//  * verify_lemma_identity: with U defined from (initial, Phi) by
//        U(x,t) = E_x[ e^{-kt} U0(xi_t) + int_0^t k e^{-ks} Phi(xi_s, t-s) ds ]
//    the renewal identity
//        U(x,t) + k E_x int_0^t U(xi_s, t-s) ds
//          = E_x[ U0(xi_t) ] + k E_x int_0^t Phi(xi_s, t-s) ds
//    holds exactly; both sides are evaluated by deterministic tensor
//    quadrature (Gauss-Hermite in space, Gauss-Legendre in time).
// ---------------------------------------------------------------------------

struct ResidualReport {
    double residual = 0.0;   ///< | u(T,x) + mean(int psi - f(exit)) |
    double mc_stderr = 0.0;  ///< stderr of the combined per-path statistic
    double fd_budget = 0.0;
    double u_value = 0.0;  ///< FD value u(T, x)
    Estimate combined;     ///< mean of int_0^tau psi(u) ds - f(exit) over paths
};

inline ResidualReport verify_integral_equation(const NonlinearitySpec& nl,
                                               const ScalarField& data_f,
                                               const DomainSpec& domain, double T, double x,
                                               std::uint64_t n_paths, RunPlan engine = {},
                                               double path_dt = 1e-3, std::size_t nx = 801,
                                               std::size_t nt = 0) {
    if (!(T > 0.0)) throw argument_error("verify_integral_equation: T must be > 0");
    if (n_paths < 2) throw argument_error("verify_integral_equation: n_paths must be >= 2");
    if (!domain.contains(x))
        throw argument_error("verify_integral_equation: x must lie inside the domain");

    FdOptions fd_opts;
    if (domain.kind == DomainKind::FullLine) fd_opts = full_line_window(x, T);
    const double span = (domain.kind == DomainKind::Interval) ? domain.b - domain.a
                                                              : fd_opts.x_max - fd_opts.x_min;
    if (nt == 0)
        nt = static_cast<std::size_t>(T * static_cast<double>(nx) * static_cast<double>(nx) /
                                      (span * span)) +
             1;
    const FdProbe probe = fd_probe(nl, data_f, domain, data_f, T, x, nx, nt, fd_opts);
    const GridSolution& u = probe.solution;

    engine.n_samples = n_paths;
    auto path_statistic = [&](RngStream& rng) -> std::optional<double> {
        double s = 0.0;
        double pos = x;
        double integral = 0.0;
        double psi_prev = nl.psi(u.value_at(T, pos));
        while (s < T) {
            const bool last = T - s <= path_dt;
            const double h = last ? T - s : path_dt;
            const double next = pos + std::sqrt(h) * rng.normal();
            if (domain.kind == DomainKind::Interval) {
                double barrier = 0.0;
                if (detail::bridge_exit(pos, next, h, domain, rng, barrier)) {
                    const double tau = s + 0.5 * h;
                    const double psi_exit = nl.psi(u.value_at(T - tau, barrier));
                    integral += 0.5 * (psi_prev + psi_exit) * 0.5 * h;
                    return integral - data_f(barrier, T - tau);
                }
            }
            const double s_next = last ? T : s + h;
            const double psi_next = nl.psi(u.value_at(T - s_next, next));
            integral += 0.5 * (psi_prev + psi_next) * h;  // trapezoid along the path
            psi_prev = psi_next;
            pos = next;
            s = s_next;
        }
        return integral - data_f(pos, 0.0);
    };
    const Estimate combined = run_parallel(path_statistic, engine);

    ResidualReport report;
    report.u_value = probe.value;
    report.fd_budget = probe.budget;
    report.combined = combined;
    report.mc_stderr = combined.stderr_;
    report.residual = std::fabs(probe.value + combined.mean);
    return report;
}

struct LemmaReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
};

/// Quadrature check of the renewal identity above. `phi` is a field of (x,t);
/// `initial` is U(.,0).
inline LemmaReport verify_lemma_identity(double k, double T, double x, const ScalarField& phi,
                                         std::size_t quad_n, const ScalarField& initial) {
    if (!(k > 0.0)) throw argument_error("verify_lemma_identity: k must be > 0");
    if (!(T > 0.0)) throw argument_error("verify_lemma_identity: T must be > 0");
    if (quad_n < 2) throw argument_error("verify_lemma_identity: quad_n must be >= 2");

    const QuadratureRule gh = gauss_hermite(quad_n);
    const QuadratureRule gl = gauss_legendre(quad_n, 0.0, 1.0);  // reference, scaled per use
    constexpr double inv_sqrt_pi = 0.56418958354775628695;

    // E_y[h(xi_s)] with xi_s ~ N(y, s): substitute z = (xi - y)/sqrt(2s)
    auto expect = [&](double y, double s, auto&& h) {
        const double scale = std::sqrt(2.0 * s);
        double acc = 0.0;
        for (std::size_t i = 0; i < gh.nodes.size(); ++i)
            acc += gh.weights[i] * h(y + scale * gh.nodes[i]);
        return acc * inv_sqrt_pi;
    };

    auto U = [&](double y, double t) {
        double value =
            std::exp(-k * t) * expect(y, t, [&](double z) { return initial(z, 0.0); });
        for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
            const double s = t * gl.nodes[j];
            const double w = t * gl.weights[j];
            value += w * k * std::exp(-k * s) *
                     expect(y, s, [&](double z) { return phi(z, t - s); });
        }
        return value;
    };

    double lhs = U(x, T);
    double rhs = expect(x, T, [&](double z) { return initial(z, 0.0); });
    for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
        const double s = T * gl.nodes[j];
        const double w = T * gl.weights[j];
        lhs += w * k * expect(x, s, [&](double z) { return U(z, T - s); });
        rhs += w * k * expect(x, s, [&](double z) { return phi(z, T - s); });
    }

    LemmaReport report;
    report.lhs = lhs;
    report.rhs = rhs;
    report.residual = std::fabs(lhs - rhs);
    return report;
}

inline LemmaReport verify_lemma_identity(double k, double T, double x, const ScalarField& phi,
                                         std::size_t quad_n) {
    return verify_lemma_identity(k, T, x, phi, quad_n, ScalarField::parse("exp(-x^2)"));
}

}  // namespace branchmc
