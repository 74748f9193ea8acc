#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "branchmc/brownian.hpp"
#include "branchmc/engine.hpp"
#include "branchmc/errors.hpp"
#include "branchmc/expr.hpp"
#include "branchmc/fd.hpp"
#include "branchmc/mckean.hpp"
#include "branchmc/offspring.hpp"

namespace branchmc {

// ---------------------------------------------------------------------------
// Branching exit-measure estimators on Q = [0,t] x domain.
//
// A particle tree starts from delta_x, branches at exponential rate with a
// prescribed offspring law, and each particle that leaves Q (hits the spatial
// boundary, or survives to the horizon) deposits its exit point. With mass
// beta per particle, rate k_beta = alpha / beta^{alpha-1} and the critical
// u^alpha offspring law,
//     u_beta(t, x) = (1 - E exp(-beta * sum_i f(exit_i))) / beta
// solves u_t = (1/2) u_xx - u^alpha with data (1 - e^{-beta f}) / beta
// exactly at every finite beta (the generating function is engineered so the
// nonlinearity is u^alpha independent of beta).
//
// Boundary/initial data f is a field f(x, t_pde): exits at the horizon are
// evaluated at t_pde = 0 (initial data), lateral exits at t_pde = horizon -
// exit_time. ExitEvent stores the process time.
// ---------------------------------------------------------------------------

struct SuperConfig {
    double alpha = 2.0;
    double beta = 1.0;
    double horizon_t = 0.5;
    double start_x = 0.0;
    DomainSpec domain = DomainSpec::full_line();
    ScalarField boundary_data;  ///< f >= 0 on the space-time boundary
    double dt = 1e-3;
    std::uint64_t max_particles = 1'000'000;
    double check_window = 12.0;
    bool skip_data_check = false;
};

/// One realization: all exit points and exp(-beta * sum f(exit points)).
struct ExitSample {
    std::vector<ExitEvent> exit_points;
    double functional_value = 1.0;
};

inline void validate(const SuperConfig& cfg) {
    if (!(cfg.alpha > 1.0 && cfg.alpha <= 2.0))
        throw argument_error("SuperConfig: alpha must be in (1, 2]");
    if (!(cfg.beta > 0.0 && cfg.beta <= 1.0))
        throw argument_error("SuperConfig: beta must be in (0, 1]");
    if (!(cfg.horizon_t > 0.0)) throw argument_error("SuperConfig: horizon_t must be > 0");
    if (!(cfg.dt > 0.0)) throw argument_error("SuperConfig: dt must be > 0");
    if (!cfg.domain.contains(cfg.start_x))
        throw argument_error("SuperConfig: start_x must lie inside the domain");
    if (cfg.skip_data_check) return;
    // f >= 0 is needed for exp(-beta <f, X_Q>) <= 1; grid-checked like |g| <= 1
    const int n = 2000;
    double lo = cfg.start_x - cfg.check_window, hi = cfg.start_x + cfg.check_window;
    if (cfg.domain.kind == DomainKind::Interval) {
        lo = cfg.domain.a;
        hi = cfg.domain.b;
    }
    for (int j = 0; j < 9; ++j) {
        const double t = cfg.horizon_t * static_cast<double>(j) / 8.0;
        for (int i = 0; i < n; ++i) {
            const double x = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
            const double v = cfg.boundary_data(x, t);
            if (!(v >= 0.0))
                throw argument_error("SuperConfig: boundary data must be >= 0 (f(" +
                                     std::to_string(x) + ", " + std::to_string(t) +
                                     ") = " + std::to_string(v) + ")");
        }
        if (!cfg.boundary_data.uses_t()) break;
    }
}

namespace detail {

struct ForwardParticle {
    double x;
    double elapsed;
};

/// Forward walk of a branching exit tree over Q = [0, horizon] x domain.
/// `offspring(rng)` draws the branch size; `on_exit(event)` sees every exit.
/// Full-line diffusion uses one exact Gaussian transition per lifetime; on an
/// interval the lifetime is stepped with the Brownian-bridge exit check.
template <class OffspringFn, class ExitFn>
void walk_exit_tree(double x0, double horizon, const DomainSpec& domain, double dt, double rate,
                    std::uint64_t max_particles, RngStream& rng, OffspringFn&& offspring,
                    ExitFn&& on_exit) {
    std::vector<ForwardParticle> stack;
    stack.push_back({x0, 0.0});
    std::uint64_t created = 1;
    while (!stack.empty()) {
        ForwardParticle p = stack.back();
        stack.pop_back();
        for (;;) {
            const double lifetime = sample_exponential(rate, rng);
            const double branch_time = p.elapsed + lifetime;
            if (domain.kind == DomainKind::FullLine) {
                if (branch_time >= horizon) {
                    const double xe = brownian_step(p.x, horizon - p.elapsed, rng);
                    on_exit(ExitEvent{ExitKind::TimeBoundary, {horizon, xe}});
                    break;
                }
                p = {brownian_step(p.x, lifetime, rng), branch_time};
            } else {
                const double seg_end = std::min(branch_time, horizon);
                const ExitEvent ev =
                    simulate_to_exit({p.elapsed, p.x}, domain, seg_end, dt, rng);
                if (ev.kind == ExitKind::SpaceBoundary) {
                    on_exit(ev);
                    break;
                }
                if (branch_time >= horizon) {
                    on_exit(ev);  // time-boundary exit at the horizon
                    break;
                }
                p = {ev.point.x, branch_time};
            }
            const std::size_t children = offspring(rng);
            if (children == 0) break;  // dies; contributes nothing to the exit measure
            created += children;
            if (created > max_particles)
                throw explosion_error("walk_exit_tree: tree exceeded max_particles = " +
                                      std::to_string(max_particles));
            for (std::size_t c = 1; c < children; ++c) stack.push_back(p);
            // continue as the first child
        }
    }
}

}  // namespace detail

/// One exit-measure realization under the alpha law for cfg.
inline ExitSample superprocess_sample(const SuperConfig& cfg, const OffspringLaw& law,
                                      RngStream& rng) {
    const double rate = k_beta(cfg.alpha, cfg.beta);
    ExitSample sample;
    double sum_f = 0.0;
    detail::walk_exit_tree(
        cfg.start_x, cfg.horizon_t, cfg.domain, cfg.dt, rate, cfg.max_particles, rng,
        [&law](RngStream& r) { return law.sample(r); },
        [&](const ExitEvent& ev) {
            sample.exit_points.push_back(ev);
            sum_f += cfg.boundary_data(ev.point.x, cfg.horizon_t - ev.point.t);
        });
    sample.functional_value = std::exp(-cfg.beta * sum_f);
    return sample;
}

/// Estimate of u_beta(t, x) = (1 - E e^{-beta <f, X_Q>}) / beta: the solution
/// of u_t = (1/2) u_xx - u^alpha with data f_beta = (1 - e^{-beta f}) / beta.
inline Estimate superprocess_solve(const SuperConfig& cfg, std::uint64_t n_samples,
                                   RunPlan engine = {}) {
    if (n_samples < 2) throw argument_error("superprocess_solve: n_samples must be >= 2");
    validate(cfg);
    const OffspringLaw law = alpha_law(cfg.alpha);
    const double rate = k_beta(cfg.alpha, cfg.beta);
    engine.n_samples = n_samples;
    auto sampler = [&](RngStream& rng) -> std::optional<double> {
        try {
            double sum_f = 0.0;
            detail::walk_exit_tree(
                cfg.start_x, cfg.horizon_t, cfg.domain, cfg.dt, rate, cfg.max_particles, rng,
                [&law](RngStream& r) { return law.sample(r); },
                [&](const ExitEvent& ev) {
                    sum_f += cfg.boundary_data(ev.point.x, cfg.horizon_t - ev.point.t);
                });
            return std::exp(-cfg.beta * sum_f);
        } catch (const explosion_error&) {
            return std::nullopt;
        }
    };
    Estimate e = run_parallel(sampler, engine);
    e.mean = (1.0 - e.mean) / cfg.beta;
    e.stderr_ = e.stderr_ / cfg.beta;
    return e;
}

/// Pointwise transform f -> (1 - e^{-beta f}) / beta (the data seen by the
/// finite-beta estimator).
inline ScalarField transform_data(const ScalarField& f, double beta) {
    if (!(beta > 0.0)) throw argument_error("transform_data: beta must be > 0");
    char b[40];
    std::snprintf(b, sizeof(b), "%.17g", beta);
    return ScalarField::parse("(1-exp(-" + std::string(b) + "*(" + f.source() + ")))/" + b);
}

/// Exit-measure form of the binary-tree estimator: absorbs particles on the
/// spatial boundary before the horizon and returns E[ prod_i g(exit_i) ].
/// g must satisfy 0 < g <= 1 (exits combine multiplicatively through
/// exp(sum log g), so g must stay positive).
inline Estimate kpp_exit_solve(SpaceTimePoint start, double horizon, const DomainSpec& domain,
                               const ScalarField& data_g, std::uint64_t n_samples, double dt,
                               RunPlan engine = {}) {
    if (n_samples < 2) throw argument_error("kpp_exit_solve: n_samples must be >= 2");
    if (!(horizon > start.t)) throw argument_error("kpp_exit_solve: horizon must exceed start.t");
    if (!(dt > 0.0)) throw argument_error("kpp_exit_solve: dt must be > 0");
    if (!domain.contains(start.x))
        throw argument_error("kpp_exit_solve: start must lie inside the domain");
    {
        const int n = 2000;
        double lo = start.x - 12.0, hi = start.x + 12.0;
        if (domain.kind == DomainKind::Interval) {
            lo = domain.a;
            hi = domain.b;
        }
        for (int j = 0; j < 9; ++j) {
            const double t = horizon * static_cast<double>(j) / 8.0;
            for (int i = 0; i < n; ++i) {
                const double x = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
                const double v = data_g(x, t);
                if (!(v > 0.0 && v <= 1.0 + 1e-12))
                    throw argument_error("kpp_exit_solve: data must satisfy 0 < g <= 1 (g(" +
                                         std::to_string(x) + ", " + std::to_string(t) +
                                         ") = " + std::to_string(v) + ")");
            }
            if (!data_g.uses_t()) break;
        }
    }
    const std::uint64_t max_particles = 1'000'000;
    engine.n_samples = n_samples;
    auto sampler = [&](RngStream& rng) -> std::optional<double> {
        try {
            double product = 1.0;
            detail::walk_exit_tree(
                start.x, horizon, domain, dt, 1.0, max_particles, rng,
                [](RngStream&) -> std::size_t { return 2; },
                [&](const ExitEvent& ev) {
                    product *= data_g(ev.point.x, horizon - ev.point.t);
                });
            return product;
        } catch (const explosion_error&) {
            return std::nullopt;
        }
    };
    return run_parallel(sampler, engine);
}

struct BetaSweepRow {
    double beta = 0.0;
    Estimate estimate;
    double fd_f_beta = 0.0;  ///< FD solve with data f_beta at the probe point
    double fd_f = 0.0;       ///< FD solve with data f at the probe point
};

struct BetaSweepOptions {
    std::size_t nx = 401;
    std::size_t nt = 0;  ///< 0 = smallest nt satisfying the fd_solve guard
};

/// superprocess_solve per beta (matched n_samples), with deterministic FD
/// reference values for data f_beta and data f. Warns on stderr when the
/// 1/beta variance blowup pushes stderr above 20% of the mean.
inline std::vector<BetaSweepRow> beta_sweep(const SuperConfig& cfg,
                                            const std::vector<double>& betas,
                                            std::uint64_t n_samples, RunPlan engine = {},
                                            BetaSweepOptions opts = {}) {
    if (betas.empty()) throw argument_error("beta_sweep: betas must be non-empty");
    for (std::size_t i = 1; i < betas.size(); ++i)
        if (!(betas[i] < betas[i - 1]))
            throw argument_error("beta_sweep: betas must be sorted descending");

    FdOptions fd_opts;
    if (cfg.domain.kind == DomainKind::FullLine)
        fd_opts = full_line_window(cfg.start_x, cfg.horizon_t);
    const double span = (cfg.domain.kind == DomainKind::Interval)
                            ? cfg.domain.b - cfg.domain.a
                            : fd_opts.x_max - fd_opts.x_min;
    const std::size_t nt =
        opts.nt > 0 ? opts.nt
                    : static_cast<std::size_t>(cfg.horizon_t * static_cast<double>(opts.nx) *
                                               static_cast<double>(opts.nx) / (span * span)) +
                          1;
    const NonlinearitySpec nl = NonlinearitySpec::power_alpha(cfg.alpha);

    const double fd_f = fd_solve(nl, cfg.boundary_data, cfg.domain, cfg.boundary_data,
                                 cfg.horizon_t, opts.nx, nt, fd_opts)
                            .value_at(cfg.horizon_t, cfg.start_x);

    std::vector<BetaSweepRow> rows;
    rows.reserve(betas.size());
    for (double beta : betas) {
        SuperConfig c = cfg;
        c.beta = beta;
        BetaSweepRow row;
        row.beta = beta;
        row.estimate = superprocess_solve(c, n_samples, engine);
        const ScalarField f_beta = transform_data(cfg.boundary_data, beta);
        row.fd_f_beta = fd_solve(nl, f_beta, cfg.domain, f_beta, cfg.horizon_t, opts.nx, nt,
                                 fd_opts)
                            .value_at(cfg.horizon_t, cfg.start_x);
        row.fd_f = fd_f;
        if (row.estimate.mean != 0.0 &&
            row.estimate.stderr_ > 0.2 * std::fabs(row.estimate.mean))
            std::fprintf(stderr,
                         "[beta_sweep] warning: stderr/mean = %.3f at beta = %g "
                         "(variance grows as beta shrinks)\n",
                         row.estimate.stderr_ / std::fabs(row.estimate.mean), beta);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace branchmc
