#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "branchmc/engine.hpp"
#include "branchmc/errors.hpp"
#include "branchmc/expr.hpp"
#include "branchmc/rng.hpp"

namespace branchmc {

// ---------------------------------------------------------------------------
// Branching-tree estimator for v_t = (1/2) v_xx + v^2 - v with v(0,.) = g:
// a particle diffuses for an Exp(1) holding time, splits in two, and the
// estimate at (t, x) is E[ product of g over the particle positions at
// elapsed time t ]. |g| <= 1 keeps the product (and the expectation) defined.
// ---------------------------------------------------------------------------

struct McKeanConfig {
    double horizon_t = 1.0;
    double start_x = 0.0;
    double dt = 1e-3;  ///< unused on the full line (transitions are sampled exactly)
    std::uint64_t max_particles = 1'000'000;
    ScalarField initial_condition;
    double check_window = 12.0;   ///< |g|<=1 is grid-checked on [x0 - w, x0 + w]
    bool skip_amplitude_check = false;
};

/// Grid check of the sufficient condition sup|g| <= 1 (10^4 points).
inline void validate(const McKeanConfig& cfg) {
    if (!(cfg.horizon_t > 0.0)) throw argument_error("McKeanConfig: horizon_t must be > 0");
    if (!(cfg.dt > 0.0)) throw argument_error("McKeanConfig: dt must be > 0");
    if (cfg.max_particles < 1) throw argument_error("McKeanConfig: max_particles must be >= 1");
    if (cfg.skip_amplitude_check) return;
    const int n = 10000;
    const double w = cfg.check_window;
    for (int i = 0; i < n; ++i) {
        const double x = cfg.start_x - w + 2.0 * w * static_cast<double>(i) / (n - 1);
        const double v = cfg.initial_condition(x, 0.0);
        if (!(std::fabs(v) <= 1.0 + 1e-12))
            throw argument_error("McKeanConfig: initial condition violates |g| <= 1 at x = " +
                                 std::to_string(x) + " (g = " + std::to_string(v) +
                                 "); pass skip_amplitude_check to override");
    }
}

namespace detail {

struct BackwardParticle {
    double x;
    double remaining;
};

}  // namespace detail

/// One tree realization: the product of g over the leaves.
///
/// Depth-first with an explicit (position, remaining-time) stack; throws
/// explosion_error once the tree has created more than cfg.max_particles
/// particles.
inline double mckean_sample(const McKeanConfig& cfg, RngStream& rng) {
    const ScalarField& g = cfg.initial_condition;
    std::vector<detail::BackwardParticle> stack;
    stack.push_back({cfg.start_x, cfg.horizon_t});
    std::uint64_t created = 1;
    double product = 1.0;
    while (!stack.empty()) {
        detail::BackwardParticle p = stack.back();
        stack.pop_back();
        for (;;) {
            const double hold = sample_exponential(1.0, rng);
            if (hold >= p.remaining) {
                product *= g(brownian_step(p.x, p.remaining, rng), 0.0);
                break;
            }
            const double xb = brownian_step(p.x, hold, rng);
            p = {xb, p.remaining - hold};
            if (++created > cfg.max_particles)
                throw explosion_error("mckean_sample: tree exceeded max_particles = " +
                                      std::to_string(cfg.max_particles));
            stack.push_back(p);  // the sibling continues from the same point
        }
    }
    return product;
}

/// Monte Carlo mean over n_samples independent trees.
inline Estimate mckean_solve(const McKeanConfig& cfg, std::uint64_t n_samples,
                             RunPlan engine = {}) {
    if (n_samples < 2) throw argument_error("mckean_solve: n_samples must be >= 2");
    validate(cfg);
    engine.n_samples = n_samples;
    auto sampler = [&cfg](RngStream& rng) -> std::optional<double> {
        try {
            return mckean_sample(cfg, rng);
        } catch (const explosion_error&) {
            return std::nullopt;
        }
    };
    return run_parallel(sampler, engine);
}

/// Clock-and-branching skeleton only: the number of particles alive at
/// elapsed time t (geometric with mean e^t).
inline std::uint64_t sample_population(double t, RngStream& rng,
                                       std::uint64_t max_particles = 1'000'000) {
    if (!(t > 0.0)) throw argument_error("sample_population: t must be > 0");
    std::vector<double> stack;
    stack.push_back(t);
    std::uint64_t created = 1;
    std::uint64_t alive = 0;
    while (!stack.empty()) {
        double remaining = stack.back();
        stack.pop_back();
        for (;;) {
            const double hold = sample_exponential(1.0, rng);
            if (hold >= remaining) {
                ++alive;
                break;
            }
            remaining -= hold;
            if (++created > max_particles)
                throw explosion_error("sample_population: tree exceeded max_particles = " +
                                      std::to_string(max_particles));
            stack.push_back(remaining);
        }
    }
    return alive;
}

}  // namespace branchmc
