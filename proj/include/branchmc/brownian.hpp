#pragma once

#include <cmath>
#include <string>

#include "branchmc/errors.hpp"
#include "branchmc/rng.hpp"

namespace branchmc {

struct SpaceTimePoint {
    double t = 0.0;
    double x = 0.0;
};

enum class DomainKind { FullLine, Interval };

/// Spatial domain: the whole line, or a bounded interval (a, b) with
/// absorbing endpoints.
struct DomainSpec {
    DomainKind kind = DomainKind::FullLine;
    double a = 0.0;
    double b = 0.0;

    static DomainSpec full_line() { return {DomainKind::FullLine, 0.0, 0.0}; }

    static DomainSpec interval(double a, double b) {
        if (!(std::isfinite(a) && std::isfinite(b) && a < b))
            throw argument_error("DomainSpec::interval requires finite a < b");
        return {DomainKind::Interval, a, b};
    }

    bool contains(double x) const {
        return kind == DomainKind::FullLine || (x > a && x < b);
    }
};

enum class ExitKind { TimeBoundary, SpaceBoundary };

/// Where a particle left the space-time cylinder [0,horizon] x domain:
/// either at the time horizon or on a spatial endpoint (x snapped to it).
struct ExitEvent {
    ExitKind kind = ExitKind::TimeBoundary;
    SpaceTimePoint point{};
};

namespace detail {

/// Barrier hit by one step x0 -> x1 of length h inside (a, b), if any.
/// A step ending beyond a barrier always exits there; otherwise the
/// Brownian-bridge crossing probability exp(-2 (x0-a)(x1-a)/h) per barrier is
/// sampled (one uniform decides both, their sum being < 1 away from corners).
inline bool bridge_exit(double x0, double x1, double h, const DomainSpec& d, RngStream& rng,
                        double& barrier) {
    if (x1 <= d.a) {
        barrier = d.a;
        return true;
    }
    if (x1 >= d.b) {
        barrier = d.b;
        return true;
    }
    const double pa = std::exp(-2.0 * (x0 - d.a) * (x1 - d.a) / h);
    const double pb = std::exp(-2.0 * (d.b - x0) * (d.b - x1) / h);
    const double u = rng.uniform();
    if (u < pa) {
        barrier = d.a;
        return true;
    }
    if (u < pa + pb) {
        barrier = d.b;
        return true;
    }
    return false;
}

}  // namespace detail

/// Simulate Brownian motion from `start` until it exits the cylinder
/// [start.t, horizon] x domain.
///
/// Fixed steps of dt (the last one truncated to land on the horizon exactly).
/// On an interval, endpoint checks alone miss excursions that cross a barrier
/// and come back within one step, biasing exit times by O(sqrt(dt)); after
/// each step the Brownian-bridge crossing probability
///   exp(-2 (x0-a)(x1-a) / dt)
/// is sampled per barrier, and a detected crossing exits at the step midpoint
/// with x snapped to the barrier.
inline ExitEvent simulate_to_exit(SpaceTimePoint start, const DomainSpec& domain, double horizon,
                                  double dt, RngStream& rng) {
    if (!(dt > 0.0)) throw argument_error("simulate_to_exit: dt must be > 0");
    if (!domain.contains(start.x))
        throw argument_error("simulate_to_exit: start position " + std::to_string(start.x) +
                             " is not inside the domain");
    if (start.t > horizon)
        throw argument_error("simulate_to_exit: start time is past the horizon");

    double t = start.t;
    double x = start.x;
    while (t < horizon) {
        const bool last = horizon - t <= dt;
        const double h = last ? horizon - t : dt;
        const double xn = x + std::sqrt(h) * rng.normal();
        if (domain.kind == DomainKind::Interval) {
            double barrier = 0.0;
            if (detail::bridge_exit(x, xn, h, domain, rng, barrier))
                return {ExitKind::SpaceBoundary, {t + 0.5 * h, barrier}};
        }
        x = xn;
        t = last ? horizon : t + h;
    }
    return {ExitKind::TimeBoundary, {horizon, x}};
}

}  // namespace branchmc
