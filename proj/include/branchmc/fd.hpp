#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "branchmc/brownian.hpp"
#include "branchmc/errors.hpp"
#include "branchmc/expr.hpp"
#include "branchmc/heat.hpp"

namespace branchmc {

/// Reaction term of u_t = (1/2) u_xx + r(u).
///
/// Kpp is the logistic form r(u) = u - u^2 (its psi is u^2 - u; substituting
/// v = 1 - u turns it into v_t = (1/2) v_xx + v^2 - v, the growth form the
/// branching-tree estimators sample). PowerAlpha is r(u) = -u^alpha for the
/// absorption equation u_t = (1/2) u_xx - u^alpha.
struct NonlinearitySpec {
    enum class Kind { None, Kpp, PowerAlpha };

    Kind kind = Kind::None;
    double alpha = 0.0;

    static NonlinearitySpec none() { return {Kind::None, 0.0}; }
    static NonlinearitySpec kpp() { return {Kind::Kpp, 0.0}; }
    static NonlinearitySpec power_alpha(double a) {
        if (!(a > 1.0 && a <= 2.0))
            throw argument_error("NonlinearitySpec::power_alpha: alpha must be in (1, 2]");
        return {Kind::PowerAlpha, a};
    }

    double reaction(double u) const {
        switch (kind) {
            case Kind::None: return 0.0;
            case Kind::Kpp: return u - u * u;
            case Kind::PowerAlpha:
                // fractional alpha: clamp FD undershoots below 0 to avoid NaN
                return -std::pow(u > 0.0 ? u : 0.0, alpha);
        }
        return 0.0;
    }

    /// psi(u) with u_t = (1/2) u_xx - psi(u); psi = -reaction.
    double psi(double u) const { return -reaction(u); }
};

/// Space-time grid of a deterministic solve. Time levels are a strided
/// subset of the internal steps (always including t = 0 and t = T).
struct GridSolution {
    std::vector<double> xs;
    std::vector<double> ts;
    std::vector<double> values;  // level-major: values[k * nx + i]

    std::size_t nx() const { return xs.size(); }
    std::size_t n_levels() const { return ts.size(); }
    double dx() const { return xs.size() > 1 ? xs[1] - xs[0] : 0.0; }
    double at(std::size_t level, std::size_t ix) const { return values[level * xs.size() + ix]; }

    /// Pointwise evaluation: cubic (Catmull-Rom) in space, linear in time.
    double value_at(double t, double x) const {
        if (ts.empty() || xs.empty()) throw argument_error("GridSolution: empty grid");
        const double t_lo = ts.front(), t_hi = ts.back();
        if (t < t_lo - 1e-12 || t > t_hi + 1e-12)
            throw argument_error("GridSolution::value_at: t outside stored range");
        t = std::clamp(t, t_lo, t_hi);
        auto it = std::upper_bound(ts.begin(), ts.end(), t);
        std::size_t k1 = static_cast<std::size_t>(std::distance(ts.begin(), it));
        k1 = std::clamp<std::size_t>(k1, 1, ts.size() - 1);
        const std::size_t k0 = k1 - 1;
        const double w = (ts[k1] > ts[k0]) ? (t - ts[k0]) / (ts[k1] - ts[k0]) : 0.0;
        return (1.0 - w) * space_interp(k0, x) + w * space_interp(k1, x);
    }

    double space_interp(std::size_t level, double x) const {
        const std::size_t n = xs.size();
        const double h = dx();
        double s = (x - xs.front()) / h;
        s = std::clamp(s, 0.0, static_cast<double>(n - 1));
        const auto i = static_cast<std::ptrdiff_t>(std::floor(s));
        const double u = s - static_cast<double>(i);
        auto pick = [&](std::ptrdiff_t j) {
            j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(n - 1));
            return at(level, static_cast<std::size_t>(j));
        };
        const double p0 = pick(i - 1), p1 = pick(i), p2 = pick(i + 1), p3 = pick(i + 2);
        return 0.5 * (2.0 * p1 + (-p0 + p2) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u +
                      (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u * u);
    }

    /// (x, t, value) triples, one per stored grid point, round-trip precision.
    void write_csv(std::ostream& os) const {
        os << "x,t,value\n";
        char buf[80];
        for (std::size_t k = 0; k < ts.size(); ++k) {
            for (std::size_t i = 0; i < xs.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", xs[i], ts[k], at(k, i));
                os << buf;
            }
        }
    }
};

struct FdOptions {
    double x_min = 0.0;  ///< truncation window, FullLine only
    double x_max = 0.0;
    std::size_t max_stored_levels = 257;
    double boundary_quad_tol = 1e-10;
    double blowup_threshold = 1e8;
};

/// Truncation window for a full-line solve probed at probe_x: half-width
/// |probe_x| + 6 sqrt(T) plus a unit of slack, centered at the origin.
inline FdOptions full_line_window(double probe_x, double T, double pad = 1.0) {
    FdOptions opts;
    const double half = std::fabs(probe_x) + 6.0 * std::sqrt(T) + pad;
    opts.x_min = -half;
    opts.x_max = half;
    return opts;
}

namespace detail {

// Constant-coefficient tridiagonal (off, diag, off) solve, LU precomputed.
class TridiagCN {
public:
    TridiagCN(std::size_t n, double diag, double off) : off_(off), cp_(n), denom_(n) {
        denom_[0] = diag;
        cp_[0] = off / diag;
        for (std::size_t i = 1; i < n; ++i) {
            denom_[i] = diag - off * cp_[i - 1];
            cp_[i] = off / denom_[i];
        }
    }

    void solve(std::vector<double>& rhs) const {
        const std::size_t n = cp_.size();
        rhs[0] /= denom_[0];
        for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - off_ * rhs[i - 1]) / denom_[i];
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cp_[i] * rhs[i + 1];
    }

private:
    double off_;
    std::vector<double> cp_;
    std::vector<double> denom_;
};

// Dirichlet values on the lateral boundary. On an interval they come from the
// boundary field (or the data field if none was given); on a truncated full
// line they are calibrated against the linear heat solution of the data,
// sampled on a time grid and interpolated.
class LateralValues {
public:
    LateralValues(const DomainSpec& domain, const ScalarField& data,
                  const std::optional<ScalarField>& boundary, double x_left, double x_right,
                  double T, double quad_tol) {
        if (domain.kind == DomainKind::Interval) {
            field_ = boundary ? *boundary : data;
            x_left_ = x_left;
            x_right_ = x_right;
            from_field_ = true;
            return;
        }
        const std::size_t n = 257;
        cache_dt_ = T / static_cast<double>(n - 1);
        left_.resize(n);
        right_.resize(n);
        left_[0] = data(x_left, 0.0);
        right_[0] = data(x_right, 0.0);
        for (std::size_t j = 1; j < n; ++j) {
            const double t = static_cast<double>(j) * cache_dt_;
            left_[j] = heat_solution(x_left, t, data, quad_tol);
            right_[j] = heat_solution(x_right, t, data, quad_tol);
        }
    }

    double left(double t) const { return from_field_ ? field_(x_left_, t) : interp(left_, t); }
    double right(double t) const { return from_field_ ? field_(x_right_, t) : interp(right_, t); }

private:
    double interp(const std::vector<double>& cache, double t) const {
        double s = t / cache_dt_;
        s = std::clamp(s, 0.0, static_cast<double>(cache.size() - 1));
        const auto j = static_cast<std::size_t>(std::floor(s));
        if (j + 1 >= cache.size()) return cache.back();
        const double w = s - static_cast<double>(j);
        return (1.0 - w) * cache[j] + w * cache[j + 1];
    }

    ScalarField field_;
    bool from_field_ = false;
    double x_left_ = 0.0, x_right_ = 0.0;
    std::vector<double> left_, right_;
    double cache_dt_ = 1.0;
};

}  // namespace detail

/// Strang-split solve of u_t = (1/2) u_xx + r(u) on [0,T]:
/// Crank-Nicolson half-steps for the diffusion around an explicit midpoint
/// step for the reaction; second order in dx and dt.
///
/// `nt` is the number of internal time steps and must satisfy the accuracy
/// guard nt >= T nx^2 / x_span^2. Dirichlet data comes from `boundary` on an
/// interval and from the heat-kernel calibration on a truncated full line.
inline GridSolution fd_solve(const NonlinearitySpec& nl, const ScalarField& data,
                             const DomainSpec& domain, const std::optional<ScalarField>& boundary,
                             double T, std::size_t nx, std::size_t nt, FdOptions opts = {}) {
    if (!(T > 0.0)) throw argument_error("fd_solve: T must be > 0");
    if (nx < 5) throw argument_error("fd_solve: nx must be >= 5");
    if (nt < 1) throw argument_error("fd_solve: nt must be >= 1");

    double x_left, x_right;
    if (domain.kind == DomainKind::Interval) {
        x_left = domain.a;
        x_right = domain.b;
    } else {
        x_left = opts.x_min;
        x_right = opts.x_max;
        if (!(x_right > x_left))
            throw argument_error("fd_solve: a truncation window (x_min < x_max) is required on "
                                 "the full line");
        // keep the Gaussian mass outside the window below ~1e-8
        if (0.5 * (x_right - x_left) < 6.0 * std::sqrt(T) - 1e-12)
            throw argument_error("fd_solve: truncation window half-width must be >= 6*sqrt(T)");
    }
    const double span = x_right - x_left;
    const double guard = T * static_cast<double>(nx) * static_cast<double>(nx) / (span * span);
    if (static_cast<double>(nt) + 1e-9 < guard)
        throw argument_error("fd_solve: accuracy guard violated, need nt >= T*nx^2/x_span^2 = " +
                             std::to_string(guard));

    const double dx = span / static_cast<double>(nx - 1);
    const double dt = T / static_cast<double>(nt);

    GridSolution grid;
    grid.xs.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) grid.xs[i] = x_left + static_cast<double>(i) * dx;

    std::vector<double> u(nx);
    for (std::size_t i = 0; i < nx; ++i) u[i] = data(grid.xs[i], 0.0);

    detail::LateralValues lateral(domain, data, boundary, x_left, x_right, T,
                                  opts.boundary_quad_tol);

    const std::size_t max_levels = std::max<std::size_t>(2, opts.max_stored_levels);
    const std::size_t stride = std::max<std::size_t>(1, (nt + max_levels - 2) / (max_levels - 1));

    auto store = [&](std::size_t step) {
        grid.ts.push_back(static_cast<double>(step) * dt);
        grid.values.insert(grid.values.end(), u.begin(), u.end());
    };
    store(0);

    // CN half-step over dt/2: (1 + 2c) v_i - c (v_{i-1} + v_{i+1}) = rhs_i, c = dt/(8 dx^2)
    const double c = dt / (8.0 * dx * dx);
    const std::size_t ni = nx - 2;
    detail::TridiagCN lu(ni, 1.0 + 2.0 * c, -c);
    std::vector<double> rhs(ni);

    auto cn_half = [&](double t_target) {
        const double bca = lateral.left(t_target);
        const double bcb = lateral.right(t_target);
        for (std::size_t i = 0; i < ni; ++i)
            rhs[i] = (1.0 - 2.0 * c) * u[i + 1] + c * (u[i] + u[i + 2]);
        rhs[0] += c * bca;
        rhs[ni - 1] += c * bcb;
        lu.solve(rhs);
        u[0] = bca;
        std::copy(rhs.begin(), rhs.end(), u.begin() + 1);
        u[nx - 1] = bcb;
    };

    for (std::size_t step = 0; step < nt; ++step) {
        const double t0 = static_cast<double>(step) * dt;
        cn_half(t0 + 0.5 * dt);
        if (nl.kind != NonlinearitySpec::Kind::None) {
            for (std::size_t i = 1; i + 1 < nx; ++i) {
                const double mid = u[i] + 0.5 * dt * nl.reaction(u[i]);
                u[i] += dt * nl.reaction(mid);
            }
        }
        cn_half(t0 + dt);

        if ((step + 1) % 64 == 0 || step + 1 == nt) {
            for (double v : u)
                if (!std::isfinite(v) || std::fabs(v) > opts.blowup_threshold)
                    throw numerical_error("fd_solve: solution blew up at t = " +
                                          std::to_string(t0 + dt));
        }
        if ((step + 1) % stride == 0 || step + 1 == nt) {
            if (grid.ts.back() < static_cast<double>(step + 1) * dt) store(step + 1);
        }
    }
    // pin the final stored time to T exactly
    grid.ts.back() = T;
    return grid;
}

/// A probe value backed by Richardson extrapolation: the solve is repeated at
/// (nx, nt) and (2nx-1, 4nt); `budget` = |coarse - fine| bounds the fine-grid
/// discretization error of a second-order scheme with a 3x margin.
struct FdProbe {
    double value = 0.0;
    double budget = 0.0;
    GridSolution solution;  // the fine solve
};

inline FdProbe fd_probe(const NonlinearitySpec& nl, const ScalarField& data,
                        const DomainSpec& domain, const std::optional<ScalarField>& boundary,
                        double T, double probe_x, std::size_t nx, std::size_t nt,
                        FdOptions opts = {}) {
    GridSolution coarse = fd_solve(nl, data, domain, boundary, T, nx, nt, opts);
    GridSolution fine = fd_solve(nl, data, domain, boundary, T, 2 * nx - 1, 4 * nt, opts);
    FdProbe probe;
    probe.value = fine.value_at(T, probe_x);
    probe.budget = std::max(std::fabs(coarse.value_at(T, probe_x) - probe.value), 1e-9);
    probe.solution = std::move(fine);
    return probe;
}

}  // namespace branchmc
