#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "branchmc/errors.hpp"

namespace branchmc {

namespace detail {

/// Double-double value: hi + lo with |lo| <= ulp(hi)/2.
struct DD {
    double hi = 0.0;
    double lo = 0.0;

    double to_double() const { return hi + lo; }
};

inline DD two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline DD dd_add(DD a, double b) {
    DD s = two_sum(a.hi, b);
    s.lo += a.lo;
    const double hi = s.hi + s.lo;
    return {hi, s.lo - (hi - s.hi)};
}

inline DD dd_add(DD a, DD b) {
    DD s = two_sum(a.hi, b.hi);
    s.lo += a.lo + b.lo;
    const double hi = s.hi + s.lo;
    return {hi, s.lo - (hi - s.hi)};
}

}  // namespace detail

/// Monte Carlo estimate: sample mean with standard error of the mean.
struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;  ///< sample standard deviation / sqrt(n)
    std::uint64_t n = 0;
    std::uint64_t discarded = 0;  ///< explosion-discarded samples (not in n)
    double elapsed = 0.0;         ///< wall-clock seconds
};

/// Streaming moment accumulator with compensated (double-double) raw sums.
///
/// Merging partials in a fixed order reproduces the sequential result
/// bit-for-bit; with double-double sums the result is also independent of how
/// the sample sequence is split into contiguous chunks.
class Accumulator {
public:
    void add(double x) {
        ++n_;
        sum_ = detail::dd_add(sum_, x);
        sumsq_ = detail::dd_add(sumsq_, x * x);
    }

    void merge(const Accumulator& other) {
        n_ += other.n_;
        sum_ = detail::dd_add(sum_, other.sum_);
        sumsq_ = detail::dd_add(sumsq_, other.sumsq_);
    }

    std::uint64_t count() const { return n_; }

    double mean() const { return n_ == 0 ? 0.0 : sum_.to_double() / static_cast<double>(n_); }

    /// Unbiased sample variance (0 for n < 2).
    double variance() const {
        if (n_ < 2) return 0.0;
        const double nd = static_cast<double>(n_);
        const double m = mean();
        // sumsq - n*m^2, assembled in double-double to keep the cancellation clean
        detail::DD centered = detail::dd_add(sumsq_, -(nd * m) * m);
        const double v = centered.to_double() / (nd - 1.0);
        return v > 0.0 ? v : 0.0;
    }

    double stderr_of_mean() const {
        if (n_ < 2) return 0.0;
        return std::sqrt(variance() / static_cast<double>(n_));
    }

private:
    std::uint64_t n_ = 0;
    detail::DD sum_{};
    detail::DD sumsq_{};
};

/// Inverse standard normal CDF (Acklam's rational approximation, refined by
/// one Halley step against erfc; accurate to ~1e-15 over (0,1)).
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw argument_error("inverse_normal_cdf: p must be in (0,1)");

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};

    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley refinement: e = Phi(x) - p
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

/// Two-sided normal-approximation confidence interval.
inline std::pair<double, double> confidence_interval(const Estimate& e, double level) {
    if (e.n < 2) throw argument_error("confidence_interval: estimate needs n >= 2");
    if (!(level > 0.0 && level < 1.0))
        throw argument_error("confidence_interval: level must be in (0,1)");
    const double z = inverse_normal_cdf(0.5 * (1.0 + level));
    return {e.mean - z * e.stderr_, e.mean + z * e.stderr_};
}

}  // namespace branchmc
