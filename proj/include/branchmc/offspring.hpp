#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "branchmc/errors.hpp"
#include "branchmc/rng.hpp"

namespace branchmc {

// ---------------------------------------------------------------------------
// Offspring laws for branching Brownian trees.
//
// Two families:
//   * the binary law p_2 = 1 (supercritical clock tree for u^2 - u),
//   * the critical power laws for the nonlinearity u^alpha, 1 < alpha <= 2:
//       p_0 = 1/alpha, p_1 = 0, p_n = (-1)^n C(alpha, n) / alpha  (n >= 2),
//     generated by p_2 = (alpha-1)/2, p_{n+1} = p_n (n - alpha)/(n + 1).
//
// For alpha > 2 some coefficients turn negative and no law exists; that case
// is a construction error.
//
// The alpha laws have infinite support with p_n ~ n^{-(1+alpha)}, so partial
// sums converge too slowly to verify normalization or the critical mean
// directly. Both have exact tails via the alternating-binomial identity
//   sum_{m=0..M} (-1)^m C(g, m) = (-1)^M C(g-1, M):
//     1 - sum_{n<=N} p_n      = -(-1)^N C(alpha-1, N) / alpha        (N >= 2)
//     sum_{n>N} n p_n         =  (-1)^{N-1} C(alpha-2, N-1)          (N >= 2)
// (using n C(alpha, n) = alpha C(alpha-1, n-1)). Both tails -> 0, giving
// total mass 1 and mean offspring exactly 1 (criticality).
// ---------------------------------------------------------------------------

class OffspringLaw {
public:
    enum class Kind { Kpp, Alpha };

    /// Binary splitting: p_2 = 1, intensity c = 1, lifetime rate k = 1.
    static OffspringLaw kpp() {
        OffspringLaw law;
        law.kind_ = Kind::Kpp;
        law.p_ = {0.0, 0.0, 1.0};
        law.cum_ = {0.0, 0.0, 1.0};
        law.finite_support_ = true;
        return law;
    }

    /// Critical law for the nonlinearity u^alpha, 1 < alpha <= 2.
    static OffspringLaw alpha(double a) {
        if (!(a > 1.0 && a <= 2.0))
            throw argument_error(
                "alpha_law: alpha must be in (1, 2]; for alpha > 2 the generating-function "
                "coefficients (-1)^n C(alpha,n)/alpha would be negative and no offspring law "
                "exists (got alpha=" +
                std::to_string(a) + ")");
        OffspringLaw law;
        law.kind_ = Kind::Alpha;
        law.alpha_ = a;
        law.p_.reserve(1024);
        law.cum_.reserve(1024);
        law.p_.push_back(1.0 / a);
        law.p_.push_back(0.0);
        law.p_.push_back((a - 1.0) / 2.0);
        double cum = 0.0;
        for (double p : law.p_) law.cum_.push_back(cum += p);
        // Pre-extend; beyond the table sampling falls back to a stateless walk.
        for (std::size_t n = 2; n + 1 < kTableCap; ++n) {
            const double next = law.p_[n] * (static_cast<double>(n) - a) / (static_cast<double>(n) + 1.0);
            if (next <= 0.0) {
                law.finite_support_ = true;  // alpha == 2 terminates at n = 2
                break;
            }
            law.p_.push_back(next);
            law.cum_.push_back(cum += next);
        }
        return law;
    }

    Kind kind() const { return kind_; }
    bool is_alpha() const { return kind_ == Kind::Alpha; }
    double alpha() const { return alpha_; }  // NaN for the Kpp law
    double intensity_c() const { return 1.0; }
    double lifetime_rate_k() const { return 1.0; }
    std::size_t table_size() const { return p_.size(); }

    /// p_n, extended past the table by the generating recurrence.
    double prob(std::size_t n) const {
        if (n < p_.size()) return p_[n];
        if (finite_support_ || kind_ == Kind::Kpp) return 0.0;
        double p = p_.back();
        for (std::size_t m = p_.size() - 1; m < n; ++m)
            p *= (static_cast<double>(m) - alpha_) / (static_cast<double>(m) + 1.0);
        return p;
    }

    /// Exact 1 - sum_{n<=N} p_n (analytic tail for alpha laws).
    double tail_mass_after(std::size_t n) const {
        if (kind_ == Kind::Kpp || finite_support_)
            return n < cum_.size() ? 1.0 - cum_[n] : 0.0;
        if (n < 2) return 1.0 - cum_[std::min<std::size_t>(n, cum_.size() - 1)];
        // -(-1)^N C(alpha-1, N) / alpha
        long double b = 1.0L;  // C(alpha-1, m)
        for (std::size_t m = 0; m < n; ++m)
            b *= (static_cast<long double>(alpha_) - 1.0L - static_cast<long double>(m)) /
                 (static_cast<long double>(m) + 1.0L);
        const long double sign = (n % 2 == 0) ? 1.0L : -1.0L;
        return static_cast<double>(-sign * b / static_cast<long double>(alpha_));
    }

    /// Inverse-CDF draw.
    std::size_t sample(RngStream& rng) const {
        const double u = rng.uniform();
        if (u < cum_.back()) {
            // first index with cum > u
            std::size_t lo = 0, hi = cum_.size() - 1;
            while (lo < hi) {
                const std::size_t mid = (lo + hi) / 2;
                if (cum_[mid] > u)
                    hi = mid;
                else
                    lo = mid + 1;
            }
            return lo;
        }
        if (finite_support_ || kind_ == Kind::Kpp) return p_.size() - 1;
        // Walk the tail. Reaches index ~ (C/(1-u))^{1/alpha}; astronomically
        // rare for u this close to 1, and O(1) memory.
        std::size_t n = p_.size() - 1;
        long double p = p_.back();
        long double c = cum_.back();
        while (u >= static_cast<double>(c)) {
            p *= (static_cast<long double>(n) - static_cast<long double>(alpha_)) /
                 (static_cast<long double>(n) + 1.0L);
            ++n;
            c += p;
            if (p <= 0.0L) return n;  // underflow guard; tail mass below representable
        }
        return n;
    }

    /// Mean offspring number, accurate to max(tol, rounding).
    ///
    /// Sums n p_n until the analytic tail bound |C(alpha-2, N-1)| drops below
    /// tol (or a term cap), then adds the exact signed tail. The alpha laws
    /// come out as 1 (critical) to machine precision.
    double mean(double tol = 1e-12) const {
        if (kind_ == Kind::Kpp) return 2.0;
        long double sum = 2.0L * static_cast<long double>(p_[2]);
        long double p = p_[2];
        long double b = static_cast<long double>(alpha_) - 2.0L;  // C(alpha-2, m), m = 1
        std::size_t n = 2;
        while (std::fabs(static_cast<double>(b)) >= tol && n < kMeanTermCap) {
            p *= (static_cast<long double>(n) - static_cast<long double>(alpha_)) /
                 (static_cast<long double>(n) + 1.0L);
            ++n;
            sum += static_cast<long double>(n) * p;
            // C(alpha-2, n-2) -> C(alpha-2, n-1)
            b *= (static_cast<long double>(alpha_) - static_cast<long double>(n)) /
                 (static_cast<long double>(n) - 1.0L);
        }
        const long double sign = (n % 2 == 0) ? -1.0L : 1.0L;  // (-1)^{n-1}
        return static_cast<double>(sum + sign * b);
    }

private:
    static constexpr std::size_t kTableCap = 1u << 15;
    static constexpr std::size_t kMeanTermCap = 1u << 17;

    Kind kind_ = Kind::Kpp;
    double alpha_ = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> p_;
    std::vector<double> cum_;
    bool finite_support_ = false;
};

inline OffspringLaw kpp_law() { return OffspringLaw::kpp(); }

inline OffspringLaw alpha_law(double alpha) { return OffspringLaw::alpha(alpha); }

/// Branching rate alpha / beta^{alpha-1} that makes the u^alpha law critical.
inline double k_beta(double alpha, double beta) {
    if (!(alpha > 1.0 && alpha <= 2.0)) throw argument_error("k_beta: alpha must be in (1, 2]");
    if (!(beta > 0.0)) throw argument_error("k_beta: beta must be > 0");
    return alpha * std::pow(beta, 1.0 - alpha);
}

inline std::size_t sample_offspring(const OffspringLaw& law, RngStream& rng) {
    return law.sample(rng);
}

inline double mean_offspring(const OffspringLaw& law, double tol) { return law.mean(tol); }

}  // namespace branchmc
