#pragma once

#include <cmath>
#include <cstdint>

#include "branchmc/errors.hpp"

namespace branchmc {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// PCG64 (XSL-RR 128/64) keyed by (seed, stream_id).
///
/// Distinct (seed, stream_id) pairs select distinct generator sequences, so one
/// stream per Monte Carlo sample gives reproducible results independent of how
/// samples are scheduled across threads. Same pair -> identical sequence.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id) {
        const u128 init_state = (u128(detail::splitmix64(seed)) << 64) |
                                detail::splitmix64(seed ^ 0xda3e39cb94b95bdbULL);
        const u128 init_seq = (u128(detail::splitmix64(stream_id)) << 64) | stream_id;
        state_ = 0;
        inc_ = (init_seq << 1) | 1;  // increment must be odd
        next_u64();
        state_ += init_state;
        next_u64();
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64() noexcept {
        state_ = state_ * multiplier() + inc_;
        const auto rot = static_cast<unsigned>(state_ >> 122);
        const std::uint64_t xored =
            static_cast<std::uint64_t>(state_ >> 64) ^ static_cast<std::uint64_t>(state_);
        return (xored >> rot) | (xored << ((64u - rot) & 63u));
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Marsaglia's polar method (second variate cached).
    double normal() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

private:
    using u128 = unsigned __int128;

    static constexpr u128 multiplier() noexcept {
        return (u128(0x2360ed051fc65da4ULL) << 64) | 0x4385df649fccf645ULL;
    }

    u128 state_{};
    u128 inc_{};
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// One Brownian increment: x + sqrt(dt) * Z with Z ~ N(0,1).
inline double brownian_step(double x, double dt, RngStream& rng) {
    if (!(dt > 0.0)) throw argument_error("brownian_step: dt must be > 0");
    return x + std::sqrt(dt) * rng.normal();
}

/// Exponential holding time with P(T > t) = exp(-rate * t).
inline double sample_exponential(double rate, RngStream& rng) {
    if (!(rate > 0.0)) throw argument_error("sample_exponential: rate must be > 0");
    // -log1p(-u) maps u in [0,1) to (0, inf) without ever taking log(0).
    return -std::log1p(-rng.uniform()) / rate;
}

}  // namespace branchmc
