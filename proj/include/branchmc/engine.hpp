#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "branchmc/errors.hpp"
#include "branchmc/rng.hpp"
#include "branchmc/stats.hpp"

namespace branchmc {

/// How a Monte Carlo run is scheduled and seeded.
///
/// The stream for sample i is RngStream(seed, i) — a pure function of the
/// global sample index, never of the worker that happens to execute it.
struct RunPlan {
    std::uint64_t seed = 0;
    std::uint64_t n_samples = 0;
    unsigned n_workers = 0;        ///< 0 = hardware concurrency
    std::uint64_t chunk = 4096;    ///< samples per task; fixed, so results do not depend on n_workers
    double max_discard_fraction = 1e-3;
    std::uint64_t progress_interval = 0;  ///< samples between stderr progress lines; 0 = silent
};

namespace detail {

struct ChunkResult {
    Accumulator acc;
    std::uint64_t discarded = 0;
};

inline unsigned resolve_workers(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace detail

/// Run `sampler` over plan.n_samples independent streams and aggregate.
///
/// `sampler(rng)` returns the sample value, or nullopt to discard the sample
/// (counted, capped at plan.max_discard_fraction). It must be pure given its
/// stream. The returned Estimate is bit-identical for fixed (seed, n_samples,
/// chunk) regardless of n_workers: chunks are assigned dynamically but their
/// partial moments are merged in chunk-index order.
inline Estimate run_parallel(const std::function<std::optional<double>(RngStream&)>& sampler,
                             const RunPlan& plan) {
    if (plan.n_samples == 0) throw argument_error("run_parallel: n_samples must be >= 1");
    if (plan.chunk == 0) throw argument_error("run_parallel: chunk must be >= 1");

    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t n_chunks = (plan.n_samples + plan.chunk - 1) / plan.chunk;
    const unsigned n_workers =
        static_cast<unsigned>(std::min<std::uint64_t>(detail::resolve_workers(plan.n_workers), n_chunks));

    std::vector<detail::ChunkResult> results(n_chunks);
    std::atomic<std::uint64_t> next_chunk{0};
    std::atomic<std::uint64_t> samples_done{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::uint64_t next_progress = plan.progress_interval;
    Accumulator progress_acc;  // display only; the real reduction is ordered

    auto worker = [&]() {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const std::uint64_t c = next_chunk.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) return;
            const std::uint64_t begin = c * plan.chunk;
            const std::uint64_t end = std::min(begin + plan.chunk, plan.n_samples);
            detail::ChunkResult& slot = results[c];
            try {
                for (std::uint64_t i = begin; i < end; ++i) {
                    RngStream rng(plan.seed, i);
                    if (auto v = sampler(rng))
                        slot.acc.add(*v);
                    else
                        ++slot.discarded;
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
            const std::uint64_t done =
                samples_done.fetch_add(end - begin, std::memory_order_relaxed) + (end - begin);
            if (plan.progress_interval > 0) {
                std::lock_guard<std::mutex> lock(error_mutex);
                progress_acc.merge(slot.acc);
                if (done >= next_progress) {
                    next_progress = done + plan.progress_interval;
                    std::fprintf(stderr, "[mc] %llu/%llu samples, running stderr %.3e\n",
                                 static_cast<unsigned long long>(done),
                                 static_cast<unsigned long long>(plan.n_samples),
                                 progress_acc.stderr_of_mean());
                }
            }
        }
    };

    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }

    // Deterministic reduction: fold chunk partials in index order.
    Accumulator total;
    std::uint64_t discarded = 0;
    for (const auto& r : results) {
        total.merge(r.acc);
        discarded += r.discarded;
    }

    if (first_error) {
        // Abort with a partial-statistics report attached to the error.
        try {
            std::rethrow_exception(first_error);
        } catch (const std::exception& ex) {
            throw numerical_error(std::string("run_parallel: worker failed: ") + ex.what() +
                                  " (partial: n=" + std::to_string(total.count()) +
                                  ", mean=" + std::to_string(total.mean()) + ")");
        }
    }

    Estimate e;
    e.mean = total.mean();
    e.stderr_ = total.stderr_of_mean();
    e.n = total.count();
    e.discarded = discarded;
    e.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (static_cast<double>(discarded) >
        plan.max_discard_fraction * static_cast<double>(plan.n_samples)) {
        throw explosion_error("run_parallel: discarded " + std::to_string(discarded) + " of " +
                              std::to_string(plan.n_samples) +
                              " samples, above the allowed fraction " +
                              std::to_string(plan.max_discard_fraction));
    }
    return e;
}

}  // namespace branchmc
