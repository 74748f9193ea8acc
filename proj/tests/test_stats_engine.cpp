#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "branchmc/engine.hpp"
#include "branchmc/stats.hpp"

using namespace branchmc;

TEST_CASE("constant sampler gives exact mean and zero stderr", "[engine]") {
    RunPlan plan;
    plan.seed = 1;
    plan.n_samples = 1000;
    auto e = run_parallel([](RngStream&) { return 0.5; }, plan);
    CHECK(e.mean == 0.5);
    CHECK(e.stderr_ == 0.0);
    CHECK(e.n == 1000);
    CHECK(e.discarded == 0);
}

TEST_CASE("uniform sampler moments", "[engine][slow]") {
    RunPlan plan;
    plan.seed = 2;
    plan.n_samples = 1'000'000;
    plan.n_workers = 2;
    auto e = run_parallel([](RngStream& rng) { return rng.uniform(); }, plan);
    CHECK(std::fabs(e.mean - 0.5) < 0.0015);
    CHECK(e.stderr_ == Catch::Approx(0.288675 / 1000.0).epsilon(0.01));
}

TEST_CASE("results are bit-identical across worker counts", "[engine]") {
    auto sampler = [](RngStream& rng) -> std::optional<double> {
        double acc = 0.0;
        for (int i = 0; i < 5; ++i) acc += rng.normal();
        return std::tanh(acc);
    };
    RunPlan plan;
    plan.seed = 77;
    plan.n_samples = 50'000;
    Estimate ref;
    for (unsigned workers : {1u, 4u, 16u}) {
        plan.n_workers = workers;
        const Estimate e = run_parallel(sampler, plan);
        if (workers == 1u) {
            ref = e;
        } else {
            CHECK(e.mean == ref.mean);
            CHECK(e.stderr_ == ref.stderr_);
            CHECK(e.n == ref.n);
        }
    }

    // chunk size only regroups the compensated partial sums; the reduction
    // is exact, so even the grouping does not show in the result
    for (std::uint64_t chunk : {1u, 17u, 1024u, 50'000u}) {
        plan.n_workers = 2;
        plan.chunk = chunk;
        const Estimate e = run_parallel(sampler, plan);
        CHECK(e.mean == ref.mean);
        CHECK(e.stderr_ == ref.stderr_);
    }
}

TEST_CASE("chunked merging equals a single pass exactly", "[stats][property]") {
    RngStream rng(31, 0);
    const int n = 10'007;
    std::vector<double> values(n);
    for (auto& v : values) v = rng.uniform();

    Accumulator single;
    for (double v : values) single.add(v);

    for (int trial = 0; trial < 60; ++trial) {
        Accumulator merged;
        std::size_t pos = 0;
        while (pos < values.size()) {
            const std::size_t len =
                std::min<std::size_t>(1 + rng.next_u64() % 700, values.size() - pos);
            Accumulator chunk;
            for (std::size_t i = pos; i < pos + len; ++i) chunk.add(values[i]);
            merged.merge(chunk);
            pos += len;
        }
        REQUIRE(merged.count() == single.count());
        REQUIRE(merged.mean() == single.mean());
        REQUIRE(merged.variance() == single.variance());
    }
}

TEST_CASE("discarded samples are counted and capped", "[engine]") {
    // every 100th sample discarded -> 1% > default cap of 0.1%
    auto flaky = [](RngStream& rng) -> std::optional<double> {
        if (rng.stream_id() % 100 == 0) return std::nullopt;
        return 1.0;
    };
    RunPlan plan;
    plan.seed = 4;
    plan.n_samples = 10'000;
    CHECK_THROWS_AS(run_parallel(flaky, plan), explosion_error);

    plan.max_discard_fraction = 0.02;
    auto e = run_parallel(flaky, plan);
    CHECK(e.discarded == 100);
    CHECK(e.n == 9'900);
    CHECK(e.mean == 1.0);
}

TEST_CASE("worker failure aborts with a partial-statistics report", "[engine]") {
    auto sampler = [](RngStream& rng) -> std::optional<double> {
        if (rng.stream_id() == 5000) throw std::runtime_error("sampler blew up");
        return 1.0;
    };
    RunPlan plan;
    plan.seed = 4;
    plan.n_samples = 10'000;
    plan.n_workers = 2;
    try {
        run_parallel(sampler, plan);
        FAIL("expected numerical_error");
    } catch (const numerical_error& e) {
        const std::string what = e.what();
        CHECK(what.find("sampler blew up") != std::string::npos);
        CHECK(what.find("partial") != std::string::npos);
    }
}

TEST_CASE("confidence intervals", "[stats]") {
    Estimate e;
    e.mean = 1.0;
    e.stderr_ = 0.0;
    e.n = 100;
    auto [lo0, hi0] = confidence_interval(e, 0.95);
    CHECK(lo0 == 1.0);
    CHECK(hi0 == 1.0);

    e.stderr_ = 0.1;
    auto [lo, hi] = confidence_interval(e, 0.95);
    CHECK(lo == Catch::Approx(1.0 - 0.195996).margin(2e-6));
    CHECK(hi == Catch::Approx(1.0 + 0.195996).margin(2e-6));

    e.mean = 0.0;
    e.stderr_ = 1.0;
    auto [lo99, hi99] = confidence_interval(e, 0.99);
    CHECK(lo99 == Catch::Approx(-2.575829).margin(2e-5));
    CHECK(hi99 == Catch::Approx(2.575829).margin(2e-5));

    e.n = 1;
    CHECK_THROWS_AS(confidence_interval(e, 0.95), argument_error);
    e.n = 10;
    CHECK_THROWS_AS(confidence_interval(e, 1.5), argument_error);
}

TEST_CASE("inverse normal cdf", "[stats]") {
    CHECK(inverse_normal_cdf(0.975) == Catch::Approx(1.959964).margin(1e-6));
    CHECK(inverse_normal_cdf(0.5) == Catch::Approx(0.0).margin(1e-12));
    CHECK(inverse_normal_cdf(0.995) == Catch::Approx(2.575829).margin(1e-6));
    CHECK(inverse_normal_cdf(1e-10) == Catch::Approx(-6.361340902404).margin(1e-6));
    CHECK_THROWS_AS(inverse_normal_cdf(0.0), argument_error);
    CHECK_THROWS_AS(inverse_normal_cdf(1.0), argument_error);
}
