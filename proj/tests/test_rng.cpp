#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "branchmc/rng.hpp"

using namespace branchmc;

TEST_CASE("streams are reproducible and keyed by (seed, stream_id)", "[rng]") {
    RngStream a(42, 0);
    RngStream b(42, 0);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    RngStream c(42, 1);
    RngStream d(43, 0);
    RngStream e(42, 0);
    bool differs_c = false, differs_d = false;
    for (int i = 0; i < 16; ++i) {
        const auto ref = e.next_u64();
        differs_c |= c.next_u64() != ref;
        differs_d |= d.next_u64() != ref;
    }
    CHECK(differs_c);
    CHECK(differs_d);
}

TEST_CASE("golden values pin the generator output", "[rng]") {
    // Frozen from the first build; any change here breaks reproducibility of
    // every recorded result.
    RngStream rng(42, 0);
    CHECK(rng.next_u64() == 16289863277490872795ULL);
    RngStream rng2(42, 0);
    CHECK(rng2.normal() == 0.97257731323316698);
    RngStream rng3(42, 0);
    CHECK(brownian_step(0.0, 1.0, rng3) == 0.97257731323316698);
}

TEST_CASE("brownian_step validates dt and has the zero-increment limit", "[rng]") {
    RngStream rng(1, 1);
    CHECK_THROWS_AS(brownian_step(0.0, 0.0, rng), argument_error);
    CHECK_THROWS_AS(brownian_step(0.0, -1.0, rng), argument_error);
    CHECK(brownian_step(5.0, 1e-30, rng) == Catch::Approx(5.0).margin(1e-13));
}

TEST_CASE("brownian increments match N(0, dt) moments", "[rng][slow]") {
    const double dt = 0.01;
    const int n = 1'000'000;
    RngStream rng(7, 0);
    double sum = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double inc = brownian_step(0.0, dt, rng);
        sum += inc;
        sum2 += inc * inc;
        sum3 += inc * inc * inc;
        sum4 += inc * inc * inc * inc;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double m3 = sum3 / n;
    const double m4 = sum4 / n;
    // sampling sd of the variance estimate is sqrt(2/n) dt
    CHECK(std::fabs(var - dt) < 3.0 * std::sqrt(2.0 / n) * dt);
    CHECK(std::fabs(mean) < 4.0 * std::sqrt(dt / n));
    // odd moments vanish; E inc^3 estimate has sd sqrt(15 dt^3 / n)
    CHECK(std::fabs(m3) < 4.0 * std::sqrt(15.0 * dt * dt * dt / n));
    // E inc^4 = 3 dt^2, estimator sd = sqrt((105 - 9) dt^4 / n)
    CHECK(std::fabs(m4 - 3.0 * dt * dt) < 4.0 * std::sqrt(96.0 / n) * dt * dt);
}

TEST_CASE("exponential sampling", "[rng]") {
    RngStream rng(11, 0);
    CHECK_THROWS_AS(sample_exponential(0.0, rng), argument_error);
    CHECK_THROWS_AS(sample_exponential(-2.0, rng), argument_error);

    const int n = 1'000'000;
    double sum = 0.0;
    int over_one = 0;
    bool all_positive = true;
    RngStream r1(11, 1);
    for (int i = 0; i < n; ++i) {
        const double v = sample_exponential(1.0, r1);
        sum += v;
        all_positive &= v > 0.0;
    }
    CHECK(all_positive);  // P(T > 0) = 1
    CHECK(std::fabs(sum / n - 1.0) < 0.003);

    RngStream r2(11, 2);
    for (int i = 0; i < n; ++i) over_one += sample_exponential(2.0, r2) > 1.0;
    CHECK(std::fabs(static_cast<double>(over_one) / n - std::exp(-2.0)) < 0.001);
}

TEST_CASE("disjoint increments are uncorrelated", "[rng]") {
    RngStream rng(5, 0);
    const int n = 200'000;
    double prev = rng.normal();
    double cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const double cur = rng.normal();
        cross += prev * cur;
        prev = cur;
    }
    CHECK(std::fabs(cross / n) < 4.0 / std::sqrt(static_cast<double>(n)));
}
