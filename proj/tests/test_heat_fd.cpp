#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "branchmc/expr.hpp"
#include "branchmc/fd.hpp"
#include "branchmc/heat.hpp"
#include "branchmc/rng.hpp"

using namespace branchmc;

namespace {

std::size_t guard_nt(double T, std::size_t nx, double span) {
    return static_cast<std::size_t>(T * static_cast<double>(nx) * static_cast<double>(nx) /
                                    (span * span)) +
           1;
}

}  // namespace

TEST_CASE("heat kernel normalization at random points", "[heat]") {
    const auto one = ScalarField::parse("1");
    RngStream rng(77, 0);
    for (int i = 0; i < 20; ++i) {
        const double x = 4.0 * rng.normal();
        const double t = 0.05 + 2.0 * rng.uniform();
        CHECK(std::fabs(heat_solution(x, t, one) - 1.0) < 1e-10);
    }
}

TEST_CASE("heat kernel martingale and second moment", "[heat]") {
    const auto id = ScalarField::parse("x");
    CHECK(heat_solution(1.3, 0.7, id) == Catch::Approx(1.3).margin(1e-10));
    CHECK(heat_solution(-2.0, 1.5, id) == Catch::Approx(-2.0).margin(1e-10));

    const auto sq = ScalarField::parse("x^2");
    // variance of the (1/2) d^2 kernel after time t is t
    CHECK(heat_solution(0.0, 1.0, sq) == Catch::Approx(1.0).margin(1e-9));
    CHECK(heat_solution(0.5, 2.0, sq) == Catch::Approx(2.0 + 0.25).margin(1e-9));

    CHECK_THROWS_AS(heat_solution(0.0, 0.0, sq), argument_error);
    CHECK_THROWS_AS(heat_solution(0.0, -1.0, sq), argument_error);
}

TEST_CASE("fd: fixed point of the logistic reaction", "[fd]") {
    const auto one = ScalarField::parse("1");
    const auto opts = full_line_window(0.0, 1.0);
    const std::size_t nx = 201;
    const std::size_t nt = guard_nt(1.0, nx, opts.x_max - opts.x_min);
    const auto sol =
        fd_solve(NonlinearitySpec::kpp(), one, DomainSpec::full_line(), std::nullopt, 1.0, nx, nt,
                 opts);
    double worst = 0.0;
    for (std::size_t k = 0; k < sol.n_levels(); ++k)
        for (std::size_t i = 0; i < sol.nx(); ++i)
            worst = std::max(worst, std::fabs(sol.at(k, i) - 1.0));
    CHECK(worst < 1e-10);
}

TEST_CASE("fd: constant data follows the u' = -u^2 flow", "[fd]") {
    const auto one = ScalarField::parse("1");
    const auto opts = full_line_window(0.0, 1.0, 4.0);
    const std::size_t nx = 801;
    const std::size_t nt = guard_nt(1.0, nx, opts.x_max - opts.x_min);
    const auto sol = fd_solve(NonlinearitySpec::power_alpha(2.0), one, DomainSpec::full_line(),
                              std::nullopt, 1.0, nx, nt, opts);
    CHECK(std::fabs(sol.value_at(1.0, 0.0) - 0.5) < 1e-6);
}

TEST_CASE("fd: second-order convergence on the ODE case", "[fd]") {
    // spatially flat solution, so the error is the dt^2 part of the splitting
    const auto one = ScalarField::parse("1");
    FdOptions opts;
    opts.x_min = -7.0;
    opts.x_max = 7.0;
    const auto nl = NonlinearitySpec::power_alpha(2.0);
    const std::size_t nx = 101;
    const auto coarse =
        fd_solve(nl, one, DomainSpec::full_line(), std::nullopt, 1.0, nx, 400, opts);
    const auto fine =
        fd_solve(nl, one, DomainSpec::full_line(), std::nullopt, 1.0, nx, 800, opts);
    const double e1 = std::fabs(coarse.value_at(1.0, 0.0) - 0.5);
    const double e2 = std::fabs(fine.value_at(1.0, 0.0) - 0.5);
    INFO("e(dt) = " << e1 << ", e(dt/2) = " << e2);
    CHECK(e1 / e2 > 3.2);
    CHECK(e1 / e2 < 4.8);
}

TEST_CASE("fd: linear solve agrees with the heat kernel", "[fd][slow]") {
    const auto data = ScalarField::parse("exp(-x^2)");
    FdOptions opts;
    opts.x_min = -6.0;
    opts.x_max = 6.0;
    const std::size_t nx = 801;
    const std::size_t nt = guard_nt(1.0, nx, 12.0);
    const auto sol = fd_solve(NonlinearitySpec::none(), data, DomainSpec::full_line(),
                              std::nullopt, 1.0, nx, nt, opts);
    double worst = 0.0;
    for (std::size_t i = 0; i < sol.nx(); ++i)
        worst = std::max(worst,
                         std::fabs(sol.at(sol.n_levels() - 1, i) -
                                   heat_solution(sol.xs[i], 1.0, data)));
    CHECK(worst < 1e-4);
}

TEST_CASE("fd: maximum principle for logistic data in [0,1]", "[fd]") {
    const auto data = ScalarField::parse("(1+tanh(3*x))/2");
    const auto opts = full_line_window(0.0, 0.5);
    const std::size_t nx = 401;
    const std::size_t nt = guard_nt(0.5, nx, opts.x_max - opts.x_min);
    const auto sol = fd_solve(NonlinearitySpec::kpp(), data, DomainSpec::full_line(),
                              std::nullopt, 0.5, nx, nt, opts);
    for (std::size_t k = 0; k < sol.n_levels(); ++k)
        for (std::size_t i = 0; i < sol.nx(); ++i) {
            REQUIRE(sol.at(k, i) >= -1e-10);
            REQUIRE(sol.at(k, i) <= 1.0 + 1e-10);
        }
}

TEST_CASE("fd: guard and window validation", "[fd]") {
    const auto data = ScalarField::parse("exp(-x^2)");
    FdOptions opts;
    opts.x_min = -5.0;
    opts.x_max = 5.0;
    // nt far below T nx^2 / span^2
    CHECK_THROWS_AS(fd_solve(NonlinearitySpec::none(), data, DomainSpec::full_line(),
                             std::nullopt, 1.0, 801, 100, opts),
                    argument_error);
    // missing window on the full line
    CHECK_THROWS_AS(fd_solve(NonlinearitySpec::none(), data, DomainSpec::full_line(),
                             std::nullopt, 1.0, 801, 10000),
                    argument_error);
    CHECK_THROWS_AS(NonlinearitySpec::power_alpha(2.5), argument_error);
}

TEST_CASE("fd: interval Dirichlet values are honored", "[fd]") {
    const auto data = ScalarField::parse("0");
    const auto boundary = ScalarField::parse("t");  // ramps up from zero
    const auto dom = DomainSpec::interval(-1.0, 1.0);
    const std::size_t nx = 101;
    const std::size_t nt = guard_nt(0.5, nx, 2.0);
    const auto sol =
        fd_solve(NonlinearitySpec::none(), data, dom, boundary, 0.5, nx, nt);
    CHECK(sol.at(sol.n_levels() - 1, 0) == Catch::Approx(0.5).margin(1e-12));
    CHECK(sol.at(sol.n_levels() - 1, nx - 1) == Catch::Approx(0.5).margin(1e-12));
    // interior lags the ramp but is pulled up
    CHECK(sol.value_at(0.5, 0.0) > 0.0);
    CHECK(sol.value_at(0.5, 0.0) < 0.5);
}

TEST_CASE("grid solution interpolation and export", "[fd]") {
    const auto data = ScalarField::parse("exp(-x^2)");
    FdOptions opts;
    opts.x_min = -4.0;
    opts.x_max = 4.0;
    const std::size_t nx = 201;
    const std::size_t nt = guard_nt(0.25, nx, 8.0);
    const auto sol = fd_solve(NonlinearitySpec::none(), data, DomainSpec::full_line(),
                              std::nullopt, 0.25, nx, nt, opts);

    // interpolation between grid nodes stays close to the true solution
    const double mid_x = 0.5 * (sol.xs[100] + sol.xs[101]);
    CHECK(sol.value_at(0.25, mid_x) ==
          Catch::Approx(heat_solution(mid_x, 0.25, data)).margin(3e-4));
    CHECK_THROWS_AS(sol.value_at(0.3, 0.0), argument_error);
    CHECK_THROWS_AS(sol.value_at(-0.1, 0.0), argument_error);

    std::ostringstream os;
    sol.write_csv(os);
    const std::string text = os.str();
    CHECK(text.rfind("x,t,value\n", 0) == 0);
    const auto lines = std::count(text.begin(), text.end(), '\n');
    CHECK(static_cast<std::size_t>(lines) == 1 + sol.n_levels() * sol.nx());
}

TEST_CASE("fd_probe budget brackets the true error on the ODE case", "[fd]") {
    const auto one = ScalarField::parse("1");
    FdOptions opts;
    opts.x_min = -7.0;
    opts.x_max = 7.0;
    const std::size_t nx = 201;
    const auto probe = fd_probe(NonlinearitySpec::power_alpha(2.0), one, DomainSpec::full_line(),
                                std::nullopt, 1.0, 0.0, nx, guard_nt(1.0, nx, 14.0), opts);
    const double true_err = std::fabs(probe.value - 0.5);
    CHECK(true_err <= probe.budget);
    CHECK(probe.budget < 2e-3);
}
