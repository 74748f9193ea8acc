#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tools/cli_app.hpp"

using branchmc_cli::Cli;
using nlohmann::json;

namespace {

struct CliRun {
    int code;
    json summary;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    Cli cli;
    std::ostringstream out, err;
    const int code = cli.run(std::move(args), out, err);
    CliRun r{code, json(), err.str()};
    if (!out.str().empty() && out.str().front() == '{') r.summary = json::parse(out.str());
    return r;
}

}  // namespace

TEST_CASE("every flag is documented", "[cli]") {
    Cli cli;
    auto subs = cli.app().get_subcommands([](const CLI::App*) { return true; });
    REQUIRE(subs.size() == 9);
    for (const auto* sub : subs) {
        for (const auto* opt : sub->get_options()) {
            INFO(sub->get_name() << " " << opt->get_name());
            CHECK_FALSE(opt->get_description().empty());
        }
        CHECK_FALSE(sub->get_description().empty());
    }
}

TEST_CASE("mckean summary shape", "[cli]") {
    const auto r = run({"mckean", "--x", "0", "--t", "0.5", "--g", "exp(-x^2)", "--n", "2000",
                        "--seed", "7"});
    REQUIRE(r.code == 0);
    REQUIRE(r.summary.contains("result"));
    CHECK(r.summary["command"] == "mckean");
    CHECK(r.summary["result"].contains("mean"));
    CHECK(r.summary["result"].contains("stderr"));
    CHECK(r.summary["result"]["n"] == 2000);
    CHECK(r.summary["result"].contains("discarded"));
    CHECK(r.summary["timing"].contains("elapsed_s"));
    CHECK(r.summary["config"]["seed"] == 7);
}

TEST_CASE("summaries are reproducible and re-feedable as configs", "[cli]") {
    const std::vector<std::string> args = {"mckean", "--x",    "0.2", "--t",  "0.5",
                                           "--g",    "0.9*exp(-x^2)", "--n",  "3000",
                                           "--seed", "41"};
    const auto a = run(args);
    const auto b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.summary["result"] == b.summary["result"]);
    CHECK(a.summary["config"] == b.summary["config"]);

    const std::string path = "cli_refeed_test.json";
    {
        std::ofstream f(path);
        f << a.summary.dump();
    }
    const auto c = run({"mckean", "--config", path});
    REQUIRE(c.code == 0);
    CHECK(c.summary["command"] == a.summary["command"]);
    CHECK(c.summary["config"] == a.summary["config"]);
    CHECK(c.summary["result"] == a.summary["result"]);

    // the command can come from the summary itself
    const auto d = run({"--config", path});
    REQUIRE(d.code == 0);
    CHECK(d.summary["result"] == a.summary["result"]);

    // but a mismatched explicit command is rejected
    const auto e = run({"super", "--config", path});
    CHECK(e.code == branchmc_cli::exit_usage);
    std::remove(path.c_str());
}

TEST_CASE("explicit flags override the config file", "[cli]") {
    const std::string path = "cli_config_test.cfg";
    {
        std::ofstream f(path);
        f << "# comment line\n";
        f << "x = 0.0\n";
        f << "t = 0.5\n";
        f << "n = 1000\n";
        f << "seed = 5\n";
    }
    const auto base = run({"mckean", "--config", path});
    REQUIRE(base.code == 0);
    CHECK(base.summary["config"]["n"] == 1000);

    const auto overridden = run({"mckean", "--config", path, "--n", "500"});
    REQUIRE(overridden.code == 0);
    CHECK(overridden.summary["config"]["n"] == 500);
    CHECK(overridden.summary["config"]["seed"] == 5);
    std::remove(path.c_str());
}

TEST_CASE("exit codes and messages", "[cli]") {
    // argument error: alpha beyond 2 names the admissible range
    const auto bad_alpha = run({"super", "--alpha", "2.5", "--n", "100"});
    CHECK(bad_alpha.code == branchmc_cli::exit_usage);
    CHECK(bad_alpha.err.find("(1, 2]") != std::string::npos);

    const auto bad_flag = run({"mckean", "--no-such-flag", "1"});
    CHECK(bad_flag.code == branchmc_cli::exit_usage);

    const auto bad_expr = run({"mckean", "--g", "exp(", "--n", "100"});
    CHECK(bad_expr.code == branchmc_cli::exit_usage);
    CHECK(bad_expr.err.find("offset") != std::string::npos);

    // explosion: supercritical tree at t = 30 with a tiny budget
    const auto boom = run({"mckean", "--t", "30", "--g", "0.5", "--n", "50", "--max-particles",
                           "200", "--seed", "1"});
    CHECK(boom.code == branchmc_cli::exit_explosion);

    // io error: unwritable CSV path
    const auto bad_io = run({"sweep-beta", "--betas", "1", "--n", "100", "--t", "0.2", "--nx",
                             "101", "--out", "/nonexistent_dir_zzz/x.csv"});
    CHECK(bad_io.code == branchmc_cli::exit_io);

    const auto help = run({"--help"});
    CHECK(help.code == 0);
}

TEST_CASE("heat command cross-checks quadrature against Monte Carlo", "[cli]") {
    const auto r = run({"heat", "--x", "0", "--t", "1", "--f", "exp(-x^2)", "--n", "20000",
                        "--seed", "3"});
    REQUIRE(r.code == 0);
    const double quadrature = r.summary["result"]["value"];
    CHECK(quadrature == Catch::Approx(1.0 / std::sqrt(3.0)).margin(1e-9));
    CHECK(std::fabs(r.summary["result"]["z_score"].get<double>()) < 4.0);
}

TEST_CASE("fd command probes and exports the grid", "[cli]") {
    const std::string path = "cli_fd_grid.csv";
    const auto r = run({"fd", "--nl", "power", "--alpha", "2", "--f", "1", "--t", "1", "--x",
                        "0", "--nx", "201", "--out", path});
    REQUIRE(r.code == 0);
    CHECK(r.summary["result"]["value"].get<double>() == Catch::Approx(0.5).margin(1e-5));
    std::ifstream in(path);
    REQUIRE(in.is_open());
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("x,t,value", 0) == 0);
    std::remove(path.c_str());
}

TEST_CASE("compare wraps solver and oracle", "[cli]") {
    const auto r = run({"compare", "--solver", "mckean", "--x", "0", "--t", "0.5", "--g",
                        "exp(-x^2)", "--n", "20000", "--seed", "11", "--nx", "301"});
    REQUIRE(r.code == 0);
    CHECK(r.summary["result"].contains("fd_value"));
    CHECK(r.summary["result"].contains("fd_budget"));
    CHECK(r.summary["result"].contains("z_score"));
    CHECK(r.summary["result"]["pass"].is_boolean());
    CHECK(r.summary["result"]["pass"] == true);
}
