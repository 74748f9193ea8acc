#pragma once

// Command-line front end: wires flag/config input to the solver library and
// emits machine-readable JSON summaries (stdout) plus optional CSV artifacts.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "branchmc/branchmc.hpp"

namespace branchmc_cli {

using nlohmann::json;

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,      // bad flags / violated preconditions
    exit_numerical = 3,  // solver or quadrature failure
    exit_explosion = 4,  // particle budget exceeded
    exit_io = 5,
};

struct Options {
    double x = 0.0;
    double t = 1.0;
    double alpha = 2.0;
    double beta = 1.0;
    std::string g = "exp(-x^2)";
    std::string f = "exp(-x^2)";
    std::string boundary;
    std::string domain = "line";
    std::string nl = "power";
    std::uint64_t n = 100000;
    std::uint64_t seed = 0;
    std::uint64_t workers = 0;
    double dt = 1e-3;
    std::uint64_t nx = 801;
    std::uint64_t nt = 0;
    std::uint64_t chunk = 4096;
    std::uint64_t max_particles = 1000000;
    double max_discard = 1e-3;
    std::uint64_t progress = 0;
    std::string out;
    std::string format = "json";
    std::string solver = "mckean";
    std::string betas = "1,0.5,0.1";
    double k = 1.0;
    std::uint64_t quad_n = 64;
    std::string phi = "exp(-x^2)*(1+t)";
    std::string u0 = "exp(-x^2)";
    std::string config_path;
};

namespace detail {

enum class FieldKind { F64, U64, Str };

struct Field {
    const char* flag;
    FieldKind kind;
    void* ptr;
    const char* desc;
};

struct CommandSpec {
    std::string name;
    std::string desc;
    std::vector<Field> fields;
};

inline std::vector<CommandSpec> command_table(Options& o) {
    using K = FieldKind;
    const Field x{"x", K::F64, &o.x, "evaluation point x (space units)"};
    const Field t{"t", K::F64, &o.t, "time horizon t (time units)"};
    const Field alpha{"alpha", K::F64, &o.alpha, "nonlinearity exponent alpha, in (1,2]"};
    const Field beta{"beta", K::F64, &o.beta, "particle mass beta, in (0,1]"};
    const Field g{"g", K::Str, &o.g, "initial data g(x) expression, |g| <= 1"};
    const Field f{"f", K::Str, &o.f, "boundary/initial data f(x[,t]) expression, f >= 0"};
    const Field boundary{"boundary", K::Str, &o.boundary,
                         "lateral Dirichlet data expression (defaults to the data field)"};
    const Field domain{"domain", K::Str, &o.domain,
                       "spatial domain: 'line' or an interval 'a,b' (space units)"};
    const Field nl{"nl", K::Str, &o.nl, "nonlinearity: none | kpp | power"};
    const Field n{"n", K::U64, &o.n, "number of Monte Carlo samples"};
    const Field seed{"seed", K::U64, &o.seed, "RNG seed (64-bit)"};
    const Field workers{"workers", K::U64, &o.workers,
                        "worker threads, 0 = all cores (env BRANCHMC_WORKERS)"};
    const Field dt{"dt", K::F64, &o.dt, "time step for boundary detection (time units)"};
    const Field nx{"nx", K::U64, &o.nx, "finite-difference grid points in space"};
    const Field nt{"nt", K::U64, &o.nt,
                   "finite-difference time steps, 0 = smallest satisfying the guard"};
    const Field chunk{"chunk", K::U64, &o.chunk, "samples per scheduling chunk"};
    const Field maxp{"max-particles", K::U64, &o.max_particles,
                     "particle budget per tree before an explosion error"};
    const Field maxd{"max-discard", K::F64, &o.max_discard,
                     "largest tolerated fraction of explosion-discarded samples"};
    const Field progress{"progress", K::U64, &o.progress,
                         "progress line to stderr every N samples, 0 = off"};
    const Field out{"out", K::Str, &o.out, "CSV output path"};
    const Field format{"format", K::Str, &o.format,
                       "stdout summary format: json (pretty) | json-compact"};
    const Field solver{"solver", K::Str, &o.solver, "solver to compare: mckean | super | kpp-exit"};
    const Field betas{"betas", K::Str, &o.betas, "comma-separated beta values, descending"};
    const Field kflag{"k", K::F64, &o.k, "clock rate k (1/time units)"};
    const Field quad_n{"quad-n", K::U64, &o.quad_n, "quadrature nodes per axis"};
    const Field phi{"phi", K::Str, &o.phi, "space-time source expression phi(x,t)"};
    const Field u0{"u0", K::Str, &o.u0, "initial profile expression u0(x)"};

    return {
        {"mckean",
         "branching-tree estimate of v_t = 1/2 v_xx + v^2 - v, v(0,.) = g, at (t, x)",
         {x, t, g, n, seed, workers, dt, chunk, maxp, maxd, progress, format}},
        {"super",
         "exit-measure estimate of u_t = 1/2 u_xx - u^alpha with data (1-e^{-beta f})/beta",
         {x, t, alpha, beta, f, domain, n, seed, workers, dt, chunk, maxp, maxd, progress,
          format}},
        {"kpp-exit",
         "exit-measure form of the mckean estimator with absorbing spatial boundaries",
         {x, t, g, domain, n, seed, workers, dt, chunk, maxd, progress, format}},
        {"fd",
         "deterministic finite-difference solve; probes (t, x) and can export the grid",
         {nl, alpha, f, boundary, domain, t, x, nx, nt, out, format}},
        {"heat",
         "heat-kernel quadrature for u_t = 1/2 u_xx at (t, x); --n > 0 adds a Brownian "
         "Monte Carlo cross-check",
         {x, t, f, n, seed, workers, chunk, format}},
        {"compare",
         "run a stochastic solver against the finite-difference oracle and report the z-score",
         {solver, x, t, alpha, beta, g, f, domain, n, seed, workers, dt, nx, nt, chunk, maxd,
          format}},
        {"sweep-beta",
         "superprocess estimates over a descending list of beta values, with FD references",
         {alpha, f, x, t, betas, domain, n, seed, workers, dt, nx, nt, chunk, out, format}},
        {"lemma-check",
         "quadrature check of the exponential-clock renewal identity",
         {kflag, t, x, phi, u0, quad_n, format}},
        {"ie-check",
         "Monte Carlo residual of u + G_Q psi(u) = K_Q f against the FD solution",
         {nl, alpha, f, domain, t, x, n, seed, workers, dt, nx, nt, chunk, format}},
    };
}

inline void add_fields(CLI::App* cmd, const std::vector<Field>& fields) {
    for (const auto& field : fields) {
        const std::string flag = "--" + std::string(field.flag);
        CLI::Option* opt = nullptr;
        switch (field.kind) {
            case FieldKind::F64:
                opt = cmd->add_option(flag, *static_cast<double*>(field.ptr), field.desc);
                break;
            case FieldKind::U64:
                opt = cmd->add_option(flag, *static_cast<std::uint64_t*>(field.ptr), field.desc);
                break;
            case FieldKind::Str:
                opt = cmd->add_option(flag, *static_cast<std::string*>(field.ptr), field.desc);
                break;
        }
        opt->take_last();
        if (std::string(field.flag) == "workers") opt->envname("BRANCHMC_WORKERS");
    }
}

inline json echo_config(const std::vector<Field>& fields) {
    json cfg = json::object();
    for (const auto& field : fields) {
        switch (field.kind) {
            case FieldKind::F64: cfg[field.flag] = *static_cast<double*>(field.ptr); break;
            case FieldKind::U64:
                cfg[field.flag] = *static_cast<std::uint64_t*>(field.ptr);
                break;
            case FieldKind::Str: cfg[field.flag] = *static_cast<std::string*>(field.ptr); break;
        }
    }
    return cfg;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Config file -> flag/value pairs. JSON files may be whole summaries (their
/// "config" object is used, and "command" is honored); otherwise the format
/// is `key = value` lines with '#' comments.
inline std::vector<std::pair<std::string, std::string>> load_config_pairs(
    const std::string& path, std::string* command_out) {
    std::ifstream in(path);
    if (!in.is_open())
        throw branchmc::io_error("config: cannot open '" + path + "' for reading");
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();

    std::vector<std::pair<std::string, std::string>> pairs;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json root = json::parse(text);
        if (root.contains("command") && command_out) *command_out = root["command"];
        const json cfg = root.contains("config") ? root["config"] : root;
        if (!cfg.is_object())
            throw branchmc::argument_error("config: JSON 'config' must be an object");
        for (const auto& [key, value] : cfg.items()) {
            if (value.is_string())
                pairs.emplace_back(key, value.get<std::string>());
            else if (value.is_number_float())
                pairs.emplace_back(key, format_double(value.get<double>()));
            else
                pairs.emplace_back(key, value.dump());
        }
        return pairs;
    }

    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw branchmc::argument_error("config: line " + std::to_string(lineno) +
                                               " is not 'key = value'");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw branchmc::argument_error("config: empty key on line " + std::to_string(lineno));
        if (key == "command" && command_out) {
            *command_out = value;
            continue;
        }
        pairs.emplace_back(key, value);
    }
    return pairs;
}

inline branchmc::DomainSpec parse_domain(const std::string& spec) {
    if (spec == "line" || spec.empty()) return branchmc::DomainSpec::full_line();
    double a = 0.0, b = 0.0;
    char comma = 0;
    std::istringstream ss(spec);
    if ((ss >> a >> comma >> b) && comma == ',' && ss.eof())
        return branchmc::DomainSpec::interval(a, b);
    throw branchmc::argument_error("domain must be 'line' or 'a,b' (got '" + spec + "')");
}

inline branchmc::NonlinearitySpec parse_nl(const std::string& name, double alpha) {
    if (name == "none") return branchmc::NonlinearitySpec::none();
    if (name == "kpp") return branchmc::NonlinearitySpec::kpp();
    if (name == "power") return branchmc::NonlinearitySpec::power_alpha(alpha);
    throw branchmc::argument_error("nl must be none | kpp | power (got '" + name + "')");
}

inline std::vector<double> parse_betas(const std::string& csv) {
    std::vector<double> out;
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw branchmc::argument_error("betas: no values parsed from '" + csv + "'");
    return out;
}

inline branchmc::RunPlan plan_from(const Options& o) {
    branchmc::RunPlan plan;
    plan.seed = o.seed;
    plan.n_workers = static_cast<unsigned>(o.workers);
    plan.chunk = o.chunk;
    plan.max_discard_fraction = o.max_discard;
    plan.progress_interval = o.progress;
    return plan;
}

inline json estimate_json(const branchmc::Estimate& e) {
    return {{"mean", e.mean},
            {"stderr", e.stderr_},
            {"n", e.n},
            {"discarded", e.discarded}};
}

inline std::size_t auto_nt(double T, std::size_t nx, double span, std::size_t requested) {
    if (requested > 0) return requested;
    return static_cast<std::size_t>(T * static_cast<double>(nx) * static_cast<double>(nx) /
                                    (span * span)) +
           1;
}

// FD value of the solver's target quantity at (t, x), with Richardson budget.
struct OracleProbe {
    double value;
    double budget;
};

inline OracleProbe oracle_for_mckean(const std::string& g_src,
                                     const branchmc::DomainSpec& domain, double T, double x,
                                     std::size_t nx, std::size_t nt) {
    using namespace branchmc;
    const ScalarField u_data = ScalarField::parse("1-(" + g_src + ")");
    FdOptions opts;
    if (domain.kind == DomainKind::FullLine) opts = full_line_window(x, T);
    const double span = domain.kind == DomainKind::Interval ? domain.b - domain.a
                                                            : opts.x_max - opts.x_min;
    const auto probe = fd_probe(NonlinearitySpec::kpp(), u_data, domain, u_data, T, x, nx,
                                auto_nt(T, nx, span, nt), opts);
    return {1.0 - probe.value, probe.budget};
}

inline OracleProbe oracle_for_super(const Options& o, const branchmc::DomainSpec& domain) {
    using namespace branchmc;
    const ScalarField f_beta = transform_data(ScalarField::parse(o.f), o.beta);
    FdOptions opts;
    if (domain.kind == DomainKind::FullLine) opts = full_line_window(o.x, o.t);
    const double span = domain.kind == DomainKind::Interval ? domain.b - domain.a
                                                            : opts.x_max - opts.x_min;
    const auto probe =
        fd_probe(NonlinearitySpec::power_alpha(o.alpha), f_beta, domain, f_beta, o.t, o.x,
                 static_cast<std::size_t>(o.nx),
                 auto_nt(o.t, static_cast<std::size_t>(o.nx), span, o.nt), opts);
    return {probe.value, probe.budget};
}

inline json run_command(const std::string& command, const Options& o) {
    using namespace branchmc;
    json result;
    double elapsed = 0.0;

    if (command == "mckean") {
        McKeanConfig cfg;
        cfg.horizon_t = o.t;
        cfg.start_x = o.x;
        cfg.dt = o.dt;
        cfg.max_particles = o.max_particles;
        cfg.initial_condition = ScalarField::parse(o.g);
        const Estimate e = mckean_solve(cfg, o.n, plan_from(o));
        result = estimate_json(e);
        elapsed = e.elapsed;
    } else if (command == "super") {
        SuperConfig cfg;
        cfg.alpha = o.alpha;
        cfg.beta = o.beta;
        cfg.horizon_t = o.t;
        cfg.start_x = o.x;
        cfg.domain = parse_domain(o.domain);
        cfg.boundary_data = ScalarField::parse(o.f);
        cfg.dt = o.dt;
        cfg.max_particles = o.max_particles;
        const Estimate e = superprocess_solve(cfg, o.n, plan_from(o));
        result = estimate_json(e);
        result["estimates"] = "u_beta with data (1-exp(-beta*f))/beta";
        elapsed = e.elapsed;
    } else if (command == "kpp-exit") {
        const Estimate e = kpp_exit_solve({0.0, o.x}, o.t, parse_domain(o.domain),
                                          ScalarField::parse(o.g), o.n, o.dt, plan_from(o));
        result = estimate_json(e);
        elapsed = e.elapsed;
    } else if (command == "fd") {
        const auto domain = parse_domain(o.domain);
        const auto data = ScalarField::parse(o.f);
        std::optional<ScalarField> boundary;
        if (!o.boundary.empty()) boundary = ScalarField::parse(o.boundary);
        FdOptions opts;
        if (domain.kind == DomainKind::FullLine) opts = full_line_window(o.x, o.t);
        const double span = domain.kind == DomainKind::Interval ? domain.b - domain.a
                                                                : opts.x_max - opts.x_min;
        const auto nx = static_cast<std::size_t>(o.nx);
        const auto sol = fd_solve(parse_nl(o.nl, o.alpha), data, domain, boundary, o.t, nx,
                                  auto_nt(o.t, nx, span, o.nt), opts);
        result["value"] = sol.value_at(o.t, o.x);
        result["nx"] = sol.nx();
        result["stored_levels"] = sol.n_levels();
        if (!o.out.empty()) {
            std::ofstream file(o.out, std::ios::binary);
            if (!file.is_open())
                throw io_error("fd: cannot open '" + o.out + "' for writing");
            sol.write_csv(file);
            if (!file.good()) throw io_error("fd: write to '" + o.out + "' failed");
            result["csv"] = o.out;
        }
    } else if (command == "heat") {
        const auto f = ScalarField::parse(o.f);
        const double quadrature = heat_solution(o.x, o.t, f);
        result["value"] = quadrature;
        if (o.n > 0) {
            RunPlan plan = plan_from(o);
            plan.n_samples = o.n;
            const double x0 = o.x, T = o.t;
            const Estimate e = run_parallel(
                [&f, x0, T](RngStream& rng) { return f(brownian_step(x0, T, rng), 0.0); },
                plan);
            result["mc"] = estimate_json(e);
            result["z_score"] =
                e.stderr_ > 0.0 ? (e.mean - quadrature) / e.stderr_ : 0.0;
            elapsed = e.elapsed;
        }
    } else if (command == "compare") {
        const auto domain = parse_domain(o.domain);
        Estimate e;
        OracleProbe oracle{};
        if (o.solver == "mckean") {
            McKeanConfig cfg;
            cfg.horizon_t = o.t;
            cfg.start_x = o.x;
            cfg.dt = o.dt;
            cfg.initial_condition = ScalarField::parse(o.g);
            e = mckean_solve(cfg, o.n, plan_from(o));
            oracle = oracle_for_mckean(o.g, domain, o.t, o.x, static_cast<std::size_t>(o.nx),
                                       o.nt);
        } else if (o.solver == "super") {
            SuperConfig cfg;
            cfg.alpha = o.alpha;
            cfg.beta = o.beta;
            cfg.horizon_t = o.t;
            cfg.start_x = o.x;
            cfg.domain = domain;
            cfg.boundary_data = ScalarField::parse(o.f);
            cfg.dt = o.dt;
            e = superprocess_solve(cfg, o.n, plan_from(o));
            oracle = oracle_for_super(o, domain);
        } else if (o.solver == "kpp-exit") {
            e = kpp_exit_solve({0.0, o.x}, o.t, domain, ScalarField::parse(o.g), o.n, o.dt,
                               plan_from(o));
            oracle = oracle_for_mckean(o.g, domain, o.t, o.x, static_cast<std::size_t>(o.nx),
                                       o.nt);
        } else {
            throw argument_error("compare: solver must be mckean | super | kpp-exit");
        }
        result = estimate_json(e);
        result["fd_value"] = oracle.value;
        result["fd_budget"] = oracle.budget;
        result["z_score"] = e.stderr_ > 0.0 ? (e.mean - oracle.value) / e.stderr_ : 0.0;
        result["pass"] = std::fabs(e.mean - oracle.value) <= 3.0 * e.stderr_ + oracle.budget;
        elapsed = e.elapsed;
    } else if (command == "sweep-beta") {
        SuperConfig cfg;
        cfg.alpha = o.alpha;
        cfg.beta = 1.0;
        cfg.horizon_t = o.t;
        cfg.start_x = o.x;
        cfg.domain = parse_domain(o.domain);
        cfg.boundary_data = ScalarField::parse(o.f);
        cfg.dt = o.dt;
        BetaSweepOptions sweep_opts;
        sweep_opts.nx = static_cast<std::size_t>(o.nx);
        sweep_opts.nt = static_cast<std::size_t>(o.nt);
        const auto rows = beta_sweep(cfg, parse_betas(o.betas), o.n, plan_from(o), sweep_opts);
        json jrows = json::array();
        CsvTable table;
        table.columns = {"beta", "mean", "stderr", "n", "fd_f_beta", "fd_f"};
        for (const auto& row : rows) {
            jrows.push_back({{"beta", row.beta},
                             {"mean", row.estimate.mean},
                             {"stderr", row.estimate.stderr_},
                             {"n", row.estimate.n},
                             {"fd_f_beta", row.fd_f_beta},
                             {"fd_f", row.fd_f}});
            table.rows.push_back({row.beta, row.estimate.mean, row.estimate.stderr_,
                                  static_cast<double>(row.estimate.n), row.fd_f_beta,
                                  row.fd_f});
            elapsed += row.estimate.elapsed;
        }
        result["rows"] = jrows;
        if (!o.out.empty()) {
            emit_csv(table, o.out);
            result["csv"] = o.out;
        }
    } else if (command == "lemma-check") {
        const auto rep = verify_lemma_identity(o.k, o.t, o.x, ScalarField::parse(o.phi),
                                               static_cast<std::size_t>(o.quad_n),
                                               ScalarField::parse(o.u0));
        result["lhs"] = rep.lhs;
        result["rhs"] = rep.rhs;
        result["residual"] = rep.residual;
    } else if (command == "ie-check") {
        const auto rep = verify_integral_equation(
            parse_nl(o.nl, o.alpha), ScalarField::parse(o.f), parse_domain(o.domain), o.t, o.x,
            o.n, plan_from(o), o.dt, static_cast<std::size_t>(o.nx),
            static_cast<std::size_t>(o.nt));
        result["residual"] = rep.residual;
        result["mc_stderr"] = rep.mc_stderr;
        result["fd_budget"] = rep.fd_budget;
        result["u_value"] = rep.u_value;
        result["pass"] = rep.residual <= 3.0 * rep.mc_stderr + rep.fd_budget;
        elapsed = rep.combined.elapsed;
    } else {
        throw argument_error("unknown command '" + command + "'");
    }

    json summary;
    summary["command"] = command;
    summary["result"] = result;
    summary["timing"] = {{"elapsed_s", elapsed}};
    return summary;
}

}  // namespace detail

class Cli {
public:
    Cli() : app_("stochastic and deterministic solvers for 1-D semilinear parabolic PDEs",
                 "branchmc") {
        app_.require_subcommand(0, 1);
        app_.add_option("--config", opt_.config_path,
                        "config file: 'key = value' lines or a JSON summary to re-run")
            ->take_last();
        for (auto& spec : detail::command_table(opt_)) {
            CLI::App* cmd = app_.add_subcommand(spec.name, spec.desc);
            detail::add_fields(cmd, spec.fields);
            cmd->add_option("--config", opt_.config_path,
                            "config file: 'key = value' lines or a JSON summary to re-run")
                ->take_last();
            specs_.push_back(std::move(spec));
        }
    }

    CLI::App& app() { return app_; }
    const Options& options() const { return opt_; }

    /// Parse and execute. JSON summary goes to `out`, diagnostics to `err`.
    int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
        try {
            const std::vector<std::string> effective = expand_config(args);
            std::vector<const char*> argv;
            argv.push_back("branchmc");
            for (const auto& a : effective) argv.push_back(a.c_str());
            try {
                app_.parse(static_cast<int>(argv.size()), argv.data());
            } catch (const CLI::CallForHelp& e) {
                out << app_.help() << std::flush;
                return exit_ok;
            } catch (const CLI::ParseError& e) {
                err << "error: " << e.what() << "\n";
                return exit_usage;
            }
            const auto subs = app_.get_subcommands();
            if (subs.empty()) {
                out << app_.help() << std::flush;
                return exit_usage;
            }
            const std::string command = subs.front()->get_name();
            json summary = detail::run_command(command, opt_);
            summary["config"] = echo_for(command);
            if (opt_.format == "json-compact")
                out << summary.dump() << "\n" << std::flush;
            else if (opt_.format == "json")
                out << summary.dump(2) << "\n" << std::flush;
            else
                throw branchmc::argument_error("format must be json | json-compact (got '" +
                                               opt_.format + "')");
            return exit_ok;
        } catch (const branchmc::parse_error& e) {
            err << "error: " << e.what() << "\n";
            return exit_usage;
        } catch (const branchmc::argument_error& e) {
            err << "error: " << e.what() << "\n";
            return exit_usage;
        } catch (const branchmc::explosion_error& e) {
            err << "error: " << e.what() << "\n";
            return exit_explosion;
        } catch (const branchmc::io_error& e) {
            err << "error: " << e.what() << "\n";
            return exit_io;
        } catch (const branchmc::numerical_error& e) {
            err << "error: " << e.what() << "\n";
            return exit_numerical;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return exit_numerical;
        }
    }

private:
    json echo_for(const std::string& command) const {
        for (const auto& spec : specs_)
            if (spec.name == command) return detail::echo_config(spec.fields);
        return json::object();
    }

    // Inject config-file pairs as flags ahead of the explicit arguments, so
    // explicit flags win via take_last. The subcommand may come from the
    // command line or from the config file's "command" entry.
    std::vector<std::string> expand_config(const std::vector<std::string>& args) const {
        std::string config_path;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config" && i + 1 < args.size())
                config_path = args[i + 1];
            else if (args[i].rfind("--config=", 0) == 0)
                config_path = args[i].substr(9);
        }
        if (config_path.empty()) return args;

        std::string file_command;
        const auto pairs = detail::load_config_pairs(config_path, &file_command);

        std::vector<std::string> rest = args;
        std::string command;
        if (!rest.empty() && !rest.front().empty() && rest.front()[0] != '-') {
            command = rest.front();
            rest.erase(rest.begin());
        }
        if (command.empty()) command = file_command;
        if (command.empty())
            throw branchmc::argument_error("config: no command given (neither on the command "
                                           "line nor in the config file)");
        if (!file_command.empty() && file_command != command)
            throw branchmc::argument_error("config: file is for command '" + file_command +
                                           "' but '" + command + "' was requested");

        std::vector<std::string> effective;
        effective.push_back(command);
        for (const auto& [key, value] : pairs) {
            effective.push_back("--" + key);
            effective.push_back(value);
        }
        effective.insert(effective.end(), rest.begin(), rest.end());
        return effective;
    }

    Options opt_;
    CLI::App app_;
    std::vector<detail::CommandSpec> specs_;
};

}  // namespace branchmc_cli
