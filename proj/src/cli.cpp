#include "lumpkit/cli.hpp"

#include "lumpkit/diagnostics.hpp"
#include "lumpkit/io.hpp"
#include "lumpkit/jacobian.hpp"
#include "lumpkit/lumping.hpp"
#include "lumpkit/model.hpp"
#include "lumpkit/simulate.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace lumpkit::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string model;
    std::optional<double> epsilon;
    std::optional<double> ratio;
    double d_min = 1e-6;
    std::optional<std::uint64_t> seed;
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    std::optional<double> horizon;
    std::string out = ".";
    std::size_t grid = 50;
    std::size_t confirmations = 3;
    std::string points;
    std::string lumping;
    std::size_t report_points = 200;
};

/// Wall-clock per phase, in insertion order.
class PhaseTimer {
  public:
    template<typename F>
    auto run(const std::string &phase, F &&f) {
        const auto start = std::chrono::steady_clock::now();
        auto finish = [&] {
            const std::chrono::duration<double> d = std::chrono::steady_clock::now() - start;
            timings_[phase] = d.count();
        };
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            finish();
        } else {
            auto result = f();
            finish();
            return result;
        }
    }
    const json &timings() const { return timings_; }

  private:
    json timings_ = json::object();
};

std::uint64_t resolve_seed(const Options &o) {
    if (o.seed)
        return *o.seed;
    if (const char *env = std::getenv("LUMPKIT_SEED")) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(env, &used);
            if (used == std::string_view(env).size())
                return v;
        } catch (const std::exception &) {
        }
        throw UsageError(std::string("LUMPKIT_SEED is not an unsigned integer: '") + env + "'");
    }
    return 0;
}

std::vector<Eigen::VectorXd> parse_points(const std::string &text, std::size_t dim) {
    std::vector<Eigen::VectorXd> points;
    std::stringstream rows(text);
    std::string row;
    while (std::getline(rows, row, ';')) {
        std::vector<double> values;
        std::stringstream cols(row);
        std::string cell;
        while (std::getline(cols, cell, ',')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos)
                    throw std::invalid_argument(cell);
            } catch (const std::exception &) {
                throw UsageError("--points: cannot read number '" + cell + "'");
            }
        }
        if (values.size() != dim)
            throw UsageError("--points: each point needs " + std::to_string(dim) + " coordinates");
        points.push_back(Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    if (points.empty())
        throw UsageError("--points: no points given");
    return points;
}

JacobianBasis build_basis(const OdeSystem &sys, const Options &o, std::uint64_t seed) {
    if (!o.points.empty())
        return jacobian_basis_from_points(sys, parse_points(o.points, sys.dimension()));
    SamplingDomain dom = SamplingDomain::around(sys.initial_condition(), seed);
    dom.confirmations = o.confirmations;
    return sample_jacobian_basis(sys, dom);
}

SolverConfig solver_config(const Options &o) {
    SolverConfig cfg;
    cfg.rel_tol = o.rel_tol;
    cfg.abs_tol = o.abs_tol;
    cfg.validate();
    return cfg;
}

json manifest(const std::string &command, const Options &o, std::uint64_t seed, const PhaseTimer &timer) {
    json j;
    j["tool"] = "lumpkit";
    j["tool_version"] = kToolVersion;
    j["command"] = command;
    j["model"] = o.model;
    j["seed"] = seed;
    j["epsilon"] = o.epsilon ? json(*o.epsilon) : json(nullptr);
    j["ratio"] = o.ratio ? json(*o.ratio) : json(nullptr);
    j["d_min"] = o.d_min;
    j["confirmations"] = o.confirmations;
    j["sample_points"] = o.points.empty() ? json(nullptr) : json(o.points);
    j["grid"] = o.grid;
    j["horizon"] = o.horizon ? json(*o.horizon) : json(nullptr);
    j["lumping"] = o.lumping.empty() ? json(nullptr) : json(o.lumping);
    SolverConfig cfg;
    cfg.rel_tol = o.rel_tol;
    cfg.abs_tol = o.abs_tol;
    j["solver"] = to_json(cfg);
    j["output_dir"] = o.out;
    j["timings_seconds"] = timer.timings();
    return j;
}

fs::path prepare_out(const Options &o) {
    fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::ios_base::failure("cannot create output directory '" + o.out + "': " + ec.message());
    return dir;
}

int cmd_lump(const Options &o, std::ostream &out) {
    if (!o.epsilon)
        throw UsageError("lump needs --epsilon");
    if (!(*o.epsilon >= 0.0))
        throw UsageError("--epsilon must be non-negative");
    const std::uint64_t seed = resolve_seed(o);
    PhaseTimer timer;
    const OdeSystem sys = timer.run("parse", [&] { return load_model(o.model); });
    const JacobianBasis basis = timer.run("basis", [&] { return build_basis(sys, o, seed); });
    std::vector<LumpCheck> trace;
    const LumpingMatrix l =
        timer.run("lump", [&] { return approximate_lump(basis, sys.observables(), *o.epsilon, &trace); });
    const double eps_max = epsilon_max(basis, sys.observables());

    const fs::path dir = prepare_out(o);
    json lj = to_json(l, trace);
    lj["epsilon_max"] = eps_max;
    lj["epsilon_ratio"] = eps_max > 0.0 ? json(*o.epsilon / eps_max) : json(nullptr);
    write_json(dir / "L.json", lj);
    write_json(dir / "basis.json", to_json(basis, seed));
    write_json(dir / "manifest.json", manifest("lump", o, seed, timer));

    out << "model: " << sys.name() << " (m=" << sys.dimension() << ", p=" << sys.observable_count() << ")\n";
    out << "jacobian basis: " << basis.size() << " matrices\n";
    out << "reduced size: " << l.size() << "\n";
    out << "epsilon: " << format_double(*o.epsilon) << "\n";
    out << "epsilon/epsilon_max: " << (eps_max > 0.0 ? format_double(*o.epsilon / eps_max) : "n/a") << "\n";
    return Ok;
}

int cmd_find_epsilon(const Options &o, std::ostream &out) {
    if (!o.ratio)
        throw UsageError("find-epsilon needs --ratio");
    if (!(*o.ratio > 0.0 && *o.ratio <= 1.0))
        throw UsageError("--ratio must lie in (0, 1]");
    if (!(o.d_min > 0.0))
        throw UsageError("--d-min must be positive");
    const std::uint64_t seed = resolve_seed(o);
    PhaseTimer timer;
    const OdeSystem sys = timer.run("parse", [&] { return load_model(o.model); });
    const JacobianBasis basis = timer.run("basis", [&] { return build_basis(sys, o, seed); });

    EpsilonSearchConfig cfg;
    cfg.cutoff_size = static_cast<std::size_t>(std::ceil(*o.ratio * static_cast<double>(sys.dimension())));
    cfg.d_min = o.d_min;
    const EpsilonSearch search = timer.run("search", [&] { return find_epsilon(basis, sys.observables(), cfg); });
    if (search.outcome == SearchOutcome::BelowObservables)
        warn("cutoff size " + std::to_string(cfg.cutoff_size) + " is below the observable rank " +
             std::to_string(sys.observable_count()) + "; returning epsilon_max");

    const fs::path dir = prepare_out(o);
    json sj = to_json(search);
    sj["cutoff_size"] = cfg.cutoff_size;
    sj["ratio"] = *o.ratio;
    sj["d_min"] = cfg.d_min;
    write_json(dir / "search.json", sj);
    write_json(dir / "L.json", to_json(search.lumping));
    write_json(dir / "basis.json", to_json(basis, seed));
    write_json(dir / "manifest.json", manifest("find-epsilon", o, seed, timer));

    out << "model: " << sys.name() << " (m=" << sys.dimension() << ", p=" << sys.observable_count() << ")\n";
    out << "cutoff size: " << cfg.cutoff_size << "\n";
    out << "epsilon: " << format_double(search.epsilon) << "\n";
    out << "epsilon_max: " << format_double(search.epsilon_max) << "\n";
    out << "reduced size: " << search.lumping.size() << "\n";
    out << "iterations: " << search.iterations << "\n";
    return Ok;
}

int cmd_simulate(const Options &o, std::ostream &out) {
    const std::uint64_t seed = resolve_seed(o);
    PhaseTimer timer;
    const OdeSystem sys = timer.run("parse", [&] { return load_model(o.model); });
    const double horizon = o.horizon.value_or(sys.time_horizon());
    if (!(horizon > 0.0))
        throw UsageError("--horizon must be positive");
    const SolverConfig cfg = solver_config(o);

    std::optional<LumpingMatrix> l;
    if (!o.lumping.empty()) {
        json lj = read_json(o.lumping);
        try {
            l = lumping_from_json(lj);
        } catch (const std::exception &e) {
            throw NumericError(std::string("malformed lumping file: ") + e.what());
        }
        if (l->dimension() != sys.dimension())
            throw NumericError("lumping matrix has " + std::to_string(l->dimension()) + " columns but the model has " +
                               std::to_string(sys.dimension()) + " variables");
    }

    const fs::path dir = prepare_out(o);
    const std::vector<double> grid = uniform_grid(horizon, o.report_points);
    if (!l) {
        const Trajectory traj = timer.run("integrate", [&] {
            return integrate(original_drift(sys), sys.initial_condition(), horizon, cfg);
        });
        write_text(dir / "original.csv", trajectory_csv(grid, traj.sample(grid), sys.var_names()));
        write_json(dir / "manifest.json", manifest("simulate", o, seed, timer));
        out << "model: " << sys.name() << "\nsimulated original system to T=" << format_double(horizon) << "\n";
        return Ok;
    }

    ReportOptions ropts;
    ropts.grid_points = o.report_points;
    ropts.seed = seed;
    const ReductionReport rep =
        timer.run("report", [&] { return reduction_report(sys, *l, sys.initial_condition(), horizon, cfg, ropts); });

    std::vector<std::string> reduced_names;
    for (std::size_t i = 0; i < l->size(); ++i)
        reduced_names.push_back("y" + std::to_string(i + 1));
    write_text(dir / "original.csv", trajectory_csv(rep.times, rep.original, sys.var_names()));
    write_text(dir / "reduced.csv", trajectory_csv(rep.times, rep.reduced, reduced_names));
    std::vector<std::vector<double>> err_rows;
    std::vector<std::vector<double>> dev_rows;
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
        err_rows.push_back({rep.times[k], rep.error[k]});
        dev_rows.push_back({rep.times[k], rep.deviation[k]});
    }
    write_text(dir / "error.csv", to_csv({"t", "error"}, err_rows));
    write_text(dir / "deviation.csv", to_csv({"t", "deviation"}, dev_rows));
    write_json(dir / "report.json", to_json(rep));
    write_json(dir / "manifest.json", manifest("simulate", o, seed, timer));

    out << "model: " << sys.name() << "\n";
    out << "reduced size: " << l->size() << "\n";
    out << "e(T): " << format_double(rep.e_at_T) << "\n";
    out << "e_rel(T): " << (rep.e_rel_at_T ? format_double(*rep.e_rel_at_T) : "n/a") << "\n";
    out << "e_max: " << format_double(rep.e_max) << "\n";
    out << "eta: " << format_double(rep.eta) << "\n";
    out << "bound: " << format_double(rep.bound) << "\n";
    return Ok;
}

int cmd_sweep(const Options &o, std::ostream &out, std::ostream &err) {
    if (o.grid < 2)
        throw UsageError("--grid must be at least 2");
    const std::uint64_t seed = resolve_seed(o);
    PhaseTimer timer;
    const OdeSystem sys = timer.run("parse", [&] { return load_model(o.model); });
    const JacobianBasis basis = timer.run("basis", [&] { return build_basis(sys, o, seed); });
    const double eps_max = epsilon_max(basis, sys.observables());
    std::vector<double> grid(o.grid);
    for (std::size_t k = 0; k < o.grid; ++k)
        grid[k] = eps_max * static_cast<double>(k) / static_cast<double>(o.grid - 1);
    grid.back() = eps_max;
    const auto steps = timer.run("sweep", [&] { return staircase(basis, sys.observables(), grid); });

    const fs::path dir = prepare_out(o);
    std::vector<std::vector<double>> rows;
    for (const StairStep &s : steps)
        rows.push_back({s.epsilon, eps_max > 0.0 ? s.epsilon / eps_max : 0.0, static_cast<double>(s.size)});
    write_text(dir / "staircase.csv", to_csv({"epsilon", "epsilon_over_epsilon_max", "reduced_size"}, rows));
    write_json(dir / "manifest.json", manifest("sweep", o, seed, timer));

    out << "model: " << sys.name() << "\n";
    out << "epsilon_max: " << format_double(eps_max) << "\n";
    out << "sizes: " << steps.front().size << " -> " << steps.back().size << "\n";
    if (const auto bad = monotonicity_violation(steps)) {
        const auto &[a, b] = *bad;
        err << "error: reduced size increases with epsilon between rows " << a << " (epsilon="
            << format_double(steps[a].epsilon) << ", size=" << steps[a].size << ") and " << b
            << " (epsilon=" << format_double(steps[b].epsilon) << ", size=" << steps[b].size << ")\n";
        return Numeric;
    }
    return Ok;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Approximate constrained lumping of rational ODE models", "lumpkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    Options o;

    auto common = [&](CLI::App *sub) {
        sub->add_option("--model", o.model, "model file")->required();
        sub->add_option("--seed", o.seed, "PRNG seed (fallback: LUMPKIT_SEED, then 0)");
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
    };
    auto basis_flags = [&](CLI::App *sub) {
        sub->add_option("--confirmations", o.confirmations, "consecutive in-span samples that end sampling")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--points", o.points, "explicit sample points 'a,b,c;d,e,f' instead of random sampling");
    };

    CLI::App *lump = app.add_subcommand("lump", "compute an approximate constrained lumping");
    common(lump);
    basis_flags(lump);
    lump->add_option("--epsilon", o.epsilon, "lumping tolerance (>= 0)");

    CLI::App *search = app.add_subcommand("find-epsilon", "bisect epsilon for a target reduced size");
    common(search);
    basis_flags(search);
    search->add_option("--ratio", o.ratio, "cutoff size as a fraction of m, in (0, 1]");
    search->add_option("--d-min", o.d_min, "bisection stops once the bracket is narrower")->capture_default_str();

    CLI::App *sim = app.add_subcommand("simulate", "simulate original and reduced systems");
    common(sim);
    sim->add_option("--lumping", o.lumping, "L.json from lump or find-epsilon");
    sim->add_option("--horizon", o.horizon, "override the model's time horizon");
    sim->add_option("--rel-tol", o.rel_tol, "integrator relative tolerance")->capture_default_str();
    sim->add_option("--abs-tol", o.abs_tol, "integrator absolute tolerance")->capture_default_str();
    sim->add_option("--report-points", o.report_points, "output grid size")
        ->check(CLI::Range(std::size_t{2}, std::size_t{10'000'000}))
        ->capture_default_str();

    CLI::App *sweep = app.add_subcommand("sweep", "reduced size over a uniform epsilon grid");
    common(sweep);
    basis_flags(sweep);
    sweep->add_option("--grid", o.grid, "number of grid points (>= 2)")->capture_default_str();

    std::vector<const char *> argv{"lumpkit"};
    for (const auto &a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : UsageOrParse;
    }

    // Library warnings go to this invocation's error stream.
    struct WarningScope {
        WarningHandler previous;
        ~WarningScope() { set_warning_handler(std::move(previous)); }
    } scope{set_warning_handler([&err](std::string_view msg) { err << "warning: " << msg << "\n"; })};

    try {
        if (lump->parsed())
            return cmd_lump(o, out);
        if (search->parsed())
            return cmd_find_epsilon(o, out);
        if (sim->parsed())
            return cmd_simulate(o, out);
        return cmd_sweep(o, out, err);
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << "\n";
        return UsageOrParse;
    } catch (const ParseError &e) {
        err << o.model << ":" << e.what() << "\n";
        return UsageOrParse;
    } catch (const ModelError &e) {
        err << "model error: " << e.what() << "\n";
        return UsageOrParse;
    } catch (const std::ios_base::failure &e) {
        err << "i/o error: " << e.what() << "\n";
        return Io;
    } catch (const fs::filesystem_error &e) {
        err << "i/o error: " << e.what() << "\n";
        return Io;
    } catch (const json::exception &e) {
        err << "i/o error: " << e.what() << "\n";
        return Io;
    } catch (const std::exception &e) {
        err << "numeric failure: " << e.what() << "\n";
        return Numeric;
    }
}

} // namespace lumpkit::cli
