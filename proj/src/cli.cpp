#include "atg/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace atg::cli {

namespace {

using nlohmann::json;

template <typename T>
T json_value(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type");
    }
}

std::size_t json_count(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw UsageError("config key '" + key + "' must be a nonnegative integer");
    }
    return v.get<std::size_t>();
}

std::string fmt_g9(double x) { return fmt::format("{:.9g}", x); }

/// Optional flag values; unset means "keep the file or default value".
struct FlagValues {
    std::optional<std::string> problem, algorithm, out, config;
    std::optional<double> theta, zeta_tilde, tol;
    std::optional<int> initial_n, max_levels, matrix_order, load_order;
    std::optional<std::size_t> max_dofs, newton_max_iter;
    std::optional<std::uint64_t> seed;
    bool dump_meshes = false, record_timing = false, gnuplot = false, serial = false, verbose = false;
};

}  // namespace

void apply_json(CliConfig& cfg, const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw UsageError("config file must hold a flat JSON object");
    auto& r = cfg.run;
    for (const auto& [key, v] : doc.items()) {
        if (key == "problem") {
            r.problem = json_value<std::string>(v, key);
        } else if (key == "algorithm") {
            try {
                r.algorithm = parse_algorithm(json_value<std::string>(v, key));
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        } else if (key == "theta") {
            r.theta = json_value<double>(v, key);
        } else if (key == "initial-n") {
            r.initial_n = static_cast<int>(json_count(v, key));
        } else if (key == "max-levels") {
            r.max_levels = static_cast<int>(json_count(v, key));
        } else if (key == "max-dofs") {
            r.max_dofs = json_count(v, key);
        } else if (key == "zeta-tilde") {
            r.zeta_tilde = json_value<double>(v, key);
        } else if (key == "tol") {
            r.tol = json_value<double>(v, key);
        } else if (key == "newton-max-iter") {
            r.newton_max_iter = json_count(v, key);
        } else if (key == "matrix-order") {
            r.matrix_order = static_cast<int>(json_count(v, key));
        } else if (key == "load-order") {
            r.load_order = static_cast<int>(json_count(v, key));
        } else if (key == "seed") {
            r.seed = json_count(v, key);
        } else if (key == "record-timing") {
            r.record_timing = json_value<bool>(v, key);
        } else if (key == "serial") {
            r.exec = json_value<bool>(v, key) ? Exec::Serial : Exec::Parallel;
        } else if (key == "out") {
            cfg.out = json_value<std::string>(v, key);
        } else if (key == "dump-meshes") {
            cfg.dump_meshes = json_value<bool>(v, key);
        } else if (key == "gnuplot") {
            cfg.gnuplot = json_value<bool>(v, key);
        } else if (key == "verbose") {
            cfg.verbose = json_value<bool>(v, key);
        } else {
            throw UsageError("unknown config key '" + key + "'");
        }
    }
}

CliConfig parse_config(const std::vector<std::string>& args) {
    CLI::App app{"Run one adaptive two-grid experiment", "atg run"};
    FlagValues f;
    app.add_option("--problem", f.problem, "Problem id");
    app.add_option("--algorithm", f.algorithm, "Algorithm id");
    app.add_option("--theta", f.theta, "Doerfler bulk parameter in (0, 1)");
    app.add_option("--initial-n", f.initial_n, "Initial uniform mesh has n x n squares");
    app.add_option("--max-levels", f.max_levels, "Number of refinement levels");
    app.add_option("--max-dofs", f.max_dofs, "Stop before exceeding this many dofs");
    app.add_option("--zeta-tilde", f.zeta_tilde, "Weight of the higher-order sums in (0, 1)");
    app.add_option("--tol", f.tol, "Linear and Newton tolerance");
    app.add_option("--newton-max-iter", f.newton_max_iter, "Newton iteration cap");
    app.add_option("--matrix-order", f.matrix_order, "Quadrature order for matrices");
    app.add_option("--load-order", f.load_order, "Quadrature order for loads and errors");
    app.add_option("--seed", f.seed, "Recorded in the config; runs are deterministic");
    app.add_option("--out", f.out, "Output prefix for <out>.csv and <out>.gp.dat");
    app.add_option("--config", f.config, "Flat JSON file with the same keys");
    app.add_flag("--dump-meshes", f.dump_meshes, "Write <out>.mesh<k>.txt for every level");
    app.add_flag("--record-timing", f.record_timing, "Fill the wall_ms column");
    app.add_flag("--gnuplot", f.gnuplot, "Also write <out>.gp");
    app.add_flag("--serial", f.serial, "Use the serial kernels");
    app.add_flag("-v,--verbose", f.verbose, "Print one line per level");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw UsageError(app.help(), true);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    CliConfig cfg;
    if (f.config) {
        std::ifstream in(*f.config);
        if (!in) throw UsageError("cannot read config file '" + *f.config + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        apply_json(cfg, ss.str());
    }
    auto& r = cfg.run;
    if (f.problem) r.problem = *f.problem;
    if (f.algorithm) {
        try {
            r.algorithm = parse_algorithm(*f.algorithm);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    if (f.theta) r.theta = *f.theta;
    if (f.initial_n) r.initial_n = *f.initial_n;
    if (f.max_levels) r.max_levels = *f.max_levels;
    if (f.max_dofs) r.max_dofs = *f.max_dofs;
    if (f.zeta_tilde) r.zeta_tilde = *f.zeta_tilde;
    if (f.tol) r.tol = *f.tol;
    if (f.newton_max_iter) r.newton_max_iter = *f.newton_max_iter;
    if (f.matrix_order) r.matrix_order = *f.matrix_order;
    if (f.load_order) r.load_order = *f.load_order;
    if (f.seed) r.seed = *f.seed;
    if (f.out) cfg.out = *f.out;
    if (f.record_timing) r.record_timing = true;
    if (f.serial) r.exec = Exec::Serial;
    if (f.dump_meshes) cfg.dump_meshes = true;
    if (f.gnuplot) cfg.gnuplot = true;
    if (f.verbose) cfg.verbose = true;

    if (!f.problem && !f.config) throw UsageError("--problem is required");
    if (!f.algorithm && !f.config) throw UsageError("--algorithm is required");
    try {
        make_problem(r.problem);
        r.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

void write_csv(const ConvergenceHistory& h, std::ostream& os) {
    os << kCsvHeader << '\n';
    for (const auto& l : h.levels) {
        fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", l.k, l.n_dofs, fmt_g9(l.h1_semi_err),
                   fmt_g9(l.l2_err), fmt_g9(l.energy_err), fmt_g9(l.eta), fmt_g9(l.osc), fmt_g9(l.hot1),
                   fmt_g9(l.hot2), fmt_g9(l.hot3), fmt_g9(l.e1), fmt_g9(l.e2), l.solver_iters, fmt_g9(l.wall_ms));
    }
}

void write_plot_data(const ConvergenceHistory& h, std::ostream& os) {
    os << "# k n_dofs h1_semi_err eta\n";
    for (const auto& l : h.levels) {
        fmt::print(os, "{} {} {} {}\n", l.k, l.n_dofs, fmt_g9(l.h1_semi_err), fmt_g9(l.eta));
    }
}

void write_gnuplot_script(const std::string& data_file, std::ostream& os) {
    os << "set logscale xy\n"
          "set xlabel 'DOFs'\n"
          "set ylabel 'error'\n"
          "set key top right\n";
    fmt::print(os,
               "plot '{0}' using 2:3 with linespoints title 'H1 semi-norm error', \\\n"
               "     '{0}' using 2:4 with linespoints title 'estimator', \\\n"
               "     '{0}' using 2:(10*$2**-0.5) with lines dashtype 2 title 'slope -1/2'\n",
               data_file);
}

int run_experiment(const CliConfig& cfg, std::ostream& log, std::ostream& err) {
    const std::string csv_path = cfg.out + ".csv";
    const std::string dat_path = cfg.out + ".gp.dat";
    std::ofstream csv(csv_path), dat(dat_path);
    if (!csv || !dat) {
        err << "atg: cannot write output files with prefix '" << cfg.out << "'\n";
        return kExitIo;
    }

    RunHooks hooks;
    bool dump_failed = false;
    if (cfg.dump_meshes) {
        hooks.on_level = [&](const LevelState& s) {
            std::ofstream m(fmt::format("{}.mesh{}.txt", cfg.out, s.k));
            m << write_mesh(s.u.space().mesh());
            if (!m) dump_failed = true;
        };
    }

    ConvergenceHistory h;
    try {
        h = run(make_problem(cfg.run.problem), cfg.run, hooks);
    } catch (const std::invalid_argument& e) {
        err << "atg: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        h.config = cfg.run;
        h.completed = false;
        h.failure = e.what();
    }

    write_csv(h, csv);
    write_plot_data(h, dat);
    if (cfg.gnuplot) {
        std::ofstream gp(cfg.out + ".gp");
        write_gnuplot_script(std::filesystem::path(dat_path).filename().string(), gp);
        if (!gp) dump_failed = true;
    }
    csv.flush();
    dat.flush();
    if (!csv || !dat || dump_failed) {
        err << "atg: error while writing output files with prefix '" << cfg.out << "'\n";
        return kExitIo;
    }

    if (cfg.verbose) {
        for (const auto& l : h.levels) {
            fmt::print(log, "k={:3d} dofs={:8d} h1={:.4e} eta={:.4e} iters={}\n", l.k, l.n_dofs, l.h1_semi_err,
                       l.eta, l.solver_iters);
        }
    }
    if (!h.completed) {
        err << "atg: run stopped after " << h.levels.size() << " level(s): " << h.failure << '\n';
        return kExitSolverFailure;
    }
    fmt::print(log, "wrote {} ({} levels)\n", csv_path, h.levels.size());
    return kExitOk;
}

}  // namespace atg::cli
