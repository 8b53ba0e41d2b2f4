#pragma once

#include "atg/algorithms.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace atg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitSolverFailure = 2;
inline constexpr int kExitUsage = 64;

/// Bad flags, bad config file contents or failed validation. `help` is set
/// when the user asked for the usage text, which is then the message.
class UsageError : public std::runtime_error {
public:
    UsageError(const std::string& what, bool help = false) : std::runtime_error(what), help_(help) {}

    bool help() const noexcept { return help_; }

private:
    bool help_;
};

struct CliConfig {
    RunConfig run;
    std::string out = "atg_run";
    bool dump_meshes = false;
    bool gnuplot = false;
    bool verbose = false;
};

inline const std::string kCsvHeader =
    "k,n_dofs,h1_semi_err,l2_err,energy_err,eta,osc,hot1,hot2,hot3,e1,e2,solver_iters,wall_ms";

/// Options of `atg run` (without the program and subcommand names). Values
/// from --config FILE.json are applied first, then flags override them.
CliConfig parse_config(const std::vector<std::string>& args);

/// Applies a flat JSON object with kebab-case keys. Unknown keys and wrong
/// value types raise UsageError.
void apply_json(CliConfig& cfg, const std::string& json_text);

void write_csv(const ConvergenceHistory& h, std::ostream& os);
void write_plot_data(const ConvergenceHistory& h, std::ostream& os);
void write_gnuplot_script(const std::string& data_file, std::ostream& os);

/// Runs the configured experiment and writes `<out>.csv` and `<out>.gp.dat`
/// (plus the optional script and mesh dumps). Returns the process exit code.
int run_experiment(const CliConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace atg::cli
