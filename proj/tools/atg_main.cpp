#include "atg/cli.hpp"

#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr const char* kUsage =
    "usage: atg run --problem <id> --algorithm <id> [--theta F] [--initial-n N] [--max-levels N]\n"
    "               [--max-dofs N] [--zeta-tilde F] [--out PATH] [--config FILE.json] [--dump-meshes]\n"
    "       atg list\n"
    "       atg run --help\n";

}  // namespace

int main(int argc, char** argv) {
    using namespace atg::cli;
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) {
        std::cerr << kUsage;
        return kExitUsage;
    }
    const std::string cmd = args.front();
    if (cmd == "-h" || cmd == "--help") {
        std::cout << kUsage;
        return kExitOk;
    }
    if (cmd == "list") {
        std::cout << "problems:";
        for (const auto& p : atg::problem_ids()) std::cout << ' ' << p;
        std::cout << "\nalgorithms:";
        for (const auto& a : atg::algorithm_ids()) std::cout << ' ' << a;
        std::cout << '\n';
        return kExitOk;
    }
    if (cmd != "run") {
        std::cerr << "atg: unknown command '" << cmd << "'\n" << kUsage;
        return kExitUsage;
    }
    args.erase(args.begin());
    CliConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const UsageError& e) {
        if (e.help()) {
            std::cout << e.what();
            return kExitOk;
        }
        std::cerr << "atg: " << e.what() << '\n' << kUsage;
        return kExitUsage;
    }
    return run_experiment(cfg, std::cout, std::cerr);
}
