#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fedsb/errors.hpp"
#include "fedsb/experiment.hpp"
#include "fedsb/selftest.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    bool quick = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool seed_and_out) {
    cmd->add_option("--config", args.config_path, "Path to a key=value config file");
    if (seed_and_out) {
        cmd->add_option("--seed", args.seed, "Master seed; overrides the config")
            ->each([&args](const std::string&) { args.seed_set = true; });
        cmd->add_option("--out", args.out_dir, "Output directory; overrides the config");
    }
    cmd->add_flag("--quick", args.quick, "Scale rounds and sizes down 10x");
}

fedsb::RunConfig resolve(const CommonArgs& args) {
    fedsb::RunConfig cfg = args.config_path.empty()
                               ? fedsb::parse_config("")
                               : fedsb::load_config(args.config_path);
    if (args.seed_set) cfg.fed.master_seed = args.seed;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.quick) cfg.quick = true;
    return cfg;
}

void report(const fedsb::GridOutcome& outcome) {
    std::cout << "wrote " << outcome.csv_path.string() << "\n"
              << "wrote " << outcome.json_path.string() << "\n"
              << "wrote " << outcome.table_path.string() << "\n";
    std::ifstream table(outcome.table_path);
    std::cout << table.rdbuf();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated training simulator with label smoothing and budgeted local passes"};
    app.require_subcommand(1);

    CommonArgs run_args, ablation_args, sensitivity_args;
    CLI::App* run_cmd = app.add_subcommand("run", "One experiment with the config's toggles");
    add_common(run_cmd, run_args, true);
    CLI::App* ablation_cmd =
        app.add_subcommand("ablation", "The 2x2 smoothing/budget toggle grid");
    add_common(ablation_cmd, ablation_args, true);
    CLI::App* sensitivity_cmd =
        app.add_subcommand("sensitivity", "Epsilon and budget sweeps");
    add_common(sensitivity_cmd, sensitivity_args, true);
    CLI::App* selftest_cmd = app.add_subcommand("selftest", "Built-in invariant checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (selftest_cmd->parsed()) return fedsb::run_selftest(std::cout);
        if (run_cmd->parsed()) {
            report(fedsb::run_once(resolve(run_args)));
        } else if (ablation_cmd->parsed()) {
            report(fedsb::run_ablation(resolve(ablation_args)));
        } else if (sensitivity_cmd->parsed()) {
            report(fedsb::run_sensitivity(resolve(sensitivity_args)));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
