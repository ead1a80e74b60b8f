#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "quasitori/runner.hpp"

using namespace tori;

int main(int argc, char** argv) {
    CLI::App app{"quasitori: construction and verification of invariant tori for commuting "
                 "Hamiltonian systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string record_path;
    long long seed = -1;
    int threads = 0;

    auto add_common = [&](CLI::App* sub, bool needs_record) {
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides [run] out)");
        sub->add_option("--seed", seed, "sampling seed (overrides [run] seed)");
        sub->add_option("--threads", threads, "worker threads (overrides [run] threads)");
        if (needs_record)
            sub->add_option("--record", record_path, "torus record file from 'solve'")->required();
    };

    CLI::App* check = app.add_subcommand("check-resonance",
                                         "construct masses and certify nonresonant eps candidates");
    add_common(check, false);
    CLI::App* solve = app.add_subcommand("solve", "solve invariant tori for accepted eps");
    add_common(solve, false);
    CLI::App* verify = app.add_subcommand("verify", "integrate flows and test torus invariance");
    add_common(verify, true);
    CLI::App* sweep = app.add_subcommand("sweep", "solve a mu sweep at fixed eps/mu");
    add_common(sweep, false);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = RunConfig::from_file(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (threads > 0) cfg.threads = threads;

        if (check->parsed()) return cmd_check_resonance(cfg);
        if (solve->parsed()) return cmd_solve(cfg);
        if (verify->parsed()) return cmd_verify(cfg, record_path);
        if (sweep->parsed()) return cmd_sweep(cfg);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 2;
}
