// amisec command line: scenario runs, experiment batteries, strength
// arithmetic, and the derived-value oracle checks.

#include <optional>
#include <string>

#include "CLI11.hpp"

#include "amisec/cli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"amisec - metering-network security simulator and experiments"};
    app.require_subcommand(1);

    std::string out_dir = "out";
    std::optional<uint64_t> seed;
    std::string config_path;
    app.add_option("--out-dir", out_dir, "output directory root")->capture_default_str();
    app.add_option("--seed", seed, "seed override");
    app.add_option("--config", config_path, "scenario JSON file");

    auto* run = app.add_subcommand("run", "execute a scenario config");
    run->add_option("--config", config_path, "scenario JSON file");

    std::string experiment_name;
    int trials = 0;
    auto* exp = app.add_subcommand("experiment", "run a named experiment battery");
    exp->add_option("name", experiment_name,
                    "one of fig5|fig6|fig7|fig8|fig9_11|e2e|strength")
        ->required();
    exp->add_option("--trials", trials, "trials/seeds per battery (0 = default)");

    uint32_t packet_bits = 256, block_count = 32, key_bits = 256;
    auto* strength = app.add_subcommand("strength", "print the strength report");
    strength->add_option("packet_bits", packet_bits, "packet size in bits");
    strength->add_option("block_count", block_count, "number of blocks");
    strength->add_option("key_bits", key_bits, "asymmetric key size in bits");

    app.add_subcommand("verify-oracles", "re-run all derived-value oracles");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (config_path.empty()) {
            std::fprintf(stderr, "config error: run needs --config\n");
            return amisec::kExitConfigError;
        }
        return amisec::cmd_run(config_path, out_dir, seed);
    }
    if (exp->parsed())
        return amisec::cmd_experiment(experiment_name, seed.value_or(1), trials, out_dir);
    if (strength->parsed()) return amisec::cmd_strength(packet_bits, block_count, key_bits);
    return amisec::cmd_verify_oracles();
}
