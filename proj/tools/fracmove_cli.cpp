#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fracmove/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Moving-source identification for time-fractional diffusion"};
    app.require_subcommand(1, 1);

    std::string config;
    std::string out;
    bool quiet = false;

    const char* names[] = {"simulate", "reconstruct-single", "reconstruct-pair", "split", "pipeline"};
    const char* help[] = {"simulate truth, clean and noisy observations",
                          "reconstruct one profile from observations",
                          "reconstruct the (a, b) pair from observations",
                          "split (a, b) into the two profiles along chords",
                          "simulate, reconstruct and split in one run"};
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], help[i]);
        sub->add_option("--config", config, "experiment configuration (JSON)")->required();
        sub->add_option("--out", out, "output directory (overrides output.directory)");
        sub->add_flag("--quiet", quiet, "suppress progress messages");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : fracmove::kExitConfig;
    }

    const auto cmd = fracmove::parse_command(app.get_subcommands().front()->get_name());
    std::optional<std::filesystem::path> out_dir;
    if (!out.empty()) out_dir = out;
    return fracmove::run_command(*cmd, config, out_dir, quiet, std::cerr);
}
