#pragma once

// Configuration-driven twin experiments: simulate, pollute, reconstruct, split.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracmove/convect.hpp"
#include "fracmove/io.hpp"
#include "fracmove/reconstruct.hpp"
#include "fracmove/scenario.hpp"

namespace fracmove {

struct ProfileSpec {
    std::string kind = "gaussian";
    Point center{0.5, 0.5};
    double width = 0.05;
    double amplitude = 1.0;
    std::string path;  // sampled kind: field CSV on the configured grid
};

struct ExperimentConfig {
    double alpha = 0.5;
    double t_final = 1.0;
    std::size_t n_steps = 200;
    int dim = 2;
    std::array<Axis, 2> axes{Axis{0.0, 1.0, 65}, Axis{0.0, 1.0, 65}};
    double frame_width = 0.2;
    MotionSpec motion;
    ProfileSpec f;
    std::optional<ProfileSpec> g;
    double delta = 0.0;
    std::uint64_t seed = 20240101;
    double mollify_t = 0.0;  // resolved: 2 tau when delta > 0 unless given
    double mollify_x = 0.0;  // resolved: h when delta > 0 unless given
    ReconMode mode = ReconMode::Single;
    ReconConfig recon;
    std::string split_a_field, split_b_field;
    std::string output_directory = "fracmove_out";
    bool dump_fields = false;
    bool dump_chords = false;
    std::size_t dump_stride = 0;  // resolved: max(1, n_steps / 10)

    TimeGrid time_grid() const { return TimeGrid(t_final, n_steps); }
    SpaceGrid space_grid() const { return dim == 1 ? SpaceGrid(axes[0]) : SpaceGrid(axes[0], axes[1]); }
    FracOrder order() const { return FracOrder(alpha); }
};

/// Parses and validates a config tree; throws ConfigError with the offending key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
/// The fully resolved config, defaults included.
nlohmann::json to_json(const ExperimentConfig& c);

struct Simulation {
    Field f_truth;
    std::optional<Field> g_truth;
    SpaceTimeField u_clean;
    SpaceTimeField u_noisy;
    SupportReport support;
    double noise_rel_error = 0.0;
};

/// Forward simulation of u with the moving source and noise injection.
Simulation simulate(const ExperimentConfig& c);

/// Observation data for the reconstruction: mollified v^delta and the frozen trace.
ReconData prepare_data(const ExperimentConfig& c, const SpaceTimeField& u_delta, ReconMode mode);

/// a = f + g, b = q . grad f + p . grad g (analytic gradients for analytic kinds).
std::pair<Field, Field> pair_truth(const ExperimentConfig& c, const Field& f, const Field& g);

Profile make_profile(const ProfileSpec& s, const SpaceGrid& grid);

enum class Command { Simulate, ReconstructSingle, ReconstructPair, Split, Pipeline };
std::optional<Command> parse_command(std::string_view name);
std::string_view command_name(Command c);

/// Exit codes of the command-line contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one subcommand; writes artifacts into out (or the configured directory).
/// Returns the exit code and reports progress on log unless quiet.
int run_command(Command cmd, const std::filesystem::path& config_path,
                const std::optional<std::filesystem::path>& out, bool quiet, std::ostream& log);

}  // namespace fracmove
