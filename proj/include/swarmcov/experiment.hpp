#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarmcov/metrics.hpp"
#include "swarmcov/response.hpp"
#include "swarmcov/sim_engine.hpp"

namespace swarmcov {

// Stable codes printed in front of every CLI error line.
enum class ErrorCode {
    config_io,      // E10: config file missing or unreadable
    config_parse,   // E11: malformed YAML
    config_value,   // E12: a field fails validation
    fit_refused,    // E13: too few frequencies to fit
    output_io,      // E14: output directory or file not writable
    numerical,      // E20: non-finite state in a run
    sweep_failed,   // E21: every sweep job failed
    sweep_partial,  // E30: some sweep jobs failed
};

const char* error_tag(ErrorCode code);  // "E10" ...
int exit_code(ErrorCode code);          // 1 config, 2 numerical, 3 partial sweep

class CliError : public std::runtime_error {
public:
    CliError(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// One line: "error E12 cfg.yaml:7: swarm.n_agents: must be >= 1".
std::string format_error(const CliError& error);

struct FieldSettings {
    double alpha = 0.0;
    int grid_points = 64;    // per axis, cell centered, so the origin is never sampled
    double extent_r0 = 2.0;  // half width of the grid in units of R0
};

struct ExperimentConfig {
    SimConfig sim;
    // Sensor radius; unset means default_sensor_radius(S, N).
    std::optional<double> sensor_radius;
    int grid_resolution = 256;
    SweepSettings sweep;
    FieldSettings field;
    std::string out_dir = "out";

    ExperimentConfig();
    MetricsConfig metrics() const;
};

// Parses YAML text. `source` names the file in diagnostics. Throws CliError
// (config_parse or config_value) with a file:line prefix.
ExperimentConfig parse_config(const std::string& text, const std::string& source);
ExperimentConfig load_config(const std::filesystem::path& path);

// Runs every module-level validation. Throws CliError(config_value).
void validate_config(const ExperimentConfig& config, const std::string& source);

// Resolved config as YAML that parse_config reads back to the same experiment.
// Doubles use the shortest round-trip form.
std::string dump_config(const ExperimentConfig& config);

// "base-speed" / "mean-speed".
std::optional<Normalization> parse_normalization(std::string_view name);

std::string artifact_version();

}  // namespace swarmcov
