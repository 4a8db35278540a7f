#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "swarmcov/experiment.hpp"

namespace swarmcov {

// Command-line overrides applied on top of the config file.
struct CommandOptions {
    std::optional<std::filesystem::path> config;  // built-in defaults when unset
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out_dir;
    std::optional<unsigned> workers;
    std::optional<Normalization> normalization;
    std::optional<double> omega;  // rad/s, run only
    std::optional<double> alpha;  // field only
};

// Loads the config (or defaults), applies the overrides and revalidates.
// For sweeps, --seed s rewrites the seed list to s, s+1, ... of the same length.
ExperimentConfig resolve_config(const CommandOptions& options);

// Each command writes its files into the output directory and reports to
// `log`. Failures throw CliError; a partial sweep throws only after every
// file has been written.
void cmd_run(const CommandOptions& options, std::ostream& log);
void cmd_sweep(const CommandOptions& options, std::ostream& log);
void cmd_field(const CommandOptions& options, std::ostream& log);
void cmd_scenario_paper(const CommandOptions& options, std::ostream& log);

// Throws sweep_failed when no point survived, sweep_partial when some jobs
// failed, and returns otherwise.
void raise_sweep_status(const SweepResult& result);

// Field sample for the geofencing term on a cell-centered grid.
void write_field_csv(std::ostream& out, const SimConfig& sim, const FieldSettings& field);

// Field deployment case: R0 = 25 m, v0 = 0.5 m/s, N = 22, of which 4 run at 1.8 v0.
SimConfig field_scenario_base();

struct ScenarioReport {
    double predicted_cutoff = 0.0;        // v0 / R0, rad/s
    double predicted_ratio = 0.0;         // <v> / v0 of the mixed swarm
    FitResult homogeneous;                // P_T fits, abscissa in omega_bar
    FitResult heterogeneous;
    double homogeneous_cutoff = 0.0;      // rad/s, NaN if unidentifiable
    double heterogeneous_cutoff = 0.0;    // rad/s
    double cutoff_ratio = 0.0;            // NaN if either is unidentifiable
    SweepResult homogeneous_sweep;
    SweepResult heterogeneous_sweep;
};

// Runs both sweeps with the given settings. Cutoffs are converted to rad/s
// through each curve's normalization speed. Throws CliError(fit_refused)
// when either curve ends up with fewer than 5 points.
ScenarioReport run_field_scenario(const SweepSettings& settings);

}  // namespace swarmcov
