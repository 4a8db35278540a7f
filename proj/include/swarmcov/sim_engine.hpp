#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "swarmcov/area_model.hpp"
#include "swarmcov/control_law.hpp"
#include "swarmcov/vec2.hpp"

namespace swarmcov {

struct SwarmComposition {
    std::size_t n = 20;
    double rho_f = 0.0;   // fraction of fast agents
    double v0 = 1.0;      // base speed (m/s)
    double v_fast = 1.0;  // fast speed (m/s)

    void validate() const;
    // round(rho_F N); ids [0, fast_count) are the fast agents.
    std::size_t fast_count() const;
    double max_speed() const;
};

// <v> over the realized (rounded) head counts.
double mean_speed(const SwarmComposition& composition);

enum class NeighborRule { all_to_all, metric_radius };

struct SimConfig {
    SwarmComposition composition;
    double r0 = 1.0;  // m
    ShapeSchedule schedule;
    // Zero selects 0.05 a_R / v_max. For omega > 0 the step is shrunk so a
    // period holds a whole number of steps.
    double dt = 0.0;
    int warmup_cycles = 1;
    int measure_cycles = 1;
    int record_interval = 10;  // steps between recorded snapshots
    std::uint64_t seed = 1;
    NeighborRule neighbor_rule = NeighborRule::all_to_all;
    double neighbor_radius = 0.0;       // m, metric rule only
    double position_noise_sigma = 0.0;  // m
    double state_staleness = 0.0;       // s
    // Lower bounds (s) on the warmup and measurement phases when omega > 0;
    // each phase is extended to a whole number of periods. Zero disables.
    double min_warmup_time = 0.0;
    double min_measure_time = 0.0;
    // Run length when omega = 0, in units of R0 / v0. Warmup takes the share
    // warmup_cycles / (warmup_cycles + measure_cycles) of it.
    double zero_omega_horizon = 400.0;
    // Overrides default_params(pi R0^2, N) when set.
    std::optional<ControlParams> params;

    void validate() const;
    double surface() const;
    ControlParams control_params() const;
};

// Seed-derived random stream with a portable uniform/normal mapping.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform();  // [0, 1)
    double normal();   // standard normal
private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

std::vector<AgentState> init_swarm(const SimConfig& config, Rng& rng);

// Stateful stepper: keeps the position history needed for staleness and the
// noise stream. One call advances every agent synchronously by dt.
class Stepper {
public:
    Stepper(const SimConfig& config, double dt);

    double dt() const { return dt_; }
    const ControlParams& params() const { return params_; }

    // Advances agents from time t to t + dt using alpha = alpha_at(schedule, t).
    void step(std::vector<AgentState>& agents, double t);

private:
    SimConfig config_;
    ControlParams params_;
    double dt_;
    std::size_t lag_steps_;
    std::vector<std::vector<Vec2>> history_;  // ring buffer of true positions
    std::size_t history_head_ = 0;
    std::size_t history_size_ = 0;
    Rng noise_rng_;
    std::vector<Vec2> perceived_;
    std::vector<Neighbor> neighbors_;
    std::vector<Vec2> velocities_;
};

struct Snapshot {
    double t = 0.0;
    double alpha = 0.0;
    std::vector<Vec2> positions;
};

struct Trajectory {
    std::vector<double> speeds;  // per-agent v0, indexed by id
    std::vector<Snapshot> snapshots;
};

// Resolved time grid of a run.
struct RunPlan {
    double dt = 0.0;
    double period = 0.0;  // 2 pi / omega, or the fixed horizon when omega = 0
    long long warmup_steps = 0;
    long long total_steps = 0;
    long long steps_per_cycle = 0;
    int warmup_cycles = 0;
    int measure_cycles = 0;
};

RunPlan plan_run(const SimConfig& config);

struct RunResult {
    RunPlan plan;
    Trajectory trajectory;
    std::vector<AgentState> final_agents;
};

class NumericalBlowup : public std::runtime_error {
public:
    NumericalBlowup(long long step, std::size_t agent);
    long long step() const { return step_; }
private:
    long long step_;
};

// Full warmup + measurement run. Bit-deterministic for a given config.
// Throws NumericalBlowup if any position becomes non-finite.
RunResult run(const SimConfig& config);

// CSV with header t,agent_id,x,y,alpha,v0.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace swarmcov
