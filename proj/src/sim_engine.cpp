#include "swarmcov/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "swarmcov/csv.hpp"

namespace swarmcov {

namespace {

constexpr long long kMaxSteps = 2'000'000'000LL;

}  // namespace

void SwarmComposition::validate() const {
    if (n == 0) {
        throw std::invalid_argument("swarm needs at least one agent");
    }
    if (!(rho_f >= 0.0 && rho_f <= 1.0)) {
        throw std::invalid_argument("rho_F must lie in [0, 1]");
    }
    if (!(v0 > 0.0) || !std::isfinite(v0)) {
        throw std::invalid_argument("v0 must be positive");
    }
    if (!(v_fast >= v0) || !std::isfinite(v_fast)) {
        throw std::invalid_argument("v_F must be >= v0");
    }
}

std::size_t SwarmComposition::fast_count() const {
    return static_cast<std::size_t>(std::llround(rho_f * static_cast<double>(n)));
}

double SwarmComposition::max_speed() const { return fast_count() > 0 ? v_fast : v0; }

double mean_speed(const SwarmComposition& c) {
    const auto fast = static_cast<double>(c.fast_count());
    const auto total = static_cast<double>(c.n);
    return ((total - fast) * c.v0 + fast * c.v_fast) / total;
}

void SimConfig::validate() const {
    composition.validate();
    if (!(r0 > 0.0) || !std::isfinite(r0)) {
        throw std::invalid_argument("R0 must be positive");
    }
    schedule.validate();
    if (!(dt >= 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument("dt must be > 0 (or 0 for the default)");
    }
    if (warmup_cycles < 1 || measure_cycles < 1) {
        throw std::invalid_argument("warmup_cycles and measure_cycles must be >= 1");
    }
    if (record_interval < 1) {
        throw std::invalid_argument("record_interval must be >= 1");
    }
    if (neighbor_rule == NeighborRule::metric_radius && !(neighbor_radius > 0.0)) {
        throw std::invalid_argument("metric neighbor rule needs a positive radius");
    }
    if (!(position_noise_sigma >= 0.0) || !(state_staleness >= 0.0) ||
        !(min_warmup_time >= 0.0) || !(min_measure_time >= 0.0) ||
        !(zero_omega_horizon > 0.0)) {
        throw std::invalid_argument("noise, staleness and phase times must be >= 0 (horizon > 0)");
    }
    if (params) {
        params->validate();
    }
}

double SimConfig::surface() const { return std::numbers::pi * r0 * r0; }

ControlParams SimConfig::control_params() const {
    return params ? *params : default_params(surface(), composition.n);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
    return mag * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<AgentState> init_swarm(const SimConfig& config, Rng& rng) {
    const auto& comp = config.composition;
    const std::size_t fast = comp.fast_count();
    std::vector<AgentState> agents(comp.n);
    for (std::size_t i = 0; i < comp.n; ++i) {
        const double radius = config.r0 * std::sqrt(rng.uniform());
        const double angle = 2.0 * std::numbers::pi * rng.uniform();
        agents[i].id = i;
        agents[i].position = radius * unit_from_angle(angle);
        agents[i].v0 = i < fast ? comp.v_fast : comp.v0;
    }
    return agents;
}

Stepper::Stepper(const SimConfig& config, double dt)
    : config_(config),
      params_(config.control_params()),
      dt_(dt),
      lag_steps_(static_cast<std::size_t>(std::llround(config.state_staleness / dt))),
      history_(lag_steps_ + 1),
      noise_rng_(config.seed ^ 0x9e3779b97f4a7c15ULL) {}

void Stepper::step(std::vector<AgentState>& agents, double t) {
    const std::size_t n = agents.size();

    // Ring buffer of the last lag_steps_ + 1 true position sets.
    auto& slot = history_[history_head_];
    slot.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        slot[i] = agents[i].position;
    }
    history_size_ = std::min(history_size_ + 1, history_.size());
    const std::size_t lag = std::min(lag_steps_, history_size_ - 1);
    const auto& seen = history_[(history_head_ + history_.size() - lag) % history_.size()];
    history_head_ = (history_head_ + 1) % history_.size();

    perceived_.assign(seen.begin(), seen.end());
    if (config_.position_noise_sigma > 0.0) {
        for (auto& p : perceived_) {
            p.x += config_.position_noise_sigma * noise_rng_.normal();
            p.y += config_.position_noise_sigma * noise_rng_.normal();
        }
    }

    const TargetAreaSpec area(config_.r0, alpha_at(config_.schedule, t), config_.schedule.e_hat);
    const bool metric = config_.neighbor_rule == NeighborRule::metric_radius;
    const double radius2 = config_.neighbor_radius * config_.neighbor_radius;

    velocities_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 own = agents[i].position;
        neighbors_.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            if (metric && norm2(perceived_[j] - own) > radius2) {
                continue;
            }
            neighbors_.push_back(make_neighbor(i, own, j, perceived_[j], n, params_.a_r));
        }
        const Vec2 target = coverage_target(signed_field(area, own), field_gradient(area, own),
                                            params_, neighbors_);
        velocities_[i] = velocity_command(agents[i], target);
    }
    for (std::size_t i = 0; i < n; ++i) {
        agents[i].position += dt_ * velocities_[i];
    }
}

RunPlan plan_run(const SimConfig& config) {
    const ControlParams params = config.control_params();
    const double dt_nominal =
        config.dt > 0.0 ? config.dt : 0.05 * params.a_r / config.composition.max_speed();

    RunPlan plan;
    const double omega = config.schedule.omega;
    if (omega == 0.0) {
        const double horizon = config.zero_omega_horizon * config.r0 / config.composition.v0;
        plan.total_steps = std::max(1LL, static_cast<long long>(std::ceil(horizon / dt_nominal - 1e-9)));
        plan.dt = horizon / static_cast<double>(plan.total_steps);
        plan.period = horizon;
        const double share = static_cast<double>(config.warmup_cycles) /
                             (config.warmup_cycles + config.measure_cycles);
        plan.warmup_steps = std::llround(share * static_cast<double>(plan.total_steps));
        plan.steps_per_cycle = plan.total_steps;
        plan.warmup_cycles = config.warmup_cycles;
        plan.measure_cycles = config.measure_cycles;
    } else {
        const double period = 2.0 * std::numbers::pi / omega;
        const double per_cycle_d = std::max(1.0, std::ceil(period / dt_nominal - 1e-9));
        plan.period = period;
        const double warm_d = std::max<double>(config.warmup_cycles,
                                               std::ceil(config.min_warmup_time / period - 1e-9));
        const double meas_d = std::max<double>(config.measure_cycles,
                                               std::ceil(config.min_measure_time / period - 1e-9));
        if (!(per_cycle_d * (warm_d + meas_d) < static_cast<double>(kMaxSteps))) {
            throw std::invalid_argument("run would need more than 2e9 steps");
        }
        plan.warmup_cycles = static_cast<int>(warm_d);
        plan.measure_cycles = static_cast<int>(meas_d);
        const auto per_cycle = static_cast<long long>(per_cycle_d);
        plan.dt = period / per_cycle_d;
        plan.steps_per_cycle = per_cycle;
        plan.warmup_steps = per_cycle * plan.warmup_cycles;
        plan.total_steps = per_cycle * (plan.warmup_cycles + plan.measure_cycles);
    }
    if (plan.total_steps > kMaxSteps) {
        throw std::invalid_argument("run would need more than 2e9 steps");
    }
    return plan;
}

NumericalBlowup::NumericalBlowup(long long step, std::size_t agent)
    : std::runtime_error("non-finite position of agent " + std::to_string(agent) +
                         " at step " + std::to_string(step)),
      step_(step) {}

RunResult run(const SimConfig& config) {
    config.validate();
    RunResult result;
    result.plan = plan_run(config);
    const RunPlan& plan = result.plan;

    Rng rng(config.seed);
    auto agents = init_swarm(config, rng);
    result.trajectory.speeds.reserve(agents.size());
    for (const auto& a : agents) {
        result.trajectory.speeds.push_back(a.v0);
    }

    Stepper stepper(config, plan.dt);
    for (long long k = 0; k < plan.total_steps; ++k) {
        const double t = static_cast<double>(k) * plan.dt;
        if (k >= plan.warmup_steps && (k - plan.warmup_steps) % config.record_interval == 0) {
            Snapshot snap{t, alpha_at(config.schedule, t), {}};
            snap.positions.reserve(agents.size());
            for (const auto& a : agents) {
                snap.positions.push_back(a.position);
            }
            result.trajectory.snapshots.push_back(std::move(snap));
        }
        stepper.step(agents, t);
        for (const auto& a : agents) {
            if (!is_finite(a.position)) {
                throw NumericalBlowup(k, a.id);
            }
        }
    }
    result.final_agents = std::move(agents);
    return result;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    out << "t,agent_id,x,y,alpha,v0\n";
    for (const auto& snap : trajectory.snapshots) {
        const std::string t = fmt_num(snap.t);
        const std::string alpha = fmt_num(snap.alpha);
        for (std::size_t i = 0; i < snap.positions.size(); ++i) {
            out << t << ',' << i << ',' << fmt_num(snap.positions[i].x) << ','
                << fmt_num(snap.positions[i].y) << ',' << alpha << ','
                << fmt_num(trajectory.speeds[i]) << '\n';
        }
    }
}

}  // namespace swarmcov
