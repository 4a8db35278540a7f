#include "swarmcov/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#ifndef SWARMCOV_VERSION
#define SWARMCOV_VERSION "0.0.0"
#endif

namespace swarmcov {

const char* error_tag(ErrorCode code) {
    switch (code) {
        case ErrorCode::config_io: return "E10";
        case ErrorCode::config_parse: return "E11";
        case ErrorCode::config_value: return "E12";
        case ErrorCode::fit_refused: return "E13";
        case ErrorCode::output_io: return "E14";
        case ErrorCode::numerical: return "E20";
        case ErrorCode::sweep_failed: return "E21";
        case ErrorCode::sweep_partial: return "E30";
    }
    return "E99";
}

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::numerical:
        case ErrorCode::sweep_failed: return 2;
        case ErrorCode::sweep_partial: return 3;
        default: return 1;
    }
}

std::string format_error(const CliError& error) {
    std::string msg = error.what();
    for (char& c : msg) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return std::string("error ") + error_tag(error.code()) + " " + msg;
}

std::string artifact_version() { return SWARMCOV_VERSION; }

std::optional<Normalization> parse_normalization(std::string_view name) {
    if (name == "mean-speed") {
        return Normalization::mean_speed;
    }
    if (name == "base-speed") {
        return Normalization::base_speed;
    }
    return std::nullopt;
}

ExperimentConfig::ExperimentConfig() {
    sweep.omega_bars = default_omega_bars();
    sweep.seeds = {1, 2, 3, 4, 5};
}

MetricsConfig ExperimentConfig::metrics() const {
    MetricsConfig mc;
    mc.r_s = sensor_radius ? *sensor_radius : default_sensor_radius(sim.surface(), sim.composition.n);
    mc.grid_resolution = grid_resolution;
    return mc;
}

namespace {

using LineMap = std::map<std::string, int>;  // dotted path -> 1-based line

class Reader {
public:
    Reader(std::string source, LineMap& lines) : source_(std::move(source)), lines_(lines) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& path, const std::string& msg) const {
        throw CliError(ErrorCode::config_value,
                       source_ + ":" + std::to_string(node.Mark().line + 1) + ": " + path + ": " + msg);
    }

    // Returns the sub-map, or an undefined node if absent. Rejects unknown keys.
    YAML::Node section(const YAML::Node& parent, const std::string& key,
                       const std::set<std::string>& allowed) {
        YAML::Node node = parent[key];
        if (!node) {
            return node;
        }
        if (!node.IsMap()) {
            fail(node, key, "expected a mapping");
        }
        lines_[key] = node.Mark().line + 1;
        for (const auto& kv : node) {
            const auto name = kv.first.as<std::string>();
            if (!allowed.count(name)) {
                fail(kv.first, key + "." + name, "unknown key");
            }
        }
        return node;
    }

    template <class T>
    void scalar(const YAML::Node& sec, const std::string& section, const std::string& key, T& out) {
        if (!sec) {
            return;
        }
        const YAML::Node node = sec[key];
        if (!node) {
            return;
        }
        const std::string path = section + "." + key;
        lines_[path] = node.Mark().line + 1;
        if (!node.IsScalar()) {
            fail(node, path, "expected a scalar");
        }
        try {
            out = node.as<T>();
        } catch (const YAML::Exception&) {
            fail(node, path, "cannot parse '" + node.Scalar() + "'");
        }
    }

    template <class T>
    void list(const YAML::Node& sec, const std::string& section, const std::string& key,
              std::vector<T>& out) {
        if (!sec || !sec[key]) {
            return;
        }
        const YAML::Node node = sec[key];
        const std::string path = section + "." + key;
        lines_[path] = node.Mark().line + 1;
        if (!node.IsSequence()) {
            fail(node, path, "expected a list");
        }
        out.clear();
        for (const auto& item : node) {
            try {
                out.push_back(item.as<T>());
            } catch (const YAML::Exception&) {
                fail(item, path, "cannot parse '" + item.Scalar() + "'");
            }
        }
    }

private:
    std::string source_;
    LineMap& lines_;
};

class Checker {
public:
    Checker(const std::string& source, const LineMap& lines) : source_(source), lines_(lines) {}

    void require(bool ok, const std::string& path, const std::string& msg) const {
        if (ok) {
            return;
        }
        std::string where = source_;
        // Fall back to the section line, then to no line at all.
        auto it = lines_.find(path);
        if (it == lines_.end()) {
            it = lines_.find(path.substr(0, path.find('.')));
        }
        if (it != lines_.end()) {
            where += ":" + std::to_string(it->second);
        }
        throw CliError(ErrorCode::config_value, where + ": " + path + ": " + msg);
    }

private:
    const std::string& source_;
    const LineMap& lines_;
};

void check(const ExperimentConfig& cfg, const std::string& source, const LineMap& lines) {
    const Checker c(source, lines);
    const auto& sim = cfg.sim;
    const auto& comp = sim.composition;
    auto finite = [](double v) { return std::isfinite(v); };

    c.require(comp.n >= 1, "swarm.n_agents", "must be >= 1");
    c.require(comp.rho_f >= 0.0 && comp.rho_f <= 1.0, "swarm.rho_fast", "must lie in [0, 1]");
    c.require(comp.v0 > 0.0 && finite(comp.v0), "swarm.v0_mps", "must be > 0");
    c.require(comp.v_fast >= comp.v0 && finite(comp.v_fast), "swarm.v_fast_mps", "must be >= v0_mps");

    c.require(sim.r0 > 0.0 && finite(sim.r0), "area.r0_m", "must be > 0");
    c.require(sim.schedule.omega >= 0.0 && finite(sim.schedule.omega), "area.omega_radps", "must be >= 0");
    c.require(std::abs(norm(sim.schedule.e_hat) - 1.0) <= 1e-9, "area.axis", "must be a unit vector");

    if (sim.params) {
        c.require(sim.params->d >= 2.0 && finite(sim.params->d), "control.d", "must be >= 2");
        c.require(sim.params->a_r > 0.0 && finite(sim.params->a_r), "control.a_r_m", "must be > 0");
        c.require(sim.params->beta > 0.0 && finite(sim.params->beta), "control.beta_per_m2", "must be > 0");
    }

    c.require(sim.dt >= 0.0 && finite(sim.dt), "sim.dt_s", "must be >= 0 (0 selects the default)");
    c.require(sim.warmup_cycles >= 1, "sim.warmup_cycles", "must be >= 1");
    c.require(sim.measure_cycles >= 1, "sim.measure_cycles", "must be >= 1");
    c.require(sim.record_interval >= 1, "sim.record_interval_steps", "must be >= 1");
    c.require(sim.neighbor_rule == NeighborRule::all_to_all || sim.neighbor_radius > 0.0,
              "sim.neighbor_radius_m", "must be > 0 for the metric rule");
    c.require(sim.position_noise_sigma >= 0.0, "sim.position_noise_sigma_m", "must be >= 0");
    c.require(sim.state_staleness >= 0.0, "sim.state_staleness_s", "must be >= 0");
    c.require(sim.min_warmup_time >= 0.0, "sim.min_warmup_time_s", "must be >= 0");
    c.require(sim.min_measure_time >= 0.0, "sim.min_measure_time_s", "must be >= 0");
    c.require(sim.zero_omega_horizon > 0.0 && finite(sim.zero_omega_horizon),
              "sim.zero_omega_horizon_r0_per_v0", "must be > 0");

    const double a_r = sim.control_params().a_r;
    const MetricsConfig mc = cfg.metrics();
    c.require(mc.r_s > 0.0 && finite(mc.r_s), "metrics.sensor_radius_m", "must be > 0");
    c.require(mc.grid_resolution >= 256, "metrics.grid_resolution", "must be >= 256");
    const double h = 4.0 * sim.r0 / mc.grid_resolution;
    c.require(h < mc.r_s / 4.0, "metrics.grid_resolution", "cell size must be below sensor_radius_m / 4");
    c.require(h < a_r / 4.0, "metrics.grid_resolution", "cell size must be below a_R / 4");

    const auto& sw = cfg.sweep;
    c.require(!sw.omega_bars.empty(), "sweep.omega_bars", "must not be empty");
    for (std::size_t i = 0; i < sw.omega_bars.size(); ++i) {
        c.require(sw.omega_bars[i] > 0.0 && finite(sw.omega_bars[i]), "sweep.omega_bars", "must be positive");
        c.require(i == 0 || sw.omega_bars[i] > sw.omega_bars[i - 1], "sweep.omega_bars",
                  "must be strictly increasing");
    }
    c.require(!sw.seeds.empty(), "sweep.seeds", "must not be empty");
    c.require(std::set<std::uint64_t>(sw.seeds.begin(), sw.seeds.end()).size() == sw.seeds.size(),
              "sweep.seeds", "must be distinct");
    c.require(sw.min_warmup >= 0.0, "sweep.min_warmup_r0_per_v", "must be >= 0");
    c.require(sw.min_measure >= 0.0, "sweep.min_measure_r0_per_v", "must be >= 0");
    c.require(sw.max_snapshots >= 1, "sweep.max_snapshots", "must be >= 1");
    c.require(sw.workers >= 1, "sweep.workers", "must be >= 1");

    c.require(cfg.field.alpha >= 0.0 && cfg.field.alpha <= 2.0, "field.alpha", "must lie in [0, 2]");
    c.require(cfg.field.grid_points >= 2, "field.grid_points", "must be >= 2");
    c.require(cfg.field.extent_r0 > 0.0 && finite(cfg.field.extent_r0), "field.extent_r0", "must be > 0");

    c.require(!cfg.out_dir.empty(), "output.dir", "must not be empty");

    // Backstop for anything the per-field checks above do not name.
    try {
        sim.validate();
        mc.validate(sim.r0, a_r);
    } catch (const std::invalid_argument& e) {
        c.require(false, "config", e.what());
    }
}

const char* normalization_name(Normalization n) {
    return n == Normalization::mean_speed ? "mean-speed" : "base-speed";
}

const char* neighbor_rule_name(NeighborRule r) {
    return r == NeighborRule::all_to_all ? "all-to-all" : "metric-radius";
}

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    return out + '"';
}

}  // namespace

void validate_config(const ExperimentConfig& config, const std::string& source) {
    check(config, source, {});
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw CliError(ErrorCode::config_parse,
                       source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }

    ExperimentConfig cfg;
    LineMap lines;
    Reader rd(source, lines);
    if (!root || root.IsNull()) {
        check(cfg, source, lines);
        return cfg;
    }
    if (!root.IsMap()) {
        rd.fail(root, "config", "top level must be a mapping");
    }
    const std::set<std::string> sections{"swarm", "area", "control", "sim", "metrics",
                                         "sweep", "field", "output", "manifest"};
    for (const auto& kv : root) {
        const auto name = kv.first.as<std::string>();
        if (!sections.count(name)) {
            rd.fail(kv.first, name, "unknown section");
        }
    }

    auto& sim = cfg.sim;
    const auto swarm = rd.section(root, "swarm", {"n_agents", "rho_fast", "v0_mps", "v_fast_mps"});
    rd.scalar(swarm, "swarm", "n_agents", sim.composition.n);
    rd.scalar(swarm, "swarm", "rho_fast", sim.composition.rho_f);
    rd.scalar(swarm, "swarm", "v0_mps", sim.composition.v0);
    sim.composition.v_fast = sim.composition.v0;
    rd.scalar(swarm, "swarm", "v_fast_mps", sim.composition.v_fast);

    const auto area = rd.section(root, "area", {"r0_m", "omega_radps", "axis"});
    rd.scalar(area, "area", "r0_m", sim.r0);
    rd.scalar(area, "area", "omega_radps", sim.schedule.omega);
    std::vector<double> axis{sim.schedule.e_hat.x, sim.schedule.e_hat.y};
    rd.list(area, "area", "axis", axis);
    if (axis.size() != 2) {
        rd.fail(area["axis"], "area.axis", "expected two components");
    }
    sim.schedule.e_hat = {axis[0], axis[1]};

    const auto control = rd.section(root, "control", {"d", "a_r_m", "beta_per_m2"});
    if (control) {
        // Partial blocks fill the rest from the defaults for this S and N.
        ControlParams p = default_params(sim.r0 > 0.0 ? sim.surface() : 1.0,
                                         std::max<std::size_t>(sim.composition.n, 1));
        rd.scalar(control, "control", "d", p.d);
        rd.scalar(control, "control", "a_r_m", p.a_r);
        rd.scalar(control, "control", "beta_per_m2", p.beta);
        sim.params = p;
    }

    const auto s = rd.section(root, "sim",
                              {"dt_s", "warmup_cycles", "measure_cycles", "record_interval_steps",
                               "seed", "neighbor_rule", "neighbor_radius_m", "position_noise_sigma_m",
                               "state_staleness_s", "min_warmup_time_s", "min_measure_time_s",
                               "zero_omega_horizon_r0_per_v0"});
    rd.scalar(s, "sim", "dt_s", sim.dt);
    rd.scalar(s, "sim", "warmup_cycles", sim.warmup_cycles);
    rd.scalar(s, "sim", "measure_cycles", sim.measure_cycles);
    rd.scalar(s, "sim", "record_interval_steps", sim.record_interval);
    rd.scalar(s, "sim", "seed", sim.seed);
    std::string rule = neighbor_rule_name(sim.neighbor_rule);
    rd.scalar(s, "sim", "neighbor_rule", rule);
    if (rule == "all-to-all") {
        sim.neighbor_rule = NeighborRule::all_to_all;
    } else if (rule == "metric-radius") {
        sim.neighbor_rule = NeighborRule::metric_radius;
    } else {
        rd.fail(s["neighbor_rule"], "sim.neighbor_rule", "expected all-to-all or metric-radius");
    }
    rd.scalar(s, "sim", "neighbor_radius_m", sim.neighbor_radius);
    rd.scalar(s, "sim", "position_noise_sigma_m", sim.position_noise_sigma);
    rd.scalar(s, "sim", "state_staleness_s", sim.state_staleness);
    rd.scalar(s, "sim", "min_warmup_time_s", sim.min_warmup_time);
    rd.scalar(s, "sim", "min_measure_time_s", sim.min_measure_time);
    rd.scalar(s, "sim", "zero_omega_horizon_r0_per_v0", sim.zero_omega_horizon);

    const auto metrics = rd.section(root, "metrics", {"sensor_radius_m", "grid_resolution"});
    if (metrics && metrics["sensor_radius_m"]) {
        double rs = 0.0;
        rd.scalar(metrics, "metrics", "sensor_radius_m", rs);
        cfg.sensor_radius = rs;
    }
    rd.scalar(metrics, "metrics", "grid_resolution", cfg.grid_resolution);

    const auto sweep = rd.section(root, "sweep",
                                  {"omega_bars", "seeds", "normalization", "min_warmup_r0_per_v",
                                   "min_measure_r0_per_v", "max_snapshots", "workers"});
    rd.list(sweep, "sweep", "omega_bars", cfg.sweep.omega_bars);
    rd.list(sweep, "sweep", "seeds", cfg.sweep.seeds);
    std::string norm_name = normalization_name(cfg.sweep.normalization);
    rd.scalar(sweep, "sweep", "normalization", norm_name);
    const auto parsed = parse_normalization(norm_name);
    if (!parsed) {
        rd.fail(sweep["normalization"], "sweep.normalization", "expected base-speed or mean-speed");
    }
    cfg.sweep.normalization = *parsed;
    rd.scalar(sweep, "sweep", "min_warmup_r0_per_v", cfg.sweep.min_warmup);
    rd.scalar(sweep, "sweep", "min_measure_r0_per_v", cfg.sweep.min_measure);
    rd.scalar(sweep, "sweep", "max_snapshots", cfg.sweep.max_snapshots);
    rd.scalar(sweep, "sweep", "workers", cfg.sweep.workers);

    const auto field = rd.section(root, "field", {"alpha", "grid_points", "extent_r0"});
    rd.scalar(field, "field", "alpha", cfg.field.alpha);
    rd.scalar(field, "field", "grid_points", cfg.field.grid_points);
    rd.scalar(field, "field", "extent_r0", cfg.field.extent_r0);

    const auto output = rd.section(root, "output", {"dir"});
    rd.scalar(output, "output", "dir", cfg.out_dir);

    // The manifest block is provenance only; its content is not interpreted.
    check(cfg, source, lines);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CliError(ErrorCode::config_io, path.string() + ": cannot open config file");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

std::string dump_config(const ExperimentConfig& cfg) {
    const auto& sim = cfg.sim;
    std::ostringstream o;
    o << "swarm:\n"
      << "  n_agents: " << sim.composition.n << "\n"
      << "  rho_fast: " << num(sim.composition.rho_f) << "\n"
      << "  v0_mps: " << num(sim.composition.v0) << "\n"
      << "  v_fast_mps: " << num(sim.composition.v_fast) << "\n"
      << "area:\n"
      << "  r0_m: " << num(sim.r0) << "\n"
      << "  omega_radps: " << num(sim.schedule.omega) << "\n"
      << "  axis: [" << num(sim.schedule.e_hat.x) << ", " << num(sim.schedule.e_hat.y) << "]\n";
    if (sim.params) {
        o << "control:\n"
          << "  d: " << num(sim.params->d) << "\n"
          << "  a_r_m: " << num(sim.params->a_r) << "\n"
          << "  beta_per_m2: " << num(sim.params->beta) << "\n";
    }
    o << "sim:\n"
      << "  dt_s: " << num(sim.dt) << "\n"
      << "  warmup_cycles: " << sim.warmup_cycles << "\n"
      << "  measure_cycles: " << sim.measure_cycles << "\n"
      << "  record_interval_steps: " << sim.record_interval << "\n"
      << "  seed: " << sim.seed << "\n"
      << "  neighbor_rule: " << neighbor_rule_name(sim.neighbor_rule) << "\n"
      << "  neighbor_radius_m: " << num(sim.neighbor_radius) << "\n"
      << "  position_noise_sigma_m: " << num(sim.position_noise_sigma) << "\n"
      << "  state_staleness_s: " << num(sim.state_staleness) << "\n"
      << "  min_warmup_time_s: " << num(sim.min_warmup_time) << "\n"
      << "  min_measure_time_s: " << num(sim.min_measure_time) << "\n"
      << "  zero_omega_horizon_r0_per_v0: " << num(sim.zero_omega_horizon) << "\n"
      << "metrics:\n";
    if (cfg.sensor_radius) {
        o << "  sensor_radius_m: " << num(*cfg.sensor_radius) << "\n";
    }
    o << "  grid_resolution: " << cfg.grid_resolution << "\n"
      << "sweep:\n"
      << "  omega_bars: [";
    for (std::size_t i = 0; i < cfg.sweep.omega_bars.size(); ++i) {
        o << (i ? ", " : "") << num(cfg.sweep.omega_bars[i]);
    }
    o << "]\n  seeds: [";
    for (std::size_t i = 0; i < cfg.sweep.seeds.size(); ++i) {
        o << (i ? ", " : "") << cfg.sweep.seeds[i];
    }
    o << "]\n"
      << "  normalization: " << normalization_name(cfg.sweep.normalization) << "\n"
      << "  min_warmup_r0_per_v: " << num(cfg.sweep.min_warmup) << "\n"
      << "  min_measure_r0_per_v: " << num(cfg.sweep.min_measure) << "\n"
      << "  max_snapshots: " << cfg.sweep.max_snapshots << "\n"
      << "  workers: " << cfg.sweep.workers << "\n"
      << "field:\n"
      << "  alpha: " << num(cfg.field.alpha) << "\n"
      << "  grid_points: " << cfg.field.grid_points << "\n"
      << "  extent_r0: " << num(cfg.field.extent_r0) << "\n"
      << "output:\n"
      << "  dir: " << quoted(cfg.out_dir) << "\n";
    return o.str();
}

}  // namespace swarmcov
