#include "swarmcov/commands.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <system_error>
#include <vector>

#include "swarmcov/control_law.hpp"
#include "swarmcov/csv.hpp"

namespace swarmcov {

namespace fs = std::filesystem;

ExperimentConfig resolve_config(const CommandOptions& options) {
    ExperimentConfig cfg = options.config ? load_config(*options.config) : ExperimentConfig{};
    const std::string source =
        (options.config ? options.config->string() : std::string("<defaults>")) + " (overrides)";
    if (options.seed) {
        cfg.sim.seed = *options.seed;
        for (std::size_t i = 0; i < cfg.sweep.seeds.size(); ++i) {
            cfg.sweep.seeds[i] = *options.seed + i;
        }
    }
    if (options.out_dir) {
        cfg.out_dir = options.out_dir->string();
    }
    if (options.workers) {
        cfg.sweep.workers = *options.workers;
    }
    if (options.normalization) {
        cfg.sweep.normalization = *options.normalization;
    }
    if (options.omega) {
        cfg.sim.schedule.omega = *options.omega;
    }
    if (options.alpha) {
        cfg.field.alpha = *options.alpha;
    }
    validate_config(cfg, source);
    return cfg;
}

void raise_sweep_status(const SweepResult& result) {
    if (result.failures.empty()) {
        return;
    }
    const std::string counts = std::to_string(result.failures.size()) + " of " +
                               std::to_string(result.jobs) + " sweep jobs failed; first: " +
                               result.failures.front().message;
    if (result.curve.points.empty()) {
        throw CliError(ErrorCode::sweep_failed, counts);
    }
    throw CliError(ErrorCode::sweep_partial, counts);
}

namespace {

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw CliError(ErrorCode::output_io, dir.string() + ": cannot create output directory");
    }
    return dir;
}

// Writes next to the target and renames, so readers never see a partial file.
void write_file(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.flush();
        if (!out) {
            throw CliError(ErrorCode::output_io, tmp.string() + ": write failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw CliError(ErrorCode::output_io, path.string() + ": " + ec.message());
    }
}

// Pins defaults that depend on S and N so the manifest is self-contained.
ExperimentConfig resolved(ExperimentConfig cfg) {
    cfg.sim.params = cfg.sim.control_params();
    cfg.sensor_radius = cfg.metrics().r_s;
    return cfg;
}

std::string manifest(const ExperimentConfig& cfg, const std::string& command,
                     const std::vector<std::pair<std::string, std::string>>& extra) {
    std::ostringstream o;
    o << "manifest:\n"
      << "  artifact: swarmcov\n"
      << "  version: \"" << artifact_version() << "\"\n"
      << "  command: " << command << "\n";
    for (const auto& [k, v] : extra) {
        o << "  " << k << ": " << v << "\n";
    }
    o << dump_config(cfg);
    return o.str();
}

std::string csv_field(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + '"';
}

std::string seeds_text(const std::vector<std::uint64_t>& seeds) {
    std::string s = "[";
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        s += (i ? ", " : "") + std::to_string(seeds[i]);
    }
    return s + "]";
}

std::size_t distinct_count(const std::vector<double>& values) {
    return std::set<double>(values.begin(), values.end()).size();
}

void write_failures(const fs::path& dir, const SweepResult& result, const std::string& name) {
    if (result.failures.empty()) {
        return;
    }
    std::ostringstream o;
    o << "omega_bar,seed,message\n";
    for (const auto& f : result.failures) {
        o << fmt_num(f.omega_bar) << ',' << f.seed << ',' << csv_field(f.message) << '\n';
    }
    write_file(dir / name, o.str());
}

SweepResult checked_sweep(const SimConfig& sim, const MetricsConfig& mc, const SweepSettings& st) {
    try {
        return frequency_sweep(sim, mc, st);
    } catch (const std::invalid_argument& e) {
        throw CliError(ErrorCode::config_value, std::string("sweep: ") + e.what());
    }
}

std::string fit_text(const FitResult& fit, Metric m) {
    std::ostringstream o;
    write_fit_record(o, fit, m);
    return o.str();
}

}  // namespace

void cmd_run(const CommandOptions& options, std::ostream& log) {
    const ExperimentConfig cfg = resolved(resolve_config(options));
    const fs::path dir = prepare_out_dir(cfg);

    RunResult res;
    try {
        res = run(cfg.sim);
    } catch (const NumericalBlowup& e) {
        throw CliError(ErrorCode::numerical, std::string("run: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw CliError(ErrorCode::config_value, std::string("run: ") + e.what());
    }

    const MetricsEvaluator eval(cfg.sim.r0, cfg.sim.schedule.e_hat, cfg.metrics());
    std::vector<MetricSample> samples;
    for (const auto& snap : res.trajectory.snapshots) {
        if (auto s = eval.evaluate(snap.positions, snap.alpha)) {
            s->t = snap.t;
            samples.push_back(*s);
        }
    }

    std::ostringstream traj;
    write_trajectory_csv(traj, res.trajectory);
    std::ostringstream met;
    write_metrics_csv(met, samples);
    write_file(dir / "trajectory.csv", traj.str());
    write_file(dir / "metrics.csv", met.str());

    const RunPlan& p = res.plan;
    const double horizon = static_cast<double>(p.total_steps) * p.dt;
    write_file(dir / "manifest.yaml",
               manifest(cfg, "run",
                        {{"seed", std::to_string(cfg.sim.seed)},
                         {"omega_radps", fmt_num(cfg.sim.schedule.omega)},
                         {"dt_s", fmt_num(p.dt)},
                         {"warmup_steps", std::to_string(p.warmup_steps)},
                         {"total_steps", std::to_string(p.total_steps)},
                         {"horizon_s", fmt_num(horizon)},
                         {"files", "[trajectory.csv, metrics.csv]"}}));
    log << "run: " << p.total_steps << " steps of " << fmt_num(p.dt) << " s, "
        << res.trajectory.snapshots.size() << " snapshots -> " << dir.string() << "\n";
}

void cmd_sweep(const CommandOptions& options, std::ostream& log) {
    const ExperimentConfig cfg = resolved(resolve_config(options));
    const fs::path dir = prepare_out_dir(cfg);

    const SweepResult result = checked_sweep(cfg.sim, cfg.metrics(), cfg.sweep);
    std::ostringstream csv;
    write_sweep_csv(csv, result.curve);
    write_file(dir / "sweep.csv", csv.str());
    write_failures(dir, result, "failures.csv");

    std::vector<std::pair<std::string, std::string>> extra{
        {"seeds", seeds_text(cfg.sweep.seeds)},
        {"normalization_speed_mps", fmt_num(result.curve.normalization_speed)},
        {"jobs", std::to_string(result.jobs)},
        {"failed_jobs", std::to_string(result.failures.size())}};

    const std::size_t grid = distinct_count(cfg.sweep.omega_bars);
    if (grid < 5) {
        write_file(dir / "manifest.yaml", manifest(cfg, "sweep", extra));
        throw CliError(ErrorCode::fit_refused, "sweep: fit needs at least 5 frequencies, grid has " +
                                                   std::to_string(grid) + "; sweep.csv written");
    }
    if (result.curve.points.size() < 5) {
        write_file(dir / "manifest.yaml", manifest(cfg, "sweep", extra));
        raise_sweep_status(result);
        throw CliError(ErrorCode::fit_refused, "sweep: fewer than 5 frequencies completed");
    }
    for (Metric m : {Metric::tessellation, Metric::coverage}) {
        const FitResult fit = fit_response(result.curve, m);
        write_file(dir / (std::string("fit_") + metric_name(m) + ".txt"), fit_text(fit, m));
        log << metric_name(m) << ": P0=" << fmt_num(fit.p0) << " P_inf=" << fmt_num(fit.p_inf)
            << " omega_bar_c=" << fmt_num(fit.omega_bar_c) << " lambda=" << fmt_num(fit.lambda)
            << (fit.identifiable ? "" : " (cutoff unidentifiable)") << "\n";
    }
    extra.emplace_back("files", "[sweep.csv, fit_P_T.txt, fit_P_C.txt]");
    write_file(dir / "manifest.yaml", manifest(cfg, "sweep", extra));
    raise_sweep_status(result);
}

void write_field_csv(std::ostream& out, const SimConfig& sim, const FieldSettings& field) {
    const TargetAreaSpec spec(sim.r0, field.alpha, sim.schedule.e_hat);
    const ControlParams params = sim.control_params();
    const double half = field.extent_r0 * sim.r0;
    const double h = 2.0 * half / field.grid_points;
    out << "x,y,A,Tx,Ty\n";
    for (int iy = 0; iy < field.grid_points; ++iy) {
        const double y = -half + (iy + 0.5) * h;
        for (int ix = 0; ix < field.grid_points; ++ix) {
            const Vec2 r{-half + (ix + 0.5) * h, y};
            const double a = signed_field(spec, r);
            const Vec2 t = geofence_term(a, field_gradient(spec, r), params);
            out << fmt_num(r.x) << ',' << fmt_num(r.y) << ',' << fmt_num(a) << ',' << fmt_num(t.x)
                << ',' << fmt_num(t.y) << '\n';
        }
    }
}

void cmd_field(const CommandOptions& options, std::ostream& log) {
    const ExperimentConfig cfg = resolved(resolve_config(options));
    const fs::path dir = prepare_out_dir(cfg);
    std::ostringstream csv;
    write_field_csv(csv, cfg.sim, cfg.field);
    write_file(dir / "field.csv", csv.str());
    write_file(dir / "manifest.yaml",
               manifest(cfg, "field", {{"alpha", fmt_num(cfg.field.alpha)}, {"files", "[field.csv]"}}));
    log << "field: " << cfg.field.grid_points << "x" << cfg.field.grid_points << " grid at alpha "
        << fmt_num(cfg.field.alpha) << " -> " << dir.string() << "\n";
}

SimConfig field_scenario_base() {
    SimConfig sim;
    sim.r0 = 25.0;
    sim.composition = {22, 4.0 / 22.0, 0.5, 0.9};
    return sim;
}

namespace {

double physical_cutoff(const FitResult& fit, const ResponseCurve& curve, double r0) {
    if (!fit.identifiable) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return fit.omega_bar_c * curve.normalization_speed / r0;
}

}  // namespace

ScenarioReport run_field_scenario(const SweepSettings& settings) {
    const SimConfig het = field_scenario_base();
    SimConfig hom = het;
    hom.composition.rho_f = 0.0;
    hom.composition.v_fast = hom.composition.v0;
    MetricsConfig mc;
    mc.r_s = default_sensor_radius(het.surface(), het.composition.n);

    ScenarioReport rep;
    rep.predicted_cutoff = het.composition.v0 / het.r0;
    rep.predicted_ratio = predicted_cutoff_ratio(het.composition);
    rep.homogeneous_sweep = checked_sweep(hom, mc, settings);
    rep.heterogeneous_sweep = checked_sweep(het, mc, settings);
    for (const auto* s : {&rep.homogeneous_sweep, &rep.heterogeneous_sweep}) {
        if (s->curve.points.size() < 5) {
            raise_sweep_status(*s);
            throw CliError(ErrorCode::fit_refused, "scenario-paper: fit needs at least 5 frequencies");
        }
    }
    rep.homogeneous = fit_response(rep.homogeneous_sweep.curve, Metric::tessellation);
    rep.heterogeneous = fit_response(rep.heterogeneous_sweep.curve, Metric::tessellation);
    rep.homogeneous_cutoff = physical_cutoff(rep.homogeneous, rep.homogeneous_sweep.curve, het.r0);
    rep.heterogeneous_cutoff = physical_cutoff(rep.heterogeneous, rep.heterogeneous_sweep.curve, het.r0);
    rep.cutoff_ratio = rep.heterogeneous_cutoff / rep.homogeneous_cutoff;
    return rep;
}

void cmd_scenario_paper(const CommandOptions& options, std::ostream& log) {
    ExperimentConfig cfg = resolve_config(options);
    cfg.sim = field_scenario_base();
    cfg.sensor_radius.reset();
    cfg.grid_resolution = 256;
    cfg = resolved(cfg);
    validate_config(cfg, "<scenario-paper>");
    const fs::path dir = prepare_out_dir(cfg);

    const ScenarioReport rep = run_field_scenario(cfg.sweep);

    std::ostringstream hom_csv;
    write_sweep_csv(hom_csv, rep.homogeneous_sweep.curve);
    std::ostringstream het_csv;
    write_sweep_csv(het_csv, rep.heterogeneous_sweep.curve);
    write_file(dir / "scenario_hom_sweep.csv", hom_csv.str());
    write_file(dir / "scenario_het_sweep.csv", het_csv.str());
    write_failures(dir, rep.homogeneous_sweep, "scenario_hom_failures.csv");
    write_failures(dir, rep.heterogeneous_sweep, "scenario_het_failures.csv");
    write_file(dir / "scenario_fit_hom_P_T.txt", fit_text(rep.homogeneous, Metric::tessellation));
    write_file(dir / "scenario_fit_het_P_T.txt", fit_text(rep.heterogeneous, Metric::tessellation));

    std::ostringstream r;
    r << "predicted_cutoff_radps=" << fmt_num(rep.predicted_cutoff) << "\n"
      << "fitted_hom_cutoff_radps=" << fmt_num(rep.homogeneous_cutoff) << "\n"
      << "fitted_het_cutoff_radps=" << fmt_num(rep.heterogeneous_cutoff) << "\n"
      << "cutoff_ratio=" << fmt_num(rep.cutoff_ratio) << "\n"
      << "predicted_cutoff_ratio=" << fmt_num(rep.predicted_ratio) << "\n";
    write_file(dir / "scenario_report.txt", r.str());
    write_file(dir / "manifest.yaml",
               manifest(cfg, "scenario-paper",
                        {{"seeds", seeds_text(cfg.sweep.seeds)},
                         {"composition", "\"22 agents, 4 at 1.8 v0\""},
                         {"files", "[scenario_hom_sweep.csv, scenario_het_sweep.csv, "
                                   "scenario_fit_hom_P_T.txt, scenario_fit_het_P_T.txt, "
                                   "scenario_report.txt]"}}));
    log << r.str();

    SweepResult merged;
    merged.jobs = rep.homogeneous_sweep.jobs + rep.heterogeneous_sweep.jobs;
    merged.curve.points = rep.homogeneous_sweep.curve.points;
    for (const auto* s : {&rep.homogeneous_sweep, &rep.heterogeneous_sweep}) {
        merged.failures.insert(merged.failures.end(), s->failures.begin(), s->failures.end());
    }
    raise_sweep_status(merged);
}

}  // namespace swarmcov
