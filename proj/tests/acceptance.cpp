// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "swarmcov/area_model.hpp"
#include "swarmcov/commands.hpp"
#include "swarmcov/control_law.hpp"
#include "swarmcov/metrics.hpp"
#include "swarmcov/response.hpp"
#include "swarmcov/sim_engine.hpp"

using namespace swarmcov;

namespace {

// ---- thresholds -----------------------------------------------------------

constexpr double kAreaTol = 0.01;             // 1: relative
constexpr int kAreaResolution = 1024;
constexpr int kGradPoints = 1000;             // 2
constexpr double kGradTol = 1e-4;
constexpr double kFitTol = 0.01;              // 3: relative, every parameter
constexpr double kCutoffLo = 0.5;             // 4
constexpr double kCutoffHi = 2.1;
constexpr double kPlateauLo = 0.68;           // 5
constexpr double kPlateauHi = 0.84;
constexpr double kCoverageDrop = 0.05;
constexpr double kSeparation = 10.0;          // 6
constexpr double kCollapseTol = 0.05;         // 7
constexpr double kScalingLo = 1.2;            // 8
constexpr double kScalingHi = 1.8;
constexpr double kPredictedCutoff = 0.02;     // 9: rad/s
constexpr double kScenarioLo = 0.01;
constexpr double kScenarioHi = 0.042;
constexpr double kScenarioRatioLo = 1.0;
constexpr double kScenarioRatioHi = 1.35;
constexpr int kRandomSnapshots = 1000;        // 10
constexpr double kGridTol = 0.01;
constexpr double kStepTol = 0.05;             // of a_R, RMS
constexpr double kSpacingLo = 0.8;            // of a_R
constexpr double kSpacingHi = 1.6;

constexpr std::size_t kAgents = 20;
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

int g_failed = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
    std::printf("[%s] criterion %d: %s | %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) {
        ++g_failed;
    }
}

void note(const std::string& line) {
    std::printf("    %s\n", line.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

SimConfig swarm(double rho_f, double v_fast) {
    SimConfig c;
    c.r0 = 1.0;
    c.composition = {kAgents, rho_f, 1.0, v_fast};
    return c;
}

MetricsConfig metrics_for(const SimConfig& c, int resolution = 256) {
    return {default_sensor_radius(c.surface(), c.composition.n), resolution};
}

SweepSettings sweep_settings(Normalization n) {
    SweepSettings s;
    s.omega_bars = default_omega_bars();
    s.seeds = kSeeds;
    s.normalization = n;
    s.workers = workers();
    return s;
}

// Sweeps are shared between criteria and computed on first use.
std::map<std::string, SweepResult> g_sweeps;

const SweepResult& sweep(const std::string& key, double rho_f, double v_fast) {
    auto it = g_sweeps.find(key);
    if (it == g_sweeps.end()) {
        const auto t0 = std::chrono::steady_clock::now();
        const SimConfig c = swarm(rho_f, v_fast);
        SweepResult r = frequency_sweep(c, metrics_for(c), sweep_settings(Normalization::mean_speed));
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        note(fmt("sweep %s: %zu jobs, %zu failed, %.0f s", key.c_str(), r.jobs, r.failures.size(), sec));
        for (const auto& p : r.curve.points) {
            note(fmt("  omega_bar=%-8.4g P_T=%.4f+-%.4f P_C=%.4f+-%.4f", p.omega_bar, p.mean_p_t,
                     p.std_p_t, p.mean_p_c, p.std_p_c));
        }
        it = g_sweeps.emplace(key, std::move(r)).first;
    }
    return it->second;
}

const SweepResult& homogeneous() { return sweep("homogeneous", 0.0, 1.0); }

std::string fit_text(const FitResult& f) {
    return fmt("P0=%.4f P_inf=%.4f omega_bar_c=%.4g lambda=%.3f rms=%.4f%s", f.p0, f.p_inf,
               f.omega_bar_c, f.lambda, f.residual, f.identifiable ? "" : " (unidentifiable)");
}

// ---- 1 ---------------------------------------------------------------------

void area_conservation() {
    const double r0 = 1.0;
    const double target = std::numbers::pi * r0 * r0;
    double worst = 0.0;
    for (double a : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        const double err = std::abs(region_area(TargetAreaSpec(r0, a), kAreaResolution) / target - 1.0);
        note(fmt("alpha=%.1f relative area error %.2e", a, err));
        worst = std::max(worst, err);
    }
    report(1, worst < kAreaTol, "area conservation", fmt("worst %.3e < %.2g", worst, kAreaTol));
}

// ---- 2 ---------------------------------------------------------------------

void gradient_correctness() {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::uniform_real_distribution<double> alpha(0.0, 2.0);
    const double r0 = 1.0;
    const double h = 1e-6 * r0;
    double worst = 0.0;
    int n = 0;
    while (n < kGradPoints) {
        const Vec2 p{coord(gen) * r0, coord(gen) * r0};
        if (norm(p) < 1e-3 * r0) {
            continue;
        }
        const TargetAreaSpec spec(r0, alpha(gen));
        const Vec2 fd{(signed_field(spec, {p.x + h, p.y}) - signed_field(spec, {p.x - h, p.y})) / (2 * h),
                      (signed_field(spec, {p.x, p.y + h}) - signed_field(spec, {p.x, p.y - h})) / (2 * h)};
        worst = std::max(worst, norm(field_gradient(spec, p) - fd) / norm(fd));
        ++n;
    }
    report(2, worst < kGradTol, "gradient vs central differences",
           fmt("%d points, max relative error %.2e < %.0e", n, worst, kGradTol));
}

// ---- 3 ---------------------------------------------------------------------

void fit_round_trip() {
    const double p0 = 0.758, pinf = 0.530, wc = 1.03, lam = 1.37;
    const auto w = default_omega_bars();
    std::vector<double> y;
    for (double x : w) {
        const double a = std::pow(wc, lam);
        const double b = std::pow(x, lam);
        y.push_back((p0 * a + pinf * b) / (a + b));
    }
    const FitResult f = fit_response(w, y);
    const double err = std::max({std::abs(f.p0 / p0 - 1), std::abs(f.p_inf / pinf - 1),
                                 std::abs(f.omega_bar_c / wc - 1), std::abs(f.lambda / lam - 1)});
    report(3, f.identifiable && err < kFitTol, "fit round-trip",
           fmt("%s, worst relative error %.2e < %.2g", fit_text(f).c_str(), err, kFitTol));
}

// ---- 4 ---------------------------------------------------------------------

void tessellation_cutoff() {
    const FitResult f = fit_response(homogeneous().curve, Metric::tessellation);
    const bool ok = f.identifiable && f.omega_bar_c >= kCutoffLo && f.omega_bar_c <= kCutoffHi;
    report(4, ok, "tessellation cutoff",
           fmt("%s, need omega_bar_c in [%.2g, %.2g]", fit_text(f).c_str(), kCutoffLo, kCutoffHi));
}

// ---- 5 ---------------------------------------------------------------------

void zero_frequency_plateau() {
    SimConfig c = swarm(0.0, 1.0);
    const MetricsConfig mc = metrics_for(c);
    double sum = 0.0;
    for (std::uint64_t seed : kSeeds) {
        c.seed = seed;
        const RunResult r = run(c);
        const PerformanceAverage avg = time_average_performance(r.trajectory, c.r0, c.schedule.e_hat, mc);
        note(fmt("omega=0 seed %llu: mean P_T %.4f, mean P_C %.4f over %zu snapshots",
                 static_cast<unsigned long long>(seed), avg.mean_p_t, avg.mean_p_c, avg.samples));
        sum += avg.mean_p_t;
    }
    const double pt = sum / static_cast<double>(kSeeds.size());
    const auto& pts = homogeneous().curve.points;
    const double drop = pts.front().mean_p_c - pts.back().mean_p_c;
    const bool ok = pt >= kPlateauLo && pt <= kPlateauHi && drop >= kCoverageDrop;
    report(5, ok, "zero-frequency plateau",
           fmt("mean P_T %.4f (need [%.2f, %.2f]); P_C(%.3g) - P_C(%.3g) = %.4f (need >= %.2f)", pt,
               kPlateauLo, kPlateauHi, pts.front().omega_bar, pts.back().omega_bar, drop, kCoverageDrop));
}

// ---- 6 ---------------------------------------------------------------------

void cutoff_separation() {
    const FitResult t = fit_response(homogeneous().curve, Metric::tessellation);
    const FitResult c = fit_response(homogeneous().curve, Metric::coverage);
    note("P_T " + fit_text(t));
    note("P_C " + fit_text(c));
    bool ok;
    std::string detail;
    if (!c.identifiable) {
        ok = true;
        detail = "P_C cutoff unidentifiable over the band";
    } else {
        const double ratio = c.omega_bar_c / t.omega_bar_c;
        ok = t.identifiable && ratio >= kSeparation;
        detail = fmt("omega_bar_c(P_C) / omega_bar_c(P_T) = %.3g (need >= %.0f)", ratio, kSeparation);
    }
    report(6, ok, "cutoff separation", detail);
}

// ---- 7 ---------------------------------------------------------------------

void mean_speed_collapse() {
    const auto& hom = homogeneous().curve;
    double worst = 0.0;
    std::size_t shared = 0;
    for (double rho : {0.2, 0.5}) {
        const auto& het = sweep(fmt("rho_F=%.1f", rho), rho, 2.0).curve;
        for (const auto& p : het.points) {
            const auto q = std::find_if(hom.points.begin(), hom.points.end(),
                                        [&](const ResponsePoint& h) { return h.omega_bar == p.omega_bar; });
            if (q == hom.points.end()) {
                continue;
            }
            ++shared;
            for (Metric m : {Metric::tessellation, Metric::coverage}) {
                worst = std::max(worst, std::abs(p.mean(m) - q->mean(m)));
            }
        }
    }
    report(7, shared == 20 && worst <= kCollapseTol, "mean-speed collapse",
           fmt("%zu shared points, max |dP| %.4f (need <= %.2f)", shared, worst, kCollapseTol));
}

// ---- 8 ---------------------------------------------------------------------

void cutoff_scaling() {
    // Both curves re-expressed on the base speed v0 = 1.
    const auto hom = renormalized(homogeneous().curve, 1.0);
    const auto het = renormalized(sweep("rho_F=0.5", 0.5, 2.0).curve, 1.0);
    const FitResult fh = fit_response(hom, Metric::tessellation);
    const FitResult fx = fit_response(het, Metric::tessellation);
    note("homogeneous P_T " + fit_text(fh));
    note("rho_F=0.5 P_T   " + fit_text(fx));
    if (!fh.identifiable || !fx.identifiable) {
        report(8, false, "cutoff scaling", "cutoff unidentifiable");
        return;
    }
    const double ratio = cutoff_scaling_check(fh, fx);
    report(8, ratio >= kScalingLo && ratio <= kScalingHi, "cutoff scaling",
           fmt("omega_c ratio %.4f (need [%.1f, %.1f], predicted %.2f)", ratio, kScalingLo, kScalingHi,
               predicted_cutoff_ratio(swarm(0.5, 2.0).composition)));
}

// ---- 9 ---------------------------------------------------------------------

void physical_scenario() {
    SweepSettings s = sweep_settings(Normalization::base_speed);
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioReport r = run_field_scenario(s);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    note(fmt("scenario sweeps: %.0f s", sec));
    note("homogeneous P_T " + fit_text(r.homogeneous));
    note("mixed P_T       " + fit_text(r.heterogeneous));
    const bool pred = std::abs(r.predicted_cutoff - kPredictedCutoff) < 1e-12;
    const bool cut = r.homogeneous_cutoff >= kScenarioLo && r.homogeneous_cutoff <= kScenarioHi;
    const bool ratio = r.cutoff_ratio >= kScenarioRatioLo && r.cutoff_ratio <= kScenarioRatioHi;
    report(9, pred && cut && ratio, "physical-units scenario",
           fmt("predicted %.4g rad/s; fitted %.4g rad/s (need [%.3g, %.3g]); ratio %.4f (need [%.2f, %.2f], "
               "predicted %.4f)",
               r.predicted_cutoff, r.homogeneous_cutoff, kScenarioLo, kScenarioHi, r.cutoff_ratio,
               kScenarioRatioLo, kScenarioRatioHi, r.predicted_ratio));
}

// ---- 10 --------------------------------------------------------------------

bool sub(const std::string& name, bool pass, const std::string& detail) {
    note(fmt("%s %s: %s", pass ? "ok  " : "FAIL", name.c_str(), detail.c_str()));
    return pass;
}

bool determinism() {
    SimConfig c = swarm(0.5, 2.0);
    c.schedule.omega = 1.3;
    c.min_warmup_time = 5.0;
    c.position_noise_sigma = 0.01;
    const RunResult a = run(c);
    const RunResult b = run(c);
    bool same = a.trajectory.snapshots.size() == b.trajectory.snapshots.size();
    for (std::size_t k = 0; same && k < a.trajectory.snapshots.size(); ++k) {
        const auto& pa = a.trajectory.snapshots[k].positions;
        const auto& pb = b.trajectory.snapshots[k].positions;
        for (std::size_t i = 0; i < pa.size(); ++i) {
            same = same && pa[i].x == pb[i].x && pa[i].y == pb[i].y;
        }
    }
    return sub("determinism", same, fmt("%zu snapshots bit-identical", a.trajectory.snapshots.size()));
}

bool speed_bound() {
    SimConfig c = swarm(0.5, 2.0);
    c.schedule.omega = 2.0;
    const RunPlan plan = plan_run(c);
    Rng rng(c.seed);
    auto agents = init_swarm(c, rng);
    Stepper stepper(c, plan.dt);
    double worst = 0.0;
    const long long steps = std::min<long long>(plan.total_steps, 20000);
    for (long long k = 0; k < steps; ++k) {
        auto before = agents;
        stepper.step(agents, static_cast<double>(k) * plan.dt);
        for (std::size_t i = 0; i < agents.size(); ++i) {
            const double v = norm(agents[i].position - before[i].position) / plan.dt;
            worst = std::max(worst, v / agents[i].v0);
        }
    }
    // Position differencing adds rounding of order |r| ulp / dt.
    return sub("speed bound", worst <= 1.0 + 1e-9,
               fmt("%lld steps, max |v|/v0 = %.12f", steps, worst));
}

bool metric_ranges() {
    std::mt19937_64 gen(10);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> a(0.0, 2.0);
    std::uniform_int_distribution<int> count(1, 40);
    const double r0 = 1.0;
    const MetricsConfig mc{0.2, 256};
    const MetricsEvaluator eval(r0, {1.0, 0.0}, mc);
    double pt_lo = 1.0, pt_hi = 0.0, pc_lo = 1.0, pc_hi = 0.0;
    bool ok = true;
    for (int s = 0; s < kRandomSnapshots; ++s) {
        std::vector<Vec2> pos(static_cast<std::size_t>(count(gen)));
        for (auto& p : pos) {
            p = {u(gen), u(gen)};
        }
        const auto m = eval.evaluate(pos, a(gen));
        if (!m) {
            ok = false;
            continue;
        }
        pt_lo = std::min(pt_lo, m->p_t);
        pt_hi = std::max(pt_hi, m->p_t);
        pc_lo = std::min(pc_lo, m->p_c);
        pc_hi = std::max(pc_hi, m->p_c);
        ok = ok && m->p_t > 0.0 && m->p_t <= 1.0 && m->p_c >= 0.0 && m->p_c <= 1.0;
    }
    return sub("metric ranges", ok,
               fmt("%d snapshots: P_T in [%.4f, %.4f], P_C in [%.4f, %.4f]", kRandomSnapshots, pt_lo,
                   pt_hi, pc_lo, pc_hi));
}

bool coverage_monotone() {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::uniform_real_distribution<double> a(0.0, 2.0);
    const TargetAreaSpec base(1.0, 0.0);
    int checks = 0;
    bool ok = true;
    for (int s = 0; s < 50; ++s) {
        const TargetAreaSpec spec = base.with_alpha(a(gen));
        std::vector<Vec2> pos;
        double prev = 0.0;
        for (int n = 1; n <= 30; ++n) {
            pos.push_back({u(gen), u(gen)});
            const double pc = *coverage_performance(pos, spec, {0.2, 256});
            ok = ok && pc >= prev;
            prev = pc;
            ++checks;
        }
        prev = 0.0;
        for (double rs : {0.05, 0.1, 0.2, 0.3, 0.5, 0.8}) {
            const double pc = *coverage_performance(pos, spec, {rs, 256});
            ok = ok && pc >= prev;
            prev = pc;
            ++checks;
        }
    }
    return sub("P_C monotone in N and R_s", ok, fmt("%d comparisons", checks));
}

// Converged omega = 0 swarms, reused by the last three properties.
std::vector<RunResult>& equilibria() {
    static std::vector<RunResult> runs;
    if (runs.empty()) {
        for (std::uint64_t seed : kSeeds) {
            SimConfig c = swarm(0.0, 1.0);
            c.seed = seed;
            runs.push_back(run(c));
        }
    }
    return runs;
}

bool grid_convergence() {
    const SimConfig c = swarm(0.0, 1.0);
    const MetricsEvaluator coarse(c.r0, {1.0, 0.0}, metrics_for(c, 256));
    const MetricsEvaluator fine(c.r0, {1.0, 0.0}, metrics_for(c, 512));
    double worst = 0.0;
    for (const auto& r : equilibria()) {
        std::vector<Vec2> pos;
        for (const auto& ag : r.final_agents) {
            pos.push_back(ag.position);
        }
        for (double alpha : {0.0, 1.0, 2.0}) {
            const auto a = coarse.evaluate(pos, alpha);
            const auto b = fine.evaluate(pos, alpha);
            worst = std::max({worst, std::abs(a->p_t - b->p_t), std::abs(a->p_c - b->p_c)});
        }
    }
    return sub("grid convergence", worst < kGridTol,
               fmt("max change 256 -> 512 cells: %.4f (need < %.2f)", worst, kGridTol));
}

bool timestep_convergence() {
    double worst = 0.0;
    for (std::uint64_t seed : kSeeds) {
        SimConfig c = swarm(0.0, 1.0);
        c.seed = seed;
        c.zero_omega_horizon = 20.0;
        const double a_r = c.control_params().a_r;
        c.dt = plan_run(c).dt;
        const RunResult coarse = run(c);
        c.dt *= 0.5;
        const RunResult fine = run(c);
        double ss = 0.0;
        for (std::size_t i = 0; i < coarse.final_agents.size(); ++i) {
            ss += norm2(coarse.final_agents[i].position - fine.final_agents[i].position);
        }
        worst = std::max(worst, std::sqrt(ss / static_cast<double>(coarse.final_agents.size())) / a_r);
    }
    return sub("timestep convergence", worst < kStepTol,
               fmt("worst RMS shift on halving dt over 20 R0/v0: %.4f a_R (need < %.2f)", worst, kStepTol));
}

bool equilibrium_spacing() {
    const double a_r = swarm(0.0, 1.0).control_params().a_r;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& r : equilibria()) {
        std::vector<double> nn;
        for (const auto& a : r.final_agents) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& b : r.final_agents) {
                if (a.id != b.id) {
                    best = std::min(best, norm(a.position - b.position));
                }
            }
            nn.push_back(best / a_r);
        }
        std::sort(nn.begin(), nn.end());
        const double median = 0.5 * (nn[nn.size() / 2 - 1] + nn[nn.size() / 2]);
        lo = std::min(lo, median);
        hi = std::max(hi, median);
    }
    return sub("equilibrium spacing", lo >= kSpacingLo && hi <= kSpacingHi,
               fmt("median nearest neighbor over seeds in [%.3f, %.3f] a_R (need [%.1f, %.1f])", lo, hi,
                   kSpacingLo, kSpacingHi));
}

void property_suite() {
    bool ok = true;
    ok = determinism() && ok;
    ok = speed_bound() && ok;
    ok = metric_ranges() && ok;
    ok = coverage_monotone() && ok;
    ok = grid_convergence() && ok;
    ok = timestep_convergence() && ok;
    ok = equilibrium_spacing() && ok;
    report(10, ok, "property suite", ok ? "all properties hold" : "see failing properties above");
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<void()>> criteria{
        area_conservation,    gradient_correctness, fit_round_trip,      tessellation_cutoff,
        zero_frequency_plateau, cutoff_separation,  mean_speed_collapse, cutoff_scaling,
        physical_scenario,    property_suite};
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        const int id = std::atoi(argv[i]);
        if (id < 1 || id > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
            return 2;
        }
        selected.insert(id);
    }
    for (int id = 1; id <= static_cast<int>(criteria.size()); ++id) {
        if (!selected.empty() && !selected.count(id)) {
            continue;
        }
        try {
            criteria[static_cast<std::size_t>(id - 1)]();
        } catch (const std::exception& e) {
            report(id, false, "error", e.what());
        }
    }
    std::printf("%d criteria failed\n", g_failed);
    return g_failed == 0 ? 0 : 1;
}
