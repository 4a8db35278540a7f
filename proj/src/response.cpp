#include "swarmcov/response.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "swarmcov/csv.hpp"

namespace swarmcov {

const char* metric_name(Metric m) { return m == Metric::tessellation ? "P_T" : "P_C"; }

PerformanceAverage time_average_performance(const Trajectory& trajectory, double r0, Vec2 e_hat,
                                            const MetricsConfig& config) {
    const MetricsEvaluator eval(r0, e_hat, config);
    PerformanceAverage avg;
    double sum_t = 0.0;
    double sum_c = 0.0;
    for (const auto& snap : trajectory.snapshots) {
        const auto s = eval.evaluate(snap.positions, snap.alpha);
        if (!s) {
            ++avg.undefined;
            continue;
        }
        sum_t += s->p_t;
        sum_c += s->p_c;
        ++avg.samples;
    }
    if (avg.samples == 0) {
        throw std::invalid_argument("trajectory has no snapshot with a defined metric");
    }
    avg.mean_p_t = sum_t / static_cast<double>(avg.samples);
    avg.mean_p_c = sum_c / static_cast<double>(avg.samples);
    return avg;
}

ResponseCurve renormalized(const ResponseCurve& curve, double new_speed) {
    if (!(new_speed > 0.0)) {
        throw std::invalid_argument("normalization speed must be positive");
    }
    ResponseCurve out = curve;
    const double factor = curve.normalization_speed / new_speed;
    for (auto& p : out.points) {
        p.omega_bar *= factor;
    }
    out.normalization_speed = new_speed;
    return out;
}

std::vector<double> log_space(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) {
        throw std::invalid_argument("log_space needs 0 < lo < hi and count >= 2");
    }
    std::vector<double> out(count);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> default_omega_bars() { return log_space(0.03, 30.0, 10); }

double normalization_speed(const SwarmComposition& composition, Normalization normalization) {
    return normalization == Normalization::mean_speed ? mean_speed(composition) : composition.v0;
}

SimConfig sweep_job_config(const SimConfig& base, const SweepSettings& settings, double omega_bar,
                           std::uint64_t seed) {
    SimConfig cfg = base;
    const double v_norm = normalization_speed(base.composition, settings.normalization);
    // Phase lengths follow the collective speed so both normalizations see the same runs.
    const double t_unit = base.r0 / mean_speed(base.composition);
    cfg.schedule.omega = omega_bar * v_norm / base.r0;
    cfg.seed = seed;
    cfg.min_warmup_time = settings.min_warmup * t_unit;
    cfg.min_measure_time = settings.min_measure * t_unit;

    const RunPlan plan = plan_run(cfg);
    const long long measure_steps = plan.total_steps - plan.warmup_steps;
    long long interval = std::max<long long>(
        1, measure_steps / static_cast<long long>(std::max<std::size_t>(settings.max_snapshots, 1)));
    // Coprime with the period so the samples sweep every phase of the cycle.
    while (interval > 1 && std::gcd(interval, plan.steps_per_cycle) != 1) {
        ++interval;
    }
    cfg.record_interval = static_cast<int>(std::min<long long>(interval, std::numeric_limits<int>::max()));
    return cfg;
}

namespace {

struct JobOutcome {
    bool ok = false;
    PerformanceAverage avg;
    std::string error;
};

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) {
        return 0.0;
    }
    double s = 0.0;
    for (double x : v) {
        s += (x - mean) * (x - mean);
    }
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

SweepResult frequency_sweep(const SimConfig& base, const MetricsConfig& metrics,
                            const SweepSettings& settings) {
    base.validate();
    if (settings.seeds.empty() || settings.omega_bars.empty()) {
        throw std::invalid_argument("sweep needs at least one frequency and one seed");
    }
    for (std::size_t i = 0; i < settings.omega_bars.size(); ++i) {
        if (!(settings.omega_bars[i] > 0.0) ||
            (i > 0 && !(settings.omega_bars[i] > settings.omega_bars[i - 1]))) {
            throw std::invalid_argument("omega_bar grid must be positive and strictly increasing");
        }
    }
    metrics.validate(base.r0, base.control_params().a_r);

    const std::size_t n_seeds = settings.seeds.size();
    const std::size_t n_jobs = settings.omega_bars.size() * n_seeds;
    std::vector<JobOutcome> outcomes(n_jobs);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t job = next++; job < n_jobs; job = next++) {
            const double wb = settings.omega_bars[job / n_seeds];
            const std::uint64_t seed = settings.seeds[job % n_seeds];
            auto& out = outcomes[job];
            try {
                const SimConfig cfg = sweep_job_config(base, settings, wb, seed);
                const RunResult res = run(cfg);
                out.avg = time_average_performance(res.trajectory, cfg.r0, cfg.schedule.e_hat, metrics);
                out.ok = true;
            } catch (const std::exception& e) {
                out.error = e.what();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(settings.workers, static_cast<unsigned>(n_jobs)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }

    // Reduction in (omega_bar, seed) order.
    SweepResult result;
    result.jobs = n_jobs;
    result.curve.normalization_speed = normalization_speed(base.composition, settings.normalization);
    for (std::size_t f = 0; f < settings.omega_bars.size(); ++f) {
        std::vector<double> pt;
        std::vector<double> pc;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            const auto& o = outcomes[f * n_seeds + s];
            if (o.ok) {
                pt.push_back(o.avg.mean_p_t);
                pc.push_back(o.avg.mean_p_c);
            } else {
                result.failures.push_back({settings.omega_bars[f], settings.seeds[s], o.error});
            }
        }
        if (pt.empty()) {
            continue;
        }
        ResponsePoint p;
        p.omega_bar = settings.omega_bars[f];
        p.n_seeds = pt.size();
        p.mean_p_t = std::accumulate(pt.begin(), pt.end(), 0.0) / static_cast<double>(pt.size());
        p.mean_p_c = std::accumulate(pc.begin(), pc.end(), 0.0) / static_cast<double>(pc.size());
        p.std_p_t = sample_std(pt, p.mean_p_t);
        p.std_p_c = sample_std(pc, p.mean_p_c);
        result.curve.points.push_back(p);
    }
    return result;
}

namespace {

// wc^l / (wc^l + w^l) as a logistic in z = l (log w - log wc), overflow-free.
double low_weight(double z) {
    return z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

}  // namespace

double response_model(double omega_bar, double p0, double p_inf, double omega_bar_c, double lambda) {
    const double z = lambda * (std::log(omega_bar) - std::log(omega_bar_c));
    return p_inf + (p0 - p_inf) * low_weight(z);
}

namespace {

using Params = std::array<double, 4>;  // P0, P_inf, log wc, log lambda

struct Problem {
    std::vector<double> x;  // log omega_bar
    std::vector<double> y;
    double u_lo, u_hi;
    double v_lo, v_hi;
};

double cost(const Problem& pb, const Params& p) {
    const double lam = std::exp(p[3]);
    double c = 0.0;
    for (std::size_t i = 0; i < pb.x.size(); ++i) {
        const double s = low_weight(lam * (pb.x[i] - p[2]));
        const double r = pb.y[i] - (p[1] + (p[0] - p[1]) * s);
        c += r * r;
    }
    return c;
}

// Solves the 4x4 system a * x = b by Gaussian elimination with partial pivoting.
bool solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4> b, Params& x) {
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) {
                piv = r;
            }
        }
        if (std::abs(a[piv][col]) < 1e-300) {
            return false;
        }
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int k = col; k < 4; ++k) {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    for (int r = 3; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < 4; ++k) {
            s -= a[r][k] * x[k];
        }
        x[r] = s / a[r][r];
    }
    return true;
}

Params levenberg_marquardt(const Problem& pb, Params p) {
    double mu = 1e-3;
    double c = cost(pb, p);
    for (int iter = 0; iter < 500; ++iter) {
        const double lam = std::exp(p[3]);
        std::array<std::array<double, 4>, 4> jtj{};
        std::array<double, 4> jtr{};
        for (std::size_t i = 0; i < pb.x.size(); ++i) {
            const double dx = pb.x[i] - p[2];
            const double s = low_weight(lam * dx);
            const double ds = s * (1.0 - s);
            const double amp = p[0] - p[1];
            const std::array<double, 4> j{s, 1.0 - s, amp * ds * lam, -amp * ds * lam * dx};
            const double r = pb.y[i] - (p[1] + amp * s);
            for (int a = 0; a < 4; ++a) {
                jtr[a] += j[a] * r;
                for (int b = 0; b < 4; ++b) {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        bool improved = false;
        for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
            auto damped = jtj;
            for (int a = 0; a < 4; ++a) {
                damped[a][a] += mu * std::max(jtj[a][a], 1e-12);
            }
            Params step{};
            if (!solve4(damped, jtr, step)) {
                mu *= 10.0;
                continue;
            }
            Params trial{std::clamp(p[0] + step[0], 0.0, 1.0), std::clamp(p[1] + step[1], 0.0, 1.0), std::clamp(p[2] + step[2], pb.u_lo, pb.u_hi),
                         std::clamp(p[3] + step[3], pb.v_lo, pb.v_hi)};
            const double tc = cost(pb, trial);
            if (tc < c) {
                const double gain = c - tc;
                p = trial;
                improved = true;
                mu = std::max(mu / 3.0, 1e-15);
                if (gain <= 1e-16 * (c + 1e-300) + 1e-32) {
                    return p;
                }
                c = tc;
            } else {
                mu *= 4.0;
            }
        }
        if (!improved) {
            break;
        }
    }
    return p;
}

}  // namespace

FitResult fit_response(std::span<const double> omega_bars, std::span<const double> values) {
    if (omega_bars.size() != values.size()) {
        throw std::invalid_argument("fit needs one value per frequency");
    }
    std::vector<double> distinct(omega_bars.begin(), omega_bars.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 5) {
        throw std::invalid_argument("fit needs at least 5 distinct frequencies");
    }
    if (distinct.front() <= 0.0) {
        throw std::invalid_argument("fit frequencies must be positive");
    }

    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    FitResult fit;
    if (*mx - *mn < 0.02) {
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) {
            ss += (v - mean) * (v - mean);
        }
        fit.p0 = mean;
        fit.p_inf = mean;
        fit.omega_bar_c = std::numeric_limits<double>::quiet_NaN();
        fit.lambda = std::numeric_limits<double>::quiet_NaN();
        fit.residual = std::sqrt(ss / static_cast<double>(values.size()));
        fit.identifiable = false;
        return fit;
    }

    Problem pb;
    for (std::size_t i = 0; i < values.size(); ++i) {
        pb.x.push_back(std::log(omega_bars[i]));
        pb.y.push_back(values[i]);
    }
    const double x_lo = std::log(distinct.front());
    const double x_hi = std::log(distinct.back());
    pb.u_lo = x_lo - std::log(1000.0);
    pb.u_hi = x_hi + std::log(1000.0);
    pb.v_lo = std::log(0.01);
    pb.v_hi = std::log(50.0);

    // Endpoint levels seed P0 / P_inf.
    const auto lo_it = std::min_element(omega_bars.begin(), omega_bars.end());
    const auto hi_it = std::max_element(omega_bars.begin(), omega_bars.end());
    const double p0_start = values[static_cast<std::size_t>(lo_it - omega_bars.begin())];
    const double pinf_start = values[static_cast<std::size_t>(hi_it - omega_bars.begin())];

    constexpr int kCutoffStarts = 9;
    const double u_start_lo = x_lo - std::log(10.0);
    const double u_start_hi = x_hi + std::log(10.0);
    Params best{};
    double best_cost = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kCutoffStarts; ++k) {
        const double u = u_start_lo + (u_start_hi - u_start_lo) * k / (kCutoffStarts - 1);
        for (double lam : {0.25, 0.5, 1.0, 2.0, 4.0}) {
            const Params p = levenberg_marquardt(
                pb, {std::clamp(p0_start, 0.0, 1.0), std::clamp(pinf_start, 0.0, 1.0), u, std::log(lam)});
            const double c = cost(pb, p);
            if (c < best_cost) {
                best_cost = c;
                best = p;
            }
        }
    }
    fit.p0 = best[0];
    fit.p_inf = best[1];
    fit.omega_bar_c = std::exp(best[2]);
    fit.lambda = std::exp(best[3]);
    fit.residual = std::sqrt(best_cost / static_cast<double>(values.size()));
    fit.monotone = fit.p0 >= fit.p_inf;
    return fit;
}

FitResult fit_response(const ResponseCurve& curve, Metric metric) {
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& p : curve.points) {
        x.push_back(p.omega_bar);
        y.push_back(p.mean(metric));
    }
    return fit_response(x, y);
}

double cutoff_scaling_check(const FitResult& homogeneous, const FitResult& heterogeneous) {
    if (!homogeneous.identifiable || !heterogeneous.identifiable) {
        throw std::invalid_argument("cutoff scaling needs two identifiable fits");
    }
    return heterogeneous.omega_bar_c / homogeneous.omega_bar_c;
}

double predicted_cutoff_ratio(const SwarmComposition& composition) {
    return mean_speed(composition) / composition.v0;
}

void write_sweep_csv(std::ostream& out, const ResponseCurve& curve) {
    out << "omega_bar,metric,mean,std,n_seeds\n";
    for (Metric m : {Metric::tessellation, Metric::coverage}) {
        for (const auto& p : curve.points) {
            out << fmt_num(p.omega_bar) << ',' << metric_name(m) << ',' << fmt_num(p.mean(m)) << ','
                << fmt_num(p.stddev(m)) << ',' << p.n_seeds << '\n';
        }
    }
}

void write_fit_record(std::ostream& out, const FitResult& fit, Metric metric) {
    out << "metric=" << metric_name(metric) << '\n'
        << "P0=" << fmt_num(fit.p0) << '\n'
        << "P_inf=" << fmt_num(fit.p_inf) << '\n'
        << "omega_bar_c=" << fmt_num(fit.omega_bar_c) << '\n'
        << "lambda=" << fmt_num(fit.lambda) << '\n'
        << "residual=" << fmt_num(fit.residual) << '\n'
        << "identifiable=" << (fit.identifiable ? "true" : "false") << '\n'
        << "monotone=" << (fit.monotone ? "true" : "false") << '\n';
}

}  // namespace swarmcov
