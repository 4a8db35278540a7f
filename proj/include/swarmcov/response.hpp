#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "swarmcov/metrics.hpp"
#include "swarmcov/sim_engine.hpp"

namespace swarmcov {

enum class Metric { tessellation, coverage };

const char* metric_name(Metric m);  // "P_T" / "P_C"

struct PerformanceAverage {
    double mean_p_t = 0.0;
    double mean_p_c = 0.0;
    std::size_t samples = 0;    // snapshots that contributed
    std::size_t undefined = 0;  // snapshots skipped for an empty region
};

// Mean of both metrics over every recorded snapshot, each scored with the
// snapshot's own alpha. Throws std::invalid_argument if no snapshot is usable.
PerformanceAverage time_average_performance(const Trajectory& trajectory, double r0, Vec2 e_hat,
                                            const MetricsConfig& config);

struct ResponsePoint {
    double omega_bar = 0.0;
    double mean_p_t = 0.0;
    double mean_p_c = 0.0;
    double std_p_t = 0.0;
    double std_p_c = 0.0;
    std::size_t n_seeds = 0;  // seeds that completed

    double mean(Metric m) const { return m == Metric::tessellation ? mean_p_t : mean_p_c; }
    double stddev(Metric m) const { return m == Metric::tessellation ? std_p_t : std_p_c; }
};

struct ResponseCurve {
    std::vector<ResponsePoint> points;  // increasing omega_bar
    double normalization_speed = 1.0;   // m/s
};

// Re-expresses the abscissa for another normalization speed:
// omega_bar' = omega_bar * old_speed / new_speed. The samples are unchanged.
ResponseCurve renormalized(const ResponseCurve& curve, double new_speed);

enum class Normalization { base_speed, mean_speed };

struct SweepSettings {
    std::vector<double> omega_bars;
    std::vector<std::uint64_t> seeds;
    Normalization normalization = Normalization::mean_speed;
    // Phase lower bounds in units of R0 / normalization_speed.
    double min_warmup = 200.0;
    double min_measure = 40.0;
    std::size_t max_snapshots = 300;  // per run
    unsigned workers = 1;
};

// Default grid: 10 log-spaced points over [0.03, 30].
std::vector<double> default_omega_bars();
std::vector<double> log_space(double lo, double hi, std::size_t count);

struct SweepFailure {
    double omega_bar = 0.0;
    std::uint64_t seed = 0;
    std::string message;
};

struct SweepResult {
    ResponseCurve curve;
    std::vector<SweepFailure> failures;
    std::size_t jobs = 0;
};

// Speed used to turn omega_bar into omega for this composition.
double normalization_speed(const SwarmComposition& composition, Normalization normalization);

// The concrete run configuration for one (omega_bar, seed) job.
SimConfig sweep_job_config(const SimConfig& base, const SweepSettings& settings, double omega_bar,
                           std::uint64_t seed);

// Runs every (omega_bar, seed) job, averages per run over time and then over
// seeds. Failed jobs are recorded and skipped; points with no completed seed
// are dropped from the curve. Results do not depend on the worker count.
SweepResult frequency_sweep(const SimConfig& base, const MetricsConfig& metrics,
                            const SweepSettings& settings);

struct FitResult {
    double p0 = 0.0;
    double p_inf = 0.0;
    double omega_bar_c = 0.0;
    double lambda = 0.0;
    double residual = 0.0;  // RMS over the fitted points
    bool identifiable = true;
    bool monotone = true;   // P0 >= P_inf
};

// P(w) = (P0 wc^l + Pinf w^l) / (wc^l + w^l).
double response_model(double omega_bar, double p0, double p_inf, double omega_bar_c, double lambda);

// Least squares in log(omega_bar) via multi-start Levenberg-Marquardt.
// Throws std::invalid_argument with fewer than 5 distinct frequencies. Curves
// whose range is below 0.02 come back with identifiable = false.
FitResult fit_response(std::span<const double> omega_bars, std::span<const double> values);
FitResult fit_response(const ResponseCurve& curve, Metric metric);

// omega_c(het) / omega_c(hom) from two fits on the same normalization.
// Throws std::invalid_argument if either fit is unidentifiable.
double cutoff_scaling_check(const FitResult& homogeneous, const FitResult& heterogeneous);

// Predicted shift <v>/v0, which equals 1 + rho_F when v_F = 2 v0.
double predicted_cutoff_ratio(const SwarmComposition& composition);

// CSV with header omega_bar,metric,mean,std,n_seeds.
void write_sweep_csv(std::ostream& out, const ResponseCurve& curve);

// key=value record: metric, P0, P_inf, omega_bar_c, lambda, residual, identifiable.
void write_fit_record(std::ostream& out, const FitResult& fit, Metric metric);

}  // namespace swarmcov
