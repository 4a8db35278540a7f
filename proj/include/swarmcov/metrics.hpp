#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <utility>
#include <span>
#include <vector>

#include "swarmcov/area_model.hpp"
#include "swarmcov/vec2.hpp"

namespace swarmcov {

struct MetricsConfig {
    double r_s = 1.0;          // sensing disk radius (m)
    int grid_resolution = 256; // cells per axis over [-2R0, 2R0]^2

    // Throws std::invalid_argument unless r_s > 0, resolution >= 256 and the cell
    // size h = 4 R0 / resolution satisfies h < r_s / 4 and h < a_R / 4.
    void validate(double r0, double a_r) const;
};

struct MetricSample {
    double t = 0.0;
    double alpha = 0.0;
    double p_t = 0.0;    // A / (A_LVC N), in (0, 1]
    double p_c = 0.0;    // covered fraction, in [0, 1]
    double a_lvc = 0.0;  // largest nearest-agent cell (m^2)
};

// sqrt(S / (pi N)): N such disks have total area S.
double default_sensor_radius(double surface, std::size_t n_agents);

// Rasterized tessellation and coverage metrics. Cell centers and their polar
// projections are cached per (R0, e_hat, resolution), so one evaluator can
// score any number of snapshots whose alpha differs.
class MetricsEvaluator {
public:
    MetricsEvaluator(double r0, Vec2 e_hat, const MetricsConfig& config);

    double cell_size() const { return h_; }
    const MetricsConfig& config() const { return config_; }

    // Both metrics for one set of positions. Empty when no cell lies inside
    // the region. Nearest-agent ties go to the lowest index.
    std::optional<MetricSample> evaluate(std::span<const Vec2> positions, double alpha) const;

    // Number of in-region cells times h^2.
    double region_area(double alpha) const;

private:
    MetricsConfig config_;
    double r0_;
    Vec2 e_hat_;
    double h_;
    std::vector<Vec2> centers_;
    std::vector<double> r2_;
    std::vector<double> c2_;  // (r_hat . e)^2
};

// P_T and A_LVC; empty for an empty region. Throws if positions is empty.
std::optional<std::pair<double, double>> tessellation_performance(
    std::span<const Vec2> positions, const TargetAreaSpec& spec, const MetricsConfig& config);

// P_C; empty for an empty region. Throws if positions is empty.
std::optional<double> coverage_performance(std::span<const Vec2> positions,
                                           const TargetAreaSpec& spec,
                                           const MetricsConfig& config);

// CSV with header t,alpha,P_T,P_C,A_LVC.
void write_metrics_csv(std::ostream& out, std::span<const MetricSample> samples);

}  // namespace swarmcov
