#include "swarmcov/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "swarmcov/csv.hpp"

namespace swarmcov {

void MetricsConfig::validate(double r0, double a_r) const {
    if (!(r_s > 0.0) || !std::isfinite(r_s)) {
        throw std::invalid_argument("sensing radius must be positive");
    }
    if (grid_resolution < 256) {
        throw std::invalid_argument("grid_resolution must be >= 256");
    }
    const double h = 4.0 * r0 / grid_resolution;
    if (!(h < r_s / 4.0) || !(h < a_r / 4.0)) {
        throw std::invalid_argument("grid too coarse: need h < R_s/4 and h < a_R/4");
    }
}

double default_sensor_radius(double surface, std::size_t n_agents) {
    if (!(surface > 0.0) || n_agents == 0) {
        throw std::invalid_argument("default_sensor_radius needs S > 0 and N >= 1");
    }
    return std::sqrt(surface / (std::numbers::pi * static_cast<double>(n_agents)));
}

MetricsEvaluator::MetricsEvaluator(double r0, Vec2 e_hat, const MetricsConfig& config)
    : config_(config), r0_(r0), e_hat_(e_hat) {
    if (!(r0 > 0.0)) {
        throw std::invalid_argument("R0 must be positive");
    }
    if (config.grid_resolution < 1 || !(config.r_s > 0.0)) {
        throw std::invalid_argument("bad metrics config");
    }
    const int res = config.grid_resolution;
    const double half = 2.0 * r0;
    h_ = 2.0 * half / res;
    const auto cells = static_cast<std::size_t>(res) * static_cast<std::size_t>(res);
    centers_.reserve(cells);
    r2_.reserve(cells);
    c2_.reserve(cells);
    for (int iy = 0; iy < res; ++iy) {
        const double y = -half + (iy + 0.5) * h_;
        for (int ix = 0; ix < res; ++ix) {
            const Vec2 c{-half + (ix + 0.5) * h_, y};
            const double r2 = norm2(c);
            const double proj = dot(c, e_hat);
            centers_.push_back(c);
            r2_.push_back(r2);
            c2_.push_back(r2 > 0.0 ? proj * proj / r2 : 1.0);
        }
    }
}

double MetricsEvaluator::region_area(double alpha) const {
    const TargetAreaSpec spec(r0_, alpha, e_hat_);
    std::size_t inside = 0;
    for (std::size_t k = 0; k < centers_.size(); ++k) {
        const double radius = spec.radius_for_projection(c2_[k]);
        inside += r2_[k] < radius * radius ? 1 : 0;
    }
    return static_cast<double>(inside) * h_ * h_;
}

std::optional<MetricSample> MetricsEvaluator::evaluate(std::span<const Vec2> positions,
                                                       double alpha) const {
    if (positions.empty()) {
        throw std::invalid_argument("metrics need at least one agent");
    }
    const TargetAreaSpec spec(r0_, alpha, e_hat_);
    const std::size_t n = positions.size();
    const double rs2 = config_.r_s * config_.r_s;

    std::vector<std::size_t> owned(n, 0);
    std::size_t inside = 0;
    std::size_t covered = 0;
    for (std::size_t k = 0; k < centers_.size(); ++k) {
        // Same test as signed_field < 0; cell centers never sit on the origin
        // for the even resolutions used here, and if they do the origin convention
        // (-max R^2) counts them inside.
        const double radius = r2_[k] > 0.0 ? spec.radius_for_projection(c2_[k]) : spec.max_radius();
        if (!(r2_[k] < radius * radius)) {
            continue;
        }
        ++inside;
        const Vec2 c = centers_[k];
        double best = std::numeric_limits<double>::infinity();
        std::size_t owner = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d2 = norm2(positions[i] - c);
            if (d2 < best) {
                best = d2;
                owner = i;
            }
        }
        ++owned[owner];
        covered += best <= rs2 ? 1 : 0;
    }
    if (inside == 0) {
        return std::nullopt;
    }
    const std::size_t largest = *std::max_element(owned.begin(), owned.end());
    const double cell_area = h_ * h_;
    MetricSample s;
    s.alpha = alpha;
    s.a_lvc = static_cast<double>(largest) * cell_area;
    s.p_t = static_cast<double>(inside) / (static_cast<double>(largest) * static_cast<double>(n));
    s.p_c = static_cast<double>(covered) / static_cast<double>(inside);
    return s;
}

std::optional<std::pair<double, double>> tessellation_performance(
    std::span<const Vec2> positions, const TargetAreaSpec& spec, const MetricsConfig& config) {
    const MetricsEvaluator eval(spec.r0(), spec.e_hat(), config);
    const auto s = eval.evaluate(positions, spec.alpha());
    if (!s) {
        return std::nullopt;
    }
    return std::pair{s->p_t, s->a_lvc};
}

std::optional<double> coverage_performance(std::span<const Vec2> positions,
                                           const TargetAreaSpec& spec,
                                           const MetricsConfig& config) {
    const MetricsEvaluator eval(spec.r0(), spec.e_hat(), config);
    const auto s = eval.evaluate(positions, spec.alpha());
    if (!s) {
        return std::nullopt;
    }
    return s->p_c;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricSample> samples) {
    out << "t,alpha,P_T,P_C,A_LVC\n";
    for (const auto& s : samples) {
        out << fmt_num(s.t) << ',' << fmt_num(s.alpha) << ',' << fmt_num(s.p_t) << ','
            << fmt_num(s.p_c) << ',' << fmt_num(s.a_lvc) << '\n';
    }
}

}  // namespace swarmcov
