#include "swarmcov/area_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace swarmcov {

namespace {

constexpr double kUnitTolerance = 1e-9;

void require_unit(Vec2 v, const char* what) {
    if (!(std::abs(norm(v) - 1.0) <= kUnitTolerance)) {
        throw std::invalid_argument(std::string(what) + " must be a unit vector");
    }
}

}  // namespace

TargetAreaSpec::TargetAreaSpec(double r0, double alpha, Vec2 e_hat)
    : r0_(r0), alpha_(alpha), e_hat_(e_hat) {
    if (!(r0 > 0.0) || !std::isfinite(r0)) {
        throw std::invalid_argument("R0 must be positive and finite");
    }
    if (!(alpha >= 0.0 && alpha <= 2.0)) {
        throw std::invalid_argument("alpha must lie in [0, 2]");
    }
    require_unit(e_hat, "principal axis");
    half_scale_ = 0.5 * r0 / std::sqrt(1.0 + alpha / 2.0 + 11.0 * alpha * alpha / 32.0);
}

double TargetAreaSpec::surface() const { return std::numbers::pi * r0_ * r0_; }

double boundary_radius(const TargetAreaSpec& spec, Vec2 r_hat) {
    require_unit(r_hat, "direction");
    const double c = dot(r_hat, spec.e_hat());
    return std::max(0.0, spec.radius_for_projection(c * c));
}

double signed_field(const TargetAreaSpec& spec, Vec2 r) {
    const double r2 = norm2(r);
    if (r2 == 0.0) {
        const double rmax = spec.max_radius();
        return -rmax * rmax;
    }
    const double c = dot(r, spec.e_hat());
    const double radius = spec.radius_for_projection(c * c / r2);
    return r2 - radius * radius;
}

Vec2 field_gradient(const TargetAreaSpec& spec, Vec2 r) {
    const double r2 = norm2(r);
    if (r2 == 0.0) {
        return {};
    }
    const double rn = std::sqrt(r2);
    const Vec2 r_hat = r / rn;
    const Vec2 e = spec.e_hat();
    const double c = dot(r_hat, e);
    const Vec2 e_perp = e - c * r_hat;
    const double radius = spec.radius_for_projection(c * c);
    // grad R = 6 alpha c half_scale e_perp / r, and 12 half_scale = 6 R0 / sqrt(norm).
    return 2.0 * r - (12.0 * spec.alpha() * spec.half_scale() * radius / rn * c) * e_perp;
}

double region_area(const TargetAreaSpec& spec, int resolution) {
    if (resolution < 64) {
        throw std::invalid_argument("region_area needs resolution >= 64");
    }
    const double half = 2.0 * spec.r0();
    const double h = 2.0 * half / resolution;
    long long inside = 0;
    for (int iy = 0; iy < resolution; ++iy) {
        const double y = -half + (iy + 0.5) * h;
        for (int ix = 0; ix < resolution; ++ix) {
            const double x = -half + (ix + 0.5) * h;
            if (signed_field(spec, {x, y}) < 0.0) {
                ++inside;
            }
        }
    }
    return static_cast<double>(inside) * h * h;
}

void ShapeSchedule::validate() const {
    if (!(omega >= 0.0) || !std::isfinite(omega)) {
        throw std::invalid_argument("omega must be finite and >= 0");
    }
    require_unit(e_hat, "principal axis");
}

double alpha_at(const ShapeSchedule& schedule, double t) {
    return std::clamp(1.0 - std::cos(schedule.omega * t), 0.0, 2.0);
}

}  // namespace swarmcov
