#pragma once

#include "swarmcov/vec2.hpp"

namespace swarmcov {

// Parametric target region {r : A(r) < 0} with
//   A(r) = r^2 - R(r_hat)^2,
//   R(r_hat) = (R0/2) (2 - alpha + 3 alpha (r_hat . e)^2) / sqrt(1 + alpha/2 + 11 alpha^2 / 32).
// The normalization keeps the enclosed area at pi R0^2 for every alpha in [0, 2]:
// a disk at alpha = 0, two lobes at alpha = 1, a dumbbell pinched at the origin at alpha = 2.
class TargetAreaSpec {
public:
    // Throws std::invalid_argument if R0 <= 0, alpha outside [0, 2] or |e_hat| != 1.
    TargetAreaSpec(double r0, double alpha, Vec2 e_hat = {1.0, 0.0});

    double r0() const { return r0_; }
    double alpha() const { return alpha_; }
    Vec2 e_hat() const { return e_hat_; }
    double surface() const;  // pi R0^2

    TargetAreaSpec with_alpha(double alpha) const { return {r0_, alpha, e_hat_}; }

    // R(r_hat) for a squared projection c2 = (r_hat . e)^2, skipping the unit-vector check.
    double radius_for_projection(double c2) const {
        return half_scale_ * (2.0 - alpha_ + 3.0 * alpha_ * c2);
    }
    double half_scale() const { return half_scale_; }
    // Largest boundary radius over all directions.
    double max_radius() const { return half_scale_ * (2.0 + 2.0 * alpha_); }

private:
    double r0_;
    double alpha_;
    Vec2 e_hat_;
    double half_scale_;  // (R0/2) / sqrt(1 + alpha/2 + 11 alpha^2/32)
};

// Boundary radius along the unit direction r_hat. Throws std::invalid_argument
// when |r_hat| differs from 1 by more than 1e-9.
double boundary_radius(const TargetAreaSpec& spec, Vec2 r_hat);

// A(r) in m^2. At the origin, where r_hat is undefined, returns -max_radius()^2.
double signed_field(const TargetAreaSpec& spec, Vec2 r);

// Analytic grad A(r) = 2 r - 6 alpha R0 (R / r)(r_hat . e) e_perp / sqrt(1 + alpha/2 + 11 alpha^2/32)
// with e_perp = e - (r_hat . e) r_hat, in m. Zero at the origin.
Vec2 field_gradient(const TargetAreaSpec& spec, Vec2 r);

// Grid estimate of the region area: counts cell centers with A < 0 on
// [-2R0, 2R0]^2 split into resolution x resolution cells. resolution >= 64.
double region_area(const TargetAreaSpec& spec, int resolution);

// Cyclic deformation alpha(t) = 1 - cos(omega t), always in [0, 2].
struct ShapeSchedule {
    double omega = 0.0;  // rad/s
    Vec2 e_hat{1.0, 0.0};

    // Throws std::invalid_argument for omega < 0 or a non-unit axis.
    void validate() const;
};

double alpha_at(const ShapeSchedule& schedule, double t);

}  // namespace swarmcov
