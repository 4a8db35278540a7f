#include "swarmcov/control_law.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swarmcov {

void ControlParams::validate() const {
    if (!(d >= 2.0) || !(a_r > 0.0) || !(beta > 0.0) || !std::isfinite(a_r) ||
        !std::isfinite(beta) || !std::isfinite(d)) {
        throw std::invalid_argument("control params need d >= 2, a_R > 0, beta > 0");
    }
}

ControlParams default_params(double surface, std::size_t n_agents) {
    if (!(surface > 0.0) || n_agents == 0) {
        throw std::invalid_argument("default_params needs S > 0 and N >= 1");
    }
    return ControlParams{
        .d = 6.0,
        .a_r = 0.38 * std::sqrt(surface / static_cast<double>(n_agents)),
        .beta = 40.0 / surface,
    };
}

Neighbor make_neighbor(std::size_t id_i, Vec2 pos_i, std::size_t id_j, Vec2 pos_j,
                       std::size_t n_agents, double a_r) {
    const Vec2 delta = pos_j - pos_i;
    const double dist = norm(delta);
    if (dist > 0.0) {
        return {delta, dist};
    }
    const double eps = 1e-6 * a_r;
    const std::size_t low = std::min(id_i, id_j);
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(low) /
                         static_cast<double>(std::max<std::size_t>(n_agents, 1));
    // Lower id sees the other one at +u, the higher id sees it at -u.
    const Vec2 u = unit_from_angle(angle);
    const double sign = id_i <= id_j ? 1.0 : -1.0;
    return {sign * eps * u, eps};
}

double stable_sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Vec2 geofence_term(double field_value, Vec2 field_grad, const ControlParams& params) {
    const double g = norm(field_grad);
    if (g == 0.0) {
        return {};
    }
    Vec2 t = (-stable_sigmoid(params.beta * field_value) / g) * field_grad;
    // Rounding in the normalization can leave |t| one ulp above a saturated sigmoid.
    while (norm(t) > 1.0) {
        t = t * (1.0 - 0x1.0p-53);
    }
    return t;
}

Vec2 repulsion_term(const ControlParams& params, std::span<const Neighbor> neighbors) {
    Vec2 sum;
    const bool sixth = params.d == 6.0;
    for (const auto& nb : neighbors) {
        double w;
        if (sixth) {
            const double q = params.a_r * params.a_r / (nb.distance * nb.distance);
            w = q * q * q;
        } else {
            w = std::pow(params.a_r / nb.distance, params.d);
        }
        sum += (w / nb.distance) * nb.displacement;
    }
    return -sum;
}

Vec2 coverage_target(double field_value, Vec2 field_grad, const ControlParams& params,
                     std::span<const Neighbor> neighbors) {
    return geofence_term(field_value, field_grad, params) + repulsion_term(params, neighbors);
}

Vec2 velocity_command(const AgentState& agent, Vec2 target) {
    const double t = norm(target);
    if (t <= 1.0) {
        return agent.v0 * target;
    }
    return (agent.v0 / t) * target;
}

}  // namespace swarmcov
