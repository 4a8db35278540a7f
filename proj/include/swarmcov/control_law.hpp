#pragma once

#include <cstddef>
#include <span>

#include "swarmcov/vec2.hpp"

namespace swarmcov {

struct ControlParams {
    double d = 6.0;      // repulsion power, >= 2
    double a_r = 1.0;    // repulsion strength (m), > 0
    double beta = 1.0;   // fence steepness (1/m^2), > 0

    void validate() const;
};

// d = 6, a_R = 0.38 sqrt(S/N), beta = 40/S. Throws for S <= 0 or N == 0.
ControlParams default_params(double surface, std::size_t n_agents);

struct AgentState {
    std::size_t id = 0;
    Vec2 position;
    double v0 = 1.0;  // maximum speed (m/s)
};

// One neighbor j seen from agent i: displacement r_j - r_i and its length.
struct Neighbor {
    Vec2 displacement;
    double distance = 0.0;
};

// Builds the neighbor entry for the ordered pair (i, j). Coincident agents are
// separated by a clamped distance of 1e-6 a_R along the direction at angle
// 2 pi min(id_i, id_j) / n, signed so that the two views are antisymmetric.
Neighbor make_neighbor(std::size_t id_i, Vec2 pos_i, std::size_t id_j, Vec2 pos_j,
                       std::size_t n_agents, double a_r);

// Logistic 1 / (1 + exp(-z)) without overflow for large |z|.
double stable_sigmoid(double z);

// Geofencing term sigma(beta A) (-grad A / |grad A|); zero where grad A vanishes.
Vec2 geofence_term(double field_value, Vec2 field_grad, const ControlParams& params);

// Repulsion -sum_j (a_R / r_ij)^d r_ij / r_ij.
Vec2 repulsion_term(const ControlParams& params, std::span<const Neighbor> neighbors);

// Area coverage target T: geofencing attraction plus pairwise repulsion.
Vec2 coverage_target(double field_value, Vec2 field_grad, const ControlParams& params,
                     std::span<const Neighbor> neighbors);

// Speed-saturated command v0 T / max(1, |T|).
Vec2 velocity_command(const AgentState& agent, Vec2 target);

}  // namespace swarmcov
