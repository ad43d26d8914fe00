#pragma once

#include "pedpred/types.hpp"

#include <functional>

namespace pedpred {

/// Entries of the lower-triangular factor [[a, 0], [b, c]].
struct PdMatrixParams {
    Scalar a = 0;
    Scalar b = 0;
    Scalar c = 0;
};

struct DynamicsConfig {
    Scalar sigma = 1e-8;
    Scalar goal_epsilon = 1e-6;
    Scalar dt = 1.0;  // frame-steps; velocities are per-frame displacements
};

/// Lyapunov candidate: Euclidean distance to the goal.
inline Scalar attractor_value(const Position2& p, const Position2& goal) { return (p - goal).norm(); }

/// Gradient of the attractor, defined as zero inside an eps ball so the goal
/// is an explicit equilibrium.
inline Velocity2 attractor_gradient(const Position2& p, const Position2& goal, Scalar eps) {
    const Vec2 diff = p - goal;
    const Scalar n = diff.norm();
    if (n <= eps) return Velocity2::Zero();
    return diff / n;
}

/// P = L L^T + sigma I, positive definite for any (a, b, c).
Mat2 assemble_pd(const PdMatrixParams& params, Scalar sigma);

/// v = -P grad(attractor); zero exactly at the equilibrium.
inline Velocity2 natural_gradient_velocity(const Position2& p, const Position2& goal, const Mat2& P,
                                           const DynamicsConfig& cfg) {
    return -(P * attractor_gradient(p, goal, cfg.goal_epsilon));
}

inline Position2 euler_step(const Position2& p, const Velocity2& v, Scalar dt) { return p + dt * v; }

/// One velocity-law step. A step that would carry past the goal lands exactly
/// on it (the equilibrium is absorbing, never orbited); within goal_epsilon
/// the position freezes.
Position2 advance_toward_goal(const Position2& p, const Position2& goal, const Mat2& P,
                              const DynamicsConfig& cfg);

/// Forward-Euler integration of the velocity law. The supplier provides the
/// matrix-field parameters for each step; once within goal_epsilon of the
/// goal the trajectory freezes there.
Trajectory rollout(const Position2& start, const Position2& goal,
                   const std::function<PdMatrixParams(int)>& field, int steps, const DynamicsConfig& cfg);

}  // namespace pedpred
