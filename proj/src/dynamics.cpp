#include "pedpred/dynamics.hpp"

#include <cmath>

namespace pedpred {

Mat2 assemble_pd(const PdMatrixParams& params, Scalar sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("assemble_pd: sigma must be > 0");
    if (!std::isfinite(params.a) || !std::isfinite(params.b) || !std::isfinite(params.c)) {
        throw std::invalid_argument("assemble_pd: non-finite matrix parameters");
    }
    Mat2 p;
    p(0, 0) = params.a * params.a + sigma;
    p(0, 1) = params.a * params.b;
    p(1, 0) = p(0, 1);
    p(1, 1) = params.b * params.b + params.c * params.c + sigma;
    return p;
}

Position2 advance_toward_goal(const Position2& p, const Position2& goal, const Mat2& P,
                              const DynamicsConfig& cfg) {
    const Scalar dist = (p - goal).norm();
    if (dist <= cfg.goal_epsilon) return p;
    const Velocity2 v = natural_gradient_velocity(p, goal, P, cfg);
    if (cfg.dt * v.norm() >= dist) return goal;
    return euler_step(p, v, cfg.dt);
}

Trajectory rollout(const Position2& start, const Position2& goal,
                   const std::function<PdMatrixParams(int)>& field, int steps, const DynamicsConfig& cfg) {
    if (steps < 1) throw std::invalid_argument("rollout: steps must be >= 1");
    Trajectory traj;
    traj.positions.resize(steps + 1, 2);
    Position2 p = start;
    traj.positions.row(0) = p.transpose();
    for (int k = 0; k < steps; ++k) {
        p = advance_toward_goal(p, goal, assemble_pd(field(k), cfg.sigma), cfg);
        traj.positions.row(k + 1) = p.transpose();
    }
    return traj;
}

}  // namespace pedpred
