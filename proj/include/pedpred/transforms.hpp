#pragma once

#include "pedpred/types.hpp"

namespace pedpred {

/// Per-frame displacements: row t is positions[t+1] - positions[t].
inline PointSeq velocity_profile(const PointSeq& positions) {
    const auto n = positions.rows();
    if (n < 2) throw std::invalid_argument("velocity_profile: trajectory needs at least 2 positions");
    return positions.bottomRows(n - 1) - positions.topRows(n - 1);
}

inline PointSeq velocity_profile(const Trajectory& traj) { return velocity_profile(traj.positions); }

/// Translates every position by -goal (endpoint maps to the origin when the
/// goal is the trajectory's final position).
inline Trajectory goal_shift(Trajectory traj, const Position2& goal) {
    traj.positions.rowwise() -= goal.transpose();
    return traj;
}

/// Translates so the first position is the origin.
inline Trajectory normalize_start(Trajectory traj) {
    if (traj.positions.rows() == 0) throw std::invalid_argument("normalize_start: empty trajectory");
    const Eigen::RowVector2d origin = traj.positions.row(0);
    traj.positions.rowwise() -= origin;
    return traj;
}

std::vector<SceneWindow> window_scenes(const Dataset& ds, int t_obs, int t_end, int stride);

}  // namespace pedpred
