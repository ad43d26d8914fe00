#pragma once

#include "pedpred/model.hpp"

namespace pedpred {

/// One rolled-out future per pedestrian (t_end - t_obs predicted positions,
/// absolute coordinates), tagged with the goals and noise seed used.
struct PredictionSample {
    std::vector<Trajectory> futures;
    std::vector<Position2> goals;
    std::uint64_t noise_seed = 0;
};

struct SamplerOptions {
    bool goal_shift_enabled = true;
    bool stable_dynamics_enabled = true;
};

/// Draws n futures for every pedestrian in the window. Each draw uses a fresh
/// noise vector; the goal-shifted history (observed plus predicted so far)
/// feeds the model and the final step's output advances the position through
/// the velocity law.
std::vector<PredictionSample> sample_predictions(const SceneWindow& window, const ModelParams& params,
                                                 const std::vector<Position2>& goals, int n,
                                                 std::uint64_t seed, const DynamicsConfig& dyn,
                                                 const SamplerOptions& opts = {});

/// True when the distance to the goal is non-increasing along the future.
bool respects_descent(const Trajectory& future, const Position2& start, const Position2& goal, Scalar tol = 1e-9);

}  // namespace pedpred
