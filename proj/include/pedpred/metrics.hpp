#pragma once

#include "pedpred/sampler.hpp"
#include "pedpred/types.hpp"

namespace pedpred {

/// Mean Euclidean error over the predicted steps t_obs+1..t_end.
Scalar ade(const Trajectory& pred, const Trajectory& gt, int t_obs, int t_end);

/// Euclidean error at t_end only.
Scalar fde(const Trajectory& pred, const Trajectory& gt, int t_end);

struct BestOfResult {
    Scalar min_ade = 0;
    Scalar min_fde = 0;
};

/// Per pedestrian, the minimum ADE and (independently) minimum FDE over the
/// samples, averaged over pedestrians. Sample futures are composed with the
/// window's observed prefix before scoring.
BestOfResult best_of_n(const std::vector<PredictionSample>& samples, const SceneWindow& gt);

/// Observed prefix of gt joined with a predicted future.
Trajectory compose_prediction(const Trajectory& gt, const Trajectory& future, int t_obs);

}  // namespace pedpred
