#include "pedpred/metrics.hpp"

#include <limits>

namespace pedpred {

Scalar ade(const Trajectory& pred, const Trajectory& gt, int t_obs, int t_end) {
    if (pred.length() != t_end || gt.length() != t_end) {
        throw std::invalid_argument("ade: trajectories must have t_end positions");
    }
    if (!(t_obs < t_end)) throw std::invalid_argument("ade: t_obs must be < t_end");
    Scalar total = 0;
    for (int t = t_obs; t < t_end; ++t) total += (pred.at(t) - gt.at(t)).norm();
    return total / static_cast<Scalar>(t_end - t_obs);
}

Scalar fde(const Trajectory& pred, const Trajectory& gt, int t_end) {
    if (pred.length() != t_end || gt.length() != t_end) {
        throw std::invalid_argument("fde: trajectories must have t_end positions");
    }
    return (pred.at(t_end - 1) - gt.at(t_end - 1)).norm();
}

Trajectory compose_prediction(const Trajectory& gt, const Trajectory& future, int t_obs) {
    Trajectory full = gt;
    if (t_obs + future.length() != gt.length()) {
        throw std::invalid_argument("compose_prediction: future length mismatch");
    }
    full.positions.bottomRows(future.length()) = future.positions;
    return full;
}

BestOfResult best_of_n(const std::vector<PredictionSample>& samples, const SceneWindow& gt) {
    if (samples.empty()) throw std::invalid_argument("best_of_n: empty sample list");
    const int m = gt.pedestrians();
    BestOfResult out;
    for (int i = 0; i < m; ++i) {
        Scalar best_ade = std::numeric_limits<Scalar>::infinity();
        Scalar best_fde = std::numeric_limits<Scalar>::infinity();
        for (const auto& s : samples) {
            const Trajectory pred = compose_prediction(gt.trajectories[i], s.futures[i], gt.t_obs);
            best_ade = std::min(best_ade, ade(pred, gt.trajectories[i], gt.t_obs, gt.t_end));
            best_fde = std::min(best_fde, fde(pred, gt.trajectories[i], gt.t_end));
        }
        out.min_ade += best_ade;
        out.min_fde += best_fde;
    }
    out.min_ade /= static_cast<Scalar>(m);
    out.min_fde /= static_cast<Scalar>(m);
    return out;
}

}  // namespace pedpred
