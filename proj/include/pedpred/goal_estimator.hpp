#pragma once

#include "pedpred/softdtw.hpp"
#include "pedpred/types.hpp"

namespace pedpred {

struct ExpertEntry {
    Trajectory normalized;  // start at origin
    Scalar distance = 0;
    int pool_index = -1;
};

/// The N pool trajectories most velocity-similar to a query, start-normalized
/// and sorted ascending by soft-DTW distance (ties by pool index).
struct ExpertRepository {
    std::vector<ExpertEntry> entries;
};

struct GoalCandidates {
    std::vector<Position2> centers;  // absolute world coordinates
};

struct KMeansOptions {
    int max_iters = 100;
    int restarts = 8;
};

/// Training trajectories with their velocity profiles computed once; the
/// repository is rebuilt per query against this cache.
struct ExpertPool {
    std::vector<Trajectory> trajectories;
    std::vector<PointSeq> velocity_profiles;

    static ExpertPool from(std::vector<Trajectory> trajs);
    std::size_t size() const { return trajectories.size(); }
};

ExpertRepository build_repository(const Trajectory& query_obs, const ExpertPool& pool, int n_experts,
                                  const SoftDtwParams& params, int threads = 1);

ExpertRepository build_repository(const Trajectory& query_obs, const std::vector<Trajectory>& pool,
                                  int n_experts, const SoftDtwParams& params, int threads = 1);

/// Seeded k-means++ plus Lloyd iterations; deterministic given seed. When K
/// exceeds the distinct point count the distinct points are returned first and
/// the remaining slots repeat them in first-occurrence order.
std::vector<Position2> kmeans(const std::vector<Position2>& points, int k, std::uint64_t seed,
                              const KMeansOptions& opts = {}, std::vector<Scalar>* wcss_history = nullptr);

GoalCandidates estimate_goals(const Trajectory& query_obs, const ExpertPool& pool, int n_experts,
                              int k_candidates, std::uint64_t seed, const SoftDtwParams& params,
                              const KMeansOptions& opts = {}, int threads = 1);

GoalCandidates estimate_goals(const Trajectory& query_obs, const std::vector<Trajectory>& pool,
                              int n_experts, int k_candidates, std::uint64_t seed,
                              const SoftDtwParams& params, const KMeansOptions& opts = {},
                              int threads = 1);

Position2 select_oracle_goal(const GoalCandidates& candidates, const Position2& gt_endpoint);

}  // namespace pedpred
