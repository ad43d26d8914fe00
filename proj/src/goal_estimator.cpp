#include "pedpred/goal_estimator.hpp"

#include "pedpred/parallel.hpp"
#include "pedpred/rng.hpp"
#include "pedpred/transforms.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

namespace pedpred {

ExpertPool ExpertPool::from(std::vector<Trajectory> trajs) {
    ExpertPool pool;
    pool.velocity_profiles.reserve(trajs.size());
    for (const auto& t : trajs) pool.velocity_profiles.push_back(velocity_profile(t));
    pool.trajectories = std::move(trajs);
    return pool;
}

ExpertRepository build_repository(const Trajectory& query_obs, const ExpertPool& pool, int n_experts,
                                  const SoftDtwParams& params, int threads) {
    if (pool.size() == 0) throw EmptyRepositoryError("build_repository: empty trajectory pool");
    if (query_obs.length() < 2) throw std::invalid_argument("build_repository: query needs >= 2 positions");
    if (n_experts < 1) throw std::invalid_argument("build_repository: n_experts must be >= 1");

    const PointSeq qv = velocity_profile(query_obs);
    const int match_len = static_cast<int>(qv.rows());

    std::vector<Scalar> dist(pool.size());
    parallel_for(static_cast<int>(pool.size()), threads, [&](int i) {
        const PointSeq& cv = pool.velocity_profiles[i];
        if (cv.rows() < match_len) {
            throw std::invalid_argument("build_repository: pool trajectory shorter than query prefix");
        }
        dist[i] = soft_dtw(qv, cv.topRows(match_len), params);
    });

    std::vector<int> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b;
    });

    ExpertRepository repo;
    const int keep = std::min<int>(n_experts, static_cast<int>(pool.size()));
    repo.entries.reserve(keep);
    for (int r = 0; r < keep; ++r) {
        const int idx = order[r];
        repo.entries.push_back({normalize_start(pool.trajectories[idx]), dist[idx], idx});
    }
    return repo;
}

ExpertRepository build_repository(const Trajectory& query_obs, const std::vector<Trajectory>& pool,
                                  int n_experts, const SoftDtwParams& params, int threads) {
    if (pool.empty()) throw EmptyRepositoryError("build_repository: empty trajectory pool");
    return build_repository(query_obs, ExpertPool::from(pool), n_experts, params, threads);
}

namespace {

Scalar wcss(const std::vector<Position2>& pts, const std::vector<Position2>& centers,
            const std::vector<int>& assign) {
    Scalar total = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) total += (pts[i] - centers[assign[i]]).squaredNorm();
    return total;
}

int nearest_center(const Position2& p, const std::vector<Position2>& centers) {
    int best = 0;
    Scalar best_d = std::numeric_limits<Scalar>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const Scalar d = (p - centers[c]).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

struct LloydResult {
    std::vector<Position2> centers;
    Scalar wcss = std::numeric_limits<Scalar>::infinity();
    std::vector<Scalar> history;
};

LloydResult lloyd_run(const std::vector<Position2>& pts, int k, Rng& rng, int max_iters) {
    LloydResult res;
    // k-means++ seeding
    res.centers.push_back(pts[rng.uniform_int(pts.size())]);
    std::vector<Scalar> d2(pts.size());
    while (static_cast<int>(res.centers.size()) < k) {
        Scalar total = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            Scalar best = std::numeric_limits<Scalar>::infinity();
            for (const auto& c : res.centers) best = std::min(best, (pts[i] - c).squaredNorm());
            d2[i] = best;
            total += best;
        }
        std::size_t pick;
        if (total <= 0) {
            pick = rng.uniform_int(pts.size());
        } else {
            const Scalar target = rng.uniform() * total;
            Scalar acc = 0;
            pick = pts.size() - 1;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        }
        res.centers.push_back(pts[pick]);
    }

    std::vector<int> assign(pts.size(), -1);
    Scalar prev_wcss = std::numeric_limits<Scalar>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const int c = nearest_center(pts[i], res.centers);
            if (c != assign[i]) {
                assign[i] = c;
                changed = true;
            }
        }
        const Scalar cur = wcss(pts, res.centers, assign);
        assert(cur <= prev_wcss * (1 + 1e-12) + 1e-12);
        prev_wcss = cur;
        res.history.push_back(cur);
        if (!changed && iter > 0) break;

        std::vector<Position2> sums(res.centers.size(), Position2::Zero());
        std::vector<int> counts(res.centers.size(), 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            sums[assign[i]] += pts[i];
            counts[assign[i]] += 1;
        }
        for (std::size_t c = 0; c < res.centers.size(); ++c) {
            if (counts[c] > 0) res.centers[c] = sums[c] / counts[c];
            // empty clusters keep their previous center
        }
        if (!changed) break;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) assign[i] = nearest_center(pts[i], res.centers);
    res.wcss = wcss(pts, res.centers, assign);
    return res;
}

}  // namespace

std::vector<Position2> kmeans(const std::vector<Position2>& points, int k, std::uint64_t seed,
                              const KMeansOptions& opts, std::vector<Scalar>* wcss_history) {
    if (points.empty()) throw std::invalid_argument("kmeans: empty point set");
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");

    // distinct points in first-occurrence order
    std::vector<Position2> distinct;
    for (const auto& p : points) {
        bool seen = false;
        for (const auto& q : distinct) {
            if (p == q) {
                seen = true;
                break;
            }
        }
        if (!seen) distinct.push_back(p);
    }
    if (static_cast<int>(distinct.size()) <= k) {
        std::vector<Position2> centers = distinct;
        for (std::size_t i = centers.size(); i < static_cast<std::size_t>(k); ++i) {
            centers.push_back(distinct[(i - distinct.size()) % distinct.size()]);
        }
        if (wcss_history) wcss_history->assign(1, 0.0);
        return centers;
    }

    LloydResult best;
    const int restarts = std::max(1, opts.restarts);
    for (int r = 0; r < restarts; ++r) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r), 0x6b6d65616e73ULL));
        LloydResult run = lloyd_run(points, k, rng, opts.max_iters);
        if (run.wcss < best.wcss) best = std::move(run);
    }
    if (wcss_history) *wcss_history = best.history;
    return best.centers;
}

GoalCandidates estimate_goals(const Trajectory& query_obs, const ExpertPool& pool, int n_experts,
                              int k_candidates, std::uint64_t seed, const SoftDtwParams& params,
                              const KMeansOptions& opts, int threads) {
    const ExpertRepository repo = build_repository(query_obs, pool, n_experts, params, threads);
    std::vector<Position2> endpoints;
    endpoints.reserve(repo.entries.size());
    for (const auto& e : repo.entries) endpoints.push_back(e.normalized.last());

    const std::vector<Position2> centers = kmeans(endpoints, k_candidates, seed, opts);
    GoalCandidates out;
    out.centers.reserve(centers.size());
    const Position2 origin = query_obs.first();
    for (const auto& c : centers) out.centers.push_back(c + origin);
    return out;
}

GoalCandidates estimate_goals(const Trajectory& query_obs, const std::vector<Trajectory>& pool,
                              int n_experts, int k_candidates, std::uint64_t seed,
                              const SoftDtwParams& params, const KMeansOptions& opts, int threads) {
    return estimate_goals(query_obs, ExpertPool::from(pool), n_experts, k_candidates, seed, params, opts,
                          threads);
}

Position2 select_oracle_goal(const GoalCandidates& candidates, const Position2& gt_endpoint) {
    if (candidates.centers.empty()) throw std::invalid_argument("select_oracle_goal: no candidates");
    int best = 0;
    Scalar best_d = std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < candidates.centers.size(); ++i) {
        const Scalar d = (candidates.centers[i] - gt_endpoint).norm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return candidates.centers[best];
}

}  // namespace pedpred
