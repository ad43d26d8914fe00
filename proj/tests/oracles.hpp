// Test-only reference implementations, kept independent of the library code
// paths they check.
#pragma once

#include "pedpred/types.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace oracles {

using pedpred::PointSeq;
using pedpred::Position2;
using pedpred::Scalar;

inline Scalar euclid(const PointSeq& x, int i, const PointSeq& y, int j, bool squared = false) {
    const Scalar dx = x(i, 0) - y(j, 0);
    const Scalar dy = x(i, 1) - y(j, 1);
    const Scalar d2 = dx * dx + dy * dy;
    return squared ? d2 : std::sqrt(d2);
}

// Exact DTW by exhaustive enumeration of monotone alignment paths
// (moves: right, down, diagonal), each path charged the cost of every
// visited cell.
inline void enumerate_paths(const PointSeq& x, const PointSeq& y, int i, int j, Scalar cost,
                            std::vector<Scalar>& path_costs, bool squared) {
    cost += euclid(x, i, y, j, squared);
    const int n = static_cast<int>(x.rows());
    const int m = static_cast<int>(y.rows());
    if (i == n - 1 && j == m - 1) {
        path_costs.push_back(cost);
        return;
    }
    if (i + 1 < n) enumerate_paths(x, y, i + 1, j, cost, path_costs, squared);
    if (j + 1 < m) enumerate_paths(x, y, i, j + 1, cost, path_costs, squared);
    if (i + 1 < n && j + 1 < m) enumerate_paths(x, y, i + 1, j + 1, cost, path_costs, squared);
}

inline std::vector<Scalar> alignment_path_costs(const PointSeq& x, const PointSeq& y, bool squared = false) {
    std::vector<Scalar> costs;
    enumerate_paths(x, y, 0, 0, 0.0, costs, squared);
    return costs;
}

inline Scalar exact_dtw(const PointSeq& x, const PointSeq& y, bool squared = false) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (const Scalar c : alignment_path_costs(x, y, squared)) best = std::min(best, c);
    return best;
}

// Soft-DTW over all paths: -gamma * log sum_paths exp(-cost/gamma).
inline Scalar soft_dtw_path_sum(const PointSeq& x, const PointSeq& y, Scalar gamma, bool squared = false) {
    const auto costs = alignment_path_costs(x, y, squared);
    Scalar m = std::numeric_limits<Scalar>::infinity();
    for (const Scalar c : costs) m = std::min(m, c);
    Scalar acc = 0;
    for (const Scalar c : costs) acc += std::exp(-(c - m) / gamma);
    return m - gamma * std::log(acc);
}

// Best within-cluster sum of squares over every assignment of n points to at
// most k clusters (k^n enumeration; keep n small).
inline Scalar best_partition_wcss(const std::vector<Position2>& pts, int k) {
    const int n = static_cast<int>(pts.size());
    Scalar best = std::numeric_limits<Scalar>::infinity();
    std::vector<int> assign(n, 0);
    long total = 1;
    for (int i = 0; i < n; ++i) total *= k;
    for (long code = 0; code < total; ++code) {
        long c = code;
        for (int i = 0; i < n; ++i) {
            assign[i] = static_cast<int>(c % k);
            c /= k;
        }
        Scalar wcss = 0;
        for (int g = 0; g < k; ++g) {
            Position2 mean = Position2::Zero();
            int count = 0;
            for (int i = 0; i < n; ++i) {
                if (assign[i] == g) {
                    mean += pts[i];
                    ++count;
                }
            }
            if (count == 0) continue;
            mean /= count;
            for (int i = 0; i < n; ++i) {
                if (assign[i] == g) wcss += (pts[i] - mean).squaredNorm();
            }
        }
        best = std::min(best, wcss);
    }
    return best;
}

inline Scalar wcss_of(const std::vector<Position2>& pts, const std::vector<Position2>& centers) {
    Scalar total = 0;
    for (const auto& p : pts) {
        Scalar best = std::numeric_limits<Scalar>::infinity();
        for (const auto& c : centers) best = std::min(best, (p - c).squaredNorm());
        total += best;
    }
    return total;
}

// Hand-stepped velocity-law iteration: P from (a, b, c), v = -P * unit(p - g),
// forward Euler with the land-on-goal rule. Written out long-hand on purpose.
inline std::vector<Position2> manual_rollout(Position2 p, const Position2& goal, Scalar a, Scalar b, Scalar c,
                                             Scalar sigma, Scalar eps, Scalar dt, int steps) {
    std::vector<Position2> out{p};
    const Scalar p11 = a * a + sigma;
    const Scalar p12 = a * b;
    const Scalar p22 = b * b + c * c + sigma;
    for (int k = 0; k < steps; ++k) {
        const Scalar dx = p(0) - goal(0);
        const Scalar dy = p(1) - goal(1);
        const Scalar dist = std::sqrt(dx * dx + dy * dy);
        if (dist > eps) {
            const Scalar gx = dx / dist;
            const Scalar gy = dy / dist;
            const Scalar vx = -(p11 * gx + p12 * gy);
            const Scalar vy = -(p12 * gx + p22 * gy);
            const Scalar step_len = dt * std::sqrt(vx * vx + vy * vy);
            if (step_len >= dist) {
                p = goal;
            } else {
                p = Position2(p(0) + dt * vx, p(1) + dt * vy);
            }
        }
        out.push_back(p);
    }
    return out;
}

inline Scalar min_eigenvalue_2x2(const pedpred::Mat2& m) {
    const Scalar tr = m(0, 0) + m(1, 1);
    const Scalar det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const Scalar disc = std::sqrt(std::max<Scalar>(0, tr * tr / 4 - det));
    return tr / 2 - disc;
}

}  // namespace oracles
