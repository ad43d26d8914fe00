#pragma once

#include "pedpred/types.hpp"

#include <span>

namespace pedpred {

struct SoftDtwParams {
    Scalar gamma = 1.0;
    bool squared_cost = false;  // squared Euclidean instead of plain norm
};

/// Smoothed minimum: exact min at gamma = 0, -gamma*log(sum exp(-a_i/gamma))
/// otherwise, evaluated with the usual log-sum-exp shift.
Scalar soft_min(std::span<const Scalar> values, Scalar gamma);

/// Pairwise Euclidean distances between two 2-D sequences (rows).
MatX cost_matrix(const PointSeq& x, const PointSeq& y, bool squared = false);

/// Soft dynamic time warping over the full n x m alignment lattice.
Scalar soft_dtw(const PointSeq& x, const PointSeq& y, const SoftDtwParams& params);

}  // namespace pedpred
