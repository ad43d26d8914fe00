#include "pedpred/softdtw.hpp"

#include <algorithm>
#include <cmath>

namespace pedpred {

Scalar soft_min(std::span<const Scalar> values, Scalar gamma) {
    if (values.empty()) throw std::invalid_argument("soft_min: empty input");
    if (gamma < 0) throw std::invalid_argument("soft_min: gamma must be >= 0");
    const Scalar m = *std::min_element(values.begin(), values.end());
    if (gamma == 0) return m;
    Scalar acc = 0;
    for (const Scalar v : values) acc += std::exp(-(v - m) / gamma);
    return m - gamma * std::log(acc);
}

MatX cost_matrix(const PointSeq& x, const PointSeq& y, bool squared) {
    if (x.rows() == 0 || y.rows() == 0) throw std::invalid_argument("cost_matrix: empty sequence");
    MatX c(x.rows(), y.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < y.rows(); ++j) {
            const Scalar d2 = (x.row(i) - y.row(j)).squaredNorm();
            c(i, j) = squared ? d2 : std::sqrt(d2);
        }
    }
    return c;
}

Scalar soft_dtw(const PointSeq& x, const PointSeq& y, const SoftDtwParams& params) {
    const MatX delta = cost_matrix(x, y, params.squared_cost);
    const Eigen::Index n = delta.rows();
    const Eigen::Index m = delta.cols();
    MatX r(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            Scalar prev[3];
            int k = 0;
            if (i > 0) prev[k++] = r(i - 1, j);
            if (j > 0) prev[k++] = r(i, j - 1);
            if (i > 0 && j > 0) prev[k++] = r(i - 1, j - 1);
            r(i, j) = delta(i, j) + (k > 0 ? soft_min({prev, static_cast<std::size_t>(k)}, params.gamma) : 0.0);
        }
    }
    return r(n - 1, m - 1);
}

}  // namespace pedpred
