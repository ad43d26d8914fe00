#pragma once

#include "pedpred/types.hpp"

#include <vector>

namespace pedpred::ad {

using Mat = MatX;

/// Append-only tape of matrix-valued nodes. Node ids are creation order, so a
/// reverse sweep over ids is a valid topological order for backpropagation.
class Tape {
public:
    int leaf(const Mat& value, bool needs_grad);

    int matmul(int a, int b);     // A * B
    int matmul_nt(int a, int b);  // A * B^T
    int add(int a, int b);
    int add_rowvec(int a, int b);  // every row of A plus the 1 x c row b
    int scale(int a, Scalar s);
    int gelu(int a);
    /// Row-wise softmax of (A + mask); mask is a constant node using large
    /// negative entries for disallowed positions.
    int masked_softmax_rows(int a, int mask);
    int concat_cols(int a, int b);
    int slice_cols(int a, int c0, int n);
    /// out.row(r) = A.row(idx[r]); backward scatters by accumulation.
    int gather_rows(int a, std::vector<int> idx);

    /// Teacher-forced loss through the velocity law v = -(L L^T + sigma I) g.
    /// head: R x 3 rows of (a, b, c); grad_rows/targets: constant R x 2 with
    /// the attractor gradient and displacement target per row; weights: per-row
    /// 0/1. Returns a 1 x 1 node with norm * sum_r w_r |dt*v_r - d_r|^2.
    int natural_gradient_mse(int head, Mat grad_rows, Mat targets, std::vector<Scalar> weights,
                             Scalar sigma, Scalar dt, Scalar norm);

    /// Same loss with the head emitting a 2-D velocity directly.
    int direct_velocity_mse(int head, Mat targets, std::vector<Scalar> weights, Scalar dt, Scalar norm);

    const Mat& val(int id) const { return nodes_[id].value; }
    const Mat& grad(int id) const { return nodes_[id].grad; }

    /// Reverse sweep from a 1 x 1 loss node.
    void backward(int loss_id);

    void clear() { nodes_.clear(); }
    std::size_t size() const { return nodes_.size(); }

private:
    enum class Op {
        Leaf,
        MatMul,
        MatMulNT,
        Add,
        AddRowVec,
        Scale,
        Gelu,
        MaskedSoftmaxRows,
        ConcatCols,
        SliceCols,
        GatherRows,
        NaturalGradientMse,
        DirectVelocityMse,
    };

    struct Node {
        Op op = Op::Leaf;
        int a = -1;
        int b = -1;
        Mat value;
        Mat grad;
        bool needs_grad = false;
        // op payloads
        Scalar scale = 1;
        int c0 = 0, width = 0;
        std::vector<int> gather;
        Mat aux0, aux1;               // op-dependent saved tensors
        std::vector<Scalar> weights;  // loss row weights
        Scalar sigma = 0, dt = 1, norm = 1;
    };

    int push(Node n);
    void ensure_grad(Node& n);

    std::vector<Node> nodes_;
};

}  // namespace pedpred::ad
