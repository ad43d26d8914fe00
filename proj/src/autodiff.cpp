#include "pedpred/autodiff.hpp"

#include <cmath>

namespace pedpred::ad {

namespace {

constexpr Scalar kInvSqrt2 = 0.7071067811865475244;
constexpr Scalar kInvSqrt2Pi = 0.3989422804014326779;

Scalar gelu_fwd(Scalar x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

Scalar gelu_bwd(Scalar x) {
    const Scalar cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
    const Scalar pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    return cdf + x * pdf;
}

/// v = -(L L^T + sigma I) g for one row of (a, b, c).
inline void row_velocity(Scalar a, Scalar b, Scalar c, Scalar gx, Scalar gy, Scalar sigma, Scalar& vx,
                         Scalar& vy) {
    vx = -((a * a + sigma) * gx + a * b * gy);
    vy = -(a * b * gx + (b * b + c * c + sigma) * gy);
}

}  // namespace

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::ensure_grad(Node& n) {
    if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols()) {
        n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    }
}

int Tape::leaf(const Mat& value, bool needs_grad) {
    Node n;
    n.op = Op::Leaf;
    n.value = value;
    n.needs_grad = needs_grad;
    return push(std::move(n));
}

int Tape::matmul(int a, int b) {
    Node n;
    n.op = Op::MatMul;
    n.a = a;
    n.b = b;
    n.value = nodes_[a].value * nodes_[b].value;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    return push(std::move(n));
}

int Tape::matmul_nt(int a, int b) {
    Node n;
    n.op = Op::MatMulNT;
    n.a = a;
    n.b = b;
    n.value = nodes_[a].value * nodes_[b].value.transpose();
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.value = nodes_[a].value + nodes_[b].value;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    return push(std::move(n));
}

int Tape::add_rowvec(int a, int b) {
    Node n;
    n.op = Op::AddRowVec;
    n.a = a;
    n.b = b;
    n.value = nodes_[a].value.rowwise() + nodes_[b].value.row(0);
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    return push(std::move(n));
}

int Tape::scale(int a, Scalar s) {
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.scale = s;
    n.value = nodes_[a].value * s;
    n.needs_grad = nodes_[a].needs_grad;
    return push(std::move(n));
}

int Tape::gelu(int a) {
    Node n;
    n.op = Op::Gelu;
    n.a = a;
    n.value = nodes_[a].value.unaryExpr([](Scalar x) { return gelu_fwd(x); });
    n.needs_grad = nodes_[a].needs_grad;
    return push(std::move(n));
}

int Tape::masked_softmax_rows(int a, int mask) {
    Node n;
    n.op = Op::MaskedSoftmaxRows;
    n.a = a;
    n.b = mask;
    Mat z = nodes_[a].value + nodes_[mask].value;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const Scalar m = z.row(r).maxCoeff();
        Eigen::RowVectorXd e = (z.row(r).array() - m).exp();
        z.row(r) = e / e.sum();
    }
    n.value = std::move(z);
    n.needs_grad = nodes_[a].needs_grad;
    return push(std::move(n));
}

int Tape::concat_cols(int a, int b) {
    Node n;
    n.op = Op::ConcatCols;
    n.a = a;
    n.b = b;
    const Mat& va = nodes_[a].value;
    const Mat& vb = nodes_[b].value;
    n.value.resize(va.rows(), va.cols() + vb.cols());
    n.value << va, vb;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    return push(std::move(n));
}

int Tape::slice_cols(int a, int c0, int w) {
    Node n;
    n.op = Op::SliceCols;
    n.a = a;
    n.c0 = c0;
    n.width = w;
    n.value = nodes_[a].value.middleCols(c0, w);
    n.needs_grad = nodes_[a].needs_grad;
    return push(std::move(n));
}

int Tape::gather_rows(int a, std::vector<int> idx) {
    Node n;
    n.op = Op::GatherRows;
    n.a = a;
    n.gather = std::move(idx);
    n.value.resize(static_cast<Eigen::Index>(n.gather.size()), nodes_[a].value.cols());
    for (std::size_t r = 0; r < n.gather.size(); ++r) {
        n.value.row(static_cast<Eigen::Index>(r)) = nodes_[a].value.row(n.gather[r]);
    }
    n.needs_grad = nodes_[a].needs_grad;
    return push(std::move(n));
}

int Tape::natural_gradient_mse(int head, Mat grad_rows, Mat targets, std::vector<Scalar> weights,
                               Scalar sigma, Scalar dt, Scalar norm) {
    Node n;
    n.op = Op::NaturalGradientMse;
    n.a = head;
    n.aux0 = std::move(grad_rows);
    n.aux1 = std::move(targets);
    n.weights = std::move(weights);
    n.sigma = sigma;
    n.dt = dt;
    n.norm = norm;
    const Mat& h = nodes_[head].value;
    Scalar loss = 0;
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
        if (n.weights[r] == 0) continue;
        Scalar vx, vy;
        row_velocity(h(r, 0), h(r, 1), h(r, 2), n.aux0(r, 0), n.aux0(r, 1), sigma, vx, vy);
        const Scalar ex = dt * vx - n.aux1(r, 0);
        const Scalar ey = dt * vy - n.aux1(r, 1);
        loss += n.weights[r] * (ex * ex + ey * ey);
    }
    n.value = Mat::Constant(1, 1, norm * loss);
    n.needs_grad = nodes_[head].needs_grad;
    return push(std::move(n));
}

int Tape::direct_velocity_mse(int head, Mat targets, std::vector<Scalar> weights, Scalar dt, Scalar norm) {
    Node n;
    n.op = Op::DirectVelocityMse;
    n.a = head;
    n.aux1 = std::move(targets);
    n.weights = std::move(weights);
    n.dt = dt;
    n.norm = norm;
    const Mat& h = nodes_[head].value;
    Scalar loss = 0;
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
        if (n.weights[r] == 0) continue;
        const Scalar ex = dt * h(r, 0) - n.aux1(r, 0);
        const Scalar ey = dt * h(r, 1) - n.aux1(r, 1);
        loss += n.weights[r] * (ex * ex + ey * ey);
    }
    n.value = Mat::Constant(1, 1, norm * loss);
    n.needs_grad = nodes_[head].needs_grad;
    return push(std::move(n));
}

void Tape::backward(int loss_id) {
    for (auto& n : nodes_) {
        if (n.needs_grad) ensure_grad(n);
    }
    nodes_[loss_id].grad = Mat::Constant(1, 1, 1.0);

    for (int id = loss_id; id >= 0; --id) {
        Node& n = nodes_[id];
        if (!n.needs_grad || n.op == Op::Leaf) continue;
        const Mat& g = n.grad;
        Node* pa = n.a >= 0 ? &nodes_[n.a] : nullptr;
        Node* pb = n.b >= 0 ? &nodes_[n.b] : nullptr;
        switch (n.op) {
            case Op::MatMul:
                if (pa->needs_grad) pa->grad.noalias() += g * pb->value.transpose();
                if (pb->needs_grad) pb->grad.noalias() += pa->value.transpose() * g;
                break;
            case Op::MatMulNT:
                if (pa->needs_grad) pa->grad.noalias() += g * pb->value;
                if (pb->needs_grad) pb->grad.noalias() += g.transpose() * pa->value;
                break;
            case Op::Add:
                if (pa->needs_grad) pa->grad += g;
                if (pb->needs_grad) pb->grad += g;
                break;
            case Op::AddRowVec:
                if (pa->needs_grad) pa->grad += g;
                if (pb->needs_grad) pb->grad.row(0) += g.colwise().sum();
                break;
            case Op::Scale:
                if (pa->needs_grad) pa->grad += n.scale * g;
                break;
            case Op::Gelu:
                if (pa->needs_grad) {
                    pa->grad.array() += g.array() * pa->value.unaryExpr([](Scalar x) { return gelu_bwd(x); }).array();
                }
                break;
            case Op::MaskedSoftmaxRows:
                if (pa->needs_grad) {
                    for (Eigen::Index r = 0; r < g.rows(); ++r) {
                        const Scalar dot = (g.row(r).array() * n.value.row(r).array()).sum();
                        pa->grad.row(r).array() += n.value.row(r).array() * (g.row(r).array() - dot);
                    }
                }
                break;
            case Op::ConcatCols:
                if (pa->needs_grad) pa->grad += g.leftCols(pa->value.cols());
                if (pb->needs_grad) pb->grad += g.rightCols(pb->value.cols());
                break;
            case Op::SliceCols:
                if (pa->needs_grad) pa->grad.middleCols(n.c0, n.width) += g;
                break;
            case Op::GatherRows:
                if (pa->needs_grad) {
                    for (std::size_t r = 0; r < n.gather.size(); ++r) {
                        pa->grad.row(n.gather[r]) += g.row(static_cast<Eigen::Index>(r));
                    }
                }
                break;
            case Op::NaturalGradientMse:
                if (pa->needs_grad) {
                    const Scalar gscale = g(0, 0) * n.norm;
                    const Mat& h = pa->value;
                    for (Eigen::Index r = 0; r < h.rows(); ++r) {
                        if (n.weights[r] == 0) continue;
                        const Scalar a = h(r, 0), b = h(r, 1), c = h(r, 2);
                        const Scalar gx = n.aux0(r, 0), gy = n.aux0(r, 1);
                        Scalar vx, vy;
                        row_velocity(a, b, c, gx, gy, n.sigma, vx, vy);
                        const Scalar ex = n.dt * vx - n.aux1(r, 0);
                        const Scalar ey = n.dt * vy - n.aux1(r, 1);
                        const Scalar dvx = gscale * n.weights[r] * 2.0 * ex * n.dt;
                        const Scalar dvy = gscale * n.weights[r] * 2.0 * ey * n.dt;
                        pa->grad(r, 0) += dvx * (-(2 * a * gx + b * gy)) + dvy * (-b * gx);
                        pa->grad(r, 1) += dvx * (-a * gy) + dvy * (-(a * gx + 2 * b * gy));
                        pa->grad(r, 2) += dvy * (-2 * c * gy);
                    }
                }
                break;
            case Op::DirectVelocityMse:
                if (pa->needs_grad) {
                    const Scalar gscale = g(0, 0) * n.norm;
                    const Mat& h = pa->value;
                    for (Eigen::Index r = 0; r < h.rows(); ++r) {
                        if (n.weights[r] == 0) continue;
                        const Scalar ex = n.dt * h(r, 0) - n.aux1(r, 0);
                        const Scalar ey = n.dt * h(r, 1) - n.aux1(r, 1);
                        pa->grad(r, 0) += gscale * n.weights[r] * 2.0 * ex * n.dt;
                        pa->grad(r, 1) += gscale * n.weights[r] * 2.0 * ey * n.dt;
                    }
                }
                break;
            case Op::Leaf:
                break;
        }
    }
}

}  // namespace pedpred::ad
