#include "pedpred/train.hpp"

#include "pedpred/parallel.hpp"
#include "pedpred/rng.hpp"

#include <cmath>

namespace pedpred {

Scalar mse_loss(const std::vector<Trajectory>& predicted, const std::vector<Trajectory>& ground_truth) {
    if (predicted.size() != ground_truth.size() || predicted.empty()) {
        throw std::invalid_argument("mse_loss: trajectory count mismatch");
    }
    const int t_end = ground_truth[0].length();
    Scalar total = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i].length() != t_end || ground_truth[i].length() != t_end) {
            throw std::invalid_argument("mse_loss: trajectory length mismatch");
        }
        for (int t = 1; t < t_end; ++t) {
            total += (predicted[i].at(t) - ground_truth[i].at(t)).squaredNorm();
        }
    }
    return total / (static_cast<Scalar>(predicted.size()) * (t_end - 1));
}

PreparedWindow prepare_window(const SceneWindow& window, const DynamicsConfig& dyn, bool goal_shift_enabled,
                              bool stable_dynamics_enabled) {
    const int m = window.pedestrians();
    if (m == 0) throw std::invalid_argument("prepare_window: empty window");
    const int t = window.t_end;

    std::vector<PointSeq> per_ped(m);
    PreparedWindow w;
    w.grad_rows = MatX::Zero(static_cast<Eigen::Index>(m) * t, 2);
    w.targets = MatX::Zero(static_cast<Eigen::Index>(m) * t, 2);
    w.weights.assign(static_cast<std::size_t>(m) * t, 0.0);
    for (int i = 0; i < m; ++i) {
        const Trajectory& traj = window.trajectories[i];
        if (traj.length() != t) throw std::invalid_argument("prepare_window: trajectory length != t_end");
        const Position2 goal = traj.last();
        per_ped[i] = traj.positions;
        if (goal_shift_enabled) per_ped[i].rowwise() -= goal.transpose();
        for (int s = 0; s < t; ++s) {
            const Eigen::Index r = static_cast<Eigen::Index>(i) * t + s;
            if (stable_dynamics_enabled) {
                const Velocity2 g = attractor_gradient(traj.at(s), goal, dyn.goal_epsilon);
                w.grad_rows.row(r) = g.transpose();
            }
            if (s < t - 1) {
                w.targets.row(r) = (traj.at(s + 1) - traj.at(s)).transpose();
                w.weights[static_cast<std::size_t>(r)] = 1.0;
            }
        }
    }
    w.inputs = make_model_inputs(per_ped);
    w.norm = 1.0 / (static_cast<Scalar>(m) * (t - 1));
    return w;
}

ModelGrads zero_grads_like(const ModelParams& params) {
    ModelGrads g;
    for (const auto* t : params.tensors()) g.push_back(MatX::Zero(t->rows(), t->cols()));
    return g;
}

namespace {

int build_loss(ad::Tape& tape, const ModelParams& params, const PreparedWindow& w, const VecX& noise,
               const DynamicsConfig& dyn, bool stable_dynamics_enabled, std::vector<int>* param_ids) {
    const int head = build_forward(tape, params, w.inputs, noise, param_ids);
    if (stable_dynamics_enabled) {
        return tape.natural_gradient_mse(head, w.grad_rows, w.targets, w.weights, dyn.sigma, dyn.dt, w.norm);
    }
    return tape.direct_velocity_mse(head, w.targets, w.weights, dyn.dt, w.norm);
}

}  // namespace

Scalar window_loss(const ModelParams& params, const PreparedWindow& w, const VecX& noise,
                   const DynamicsConfig& dyn, bool stable_dynamics_enabled) {
    ad::Tape tape;
    const int loss = build_loss(tape, params, w, noise, dyn, stable_dynamics_enabled, nullptr);
    return tape.val(loss)(0, 0);
}

Scalar window_backward(const ModelParams& params, const PreparedWindow& w, const VecX& noise,
                       const DynamicsConfig& dyn, bool stable_dynamics_enabled, ModelGrads& grads) {
    ad::Tape tape;
    std::vector<int> ids;
    const int loss = build_loss(tape, params, w, noise, dyn, stable_dynamics_enabled, &ids);
    tape.backward(loss);
    grads.resize(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) grads[i] = tape.grad(ids[i]);
    return tape.val(loss)(0, 0);
}

AdamState AdamState::init_like(const ModelParams& params) {
    AdamState s;
    for (const auto* t : params.tensors()) {
        s.m.push_back(MatX::Zero(t->rows(), t->cols()));
        s.v.push_back(MatX::Zero(t->rows(), t->cols()));
    }
    return s;
}

void adam_update(ModelParams& params, const ModelGrads& grads, AdamState& state, Scalar lr, Scalar grad_clip) {
    constexpr Scalar beta1 = 0.9;
    constexpr Scalar beta2 = 0.999;
    constexpr Scalar eps = 1e-8;

    Scalar sq_norm = 0;
    for (const auto& g : grads) sq_norm += g.squaredNorm();
    const Scalar gnorm = std::sqrt(sq_norm);
    const Scalar clip_scale = (grad_clip > 0 && gnorm > grad_clip) ? grad_clip / gnorm : 1.0;

    state.step += 1;
    const Scalar bc1 = 1.0 - std::pow(beta1, static_cast<Scalar>(state.step));
    const Scalar bc2 = 1.0 - std::pow(beta2, static_cast<Scalar>(state.step));

    auto tensors = params.tensors();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const MatX g = grads[i] * clip_scale;
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g.cwiseProduct(g);
        const MatX mhat = state.m[i] / bc1;
        const MatX vhat = state.v[i] / bc2;
        *tensors[i] -= lr * (mhat.array() / (vhat.array().sqrt() + eps)).matrix();
    }
}

TrainResult train(const std::vector<SceneWindow>& windows, const TrainingConfig& cfg,
                  const DynamicsConfig& dyn, bool goal_shift_enabled, bool stable_dynamics_enabled,
                  int threads, const TrainResult* resume) {
    if (windows.empty()) throw std::invalid_argument("train: no windows");
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");

    TrainResult res;
    if (resume) {
        res = *resume;
    } else {
        const int head_out = stable_dynamics_enabled ? 3 : 2;
        res.params = ModelParams::init(cfg.d, cfg.z_dim, cfg.heads, windows[0].t_end, head_out, cfg.seed);
        res.adam = AdamState::init_like(res.params);
    }

    std::vector<PreparedWindow> prepared;
    prepared.reserve(windows.size());
    for (const auto& w : windows) prepared.push_back(prepare_window(w, dyn, goal_shift_enabled, stable_dynamics_enabled));

    const int n = static_cast<int>(prepared.size());
    const int batch = std::max(1, cfg.batch_size);
    const int z_dim = res.params.z_dim;  // checkpoint wins over cfg on resume
    std::vector<ModelGrads> slot_grads(static_cast<std::size_t>(std::min(batch, n)));
    std::vector<Scalar> slot_loss(slot_grads.size());
    std::vector<VecX> slot_noise(slot_grads.size());

    for (int epoch = res.epoch; epoch < cfg.epochs; ++epoch) {
        Scalar epoch_loss = 0;
        for (int b0 = 0; b0 < n; b0 += batch) {
            const int bn = std::min(batch, n - b0);
            for (int j = 0; j < bn; ++j) {
                Rng rng(mix_seed(cfg.seed ^ 0x6e6f697365ULL, static_cast<std::uint64_t>(epoch),
                                 static_cast<std::uint64_t>(b0 + j)));
                slot_noise[j].resize(z_dim);
                for (int z = 0; z < z_dim; ++z) slot_noise[j][z] = rng.normal();
            }
            parallel_for(bn, threads, [&](int j) {
                slot_loss[j] = window_backward(res.params, prepared[b0 + j], slot_noise[j], dyn,
                                               stable_dynamics_enabled, slot_grads[j]);
            });
            ModelGrads acc = zero_grads_like(res.params);
            for (int j = 0; j < bn; ++j) {
                for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += slot_grads[j][t];
                epoch_loss += slot_loss[j];
            }
            for (auto& g : acc) g /= static_cast<Scalar>(bn);
            adam_update(res.params, acc, res.adam, cfg.lr, cfg.grad_clip);
        }
        epoch_loss /= static_cast<Scalar>(n);
        if (!std::isfinite(epoch_loss)) {
            throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch + 1));
        }
        res.loss_history.push_back(epoch_loss);
        res.epoch = epoch + 1;
    }
    if (!res.params.all_finite()) throw NumericError("train: non-finite parameters after training");
    return res;
}

}  // namespace pedpred
