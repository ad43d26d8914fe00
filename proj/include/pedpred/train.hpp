#pragma once

#include "pedpred/model.hpp"

#include <optional>

namespace pedpred {

struct TrainingConfig {
    Scalar lr = 1e-3;
    int epochs = 200;
    int d = 32;
    int z_dim = 16;
    int heads = 2;
    std::uint64_t seed = 1;
    Scalar grad_clip = 1.0;
    int batch_size = 16;
};

/// Squared position error between trajectory lists, summed over t = 2..t_end
/// and normalized by M * (t_end - 1).
Scalar mse_loss(const std::vector<Trajectory>& predicted, const std::vector<Trajectory>& ground_truth);

/// One window preprocessed for teacher forcing: inputs (optionally
/// goal-shifted), attractor gradient rows, displacement targets, row weights.
struct PreparedWindow {
    ModelInputs inputs;
    MatX grad_rows;                // (M*T) x 2, zero when the velocity head is direct
    MatX targets;                  // (M*T) x 2 displacement targets
    std::vector<Scalar> weights;   // 1 for rows that enter the loss
    Scalar norm = 1;               // 1 / (M * (t_end - 1))
};

PreparedWindow prepare_window(const SceneWindow& window, const DynamicsConfig& dyn, bool goal_shift_enabled,
                              bool stable_dynamics_enabled);

using ModelGrads = std::vector<MatX>;

ModelGrads zero_grads_like(const ModelParams& params);

/// Teacher-forced loss for one window under fixed noise.
Scalar window_loss(const ModelParams& params, const PreparedWindow& w, const VecX& noise,
                   const DynamicsConfig& dyn, bool stable_dynamics_enabled);

/// Loss plus reverse-mode gradients for every parameter tensor.
Scalar window_backward(const ModelParams& params, const PreparedWindow& w, const VecX& noise,
                       const DynamicsConfig& dyn, bool stable_dynamics_enabled, ModelGrads& grads);

struct AdamState {
    std::vector<MatX> m;
    std::vector<MatX> v;
    long step = 0;

    static AdamState init_like(const ModelParams& params);
};

/// Global-norm clip followed by one adaptive-moment update (betas 0.9/0.999).
void adam_update(ModelParams& params, const ModelGrads& grads, AdamState& state, Scalar lr, Scalar grad_clip);

struct TrainResult {
    ModelParams params;
    AdamState adam;
    std::vector<Scalar> loss_history;  // mean window loss per epoch
    int epoch = 0;
};

/// Trains until cfg.epochs total epochs have run (resuming continues the
/// counter). Deterministic given cfg.seed for any thread count.
TrainResult train(const std::vector<SceneWindow>& windows, const TrainingConfig& cfg,
                  const DynamicsConfig& dyn, bool goal_shift_enabled, bool stable_dynamics_enabled,
                  int threads = 1, const TrainResult* resume = nullptr);

}  // namespace pedpred
