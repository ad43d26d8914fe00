#pragma once

#include "pedpred/autodiff.hpp"
#include "pedpred/dynamics.hpp"
#include "pedpred/types.hpp"

#include <string>
#include <vector>

namespace pedpred {

/// Weights of the matrix-field model: embedding, learned positional encoding,
/// one temporal attention block, one spatial attention block, noise
/// projection, output head. head_out is 3 for (a, b, c) or 2 when the head
/// emits a velocity directly.
struct ModelParams {
    int d = 32;
    int z_dim = 16;
    int heads = 2;
    int t_end = 20;
    int head_out = 3;

    struct Block {
        MatX wq, bq, wk, bk, wv, bv, wo, bo;
        MatX ff1_w, ff1_b, ff2_w, ff2_b;
    };

    MatX embed_w, embed_b;
    MatX posenc;
    Block temporal, spatial;
    MatX noise_w, noise_b;
    MatX head_w, head_b;

    static ModelParams init(int d, int z_dim, int heads, int t_end, int head_out, std::uint64_t seed);

    /// Fixed-order access to every tensor; aligned with tensor_names().
    std::vector<MatX*> tensors();
    std::vector<const MatX*> tensors() const;
    static std::vector<std::string> tensor_names();

    std::size_t parameter_count() const;
    bool all_finite() const;
};

/// Flat per-row layout for a window: row = ped * T + step.
struct ModelInputs {
    MatX features;            // (M*T) x 2
    std::vector<int> steps;   // posenc row per input row
    int pedestrians = 0;
    int seq_len = 0;
};

ModelInputs make_model_inputs(const std::vector<PointSeq>& per_ped_inputs);

/// Attention masks as additive matrices (0 allowed, large negative blocked).
MatX temporal_causal_mask(int pedestrians, int seq_len);
MatX spatial_frame_mask(int pedestrians, int seq_len);

/// Builds the forward graph on the tape. Returns the head output node
/// ((M*T) x head_out); param_ids receives the leaf id of every tensor in
/// tensors() order when non-null.
int build_forward(ad::Tape& tape, const ModelParams& params, const ModelInputs& inputs, const VecX& noise,
                  std::vector<int>* param_ids);

/// Runs the model and returns the raw head rows.
MatX forward_head(const ModelParams& params, const std::vector<PointSeq>& per_ped_inputs, const VecX& noise);

/// Matrix-field parameters per pedestrian per step (head_out must be 3).
std::vector<std::vector<PdMatrixParams>> forward_matrix_field(const ModelParams& params,
                                                              const std::vector<PointSeq>& per_ped_inputs,
                                                              const VecX& noise);

/// Same, taking an already goal-shifted window.
std::vector<std::vector<PdMatrixParams>> forward_matrix_field(const ModelParams& params,
                                                              const SceneWindow& shifted_window,
                                                              const VecX& noise);

}  // namespace pedpred
