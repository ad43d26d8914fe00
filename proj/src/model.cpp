#include "pedpred/model.hpp"

#include "pedpred/rng.hpp"

#include <cmath>

namespace pedpred {

namespace {

constexpr Scalar kMaskBlocked = -1e30;

MatX init_weight(Eigen::Index rows, Eigen::Index cols, Scalar stddev, Rng& rng) {
    MatX w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = rng.normal(0.0, stddev);
    }
    return w;
}

ModelParams::Block init_block(int d, Rng& rng) {
    ModelParams::Block b;
    const Scalar s = 1.0 / std::sqrt(static_cast<Scalar>(d));
    b.wq = init_weight(d, d, s, rng);
    b.wk = init_weight(d, d, s, rng);
    b.wv = init_weight(d, d, s, rng);
    b.wo = init_weight(d, d, s, rng);
    b.bq = MatX::Zero(1, d);
    b.bk = MatX::Zero(1, d);
    b.bv = MatX::Zero(1, d);
    b.bo = MatX::Zero(1, d);
    b.ff1_w = init_weight(d, 4 * d, s, rng);
    b.ff1_b = MatX::Zero(1, 4 * d);
    b.ff2_w = init_weight(4 * d, d, 1.0 / std::sqrt(4.0 * d), rng);
    b.ff2_b = MatX::Zero(1, d);
    return b;
}

}  // namespace

ModelParams ModelParams::init(int d, int z_dim, int heads, int t_end, int head_out, std::uint64_t seed) {
    if (d % heads != 0) throw std::invalid_argument("ModelParams: d must be divisible by heads");
    if (head_out != 2 && head_out != 3) throw std::invalid_argument("ModelParams: head_out must be 2 or 3");
    Rng rng(mix_seed(seed, 0x6d6f64656cULL));
    ModelParams p;
    p.d = d;
    p.z_dim = z_dim;
    p.heads = heads;
    p.t_end = t_end;
    p.head_out = head_out;
    p.embed_w = init_weight(2, d, 1.0 / std::sqrt(2.0), rng);
    p.embed_b = MatX::Zero(1, d);
    p.posenc = init_weight(t_end, d, 0.1, rng);
    p.temporal = init_block(d, rng);
    p.spatial = init_block(d, rng);
    p.noise_w = init_weight(d + z_dim, d, 1.0 / std::sqrt(static_cast<Scalar>(d + z_dim)), rng);
    p.noise_b = MatX::Zero(1, d);
    p.head_w = init_weight(d, head_out, 0.01, rng);
    p.head_b = MatX::Zero(1, head_out);
    if (head_out == 3) {
        // start near L = I so the velocity law begins at plain gradient descent
        p.head_b(0, 0) = 1.0;
        p.head_b(0, 2) = 1.0;
    }
    return p;
}

std::vector<MatX*> ModelParams::tensors() {
    return {&embed_w,        &embed_b,        &posenc,         &temporal.wq,    &temporal.bq,
            &temporal.wk,    &temporal.bk,    &temporal.wv,    &temporal.bv,    &temporal.wo,
            &temporal.bo,    &temporal.ff1_w, &temporal.ff1_b, &temporal.ff2_w, &temporal.ff2_b,
            &spatial.wq,     &spatial.bq,     &spatial.wk,     &spatial.bk,     &spatial.wv,
            &spatial.bv,     &spatial.wo,     &spatial.bo,     &spatial.ff1_w,  &spatial.ff1_b,
            &spatial.ff2_w,  &spatial.ff2_b,  &noise_w,        &noise_b,        &head_w,
            &head_b};
}

std::vector<const MatX*> ModelParams::tensors() const {
    auto* self = const_cast<ModelParams*>(this);
    std::vector<const MatX*> out;
    for (auto* m : self->tensors()) out.push_back(m);
    return out;
}

std::vector<std::string> ModelParams::tensor_names() {
    return {"embed.w",        "embed.b",        "posenc",         "temporal.wq",    "temporal.bq",
            "temporal.wk",    "temporal.bk",    "temporal.wv",    "temporal.bv",    "temporal.wo",
            "temporal.bo",    "temporal.ff1.w", "temporal.ff1.b", "temporal.ff2.w", "temporal.ff2.b",
            "spatial.wq",     "spatial.bq",     "spatial.wk",     "spatial.bk",     "spatial.wv",
            "spatial.bv",     "spatial.wo",     "spatial.bo",     "spatial.ff1.w",  "spatial.ff1.b",
            "spatial.ff2.w",  "spatial.ff2.b",  "noise.w",        "noise.b",        "head.w",
            "head.b"};
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto* m : tensors()) n += static_cast<std::size_t>(m->size());
    return n;
}

bool ModelParams::all_finite() const {
    for (const auto* m : tensors()) {
        if (!m->allFinite()) return false;
    }
    return true;
}

ModelInputs make_model_inputs(const std::vector<PointSeq>& per_ped_inputs) {
    if (per_ped_inputs.empty()) throw std::invalid_argument("make_model_inputs: no pedestrians");
    const int m = static_cast<int>(per_ped_inputs.size());
    const int t = static_cast<int>(per_ped_inputs[0].rows());
    if (t < 1) throw std::invalid_argument("make_model_inputs: empty sequence");
    ModelInputs in;
    in.pedestrians = m;
    in.seq_len = t;
    in.features.resize(static_cast<Eigen::Index>(m) * t, 2);
    in.steps.resize(static_cast<std::size_t>(m) * t);
    for (int i = 0; i < m; ++i) {
        if (per_ped_inputs[i].rows() != t) {
            throw std::invalid_argument("make_model_inputs: pedestrians have unequal sequence lengths");
        }
        for (int s = 0; s < t; ++s) {
            in.features.row(static_cast<Eigen::Index>(i) * t + s) = per_ped_inputs[i].row(s);
            in.steps[static_cast<std::size_t>(i) * t + s] = s;
        }
    }
    return in;
}

MatX temporal_causal_mask(int m, int t) {
    const int r = m * t;
    MatX mask = MatX::Constant(r, r, kMaskBlocked);
    for (int i = 0; i < m; ++i) {
        for (int s = 0; s < t; ++s) {
            for (int s2 = 0; s2 <= s; ++s2) mask(i * t + s, i * t + s2) = 0;
        }
    }
    return mask;
}

MatX spatial_frame_mask(int m, int t) {
    const int r = m * t;
    MatX mask = MatX::Constant(r, r, kMaskBlocked);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            for (int s = 0; s < t; ++s) mask(i * t + s, j * t + s) = 0;
        }
    }
    return mask;
}

namespace {

struct BlockIds {
    int wq, bq, wk, bk, wv, bv, wo, bo, ff1_w, ff1_b, ff2_w, ff2_b;
};

int attention_ffn_block(ad::Tape& tape, int h, const BlockIds& ids, int mask_id, int heads, int d) {
    const int dh = d / heads;
    const Scalar inv_sqrt_dh = 1.0 / std::sqrt(static_cast<Scalar>(dh));
    const int q = tape.add_rowvec(tape.matmul(h, ids.wq), ids.bq);
    const int k = tape.add_rowvec(tape.matmul(h, ids.wk), ids.bk);
    const int v = tape.add_rowvec(tape.matmul(h, ids.wv), ids.bv);
    int merged = -1;
    for (int hd = 0; hd < heads; ++hd) {
        const int qh = tape.slice_cols(q, hd * dh, dh);
        const int kh = tape.slice_cols(k, hd * dh, dh);
        const int vh = tape.slice_cols(v, hd * dh, dh);
        const int scores = tape.scale(tape.matmul_nt(qh, kh), inv_sqrt_dh);
        const int att = tape.masked_softmax_rows(scores, mask_id);
        const int out = tape.matmul(att, vh);
        merged = hd == 0 ? out : tape.concat_cols(merged, out);
    }
    const int att_out = tape.add_rowvec(tape.matmul(merged, ids.wo), ids.bo);
    const int h1 = tape.add(h, att_out);
    const int ff = tape.add_rowvec(
        tape.matmul(tape.gelu(tape.add_rowvec(tape.matmul(h1, ids.ff1_w), ids.ff1_b)), ids.ff2_w),
        ids.ff2_b);
    return tape.add(h1, ff);
}

}  // namespace

int build_forward(ad::Tape& tape, const ModelParams& params, const ModelInputs& inputs, const VecX& noise,
                  std::vector<int>* param_ids) {
    if (noise.size() != params.z_dim) throw std::invalid_argument("build_forward: noise dimension mismatch");
    if (inputs.seq_len > params.t_end) throw std::invalid_argument("build_forward: sequence longer than t_end");

    std::vector<int> ids;
    for (const auto* m : params.tensors()) ids.push_back(tape.leaf(*m, true));
    if (param_ids) *param_ids = ids;
    // tensors() order: 0 embed.w 1 embed.b 2 posenc, 3..14 temporal, 15..26 spatial,
    // 27 noise.w 28 noise.b 29 head.w 30 head.b
    const int x = tape.leaf(inputs.features, false);
    const int embedded = tape.add_rowvec(tape.matmul(x, ids[0]), ids[1]);
    const int pe = tape.gather_rows(ids[2], inputs.steps);
    int h = tape.add(embedded, pe);

    const int t_mask = tape.leaf(temporal_causal_mask(inputs.pedestrians, inputs.seq_len), false);
    const int s_mask = tape.leaf(spatial_frame_mask(inputs.pedestrians, inputs.seq_len), false);

    const BlockIds tb{ids[3], ids[4], ids[5], ids[6], ids[7], ids[8], ids[9], ids[10], ids[11], ids[12], ids[13], ids[14]};
    const BlockIds sb{ids[15], ids[16], ids[17], ids[18], ids[19], ids[20], ids[21], ids[22], ids[23], ids[24], ids[25], ids[26]};
    h = attention_ffn_block(tape, h, tb, t_mask, params.heads, params.d);
    h = attention_ffn_block(tape, h, sb, s_mask, params.heads, params.d);

    MatX noise_rows(inputs.features.rows(), params.z_dim);
    noise_rows.rowwise() = noise.transpose();
    const int z = tape.leaf(noise_rows, false);
    const int hz = tape.concat_cols(h, z);
    const int projected = tape.add_rowvec(tape.matmul(hz, ids[27]), ids[28]);
    return tape.add_rowvec(tape.matmul(projected, ids[29]), ids[30]);
}

MatX forward_head(const ModelParams& params, const std::vector<PointSeq>& per_ped_inputs, const VecX& noise) {
    ad::Tape tape;
    const ModelInputs in = make_model_inputs(per_ped_inputs);
    const int head = build_forward(tape, params, in, noise, nullptr);
    return tape.val(head);
}

std::vector<std::vector<PdMatrixParams>> forward_matrix_field(const ModelParams& params,
                                                              const SceneWindow& shifted_window,
                                                              const VecX& noise) {
    std::vector<PointSeq> inputs;
    inputs.reserve(shifted_window.trajectories.size());
    for (const auto& t : shifted_window.trajectories) inputs.push_back(t.positions);
    return forward_matrix_field(params, inputs, noise);
}

std::vector<std::vector<PdMatrixParams>> forward_matrix_field(const ModelParams& params,
                                                              const std::vector<PointSeq>& per_ped_inputs,
                                                              const VecX& noise) {
    if (params.head_out != 3) throw std::invalid_argument("forward_matrix_field: head does not emit (a,b,c)");
    const MatX head = forward_head(params, per_ped_inputs, noise);
    const int m = static_cast<int>(per_ped_inputs.size());
    const int t = static_cast<int>(per_ped_inputs[0].rows());
    std::vector<std::vector<PdMatrixParams>> out(m);
    for (int i = 0; i < m; ++i) {
        out[i].resize(t);
        for (int s = 0; s < t; ++s) {
            const Eigen::Index r = static_cast<Eigen::Index>(i) * t + s;
            out[i][s] = {head(r, 0), head(r, 1), head(r, 2)};
        }
    }
    return out;
}

}  // namespace pedpred
