#include "pedpred/checkpoint.hpp"

#include <json.hpp>

#include <fstream>

namespace pedpred {

using nlohmann::json;

namespace {

json mat_to_json(const MatX& m) {
    json data = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

MatX mat_from_json(const json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw DataError("checkpoint: tensor size mismatch");
    }
    MatX m(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<Scalar>();
    }
    return m;
}

json tensors_to_json(const std::vector<const MatX*>& tensors) {
    json out = json::object();
    const auto names = ModelParams::tensor_names();
    for (std::size_t i = 0; i < tensors.size(); ++i) out[names[i]] = mat_to_json(*tensors[i]);
    return out;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& file) {
    json doc;
    doc["format"] = "pedpred-checkpoint-v1";
    doc["model"] = {{"d", ck.params.d},
                    {"z_dim", ck.params.z_dim},
                    {"heads", ck.params.heads},
                    {"t_end", ck.params.t_end},
                    {"head_out", ck.params.head_out}};
    doc["training"] = {{"lr", ck.training.lr},       {"epochs", ck.training.epochs},
                       {"d", ck.training.d},         {"z_dim", ck.training.z_dim},
                       {"heads", ck.training.heads}, {"seed", ck.training.seed},
                       {"grad_clip", ck.training.grad_clip}, {"batch_size", ck.training.batch_size}};
    doc["dynamics"] = {{"sigma", ck.dyn.sigma}, {"goal_epsilon", ck.dyn.goal_epsilon}, {"dt", ck.dyn.dt}};
    doc["goal_shift"] = ck.goal_shift_enabled;
    doc["stable_dynamics"] = ck.stable_dynamics_enabled;
    doc["epoch"] = ck.epoch;
    doc["loss_history"] = ck.loss_history;
    doc["params"] = tensors_to_json(ck.params.tensors());

    std::vector<const MatX*> m_ptrs, v_ptrs;
    for (const auto& m : ck.adam.m) m_ptrs.push_back(&m);
    for (const auto& v : ck.adam.v) v_ptrs.push_back(&v);
    doc["adam"] = {{"step", ck.adam.step}, {"m", tensors_to_json(m_ptrs)}, {"v", tensors_to_json(v_ptrs)}};

    std::ofstream out(file);
    if (!out) throw DataError("cannot write checkpoint: " + file.string());
    out << doc.dump();
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open checkpoint: " + file.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("checkpoint parse error: " + std::string(e.what()));
    }
    if (doc.value("format", "") != "pedpred-checkpoint-v1") {
        throw DataError("checkpoint: unknown format field");
    }

    Checkpoint ck;
    const auto& m = doc.at("model");
    ck.params.d = m.at("d").get<int>();
    ck.params.z_dim = m.at("z_dim").get<int>();
    ck.params.heads = m.at("heads").get<int>();
    ck.params.t_end = m.at("t_end").get<int>();
    ck.params.head_out = m.at("head_out").get<int>();

    const auto& t = doc.at("training");
    ck.training.lr = t.at("lr").get<Scalar>();
    ck.training.epochs = t.at("epochs").get<int>();
    ck.training.d = t.at("d").get<int>();
    ck.training.z_dim = t.at("z_dim").get<int>();
    ck.training.heads = t.at("heads").get<int>();
    ck.training.seed = t.at("seed").get<std::uint64_t>();
    ck.training.grad_clip = t.at("grad_clip").get<Scalar>();
    ck.training.batch_size = t.at("batch_size").get<int>();

    const auto& d = doc.at("dynamics");
    ck.dyn.sigma = d.at("sigma").get<Scalar>();
    ck.dyn.goal_epsilon = d.at("goal_epsilon").get<Scalar>();
    ck.dyn.dt = d.at("dt").get<Scalar>();

    ck.goal_shift_enabled = doc.at("goal_shift").get<bool>();
    ck.stable_dynamics_enabled = doc.at("stable_dynamics").get<bool>();
    ck.epoch = doc.at("epoch").get<int>();
    ck.loss_history = doc.at("loss_history").get<std::vector<Scalar>>();

    const auto names = ModelParams::tensor_names();
    auto tensors = ck.params.tensors();
    const auto& params = doc.at("params");
    for (std::size_t i = 0; i < tensors.size(); ++i) *tensors[i] = mat_from_json(params.at(names[i]));

    const auto& adam = doc.at("adam");
    ck.adam.step = adam.at("step").get<long>();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        ck.adam.m.push_back(mat_from_json(adam.at("m").at(names[i])));
        ck.adam.v.push_back(mat_from_json(adam.at("v").at(names[i])));
    }
    if (!ck.params.all_finite()) throw DataError("checkpoint: non-finite parameters");
    return ck;
}

}  // namespace pedpred
