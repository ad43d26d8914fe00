#include "pedpred/config.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <set>

namespace pedpred {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

RunConfig load_run_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }

    RunConfig cfg;
    reject_unknown(doc, {"datasets", "out_dir", "seed", "threads", "goal", "dynamics", "model", "train", "eval", "ablation"},
                   "top level");

    if (doc.contains("datasets")) {
        for (const auto& entry : doc.at("datasets")) {
            reject_unknown(entry, {"name", "path"}, "datasets[]");
            cfg.datasets.emplace_back(entry.at("name").get<std::string>(), entry.at("path").get<std::string>());
        }
    }
    if (doc.contains("out_dir")) cfg.out_dir = doc.at("out_dir").get<std::string>();
    if (doc.contains("seed")) {
        cfg.pipeline.seed = doc.at("seed").get<std::uint64_t>();
        cfg.pipeline.training.seed = cfg.pipeline.seed;
    }
    if (doc.contains("threads")) cfg.pipeline.threads = doc.at("threads").get<int>();

    if (doc.contains("goal")) {
        const auto& g = doc.at("goal");
        reject_unknown(g, {"n_experts", "k_candidates", "gamma", "squared_cost", "kmeans_restarts", "kmeans_max_iters"},
                       "goal");
        if (g.contains("n_experts")) cfg.pipeline.n_experts = g.at("n_experts").get<int>();
        if (g.contains("k_candidates")) cfg.pipeline.k_candidates = g.at("k_candidates").get<int>();
        if (g.contains("gamma")) cfg.pipeline.dtw.gamma = g.at("gamma").get<Scalar>();
        if (g.contains("squared_cost")) cfg.pipeline.dtw.squared_cost = g.at("squared_cost").get<bool>();
        if (g.contains("kmeans_restarts")) cfg.pipeline.kmeans.restarts = g.at("kmeans_restarts").get<int>();
        if (g.contains("kmeans_max_iters")) cfg.pipeline.kmeans.max_iters = g.at("kmeans_max_iters").get<int>();
    }
    if (doc.contains("dynamics")) {
        const auto& d = doc.at("dynamics");
        reject_unknown(d, {"sigma", "goal_epsilon", "dt"}, "dynamics");
        if (d.contains("sigma")) cfg.pipeline.dyn.sigma = d.at("sigma").get<Scalar>();
        if (d.contains("goal_epsilon")) cfg.pipeline.dyn.goal_epsilon = d.at("goal_epsilon").get<Scalar>();
        if (d.contains("dt")) cfg.pipeline.dyn.dt = d.at("dt").get<Scalar>();
    }
    if (doc.contains("model")) {
        const auto& m = doc.at("model");
        reject_unknown(m, {"d", "z_dim", "heads"}, "model");
        if (m.contains("d")) cfg.pipeline.training.d = m.at("d").get<int>();
        if (m.contains("z_dim")) cfg.pipeline.training.z_dim = m.at("z_dim").get<int>();
        if (m.contains("heads")) cfg.pipeline.training.heads = m.at("heads").get<int>();
    }
    if (doc.contains("train")) {
        const auto& t = doc.at("train");
        reject_unknown(t, {"epochs", "lr", "grad_clip", "batch_size", "stride"}, "train");
        if (t.contains("epochs")) cfg.pipeline.training.epochs = t.at("epochs").get<int>();
        if (t.contains("lr")) cfg.pipeline.training.lr = t.at("lr").get<Scalar>();
        if (t.contains("grad_clip")) cfg.pipeline.training.grad_clip = t.at("grad_clip").get<Scalar>();
        if (t.contains("batch_size")) cfg.pipeline.training.batch_size = t.at("batch_size").get<int>();
        if (t.contains("stride")) cfg.pipeline.stride_train = t.at("stride").get<int>();
    }
    if (doc.contains("eval")) {
        const auto& e = doc.at("eval");
        reject_unknown(e, {"n_samples", "stride", "pool_stride", "sample_mode"}, "eval");
        if (e.contains("n_samples")) cfg.pipeline.n_samples = e.at("n_samples").get<int>();
        if (e.contains("stride")) cfg.pipeline.stride_eval = e.at("stride").get<int>();
        if (e.contains("pool_stride")) cfg.pipeline.pool_stride = e.at("pool_stride").get<int>();
        if (e.contains("sample_mode")) {
            const std::string mode = e.at("sample_mode").get<std::string>();
            if (mode == "oracle_noise") {
                cfg.pipeline.mode = SampleMode::OracleGoalNoise;
            } else if (mode == "goal_sweep") {
                cfg.pipeline.mode = SampleMode::GoalSweep;
            } else {
                throw ConfigError("config: sample_mode must be 'oracle_noise' or 'goal_sweep'");
            }
        }
    }
    if (doc.contains("ablation")) {
        const auto& a = doc.at("ablation");
        reject_unknown(a, {"goal_shift", "stable_dynamics"}, "ablation");
        if (a.contains("goal_shift")) cfg.pipeline.goal_shift_enabled = a.at("goal_shift").get<bool>();
        if (a.contains("stable_dynamics")) cfg.pipeline.stable_dynamics_enabled = a.at("stable_dynamics").get<bool>();
    }

    // basic validation
    if (cfg.pipeline.n_experts < 1) throw ConfigError("config: n_experts must be >= 1");
    if (cfg.pipeline.k_candidates < 1) throw ConfigError("config: k_candidates must be >= 1");
    if (cfg.pipeline.dtw.gamma < 0) throw ConfigError("config: gamma must be >= 0");
    if (!(cfg.pipeline.dyn.sigma > 0)) throw ConfigError("config: sigma must be > 0");
    if (!(cfg.pipeline.dyn.goal_epsilon > 0)) throw ConfigError("config: goal_epsilon must be > 0");
    if (cfg.pipeline.training.epochs < 1) throw ConfigError("config: epochs must be >= 1");
    if (cfg.pipeline.training.d % cfg.pipeline.training.heads != 0) {
        throw ConfigError("config: d must be divisible by heads");
    }
    if (cfg.pipeline.n_samples < 1) throw ConfigError("config: n_samples must be >= 1");
    return cfg;
}

void apply_env_overrides(RunConfig& cfg) {
    if (const char* out = std::getenv("PEDPRED_OUT_DIR")) cfg.out_dir = out;
    if (const char* th = std::getenv("PEDPRED_THREADS")) cfg.pipeline.threads = std::atoi(th);
}

}  // namespace pedpred
