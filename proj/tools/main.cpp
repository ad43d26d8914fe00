#include "pedpred/checkpoint.hpp"
#include "pedpred/config.hpp"
#include "pedpred/dataset.hpp"
#include "pedpred/metrics.hpp"
#include "pedpred/protocol.hpp"
#include "pedpred/rng.hpp"
#include "pedpred/svg.hpp"
#include "pedpred/synth.hpp"
#include "pedpred/transforms.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pedpred;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> data;  // name=path overrides
    int threads = -1;
    std::int64_t seed = -1;
    int epochs = -1;
    double lr = -1;
    int n_samples = -1;
    int n_experts = -1;
    int k_candidates = -1;
    double gamma = -1;
    int batch_size = -1;
    int d_model = -1;
    int z_dim = -1;
    int heads = -1;
    int stride_train = -1;
    int stride_eval = -1;
    std::string sample_mode;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON run configuration");
    cmd->add_option("--out-dir", f.out_dir, "output directory (overrides config)");
    cmd->add_option("--data", f.data, "dataset as name=path (repeatable; overrides config list)");
    cmd->add_option("--threads", f.threads, "worker thread cap (0 = hardware)");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--lr", f.lr, "learning rate");
    cmd->add_option("--n-samples", f.n_samples, "prediction samples per pedestrian");
    cmd->add_option("--n-experts", f.n_experts, "expert repository size N");
    cmd->add_option("--k-candidates", f.k_candidates, "goal candidate count K");
    cmd->add_option("--gamma", f.gamma, "soft-DTW gamma");
    cmd->add_option("--batch-size", f.batch_size, "training batch size");
    cmd->add_option("--d", f.d_model, "model width d");
    cmd->add_option("--z-dim", f.z_dim, "noise dimension");
    cmd->add_option("--heads", f.heads, "attention heads");
    cmd->add_option("--stride-train", f.stride_train, "training window stride");
    cmd->add_option("--stride-eval", f.stride_eval, "evaluation window stride");
    cmd->add_option("--sample-mode", f.sample_mode, "oracle_noise or goal_sweep");
}

RunConfig resolve_config(const CommonFlags& f) {
    RunConfig cfg = f.config_path.empty() ? default_run_config() : load_run_config(f.config_path);
    apply_env_overrides(cfg);
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (!f.data.empty()) {
        cfg.datasets.clear();
        for (const auto& spec : f.data) {
            const auto eq = spec.find('=');
            if (eq == std::string::npos) {
                cfg.datasets.emplace_back(fs::path(spec).stem().string(), spec);
            } else {
                cfg.datasets.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
            }
        }
    }
    if (f.threads >= 0) cfg.pipeline.threads = f.threads;
    if (f.seed >= 0) {
        cfg.pipeline.seed = static_cast<std::uint64_t>(f.seed);
        cfg.pipeline.training.seed = cfg.pipeline.seed;
    }
    if (f.epochs > 0) cfg.pipeline.training.epochs = f.epochs;
    if (f.lr >= 0) cfg.pipeline.training.lr = f.lr;
    if (f.n_samples > 0) cfg.pipeline.n_samples = f.n_samples;
    if (f.n_experts > 0) cfg.pipeline.n_experts = f.n_experts;
    if (f.k_candidates > 0) cfg.pipeline.k_candidates = f.k_candidates;
    if (f.gamma >= 0) cfg.pipeline.dtw.gamma = f.gamma;
    if (f.batch_size > 0) cfg.pipeline.training.batch_size = f.batch_size;
    if (f.d_model > 0) cfg.pipeline.training.d = f.d_model;
    if (f.z_dim > 0) cfg.pipeline.training.z_dim = f.z_dim;
    if (f.heads > 0) cfg.pipeline.training.heads = f.heads;
    if (f.stride_train > 0) cfg.pipeline.stride_train = f.stride_train;
    if (f.stride_eval > 0) cfg.pipeline.stride_eval = f.stride_eval;
    if (!f.sample_mode.empty()) {
        if (f.sample_mode == "oracle_noise") {
            cfg.pipeline.mode = SampleMode::OracleGoalNoise;
        } else if (f.sample_mode == "goal_sweep") {
            cfg.pipeline.mode = SampleMode::GoalSweep;
        } else {
            throw ConfigError("--sample-mode must be 'oracle_noise' or 'goal_sweep'");
        }
    }
    if (cfg.pipeline.training.d % cfg.pipeline.training.heads != 0) {
        throw ConfigError("d must be divisible by heads");
    }
    fs::create_directories(cfg.out_dir);
    return cfg;
}

std::vector<Dataset> load_configured_datasets(const RunConfig& cfg) {
    if (cfg.datasets.empty()) throw ConfigError("no datasets configured (use --data or the config file)");
    std::vector<Dataset> out;
    for (const auto& [name, path] : cfg.datasets) out.push_back(load_dataset(path, name));
    return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write: " + path.string());
    out << content;
}

int cmd_ingest(const CommonFlags& flags) {
    const RunConfig cfg = resolve_config(flags);
    const auto datasets = load_configured_datasets(cfg);
    std::cout << std::left << std::setw(12) << "dataset" << std::right << std::setw(10) << "rows"
              << std::setw(14) << "pedestrians" << std::setw(10) << "windows" << '\n';
    for (const auto& ds : datasets) {
        const DatasetSummary s = summarize(ds);
        std::cout << std::left << std::setw(12) << s.name << std::right << std::setw(10) << s.rows
                  << std::setw(14) << s.pedestrians << std::setw(10) << s.windows << '\n';
        write_dataset(ds, cfg.out_path(s.name + ".normalized.txt"));
    }
    return 0;
}

int cmd_synth(const CommonFlags& flags, const SynthConfig& synth_cfg, const std::string& name,
              const std::string& out_file) {
    const RunConfig cfg = resolve_config(flags);
    const Dataset ds = synth_dataset(name, synth_cfg);
    const fs::path path = out_file.empty() ? cfg.out_path(name + ".txt") : fs::path(out_file);
    write_dataset(ds, path);
    const DatasetSummary s = summarize(ds);
    std::cout << "wrote " << path.string() << " (" << s.rows << " rows, " << s.pedestrians
              << " pedestrians, " << s.windows << " windows)\n";
    return 0;
}

int cmd_train(const CommonFlags& flags, const std::string& resume_path) {
    const RunConfig cfg = resolve_config(flags);
    const auto datasets = load_configured_datasets(cfg);

    std::vector<SceneWindow> windows;
    for (const auto& ds : datasets) {
        for (auto& w : window_scenes(ds, 8, 20, cfg.pipeline.stride_train)) windows.push_back(std::move(w));
    }
    if (windows.empty()) throw DataError("train: no complete 20-frame windows in the configured datasets");

    TrainResult resume;
    const TrainResult* resume_ptr = nullptr;
    Checkpoint ck;
    if (!resume_path.empty()) {
        ck = load_checkpoint(resume_path);
        resume.params = ck.params;
        resume.adam = ck.adam;
        resume.epoch = ck.epoch;
        resume.loss_history = ck.loss_history;
        resume_ptr = &resume;
    }

    const TrainResult result = train(windows, cfg.pipeline.training, cfg.pipeline.dyn,
                                     cfg.pipeline.goal_shift_enabled, cfg.pipeline.stable_dynamics_enabled,
                                     cfg.pipeline.threads, resume_ptr);

    Checkpoint out;
    out.params = result.params;
    out.training = cfg.pipeline.training;
    out.dyn = cfg.pipeline.dyn;
    out.goal_shift_enabled = cfg.pipeline.goal_shift_enabled;
    out.stable_dynamics_enabled = cfg.pipeline.stable_dynamics_enabled;
    out.adam = result.adam;
    out.epoch = result.epoch;
    out.loss_history = result.loss_history;
    save_checkpoint(out, cfg.out_path("checkpoint.json"));

    std::ostringstream csv;
    csv << "epoch,loss\n";
    csv.precision(17);
    for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
        csv << (i + 1) << ',' << result.loss_history[i] << '\n';
    }
    write_text_file(cfg.out_path("loss.csv"), csv.str());

    std::cout << "trained " << result.epoch << " epochs on " << windows.size() << " windows; final loss "
              << (result.loss_history.empty() ? 0.0 : result.loss_history.back()) << '\n';
    std::cout << "checkpoint: " << cfg.out_path("checkpoint.json").string() << '\n';
    return 0;
}

json point_to_json(const Position2& p) { return json::array({p(0), p(1)}); }

json seq_to_json(const PointSeq& seq) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < seq.rows(); ++i) arr.push_back(json::array({seq(i, 0), seq(i, 1)}));
    return arr;
}

PointSeq seq_from_json(const json& arr) {
    PointSeq seq(arr.size(), 2);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        seq(static_cast<Eigen::Index>(i), 0) = arr[i][0].get<Scalar>();
        seq(static_cast<Eigen::Index>(i), 1) = arr[i][1].get<Scalar>();
    }
    return seq;
}

int cmd_predict(const CommonFlags& flags, const std::string& checkpoint_path, const std::string& target) {
    const RunConfig cfg = resolve_config(flags);
    if (checkpoint_path.empty()) throw ConfigError("predict: --checkpoint is required");
    const Checkpoint ck = load_checkpoint(checkpoint_path);

    const Dataset ds = load_dataset(target);
    std::vector<Dataset> pool_sets;
    for (const auto& [name, path] : cfg.datasets) {
        if (name != ds.name) pool_sets.push_back(load_dataset(path, name));
    }
    std::vector<const Dataset*> pool_ptrs;
    for (const auto& p : pool_sets) pool_ptrs.push_back(&p);
    if (pool_ptrs.empty()) pool_ptrs.push_back(&ds);  // fall back to self for smoke runs
    const ExpertPool pool = ExpertPool::from(build_pool(pool_ptrs, cfg.pipeline.pool_stride));

    PipelineConfig pcfg = cfg.pipeline;
    pcfg.goal_shift_enabled = ck.goal_shift_enabled;
    pcfg.stable_dynamics_enabled = ck.stable_dynamics_enabled;

    const auto windows = window_scenes(ds, 8, 20, pcfg.stride_eval);
    if (windows.empty()) throw DataError("predict: no complete windows in " + ds.name);

    json out_windows = json::array();
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const SceneWindow& window = windows[w];
        const std::uint64_t wseed = mix_seed(pcfg.seed, fnv1a(ds.name), w);
        std::vector<Position2> goals(window.pedestrians());
        for (int i = 0; i < window.pedestrians(); ++i) {
            Trajectory obs;
            obs.pedestrian_id = window.trajectories[i].pedestrian_id;
            obs.start_frame = window.trajectories[i].start_frame;
            obs.positions = window.trajectories[i].positions.topRows(window.t_obs);
            const GoalCandidates cands = estimate_goals(obs, pool, pcfg.n_experts, pcfg.k_candidates,
                                                        mix_seed(wseed, i), pcfg.dtw, pcfg.kmeans, 1);
            goals[i] = select_oracle_goal(cands, window.trajectories[i].last());
        }
        SamplerOptions opts{pcfg.goal_shift_enabled, pcfg.stable_dynamics_enabled};
        const auto samples = sample_predictions(window, ck.params, goals, pcfg.n_samples,
                                                mix_seed(wseed, 0x6e6f697365ULL), pcfg.dyn, opts);

        json jw;
        jw["id"] = ds.name + "#" + std::to_string(w);
        jw["t_obs"] = window.t_obs;
        jw["t_end"] = window.t_end;
        json peds = json::array();
        json gt = json::array();
        json jgoals = json::array();
        for (int i = 0; i < window.pedestrians(); ++i) {
            peds.push_back(window.trajectories[i].pedestrian_id);
            gt.push_back(seq_to_json(window.trajectories[i].positions));
            jgoals.push_back(point_to_json(goals[i]));
        }
        jw["pedestrians"] = peds;
        jw["start_frame"] = windows[w].trajectories[0].start_frame;
        jw["gt"] = gt;
        jw["goals"] = jgoals;
        json jsamples = json::array();
        for (const auto& s : samples) {
            json futures = json::array();
            for (const auto& f : s.futures) futures.push_back(seq_to_json(f.positions));
            jsamples.push_back(json{{"seed", s.noise_seed}, {"futures", futures}});
        }
        jw["samples"] = jsamples;
        out_windows.push_back(std::move(jw));
    }

    const json doc{{"dataset", ds.name}, {"windows", out_windows}};
    const fs::path out = cfg.out_path("predictions_" + ds.name + ".json");
    write_text_file(out, doc.dump(2));
    std::cout << "wrote " << out.string() << " (" << windows.size() << " windows)\n";
    return 0;
}

int cmd_eval(const CommonFlags& flags, const std::string& checkpoint_path) {
    const RunConfig cfg = resolve_config(flags);
    const auto datasets = load_configured_datasets(cfg);

    MetricsReport report;
    if (!checkpoint_path.empty()) {
        const Checkpoint ck = load_checkpoint(checkpoint_path);
        PipelineConfig pcfg = cfg.pipeline;
        pcfg.goal_shift_enabled = ck.goal_shift_enabled;
        pcfg.stable_dynamics_enabled = ck.stable_dynamics_enabled;
        for (std::size_t i = 0; i < datasets.size(); ++i) {
            std::vector<const Dataset*> others;
            for (std::size_t j = 0; j < datasets.size(); ++j) {
                if (j != i) others.push_back(&datasets[j]);
            }
            if (others.empty()) others.push_back(&datasets[i]);
            report.rows.push_back(evaluate_dataset(datasets[i], ck.params, build_pool(others, pcfg.pool_stride), pcfg));
        }
        DatasetReportRow avg;
        avg.name = "average";
        for (const auto& r : report.rows) {
            avg.ade += r.ade;
            avg.fde += r.fde;
            avg.n_windows += r.n_windows;
            avg.n_pedestrians += r.n_pedestrians;
        }
        avg.ade /= static_cast<Scalar>(report.rows.size());
        avg.fde /= static_cast<Scalar>(report.rows.size());
        report.rows.push_back(avg);
    } else {
        report = leave_one_out(datasets, cfg.pipeline);
    }

    write_text_file(cfg.out_path("report.json"), report_to_json(report, cfg.pipeline));
    const std::string text = report_to_text(report);
    write_text_file(cfg.out_path("report.txt"), text);
    std::cout << text;
    return 0;
}

int cmd_ablate(const CommonFlags& flags) {
    const RunConfig cfg = resolve_config(flags);
    const auto datasets = load_configured_datasets(cfg);
    const auto rows = run_ablation(datasets, cfg.pipeline);
    write_text_file(cfg.out_path("ablation.json"), ablation_to_json(rows, cfg.pipeline));
    const std::string text = ablation_to_text(rows);
    write_text_file(cfg.out_path("ablation.txt"), text);
    std::cout << text;
    return 0;
}

int cmd_plot(const CommonFlags& flags, const std::string& predictions_path, const std::string& window_id,
             const std::string& out_file) {
    const RunConfig cfg = resolve_config(flags);
    std::ifstream in(predictions_path);
    if (!in) throw DataError("cannot open predictions file: " + predictions_path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("predictions parse error: " + std::string(e.what()));
    }

    const json* found = nullptr;
    for (const auto& w : doc.at("windows")) {
        if (w.at("id").get<std::string>() == window_id) {
            found = &w;
            break;
        }
    }
    if (!found) throw DataError("unknown window id: " + window_id);

    SceneWindow window;
    window.t_obs = found->at("t_obs").get<int>();
    window.t_end = found->at("t_end").get<int>();
    const auto& peds = found->at("pedestrians");
    const auto& gt = found->at("gt");
    for (std::size_t i = 0; i < peds.size(); ++i) {
        Trajectory t;
        t.pedestrian_id = peds[i].get<std::int64_t>();
        t.positions = seq_from_json(gt[i]);
        window.trajectories.push_back(std::move(t));
    }
    std::vector<PredictionSample> samples;
    for (const auto& js : found->at("samples")) {
        PredictionSample s;
        s.noise_seed = js.at("seed").get<std::uint64_t>();
        for (const auto& jf : js.at("futures")) {
            Trajectory f;
            f.positions = seq_from_json(jf);
            s.futures.push_back(std::move(f));
        }
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw DataError("plot: window has no prediction samples");

    const fs::path out = out_file.empty() ? cfg.out_path("plot.svg") : fs::path(out_file);
    write_plot_svg(out, window, samples);
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamics-based pedestrian trajectory prediction"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* ingest = app.add_subcommand("ingest", "parse dataset files, report counts, write normalized caches");
    add_common_flags(ingest, flags);

    auto* synth = app.add_subcommand("synth", "generate the synthetic goal-driven arc dataset");
    add_common_flags(synth, flags);
    SynthConfig synth_cfg;
    std::string synth_name = "synth";
    std::string synth_out;
    std::int64_t synth_seed = 1;
    synth->add_option("--name", synth_name, "dataset name");
    synth->add_option("--out", synth_out, "output file (default <out_dir>/<name>.txt)");
    synth->add_option("--scenes", synth_cfg.scenes, "number of 20-frame scenes");
    synth->add_option("--peds-min", synth_cfg.peds_min, "min pedestrians per scene");
    synth->add_option("--peds-max", synth_cfg.peds_max, "max pedestrians per scene");
    synth->add_option("--synth-seed", synth_seed, "generator seed");
    synth->add_option("--speed-lo", synth_cfg.speed_lo, "min speed per frame");
    synth->add_option("--speed-hi", synth_cfg.speed_hi, "max speed per frame");
    synth->add_option("--turn-max", synth_cfg.turn_max, "max |turn rate| in rad per frame");

    auto* train_cmd = app.add_subcommand("train", "train the matrix-field model on the configured datasets");
    add_common_flags(train_cmd, flags);
    std::string resume_path;
    train_cmd->add_option("--resume", resume_path, "checkpoint to continue from");

    auto* predict = app.add_subcommand("predict", "sample futures for every window of a dataset");
    add_common_flags(predict, flags);
    std::string ck_path, predict_target;
    predict->add_option("--checkpoint", ck_path, "trained checkpoint")->required();
    predict->add_option("--target", predict_target, "dataset file to predict on")->required();

    auto* eval = app.add_subcommand("eval", "leave-one-out evaluation (or single-checkpoint eval)");
    add_common_flags(eval, flags);
    std::string eval_ck;
    eval->add_option("--checkpoint", eval_ck, "evaluate this checkpoint instead of training per round");

    auto* ablate = app.add_subcommand("ablate", "run the four component-combination rows");
    add_common_flags(ablate, flags);

    auto* plot = app.add_subcommand("plot", "emit an SVG figure for one predicted window");
    add_common_flags(plot, flags);
    std::string plot_preds, plot_window, plot_out;
    plot->add_option("--predictions", plot_preds, "predictions JSON from `predict`")->required();
    plot->add_option("--window", plot_window, "window id, e.g. synth#0")->required();
    plot->add_option("--out", plot_out, "output SVG path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 1;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(flags);
        if (synth->parsed()) {
            synth_cfg.seed = static_cast<std::uint64_t>(synth_seed);
            return cmd_synth(flags, synth_cfg, synth_name, synth_out);
        }
        if (train_cmd->parsed()) return cmd_train(flags, resume_path);
        if (predict->parsed()) return cmd_predict(flags, ck_path, predict_target);
        if (eval->parsed()) return cmd_eval(flags, eval_ck);
        if (ablate->parsed()) return cmd_ablate(flags);
        if (plot->parsed()) return cmd_plot(flags, plot_preds, plot_window, plot_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
