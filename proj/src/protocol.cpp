#include "pedpred/protocol.hpp"

#include "pedpred/dataset.hpp"
#include "pedpred/metrics.hpp"
#include "pedpred/parallel.hpp"
#include "pedpred/rng.hpp"
#include "pedpred/transforms.hpp"

#include <json.hpp>

#include <iomanip>
#include <sstream>

namespace pedpred {

using nlohmann::json;

std::vector<Trajectory> build_pool(const std::vector<const Dataset*>& datasets, int pool_stride) {
    std::vector<Trajectory> pool;
    for (const Dataset* ds : datasets) {
        for (const auto& w : window_scenes(*ds, 8, 20, pool_stride)) {
            for (const auto& t : w.trajectories) pool.push_back(t);
        }
    }
    return pool;
}

namespace {

struct WindowScore {
    Scalar ade = 0;
    Scalar fde = 0;
    int pedestrians = 0;
    int descent_violations = 0;
};

Trajectory observed_prefix(const Trajectory& traj, int t_obs) {
    Trajectory obs;
    obs.pedestrian_id = traj.pedestrian_id;
    obs.start_frame = traj.start_frame;
    obs.positions = traj.positions.topRows(t_obs);
    return obs;
}

WindowScore score_window(const SceneWindow& window, const ModelParams& params, const ExpertPool& pool,
                         const PipelineConfig& cfg, std::uint64_t window_seed) {
    const int m = window.pedestrians();
    std::vector<GoalCandidates> candidates(m);
    for (int i = 0; i < m; ++i) {
        candidates[i] = estimate_goals(observed_prefix(window.trajectories[i], window.t_obs), pool,
                                       cfg.n_experts, cfg.k_candidates, mix_seed(window_seed, i),
                                       cfg.dtw, cfg.kmeans, 1);
    }

    SamplerOptions opts;
    opts.goal_shift_enabled = cfg.goal_shift_enabled;
    opts.stable_dynamics_enabled = cfg.stable_dynamics_enabled;

    std::vector<PredictionSample> samples;
    if (cfg.mode == SampleMode::OracleGoalNoise) {
        std::vector<Position2> goals(m);
        for (int i = 0; i < m; ++i) {
            goals[i] = select_oracle_goal(candidates[i], window.trajectories[i].last());
        }
        samples = sample_predictions(window, params, goals, cfg.n_samples, mix_seed(window_seed, 0x6e6f697365ULL),
                                     cfg.dyn, opts);
    } else {
        for (int s = 0; s < cfg.n_samples; ++s) {
            std::vector<Position2> goals(m);
            for (int i = 0; i < m; ++i) {
                const auto& centers = candidates[i].centers;
                goals[i] = centers[static_cast<std::size_t>(s) % centers.size()];
            }
            auto one = sample_predictions(window, params, goals, 1, mix_seed(window_seed, 0x7377656570ULL, s),
                                          cfg.dyn, opts);
            samples.push_back(std::move(one[0]));
        }
    }

    WindowScore score;
    score.pedestrians = m;
    if (cfg.stable_dynamics_enabled) {
        for (const auto& s : samples) {
            for (int i = 0; i < m; ++i) {
                const Position2 start = window.trajectories[i].at(window.t_obs - 1);
                if (!respects_descent(s.futures[i], start, s.goals[i])) score.descent_violations += 1;
            }
        }
    }
    const BestOfResult best = best_of_n(samples, window);
    score.ade = best.min_ade;
    score.fde = best.min_fde;
    return score;
}

}  // namespace

DatasetReportRow evaluate_dataset(const Dataset& ds, const ModelParams& params,
                                  const std::vector<Trajectory>& pool, const PipelineConfig& cfg) {
    const auto windows = window_scenes(ds, 8, 20, cfg.stride_eval);
    DatasetReportRow row;
    row.name = ds.name;
    row.descent_checked = cfg.stable_dynamics_enabled;
    if (windows.empty()) return row;

    const ExpertPool cached = ExpertPool::from(pool);
    std::vector<WindowScore> scores(windows.size());
    parallel_for(static_cast<int>(windows.size()), cfg.threads, [&](int w) {
        scores[w] = score_window(windows[w], params, cached, cfg, mix_seed(cfg.seed, fnv1a(ds.name), w));
    });
    for (const auto& s : scores) {
        row.ade += s.ade;
        row.fde += s.fde;
        row.n_pedestrians += s.pedestrians;
        row.descent_violations += s.descent_violations;
    }
    row.n_windows = static_cast<int>(windows.size());
    row.ade /= static_cast<Scalar>(windows.size());
    row.fde /= static_cast<Scalar>(windows.size());
    return row;
}

MetricsReport leave_one_out(const std::vector<Dataset>& datasets, const PipelineConfig& cfg,
                            std::vector<LooRound>* rounds) {
    if (datasets.size() < 2) throw ConfigError("leave_one_out: need at least 2 datasets");
    MetricsReport report;
    for (std::size_t h = 0; h < datasets.size(); ++h) {
        std::vector<const Dataset*> train_sets;
        for (std::size_t i = 0; i < datasets.size(); ++i) {
            if (i != h) train_sets.push_back(&datasets[i]);
        }

        std::vector<SceneWindow> train_windows;
        std::set<TrajKey> train_keys;
        for (const Dataset* ds : train_sets) {
            for (auto& w : window_scenes(*ds, 8, 20, cfg.stride_train)) {
                for (const auto& t : w.trajectories) train_keys.insert({ds->name, t.pedestrian_id, t.start_frame});
                train_windows.push_back(std::move(w));
            }
        }
        std::vector<Trajectory> pool;
        for (const Dataset* ds : train_sets) {
            for (const auto& w : window_scenes(*ds, 8, 20, cfg.pool_stride)) {
                for (const auto& t : w.trajectories) {
                    train_keys.insert({ds->name, t.pedestrian_id, t.start_frame});
                    pool.push_back(t);
                }
            }
        }

        TrainingConfig tcfg = cfg.training;
        tcfg.seed = mix_seed(cfg.seed, h, 0x747261696eULL);
        const TrainResult trained = train(train_windows, tcfg, cfg.dyn, cfg.goal_shift_enabled,
                                          cfg.stable_dynamics_enabled, cfg.threads);

        const DatasetReportRow row = evaluate_dataset(datasets[h], trained.params, pool, cfg);
        report.rows.push_back(row);

        if (rounds) {
            LooRound r;
            r.held_out = datasets[h].name;
            r.row = row;
            r.train_keys = std::move(train_keys);
            for (const auto& w : window_scenes(datasets[h], 8, 20, cfg.stride_eval)) {
                for (const auto& t : w.trajectories) r.eval_keys.insert({datasets[h].name, t.pedestrian_id, t.start_frame});
            }
            r.loss_history = trained.loss_history;
            rounds->push_back(std::move(r));
        }
    }

    DatasetReportRow avg;
    avg.name = "average";
    avg.descent_checked = cfg.stable_dynamics_enabled;
    for (const auto& r : report.rows) {
        avg.ade += r.ade;
        avg.fde += r.fde;
        avg.n_windows += r.n_windows;
        avg.n_pedestrians += r.n_pedestrians;
        avg.descent_violations += r.descent_violations;
    }
    avg.ade /= static_cast<Scalar>(report.rows.size());
    avg.fde /= static_cast<Scalar>(report.rows.size());
    report.rows.push_back(avg);
    return report;
}

std::vector<AblationRow> run_ablation(const std::vector<Dataset>& datasets, const PipelineConfig& cfg) {
    const std::vector<std::tuple<std::string, bool, bool>> combos = {
        {"C", false, false},
        {"B+C", false, true},
        {"A+C", true, false},
        {"A+B+C", true, true},
    };
    std::vector<AblationRow> rows;
    for (const auto& [label, shift, dynamics] : combos) {
        PipelineConfig c = cfg;
        c.goal_shift_enabled = shift;
        c.stable_dynamics_enabled = dynamics;
        AblationRow row;
        row.label = label;
        row.goal_shift = shift;
        row.stable_dynamics = dynamics;
        row.report = leave_one_out(datasets, c);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

json row_to_json(const DatasetReportRow& r) {
    return json{{"name", r.name},
                {"ade", r.ade},
                {"fde", r.fde},
                {"n_windows", r.n_windows},
                {"n_pedestrians", r.n_pedestrians},
                {"descent_checked", r.descent_checked},
                {"descent_violations", r.descent_violations}};
}

json config_to_json(const PipelineConfig& cfg) {
    return json{{"gamma", cfg.dtw.gamma},
                {"squared_cost", cfg.dtw.squared_cost},
                {"n_experts", cfg.n_experts},
                {"k_candidates", cfg.k_candidates},
                {"sigma", cfg.dyn.sigma},
                {"goal_epsilon", cfg.dyn.goal_epsilon},
                {"dt", cfg.dyn.dt},
                {"d", cfg.training.d},
                {"z_dim", cfg.training.z_dim},
                {"heads", cfg.training.heads},
                {"epochs", cfg.training.epochs},
                {"lr", cfg.training.lr},
                {"grad_clip", cfg.training.grad_clip},
                {"batch_size", cfg.training.batch_size},
                {"n_samples", cfg.n_samples},
                {"sample_mode", cfg.mode == SampleMode::OracleGoalNoise ? "oracle_noise" : "goal_sweep"},
                {"stride_train", cfg.stride_train},
                {"stride_eval", cfg.stride_eval},
                {"pool_stride", cfg.pool_stride},
                {"seed", cfg.seed},
                {"goal_shift", cfg.goal_shift_enabled},
                {"stable_dynamics", cfg.stable_dynamics_enabled}};
}

}  // namespace

std::string report_to_json(const MetricsReport& report, const PipelineConfig& cfg) {
    json rows = json::array();
    for (const auto& r : report.rows) rows.push_back(row_to_json(r));
    const json doc{{"rows", rows}, {"config", config_to_json(cfg)}};
    return doc.dump(2);
}

std::string report_to_text(const MetricsReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(12) << "dataset" << std::right << std::setw(10) << "ADE" << std::setw(10)
        << "FDE" << std::setw(10) << "windows" << std::setw(12) << "pedestrians" << '\n';
    for (const auto& r : report.rows) {
        out << std::left << std::setw(12) << r.name << std::right << std::fixed << std::setprecision(4)
            << std::setw(10) << r.ade << std::setw(10) << r.fde << std::setw(10) << r.n_windows
            << std::setw(12) << r.n_pedestrians << '\n';
    }
    return out.str();
}

std::string ablation_to_json(const std::vector<AblationRow>& rows, const PipelineConfig& cfg) {
    json arr = json::array();
    for (const auto& row : rows) {
        json rows_json = json::array();
        for (const auto& r : row.report.rows) rows_json.push_back(row_to_json(r));
        arr.push_back(json{{"components", row.label},
                           {"goal_shift", row.goal_shift},
                           {"stable_dynamics", row.stable_dynamics},
                           {"rows", rows_json}});
    }
    const json doc{{"ablation", arr}, {"config", config_to_json(cfg)}};
    return doc.dump(2);
}

std::string ablation_to_text(const std::vector<AblationRow>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "components";
    if (!rows.empty()) {
        for (const auto& r : rows.front().report.rows) out << std::right << std::setw(16) << r.name;
    }
    out << '\n';
    for (const auto& row : rows) {
        out << std::left << std::setw(10) << row.label;
        for (const auto& r : row.report.rows) {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(3) << r.ade << "/" << std::setprecision(3) << r.fde;
            out << std::right << std::setw(16) << cell.str();
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace pedpred
