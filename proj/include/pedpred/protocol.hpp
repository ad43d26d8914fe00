#pragma once

#include "pedpred/goal_estimator.hpp"
#include "pedpred/train.hpp"
#include "pedpred/sampler.hpp"

#include <set>
#include <tuple>

namespace pedpred {

enum class SampleMode {
    OracleGoalNoise,  // one oracle-selected goal, n noise draws
    GoalSweep,        // sample s uses candidate s mod K, fresh noise each
};

/// Everything one train/evaluate round needs.
struct PipelineConfig {
    SoftDtwParams dtw;
    int n_experts = 100;
    int k_candidates = 20;
    KMeansOptions kmeans;
    DynamicsConfig dyn;
    TrainingConfig training;
    int n_samples = 20;
    SampleMode mode = SampleMode::OracleGoalNoise;
    int stride_train = 1;
    int stride_eval = 20;
    int pool_stride = 20;
    int threads = 0;
    std::uint64_t seed = 1;
    bool goal_shift_enabled = true;
    bool stable_dynamics_enabled = true;
};

struct DatasetReportRow {
    std::string name;
    Scalar ade = 0;
    Scalar fde = 0;
    int n_windows = 0;
    int n_pedestrians = 0;
    bool descent_checked = false;
    int descent_violations = 0;
};

struct MetricsReport {
    std::vector<DatasetReportRow> rows;  // one per dataset, then "average"
};

/// Identity of a windowed trajectory, for disjointness checks.
using TrajKey = std::tuple<std::string, std::int64_t, std::int64_t>;  // dataset, pedestrian, start

struct LooRound {
    std::string held_out;
    DatasetReportRow row;
    std::set<TrajKey> train_keys;
    std::set<TrajKey> eval_keys;
    std::vector<Scalar> loss_history;
};

/// Disjoint windows of each dataset flattened into an expert pool.
std::vector<Trajectory> build_pool(const std::vector<const Dataset*>& datasets, int pool_stride);

/// Evaluates one trained model on one dataset's windows.
DatasetReportRow evaluate_dataset(const Dataset& ds, const ModelParams& params, const std::vector<Trajectory>& pool,
                                  const PipelineConfig& cfg);

/// Train on all but one dataset, evaluate on the held-out one, for every
/// dataset in turn; the final row is the unweighted average.
MetricsReport leave_one_out(const std::vector<Dataset>& datasets, const PipelineConfig& cfg,
                            std::vector<LooRound>* rounds = nullptr);

struct AblationRow {
    std::string label;  // e.g. "A+B+C"
    bool goal_shift = false;
    bool stable_dynamics = false;
    MetricsReport report;
};

/// The four component combinations: backbone only, +dynamics, +goal shift,
/// and the full configuration.
std::vector<AblationRow> run_ablation(const std::vector<Dataset>& datasets, const PipelineConfig& cfg);

std::string report_to_json(const MetricsReport& report, const PipelineConfig& cfg);
std::string report_to_text(const MetricsReport& report);
std::string ablation_to_json(const std::vector<AblationRow>& rows, const PipelineConfig& cfg);
std::string ablation_to_text(const std::vector<AblationRow>& rows);

}  // namespace pedpred
