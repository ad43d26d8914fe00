#pragma once

#include "pedpred/train.hpp"

#include <filesystem>

namespace pedpred {

/// Model snapshot plus everything needed to resume training. Serialized as a
/// JSON document; see README for the field list.
struct Checkpoint {
    ModelParams params;
    TrainingConfig training;
    DynamicsConfig dyn;
    bool goal_shift_enabled = true;
    bool stable_dynamics_enabled = true;
    AdamState adam;
    int epoch = 0;
    std::vector<Scalar> loss_history;
};

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace pedpred
