#pragma once

#include "pedpred/protocol.hpp"

#include <filesystem>
#include <map>

namespace pedpred {

/// Full run configuration: dataset paths plus every module parameter.
/// Loaded from a JSON file; unknown keys are rejected; CLI flags override.
struct RunConfig {
    std::vector<std::pair<std::string, std::string>> datasets;  // (name, path)
    std::string out_dir = "out";
    PipelineConfig pipeline;

    std::filesystem::path out_path(const std::string& leaf) const {
        return std::filesystem::path(out_dir) / leaf;
    }
};

RunConfig default_run_config();
RunConfig load_run_config(const std::filesystem::path& file);

/// Environment overrides: PEDPRED_OUT_DIR, PEDPRED_THREADS.
void apply_env_overrides(RunConfig& cfg);

}  // namespace pedpred
