#pragma once

#include "pedpred/types.hpp"

#include <filesystem>
#include <iosfwd>

namespace pedpred {

/// Parses the whitespace text format: frame_id pedestrian_id x y per line,
/// '#' lines skipped, fractional ids truncated toward zero.
Dataset parse_dataset(std::istream& in, const std::string& name, const std::string& origin);

Dataset load_dataset(const std::filesystem::path& file, const std::string& name = "");

/// Builds a dataset from already-windowed trajectories (synthetic data, tests).
Dataset dataset_from_trajectories(const std::string& name, const std::vector<Trajectory>& trajs);

/// Writes the canonical sorted text form.
void write_dataset(const Dataset& ds, const std::filesystem::path& file);

struct DatasetSummary {
    std::string name;
    std::size_t rows = 0;
    std::size_t pedestrians = 0;
    std::size_t windows = 0;  // disjoint 20-frame windows
};

DatasetSummary summarize(const Dataset& ds);

}  // namespace pedpred
