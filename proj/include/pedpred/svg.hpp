#pragma once

#include "pedpred/sampler.hpp"

#include <filesystem>

namespace pedpred {

/// Figure emission: observed points as dots, predictions as dashed polylines
/// with star endpoints, ground truth as solid polylines with round endpoint
/// markers.
void write_plot_svg(const std::filesystem::path& file, const SceneWindow& window,
                    const std::vector<PredictionSample>& samples);

}  // namespace pedpred
