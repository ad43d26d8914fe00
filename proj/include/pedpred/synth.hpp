#pragma once

#include "pedpred/types.hpp"

namespace pedpred {

/// Goal-driven constant-turn arcs: per pedestrian a random start, heading,
/// speed and turn rate, integrated for t_end frames. Turn totals stay well
/// under 90 degrees so every step makes progress toward the endpoint.
struct SynthConfig {
    int scenes = 100;
    int peds_min = 1;
    int peds_max = 3;
    int t_end = 20;
    std::uint64_t seed = 1;
    Scalar speed_lo = 0.095;
    Scalar speed_hi = 0.105;
    Scalar turn_max = 0.065;  // radians per frame
    Scalar start_box = 3.0;   // starts uniform in [-box, box]^2
};

Dataset synth_dataset(const std::string& name, const SynthConfig& cfg);

}  // namespace pedpred
