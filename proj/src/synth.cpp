#include "pedpred/synth.hpp"

#include "pedpred/dataset.hpp"
#include "pedpred/rng.hpp"

#include <cmath>

namespace pedpred {

Dataset synth_dataset(const std::string& name, const SynthConfig& cfg) {
    if (cfg.scenes < 1 || cfg.peds_min < 1 || cfg.peds_max < cfg.peds_min) {
        throw std::invalid_argument("synth_dataset: bad scene/pedestrian counts");
    }
    Rng rng(mix_seed(cfg.seed, 0x73796e7468ULL));
    std::vector<Trajectory> trajs;
    std::int64_t ped_id = 1;
    for (int s = 0; s < cfg.scenes; ++s) {
        const int peds = cfg.peds_min + static_cast<int>(rng.uniform_int(cfg.peds_max - cfg.peds_min + 1));
        for (int p = 0; p < peds; ++p) {
            Trajectory t;
            t.pedestrian_id = ped_id++;
            t.start_frame = static_cast<std::int64_t>(s) * cfg.t_end;
            t.positions.resize(cfg.t_end, 2);
            Position2 pos(rng.uniform(-cfg.start_box, cfg.start_box), rng.uniform(-cfg.start_box, cfg.start_box));
            Scalar heading = rng.uniform(0, 2 * M_PI);
            const Scalar speed = rng.uniform(cfg.speed_lo, cfg.speed_hi);
            const Scalar turn = rng.uniform(-cfg.turn_max, cfg.turn_max);
            for (int k = 0; k < cfg.t_end; ++k) {
                t.positions.row(k) = pos.transpose();
                pos += speed * Vec2(std::cos(heading), std::sin(heading));
                heading += turn;
            }
            trajs.push_back(std::move(t));
        }
    }
    return dataset_from_trajectories(name, trajs);
}

}  // namespace pedpred
