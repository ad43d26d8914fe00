#include "pedpred/sampler.hpp"

#include "pedpred/rng.hpp"

namespace pedpred {

std::vector<PredictionSample> sample_predictions(const SceneWindow& window, const ModelParams& params,
                                                 const std::vector<Position2>& goals, int n,
                                                 std::uint64_t seed, const DynamicsConfig& dyn,
                                                 const SamplerOptions& opts) {
    const int m = window.pedestrians();
    if (m == 0) throw std::invalid_argument("sample_predictions: empty window");
    if (static_cast<int>(goals.size()) != m) {
        throw std::invalid_argument("sample_predictions: one goal per pedestrian required");
    }
    if (n < 1) throw std::invalid_argument("sample_predictions: n must be >= 1");
    const int t_obs = window.t_obs;
    const int t_end = window.t_end;
    const int horizon = t_end - t_obs;

    std::vector<PredictionSample> samples;
    samples.reserve(n);
    for (int s = 0; s < n; ++s) {
        const std::uint64_t noise_seed = mix_seed(seed, static_cast<std::uint64_t>(s), 0x73616d706cULL);
        Rng rng(noise_seed);
        VecX noise(params.z_dim);
        for (int z = 0; z < params.z_dim; ++z) noise[z] = rng.normal();

        // absolute positions: observed prefix, extended step by step
        std::vector<PointSeq> history(m);
        for (int i = 0; i < m; ++i) {
            history[i].resize(t_end, 2);
            history[i].topRows(t_obs) = window.trajectories[i].positions.topRows(t_obs);
        }

        for (int t = t_obs; t < t_end; ++t) {
            std::vector<PointSeq> inputs(m);
            for (int i = 0; i < m; ++i) {
                inputs[i] = history[i].topRows(t);
                if (opts.goal_shift_enabled) inputs[i].rowwise() -= goals[i].transpose();
            }
            const MatX head = forward_head(params, inputs, noise);
            for (int i = 0; i < m; ++i) {
                const Position2 cur = history[i].row(t - 1).transpose();
                const Eigen::Index r = static_cast<Eigen::Index>(i) * t + (t - 1);
                Position2 next;
                if (opts.stable_dynamics_enabled) {
                    const Mat2 p = assemble_pd({head(r, 0), head(r, 1), head(r, 2)}, dyn.sigma);
                    next = advance_toward_goal(cur, goals[i], p, dyn);
                } else {
                    next = euler_step(cur, Velocity2(head(r, 0), head(r, 1)), dyn.dt);
                }
                history[i].row(t) = next.transpose();
            }
        }

        PredictionSample sample;
        sample.noise_seed = noise_seed;
        sample.goals = goals;
        sample.futures.resize(m);
        for (int i = 0; i < m; ++i) {
            Trajectory f;
            f.pedestrian_id = window.trajectories[i].pedestrian_id;
            f.start_frame = window.trajectories[i].start_frame + t_obs;
            f.positions = history[i].bottomRows(horizon);
            sample.futures[i] = std::move(f);
        }
        samples.push_back(std::move(sample));
    }
    return samples;
}

bool respects_descent(const Trajectory& future, const Position2& start, const Position2& goal, Scalar tol) {
    Scalar prev = attractor_value(start, goal);
    for (int t = 0; t < future.length(); ++t) {
        const Scalar cur = attractor_value(future.at(t), goal);
        if (cur > prev + tol) return false;
        prev = cur;
    }
    return true;
}

}  // namespace pedpred
