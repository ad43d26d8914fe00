#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pedpred {

// Scalar type used throughout; all arithmetic is 64-bit.
using Scalar = double;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

using Position2 = Vec2;
using Velocity2 = Vec2;

// Time-major stack of 2-D points, one row per frame-step.
using PointSeq = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class EmptyRepositoryError : public std::runtime_error {
public:
    explicit EmptyRepositoryError(const std::string& msg) : std::runtime_error(msg) {}
};

/// One pedestrian's positions over a contiguous range of frame-steps.
struct Trajectory {
    std::int64_t pedestrian_id = 0;
    std::int64_t start_frame = 0;  // in frame-step units
    PointSeq positions;            // rows are consecutive frame-steps

    int length() const { return static_cast<int>(positions.rows()); }
    Position2 at(int t) const { return positions.row(t).transpose(); }
    Position2 first() const { return positions.row(0).transpose(); }
    Position2 last() const { return positions.row(positions.rows() - 1).transpose(); }
};

inline bool all_finite(const PointSeq& p) { return p.allFinite(); }

/// A group of trajectories aligned to the same t_end frames.
struct SceneWindow {
    std::vector<Trajectory> trajectories;
    int t_obs = 8;
    int t_end = 20;

    int pedestrians() const { return static_cast<int>(trajectories.size()); }
};

/// Raw dataset rows plus the inferred frame stride.
struct Dataset {
    struct Row {
        std::int64_t frame = 0;
        std::int64_t pedestrian = 0;
        Scalar x = 0;
        Scalar y = 0;
    };

    std::string name;
    std::vector<Row> rows;         // sorted by (frame, pedestrian)
    std::int64_t frame_step = 1;   // raw frame delta equal to one step
    std::int64_t min_frame = 0;

    std::int64_t frame_index(std::int64_t frame) const {
        return (frame - min_frame) / frame_step;
    }
};

}  // namespace pedpred
