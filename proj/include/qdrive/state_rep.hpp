#pragma once

#include <array>
#include <stdexcept>

#include "qdrive/perception.hpp"
#include "qdrive/trajectory.hpp"
#include "qdrive/world.hpp"

namespace qdrive {

// Reduced state fed to the Q-networks.
struct Observation {
    double d = 0.0;      // signed lateral offset from the path, m; positive = right
    double phi = 0.0;    // heading error, degrees in (-180, 180]
    double d_obs = 0.0;  // distance to the closest relevant obstacle, m
    double v = 0.0;      // ego speed, m/s
};

// Fixed affine scaling applied before the networks.
struct InputScaling {
    double d = 3.0;
    double phi = 100.0;
    double d_obs = 100.0;
    double v = 30.0;

    std::array<double, 2> braking_input(const Observation& o) const { return {o.d_obs / d_obs, o.v / v}; }
    std::array<double, 2> driving_input(const Observation& o) const { return {o.d / d, o.phi / phi}; }
    bool operator==(const InputScaling&) const = default;
};

enum class PerceptionMode { Oracle, Pipeline };

class StateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// d = |v| sin(sgn(u x v) acos(u.v / |u||v|)) with u = w_{t+1} - w_t, v = w_t - p,
// w_t the nearest waypoint. The goal waypoint reuses the final segment.
double signed_lateral_distance(const Trajectory& traj, Vec2 p);

// wrap(vehicle yaw - yaw of the nearest waypoint).
double heading_error(const Trajectory& traj, const VehicleState& state);

Observation assemble_observation(const World& world, const Trajectory& traj, PerceptionMode mode,
                                 const CameraConfig& camera, PipelineState* pipeline = nullptr);

}  // namespace qdrive
