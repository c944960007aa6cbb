#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qdrive/geometry.hpp"

namespace qdrive {

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;  // degrees
};

struct Waypoint {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;  // degrees in (-180, 180], direction to the successor
    std::size_t index = 0;

    Vec2 pos() const { return {x, y}; }
};

struct Trajectory {
    std::vector<Waypoint> waypoints;
    double goal_radius = 3.0;

    const Waypoint& goal() const { return waypoints.back(); }
    double length() const;
};

class TrajectoryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Resamples a route of control poses into waypoints at ~spacing metres.
// Consecutive poses are joined by cubic Hermite segments whose end tangents
// follow the pose yaws, so a route of straight poses stays straight.
Trajectory build_trajectory(std::span<const Pose> route, double spacing);

// Index of the waypoint closest to p; ties go to the lower index.
std::size_t nearest_waypoint(const Trajectory& traj, Vec2 p);

}  // namespace qdrive
