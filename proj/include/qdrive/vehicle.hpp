#pragma once

#include "qdrive/geometry.hpp"

namespace qdrive {

struct VehicleParams {
    double a_max = 3.0;        // m/s^2 at full throttle
    double b_max = 8.0;        // m/s^2 at full brake
    double drag = 0.05;        // 1/s
    double wheelbase = 2.5;    // m
    double max_steer = 35.0;   // degrees at |steer| = 1
    double v_max = 16.7;       // m/s
};

struct VehicleState {
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;    // degrees, CCW from +x
    double speed = 0.0;  // m/s
    double half_length = 2.2;
    double half_width = 0.9;

    Vec2 pos() const { return {x, y}; }
    Box box() const { return {{x, y}, yaw, half_length, half_width}; }
};

// throttle in [0, 1], steer in [-1, 1] (positive steers right), brake in [0, 1].
struct ControlCommand {
    double throttle = 0.0;
    double steer = 0.0;
    double brake = 0.0;

    bool operator==(const ControlCommand&) const = default;
};

// Explicit-Euler kinematic bicycle step. Position and yaw advance with the
// pre-step speed and heading; the new speed is clamped to [0, v_max].
VehicleState step_vehicle(const VehicleState& state, const ControlCommand& control, double dt,
                          const VehicleParams& params = {});

}  // namespace qdrive
