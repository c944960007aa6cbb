#include "qdrive/vehicle.hpp"

#include <algorithm>

namespace qdrive {

VehicleState step_vehicle(const VehicleState& state, const ControlCommand& control, double dt,
                          const VehicleParams& params) {
    VehicleState next = state;
    const double accel = control.throttle * params.a_max - control.brake * params.b_max - params.drag * state.speed;
    next.speed = std::clamp(state.speed + accel * dt, 0.0, params.v_max);

    // steer > 0 turns right, i.e. clockwise in the CCW yaw frame.
    const double yaw_rate = state.speed / params.wheelbase * std::tan(deg2rad(control.steer * params.max_steer));
    next.yaw = wrap_deg(state.yaw - rad2deg(yaw_rate * dt));

    const Vec2 h = heading(state.yaw);
    next.x = state.x + h.x * state.speed * dt;
    next.y = state.y + h.y * state.speed * dt;
    return next;
}

}  // namespace qdrive
