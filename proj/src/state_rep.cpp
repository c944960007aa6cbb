#include "qdrive/state_rep.hpp"

#include <algorithm>
#include <cmath>

namespace qdrive {

double signed_lateral_distance(const Trajectory& traj, Vec2 p) {
    if (traj.waypoints.size() < 2) throw StateError("trajectory needs at least two waypoints");
    const std::size_t t = nearest_waypoint(traj, p);
    const std::size_t i0 = t + 1 < traj.waypoints.size() ? t : t - 1;
    const Vec2 w_t = traj.waypoints[t].pos();
    const Vec2 u = traj.waypoints[i0 + 1].pos() - traj.waypoints[i0].pos();
    const Vec2 v = w_t - p;
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu == 0.0) throw StateError("duplicate consecutive waypoints");
    if (nv == 0.0) return 0.0;
    const double c = std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
    const double x = cross(u, v);
    const double sgn = (x > 0.0) - (x < 0.0);
    return nv * std::sin(sgn * std::acos(c));
}

double heading_error(const Trajectory& traj, const VehicleState& state) {
    const std::size_t t = nearest_waypoint(traj, state.pos());
    return wrap_deg(state.yaw - traj.waypoints[t].yaw);
}

Observation assemble_observation(const World& world, const Trajectory& traj, PerceptionMode mode,
                                 const CameraConfig& camera, PipelineState* pipeline) {
    Observation o;
    o.d = signed_lateral_distance(traj, world.ego.pos());
    o.phi = heading_error(traj, world.ego);
    o.v = world.ego.speed;
    if (mode == PerceptionMode::Oracle) {
        o.d_obs = oracle_obstacle_distance(world, camera);
    } else {
        PipelineState scratch;
        o.d_obs = pipeline_obstacle_distance(world, camera, pipeline ? *pipeline : scratch);
    }
    // Camera inside an actor's footprint: keep d_obs strictly positive.
    o.d_obs = std::max(o.d_obs, 1e-3);
    return o;
}

}  // namespace qdrive
