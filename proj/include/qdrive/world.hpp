#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qdrive/map.hpp"
#include "qdrive/trajectory.hpp"
#include "qdrive/vehicle.hpp"

namespace qdrive {

enum class ActorKind : std::uint8_t { Vehicle, Pedestrian };

// Follows a straight lane at up to target_speed, stopping behind anything in
// its corridor and at red stop lines.
struct LaneFollower {
    std::size_t lane = 0;
    double s = 0.0;
    double target_speed = 10.0;
};

// Walks back and forth over one crosswalk. progress is measured from the
// crosswalk's `a` end; the walker waits at `offset_from_end` metres inside the
// sidewalk on whichever side it is on.
struct CrosswalkWalker {
    enum class Phase : std::uint8_t { Waiting, Crossing };

    std::size_t crosswalk = 0;
    double lateral = 0.0;          // offset along the road direction within the crosswalk
    double offset_from_end = 1.0;  // depth into the sidewalk while waiting
    double progress = 1.0;
    bool at_a = true;
    Phase phase = Phase::Waiting;
    double trigger_time = 0.0;
    double dwell = 30.0;
    double walk_speed = 1.3;
};

struct Actor {
    std::uint32_t id = 0;
    ActorKind kind = ActorKind::Vehicle;
    VehicleState pose;
    double height = 1.5;
    std::variant<LaneFollower, CrosswalkWalker> script;
};

enum class LightState : std::uint8_t { Red, Green };
enum class LightView : std::uint8_t { None, Red, Green };

struct TrafficLight {
    Vec2 position;
    double facing_yaw = 0.0;
    LightCycle cycle;

    // Red for the first `red` seconds of each period (shifted by offset).
    LightState state_at(double t) const;
};

enum class CollisionKind : std::uint8_t { Vehicle, Pedestrian, Sidewalk };

struct CollisionEvent {
    double time = 0.0;
    CollisionKind other_kind = CollisionKind::Vehicle;
    std::uint32_t actor_id = 0;  // kSidewalkId for sidewalk contacts
};

inline constexpr std::uint32_t kSidewalkId = 0xffffffffu;

struct WorldConfig {
    MapPtr map;
    Pose ego_spawn;
    double ego_speed = 0.0;
    std::size_t vehicles = 35;
    std::size_t pedestrians = 80;
    double dt = 0.05;
    double lane_half_width = 1.75;
    VehicleParams ego_params;
    // Traffic behaviour
    double follower_speed_min = 8.0;
    double follower_speed_max = 12.0;
    double ego_clearance = 25.0;     // no vehicle spawns closer than this to the ego
    double contact_separation = 1.0; // seconds between repeated events with one actor
};

class WorldError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ContactRecord {
    std::uint32_t actor_id = 0;
    double last_contact = 0.0;
};

struct World {
    WorldConfig config;
    std::uint64_t steps = 0;
    double time = 0.0;
    VehicleState ego;
    std::vector<Actor> actors;
    std::vector<TrafficLight> lights;
    std::vector<ContactRecord> contacts;

    const Map& map() const { return *config.map; }
};

// Places the configured traffic deterministically for `seed`.
World spawn_scene(const WorldConfig& config, std::uint64_t seed);

// Advances scripted actors and the clock by dt. The ego is moved separately
// with step_vehicle.
void step_world(World& world, double dt);

// Ego contacts this step, de-duplicated per actor by contact_separation.
std::vector<CollisionEvent> detect_collisions(World& world);

// State of the light governing the ego's approach, if any is within `range`
// metres ahead (bearing and approach direction within `cone` degrees).
LightView relevant_light(const World& world, double range = 20.0, double cone = 45.0);

}  // namespace qdrive
