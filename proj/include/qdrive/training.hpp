#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdrive/perception.hpp"
#include "qdrive/qnet.hpp"
#include "qdrive/rewards.hpp"
#include "qdrive/state_rep.hpp"
#include "qdrive/vehicle.hpp"

namespace qdrive {

class TrainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline RewardParamsBrake default_training_brake_reward() {
    RewardParamsBrake p;
    p.gate = BrakeGate::DistanceBelowSpeed;
    return p;
}

struct TrainConfig {
    std::size_t episodes = 40;
    double lr = 1e-4;
    std::size_t batch = 16;
    double gamma = 0.99;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    std::size_t epsilon_decay_episodes = 30;
    std::size_t target_sync = 500;   // gradient steps between hard copies
    std::size_t max_steps = 0;       // 0 picks 1000 (braking) or 3000 (driving)
    std::size_t replay_capacity = 10000;
    std::size_t updates_per_step = 1;
    double reward_scale = 1.0;       // applied to stored rewards only; curves stay raw
    std::uint64_t seed = 0;
    double dt = 0.05;

    RewardParamsBrake brake_reward = default_training_brake_reward();
    RewardParamsDrive drive_reward;
    InputScaling scaling;
    VehicleParams vehicle;

    // Braking scenario: straight road, stationary leader ahead of the ego.
    PerceptionMode perception = PerceptionMode::Oracle;
    CameraConfig camera;
    double road_length = 260.0;
    double leader_min = 30.0;
    double leader_max = 150.0;
    double ego_speed_min_kmh = 20.0;
    double ego_speed_max_kmh = 60.0;
    bool stop_is_terminal = true;

    // Driving scenario: alternating turn routes on the town map, no traffic.
    std::string map_path;
    std::vector<std::string> drive_routes{"train_left", "train_right"};
    double waypoint_spacing = 1.0;
    double spawn_offset = 0.3;  // max lateral spawn offset, m
    double spawn_yaw = 5.0;     // max spawn yaw error, degrees
    bool terminate_on_collision = true;
    bool mirror_augment = true; // also store the left-right reflection of each transition

    void validate() const;
    double epsilon_for(std::size_t episode) const;
};

struct TrainResult {
    QNet net;
    std::vector<double> curve;             // total reward per episode
    std::vector<std::size_t> episode_steps;
    std::size_t grad_steps = 0;
};

std::string default_map_path();

// Defaults used by the CLI and the acceptance runs. They differ from a
// plain TrainConfig{} in the replay update rate and target scaling.
TrainConfig default_braking_config();
TrainConfig default_driving_config();

TrainResult train_braking_model(const TrainConfig& cfg);
TrainResult train_driving_model(const TrainConfig& cfg);

}  // namespace qdrive
