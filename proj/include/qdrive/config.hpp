#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdrive/harness.hpp"
#include "qdrive/training.hpp"

namespace qdrive {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EvalSettings {
    std::string map_path;               // empty: the shipped town
    std::vector<std::string> trajectories;
    std::size_t runs = 25;
    std::uint64_t seed = 0;
    double noise_pct = 0.0;             // percent of steps with a random action
    std::string noise_pool = "driving"; // "driving" (actions 1-5) or "all" (0-5)
    PerceptionMode mode = PerceptionMode::Oracle;
    std::size_t vehicles = 35;
    std::size_t pedestrians = 80;
    double dt = 0.05;
    double waypoint_spacing = 1.0;
    double deadlock_speed = 0.1;
    double deadlock_time = 60.0;
    double timeout = 500.0;
    bool write_traces = true;
    CameraConfig camera;
};

struct AppConfig {
    TrainConfig train_brake = default_braking_config();
    TrainConfig train_drive = default_driving_config();
    EvalSettings eval;
};

inline constexpr int kConfigSchemaVersion = 1;

// Applies the keys present in a JSON document on top of cfg. Unknown keys,
// wrong types and a missing or different schema_version are errors.
void apply_config_json(AppConfig& cfg, const std::string& text);
AppConfig load_config(const std::filesystem::path& path);

// Full document with every key, as accepted by apply_config_json.
std::string config_to_json(const AppConfig& cfg);

PerceptionMode perception_mode_from_string(const std::string& s);
const char* to_string(PerceptionMode m);

// Campaign settings resolved against a loaded map.
CampaignConfig make_campaign(const EvalSettings& e, MapPtr map);

}  // namespace qdrive
