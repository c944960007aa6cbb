#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdrive/perception.hpp"
#include "qdrive/policy.hpp"
#include "qdrive/rewards.hpp"
#include "qdrive/state_rep.hpp"
#include "qdrive/trajectory.hpp"
#include "qdrive/world.hpp"

namespace qdrive {

enum class Outcome : std::uint8_t {
    Success,
    VehicleCollision,
    PedestrianCollision,
    SidewalkCollision,
    Deadlock,
    Timeout
};

inline constexpr std::size_t kOutcomeCount = 6;

const char* to_string(Outcome o);

// One row per simulation step, recorded before the action is applied. The
// final row is the terminal state; its action is -1 and its reward 0.
struct TraceRecord {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double yaw = 0.0;
    double v = 0.0;
    double d = 0.0;
    double phi = 0.0;
    double d_obs = 0.0;
    int action = -1;
    double reward = 0.0;
    LightView light = LightView::None;

    bool operator==(const TraceRecord&) const = default;
};

using Trace = std::vector<TraceRecord>;

struct EpisodeResult {
    Outcome outcome = Outcome::Timeout;
    double time = 0.0;      // s
    double distance = 0.0;  // m travelled by the ego
    double max_abs_d = 0.0;
    std::vector<CollisionEvent> events;
    Trace trace;
};

struct EpisodeConfig {
    WorldConfig world;  // ego_spawn is taken from the trajectory
    double noise = 0.0;
    std::vector<Action> noise_pool{kDrivingActions.begin(), kDrivingActions.end()};
    PerceptionMode mode = PerceptionMode::Pipeline;
    CameraConfig camera;
    RewardParamsBrake brake_reward;
    RewardParamsDrive drive_reward;
    double deadlock_speed = 0.1;  // m/s
    double deadlock_time = 60.0;  // s
    double timeout = 500.0;       // s
    bool record_trace = true;
};

class HarnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// First collision decides; otherwise goal within goal_radius -> Success;
// otherwise a stationary stretch of deadlock_time -> Deadlock; else Timeout.
Outcome classify_outcome(const Trace& trace, const std::vector<CollisionEvent>& events, const Trajectory& traj,
                         double deadlock_speed = 0.1, double deadlock_time = 60.0);

EpisodeResult run_episode(const EpisodeConfig& cfg, const Trajectory& traj, const PolicyBundle& policy,
                          std::uint64_t seed);

struct CampaignConfig {
    EpisodeConfig episode;
    std::vector<std::string> trajectories;  // empty: every eval route on the map
    std::size_t runs = 25;
    std::uint64_t seed = 0;
    double waypoint_spacing = 1.0;
    bool keep_traces = false;
};

struct StatsRow {
    std::string trajectory;
    double path_distance = 0.0;      // m, length of the planned path
    double average_time = 0.0;       // s, over successful runs (NaN when none)
    std::size_t runs = 0;
    std::array<double, kOutcomeCount> percent{};
    double max_abs_d_success = 0.0;  // m, over successful runs
};

struct StatsTable {
    std::vector<StatsRow> rows;
    StatsRow average;

    std::string to_text() const;
    std::string to_json() const;
};

struct CampaignResult {
    StatsTable table;
    // Indexed [trajectory][run]. Traces are kept only with keep_traces.
    std::vector<std::vector<EpisodeResult>> episodes;
};

std::uint64_t episode_seed(std::uint64_t campaign_seed, std::size_t traj_index, std::size_t run);

// Episodes run in parallel over OpenMP threads.
CampaignResult evaluate_suite(const CampaignConfig& cfg, const PolicyBundle& policy);
// Single-threaded reference; must match evaluate_suite exactly.
CampaignResult evaluate_suite_serial(const CampaignConfig& cfg, const PolicyBundle& policy);

StatsTable aggregate(const std::vector<std::string>& names, const std::vector<double>& path_lengths,
                     const std::vector<std::vector<EpisodeResult>>& episodes);

// CSV with header t,x,y,yaw,v,d,phi,d_obs,action,reward,light; doubles are
// written with 17 significant digits so read_trace restores them exactly.
void write_trace(const Trace& trace, const std::filesystem::path& path);
Trace read_trace(const std::filesystem::path& path);
std::string trace_to_csv(const Trace& trace);
Trace trace_from_csv(const std::string& text);

const char* to_string(LightView l);

}  // namespace qdrive
