#include "qdrive/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

namespace qdrive {

using nlohmann::ordered_json;

PerceptionMode perception_mode_from_string(const std::string& s) {
    if (s == "oracle") return PerceptionMode::Oracle;
    if (s == "pipeline") return PerceptionMode::Pipeline;
    throw ConfigError("perception mode must be oracle or pipeline, got " + s);
}

const char* to_string(PerceptionMode m) { return m == PerceptionMode::Oracle ? "oracle" : "pipeline"; }

namespace {

// Dispatch table for one JSON object; every key in the document must have a handler.
class Section {
public:
    explicit Section(std::string path) : path_(std::move(path)) {}

    template <class T>
    Section& field(const std::string& key, T& target) {
        handlers_[key] = [this, key, &target](const ordered_json& v) {
            try {
                target = v.get<T>();
            } catch (const nlohmann::json::exception&) {
                throw ConfigError("wrong type for " + path_ + key);
            }
        };
        return *this;
    }

    Section& custom(const std::string& key, std::function<void(const ordered_json&)> fn) {
        handlers_[key] = std::move(fn);
        return *this;
    }

    void apply(const ordered_json& obj) const {
        if (!obj.is_object()) throw ConfigError(path_ + " must be an object");
        for (const auto& [k, v] : obj.items()) {
            auto it = handlers_.find(k);
            if (it == handlers_.end()) throw ConfigError("unknown config key " + path_ + k);
            it->second(v);
        }
    }

private:
    std::string path_;
    std::map<std::string, std::function<void(const ordered_json&)>> handlers_;
};

void apply_brake_reward(RewardParamsBrake& p, const ordered_json& j, const std::string& path) {
    Section s(path);
    s.custom("gate",
             [&p, path](const ordered_json& v) {
                 const auto g = v.get<std::string>();
                 if (g == "speed_below_distance") {
                     p.gate = BrakeGate::SpeedBelowDistance;
                 } else if (g == "distance_below_speed") {
                     p.gate = BrakeGate::DistanceBelowSpeed;
                 } else {
                     throw ConfigError("unknown value for " + path + "gate: " + g);
                 }
             })
        .field("slope", p.slope)
        .field("intercept", p.intercept)
        .field("alt_slope", p.alt_slope)
        .field("alt_intercept", p.alt_intercept)
        .field("slow_v", p.slow_v)
        .field("far_d", p.far_d)
        .field("stop_bonus", p.stop_bonus)
        .field("stop_d", p.stop_d)
        .field("far_penalty", p.far_penalty)
        .field("collision_penalty", p.collision_penalty)
        .field("v_stop_eps", p.v_stop_eps)
        .field("speed_in_kmh", p.speed_in_kmh);
    s.apply(j);
}

void apply_drive_reward(RewardParamsDrive& p, const ordered_json& j, const std::string& path) {
    Section s(path);
    s.field("match_bonus", p.match_bonus)
        .field("d_soft", p.d_soft)
        .field("d_hard", p.d_hard)
        .field("phi_hard", p.phi_hard)
        .field("soft_penalty", p.soft_penalty)
        .field("hard_penalty", p.hard_penalty)
        .field("collision_penalty", p.collision_penalty);
    s.apply(j);
}

void apply_scaling(InputScaling& p, const ordered_json& j, const std::string& path) {
    Section s(path);
    s.field("d", p.d).field("phi", p.phi).field("d_obs", p.d_obs).field("v", p.v);
    s.apply(j);
}

void apply_camera(CameraConfig& c, const ordered_json& j, const std::string& path) {
    Section s(path);
    s.field("fov", c.fov)
        .field("width", c.width)
        .field("height", c.height)
        .field("mount_height", c.mount_height)
        .field("forward_offset", c.forward_offset)
        .field("d_max", c.d_max);
    s.apply(j);
}

void apply_train(TrainConfig& t, const ordered_json& j, const std::string& path) {
    Section s(path);
    s.field("episodes", t.episodes)
        .field("lr", t.lr)
        .field("batch", t.batch)
        .field("gamma", t.gamma)
        .field("epsilon_start", t.epsilon_start)
        .field("epsilon_end", t.epsilon_end)
        .field("epsilon_decay_episodes", t.epsilon_decay_episodes)
        .field("target_sync", t.target_sync)
        .field("max_steps", t.max_steps)
        .field("replay_capacity", t.replay_capacity)
        .field("updates_per_step", t.updates_per_step)
        .field("reward_scale", t.reward_scale)
        .field("seed", t.seed)
        .field("dt", t.dt)
        .custom("brake_reward", [&t, path](const ordered_json& v) { apply_brake_reward(t.brake_reward, v, path + "brake_reward."); })
        .custom("drive_reward", [&t, path](const ordered_json& v) { apply_drive_reward(t.drive_reward, v, path + "drive_reward."); })
        .custom("input_scaling", [&t, path](const ordered_json& v) { apply_scaling(t.scaling, v, path + "input_scaling."); })
        .custom("perception", [&t](const ordered_json& v) { t.perception = perception_mode_from_string(v.get<std::string>()); })
        .custom("camera", [&t, path](const ordered_json& v) { apply_camera(t.camera, v, path + "camera."); })
        .field("road_length", t.road_length)
        .field("leader_min", t.leader_min)
        .field("leader_max", t.leader_max)
        .field("ego_speed_min_kmh", t.ego_speed_min_kmh)
        .field("ego_speed_max_kmh", t.ego_speed_max_kmh)
        .field("stop_is_terminal", t.stop_is_terminal)
        .field("map", t.map_path)
        .field("routes", t.drive_routes)
        .field("waypoint_spacing", t.waypoint_spacing)
        .field("spawn_offset", t.spawn_offset)
        .field("spawn_yaw", t.spawn_yaw)
        .field("terminate_on_collision", t.terminate_on_collision)
        .field("mirror_augment", t.mirror_augment);
    s.apply(j);
}

void apply_eval(EvalSettings& e, const ordered_json& j) {
    Section s("eval.");
    s.field("map", e.map_path)
        .field("trajectories", e.trajectories)
        .field("runs", e.runs)
        .field("seed", e.seed)
        .field("noise_pct", e.noise_pct)
        .custom("noise_pool",
                [&e](const ordered_json& v) {
                    const auto p = v.get<std::string>();
                    if (p != "driving" && p != "all") throw ConfigError("eval.noise_pool must be driving or all");
                    e.noise_pool = p;
                })
        .custom("mode", [&e](const ordered_json& v) { e.mode = perception_mode_from_string(v.get<std::string>()); })
        .field("vehicles", e.vehicles)
        .field("pedestrians", e.pedestrians)
        .field("dt", e.dt)
        .field("waypoint_spacing", e.waypoint_spacing)
        .field("deadlock_speed", e.deadlock_speed)
        .field("deadlock_time", e.deadlock_time)
        .field("timeout", e.timeout)
        .field("write_traces", e.write_traces)
        .custom("camera", [&e](const ordered_json& v) { apply_camera(e.camera, v, "eval.camera."); });
    s.apply(j);
}

ordered_json brake_reward_json(const RewardParamsBrake& p) {
    return {{"gate", p.gate == BrakeGate::SpeedBelowDistance ? "speed_below_distance" : "distance_below_speed"},
            {"slope", p.slope},
            {"intercept", p.intercept},
            {"alt_slope", p.alt_slope},
            {"alt_intercept", p.alt_intercept},
            {"slow_v", p.slow_v},
            {"far_d", p.far_d},
            {"stop_bonus", p.stop_bonus},
            {"stop_d", p.stop_d},
            {"far_penalty", p.far_penalty},
            {"collision_penalty", p.collision_penalty},
            {"v_stop_eps", p.v_stop_eps},
            {"speed_in_kmh", p.speed_in_kmh}};
}

ordered_json drive_reward_json(const RewardParamsDrive& p) {
    return {{"match_bonus", p.match_bonus}, {"d_soft", p.d_soft},
            {"d_hard", p.d_hard},           {"phi_hard", p.phi_hard},
            {"soft_penalty", p.soft_penalty}, {"hard_penalty", p.hard_penalty},
            {"collision_penalty", p.collision_penalty}};
}

ordered_json camera_json(const CameraConfig& c) {
    return {{"fov", c.fov},
            {"width", c.width},
            {"height", c.height},
            {"mount_height", c.mount_height},
            {"forward_offset", c.forward_offset},
            {"d_max", c.d_max}};
}

ordered_json train_json(const TrainConfig& t) {
    ordered_json j;
    j["episodes"] = t.episodes;
    j["lr"] = t.lr;
    j["batch"] = t.batch;
    j["gamma"] = t.gamma;
    j["epsilon_start"] = t.epsilon_start;
    j["epsilon_end"] = t.epsilon_end;
    j["epsilon_decay_episodes"] = t.epsilon_decay_episodes;
    j["target_sync"] = t.target_sync;
    j["max_steps"] = t.max_steps;
    j["replay_capacity"] = t.replay_capacity;
    j["updates_per_step"] = t.updates_per_step;
    j["reward_scale"] = t.reward_scale;
    j["seed"] = t.seed;
    j["dt"] = t.dt;
    j["brake_reward"] = brake_reward_json(t.brake_reward);
    j["drive_reward"] = drive_reward_json(t.drive_reward);
    j["input_scaling"] = {{"d", t.scaling.d}, {"phi", t.scaling.phi}, {"d_obs", t.scaling.d_obs}, {"v", t.scaling.v}};
    j["perception"] = to_string(t.perception);
    j["camera"] = camera_json(t.camera);
    j["road_length"] = t.road_length;
    j["leader_min"] = t.leader_min;
    j["leader_max"] = t.leader_max;
    j["ego_speed_min_kmh"] = t.ego_speed_min_kmh;
    j["ego_speed_max_kmh"] = t.ego_speed_max_kmh;
    j["stop_is_terminal"] = t.stop_is_terminal;
    j["map"] = t.map_path;
    j["routes"] = t.drive_routes;
    j["waypoint_spacing"] = t.waypoint_spacing;
    j["spawn_offset"] = t.spawn_offset;
    j["spawn_yaw"] = t.spawn_yaw;
    j["terminate_on_collision"] = t.terminate_on_collision;
    j["mirror_augment"] = t.mirror_augment;
    return j;
}

}  // namespace

void apply_config_json(AppConfig& cfg, const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    if (!doc.contains("schema_version")) throw ConfigError("config lacks schema_version");
    AppConfig next = cfg;
    try {
        Section root("");
        root.custom("schema_version",
                    [](const ordered_json& v) {
                        if (!v.is_number_integer() || v.get<int>() != kConfigSchemaVersion) {
                            throw ConfigError("unsupported config schema_version");
                        }
                    })
            .custom("train_brake", [&next](const ordered_json& v) { apply_train(next.train_brake, v, "train_brake."); })
            .custom("train_drive", [&next](const ordered_json& v) { apply_train(next.train_drive, v, "train_drive."); })
            .custom("eval", [&next](const ordered_json& v) { apply_eval(next.eval, v); });
        root.apply(doc);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    cfg = std::move(next);
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    AppConfig cfg;
    apply_config_json(cfg, ss.str());
    return cfg;
}

std::string config_to_json(const AppConfig& cfg) {
    ordered_json doc;
    doc["schema_version"] = kConfigSchemaVersion;
    doc["train_brake"] = train_json(cfg.train_brake);
    doc["train_drive"] = train_json(cfg.train_drive);
    const EvalSettings& e = cfg.eval;
    ordered_json ej;
    ej["map"] = e.map_path;
    ej["trajectories"] = e.trajectories;
    ej["runs"] = e.runs;
    ej["seed"] = e.seed;
    ej["noise_pct"] = e.noise_pct;
    ej["noise_pool"] = e.noise_pool;
    ej["mode"] = to_string(e.mode);
    ej["vehicles"] = e.vehicles;
    ej["pedestrians"] = e.pedestrians;
    ej["dt"] = e.dt;
    ej["waypoint_spacing"] = e.waypoint_spacing;
    ej["deadlock_speed"] = e.deadlock_speed;
    ej["deadlock_time"] = e.deadlock_time;
    ej["timeout"] = e.timeout;
    ej["write_traces"] = e.write_traces;
    ej["camera"] = camera_json(e.camera);
    doc["eval"] = ej;
    return doc.dump(2) + "\n";
}

CampaignConfig make_campaign(const EvalSettings& e, MapPtr map) {
    CampaignConfig c;
    c.episode.world.map = std::move(map);
    c.episode.world.vehicles = e.vehicles;
    c.episode.world.pedestrians = e.pedestrians;
    c.episode.world.dt = e.dt;
    c.episode.world.lane_half_width = c.episode.world.map->lane_half_width();
    c.episode.noise = e.noise_pct / 100.0;
    if (e.noise_pool == "all") {
        c.episode.noise_pool.assign(kAllActions.begin(), kAllActions.end());
    } else {
        c.episode.noise_pool.assign(kDrivingActions.begin(), kDrivingActions.end());
    }
    c.episode.mode = e.mode;
    c.episode.camera = e.camera;
    c.episode.deadlock_speed = e.deadlock_speed;
    c.episode.deadlock_time = e.deadlock_time;
    c.episode.timeout = e.timeout;
    c.trajectories = e.trajectories;
    c.runs = e.runs;
    c.seed = e.seed;
    c.waypoint_spacing = e.waypoint_spacing;
    c.keep_traces = e.write_traces;
    return c;
}

}  // namespace qdrive
