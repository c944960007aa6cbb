#include "qdrive/harness.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace qdrive {

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Success: return "success";
        case Outcome::VehicleCollision: return "vehicle_collision";
        case Outcome::PedestrianCollision: return "pedestrian_collision";
        case Outcome::SidewalkCollision: return "sidewalk_collision";
        case Outcome::Deadlock: return "deadlock";
        case Outcome::Timeout: return "timeout";
    }
    return "?";
}

const char* to_string(LightView l) {
    switch (l) {
        case LightView::None: return "none";
        case LightView::Red: return "red";
        case LightView::Green: return "green";
    }
    return "?";
}

namespace {

constexpr double kTimeEps = 1e-9;

bool at_goal(const Trajectory& traj, double x, double y) {
    return norm(Vec2{x, y} - traj.goal().pos()) <= traj.goal_radius;
}

Outcome from_collision(CollisionKind k) {
    switch (k) {
        case CollisionKind::Vehicle: return Outcome::VehicleCollision;
        case CollisionKind::Pedestrian: return Outcome::PedestrianCollision;
        case CollisionKind::Sidewalk: return Outcome::SidewalkCollision;
    }
    return Outcome::VehicleCollision;
}

}  // namespace

Outcome classify_outcome(const Trace& trace, const std::vector<CollisionEvent>& events, const Trajectory& traj,
                         double deadlock_speed, double deadlock_time) {
    if (!events.empty()) return from_collision(events.front().other_kind);
    if (trace.empty()) return Outcome::Timeout;
    if (at_goal(traj, trace.back().x, trace.back().y)) return Outcome::Success;
    double still_since = std::numeric_limits<double>::quiet_NaN();
    for (const TraceRecord& r : trace) {
        if (r.v < deadlock_speed) {
            if (std::isnan(still_since)) still_since = r.t;
            if (r.t - still_since >= deadlock_time - kTimeEps) return Outcome::Deadlock;
        } else {
            still_since = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return Outcome::Timeout;
}

EpisodeResult run_episode(const EpisodeConfig& cfg, const Trajectory& traj, const PolicyBundle& policy,
                          std::uint64_t seed) {
    if (traj.waypoints.size() < 2) throw HarnessError("trajectory needs two waypoints");
    if (!(cfg.noise >= 0.0 && cfg.noise <= 1.0)) throw HarnessError("noise must lie in [0, 1]");
    if (cfg.noise > 0.0 && cfg.noise_pool.empty()) throw HarnessError("empty noise pool");

    WorldConfig wc = cfg.world;
    const Waypoint& start = traj.waypoints.front();
    wc.ego_spawn = {start.x, start.y, start.yaw};
    wc.ego_speed = 0.0;
    World world = spawn_scene(wc, seed);
    Rng noise_rng(mix_seed(seed, 0x6e6f697365ULL));
    PipelineState pipeline;
    const double dt = wc.dt;

    EpisodeResult res;
    auto observe = [&] { return assemble_observation(world, traj, cfg.mode, cfg.camera, &pipeline); };
    Observation obs = observe();
    LightView light = relevant_light(world);
    double still_since = std::numeric_limits<double>::quiet_NaN();
    Trace trace;

    for (;;) {
        TraceRecord row{world.time, world.ego.x, world.ego.y, world.ego.yaw, world.ego.speed,
                        obs.d, obs.phi, obs.d_obs, -1, 0.0, light};
        res.max_abs_d = std::max(res.max_abs_d, std::abs(obs.d));

        if (row.v < cfg.deadlock_speed) {
            if (std::isnan(still_since)) still_since = row.t;
        } else {
            still_since = std::numeric_limits<double>::quiet_NaN();
        }
        const bool done = !res.events.empty() || at_goal(traj, row.x, row.y) ||
                          (!std::isnan(still_since) && row.t - still_since >= cfg.deadlock_time - kTimeEps) ||
                          row.t >= cfg.timeout - kTimeEps;
        if (done) {
            trace.push_back(row);
            break;
        }

        Action a = decide_action(obs, light, policy);
        a = inject_noise(a, cfg.noise, noise_rng, cfg.noise_pool);
        const int ref = heuristic_driving_policy(obs.d, obs.phi);

        const Vec2 before = world.ego.pos();
        world.ego = step_vehicle(world.ego, action_to_control(a), dt, wc.ego_params);
        step_world(world, dt);
        const auto events = detect_collisions(world);
        res.events.insert(res.events.end(), events.begin(), events.end());
        res.distance += norm(world.ego.pos() - before);

        obs = observe();
        light = relevant_light(world);
        const bool collided = !events.empty();
        if (a == Action::Brake) {
            const double v = cfg.brake_reward.speed_in_kmh ? obs.v * 3.6 : obs.v;
            row.reward = reward_braking(v, obs.d_obs, BrakeChoice::Brake, collided, cfg.brake_reward);
        } else {
            row.reward = reward_driving(obs.d, obs.phi, static_cast<int>(a), ref, collided, cfg.drive_reward);
        }
        row.action = static_cast<int>(a);
        trace.push_back(row);
    }

    res.time = trace.back().t;
    res.outcome = classify_outcome(trace, res.events, traj, cfg.deadlock_speed, cfg.deadlock_time);
    if (cfg.record_trace) res.trace = std::move(trace);
    return res;
}

std::uint64_t episode_seed(std::uint64_t campaign_seed, std::size_t traj_index, std::size_t run) {
    return mix_seed(campaign_seed, traj_index, run);
}

namespace {

struct Prepared {
    std::vector<std::string> names;
    std::vector<Trajectory> trajs;
    std::vector<double> lengths;
};

Prepared prepare(const CampaignConfig& cfg) {
    if (cfg.runs == 0) throw HarnessError("campaign needs at least one run per trajectory");
    if (!cfg.episode.world.map) throw HarnessError("campaign has no map");
    const Map& map = *cfg.episode.world.map;
    Prepared p;
    if (cfg.trajectories.empty()) {
        for (const NamedRoute& r : map.routes()) {
            if (r.eval) p.names.push_back(r.name);
        }
    } else {
        p.names = cfg.trajectories;
    }
    if (p.names.empty()) throw HarnessError("campaign has no trajectories");
    for (const std::string& n : p.names) {
        p.trajs.push_back(build_trajectory(map.route(n).poses, cfg.waypoint_spacing));
        p.lengths.push_back(p.trajs.back().length());
    }
    return p;
}

template <bool Parallel>
CampaignResult run_campaign(const CampaignConfig& cfg, const PolicyBundle& policy) {
    const Prepared p = prepare(cfg);
    EpisodeConfig ec = cfg.episode;
    ec.record_trace = cfg.keep_traces;

    const std::size_t nt = p.trajs.size();
    const auto total = static_cast<std::int64_t>(nt * cfg.runs);
    std::vector<EpisodeResult> flat(static_cast<std::size_t>(total));
    std::exception_ptr error;

    auto one = [&](std::int64_t k) {
        const auto ti = static_cast<std::size_t>(k) / cfg.runs;
        const auto ri = static_cast<std::size_t>(k) % cfg.runs;
        try {
            flat[static_cast<std::size_t>(k)] = run_episode(ec, p.trajs[ti], policy, episode_seed(cfg.seed, ti, ri));
        } catch (...) {
#pragma omp critical(qdrive_campaign_error)
            if (!error) error = std::current_exception();
        }
    };
    if constexpr (Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t k = 0; k < total; ++k) one(k);
    } else {
        for (std::int64_t k = 0; k < total; ++k) one(k);
    }
    if (error) std::rethrow_exception(error);

    CampaignResult out;
    out.episodes.resize(nt);
    for (std::size_t ti = 0; ti < nt; ++ti) {
        for (std::size_t ri = 0; ri < cfg.runs; ++ri) out.episodes[ti].push_back(std::move(flat[ti * cfg.runs + ri]));
    }
    out.table = aggregate(p.names, p.lengths, out.episodes);
    return out;
}

}  // namespace

CampaignResult evaluate_suite(const CampaignConfig& cfg, const PolicyBundle& policy) {
    return run_campaign<true>(cfg, policy);
}

CampaignResult evaluate_suite_serial(const CampaignConfig& cfg, const PolicyBundle& policy) {
    return run_campaign<false>(cfg, policy);
}

StatsTable aggregate(const std::vector<std::string>& names, const std::vector<double>& path_lengths,
                     const std::vector<std::vector<EpisodeResult>>& episodes) {
    if (names.size() != episodes.size() || names.size() != path_lengths.size()) {
        throw HarnessError("aggregate: inconsistent campaign shape");
    }
    if (names.empty()) throw HarnessError("aggregate: empty campaign");
    StatsTable table;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto& eps = episodes[i];
        if (eps.empty()) throw HarnessError("aggregate: trajectory without runs");
        StatsRow row;
        row.trajectory = names[i];
        row.path_distance = path_lengths[i];
        row.runs = eps.size();
        std::array<std::size_t, kOutcomeCount> counts{};
        double time_sum = 0.0;
        for (const EpisodeResult& e : eps) {
            ++counts[static_cast<std::size_t>(e.outcome)];
            if (e.outcome == Outcome::Success) {
                time_sum += e.time;
                row.max_abs_d_success = std::max(row.max_abs_d_success, e.max_abs_d);
            }
        }
        const std::size_t ok = counts[static_cast<std::size_t>(Outcome::Success)];
        row.average_time = ok ? time_sum / static_cast<double>(ok) : std::numeric_limits<double>::quiet_NaN();
        for (std::size_t k = 0; k < kOutcomeCount; ++k) {
            row.percent[k] = 100.0 * static_cast<double>(counts[k]) / static_cast<double>(eps.size());
        }
        table.rows.push_back(row);
    }

    StatsRow& avg = table.average;
    avg.trajectory = "average";
    double time_sum = 0.0;
    std::size_t time_n = 0;
    for (const StatsRow& r : table.rows) {
        avg.path_distance += r.path_distance;
        avg.runs += r.runs;
        for (std::size_t k = 0; k < kOutcomeCount; ++k) avg.percent[k] += r.percent[k];
        avg.max_abs_d_success = std::max(avg.max_abs_d_success, r.max_abs_d_success);
        if (!std::isnan(r.average_time)) {
            time_sum += r.average_time;
            ++time_n;
        }
    }
    const auto n = static_cast<double>(table.rows.size());
    avg.path_distance /= n;
    for (double& p : avg.percent) p /= n;
    avg.average_time = time_n ? time_sum / static_cast<double>(time_n) : std::numeric_limits<double>::quiet_NaN();
    return table;
}

namespace {

std::string fmt(const char* f, double v) {
    if (std::isnan(v)) return "-";
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

}  // namespace

std::string StatsTable::to_text() const {
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %8s %9s %8s %8s %8s %9s %9s %8s %5s\n", "trajectory", "path_m", "avg_time_s",
                  "success", "vehicle", "pedestr", "sidewalk", "deadlock", "timeout", "runs");
    os << line;
    auto emit = [&](const StatsRow& r) {
        std::snprintf(line, sizeof line, "%-16s %8s %9s %8s %8s %8s %9s %9s %8s %5zu\n", r.trajectory.c_str(),
                      fmt("%.1f", r.path_distance).c_str(), fmt("%.1f", r.average_time).c_str(),
                      fmt("%.1f", r.percent[0]).c_str(), fmt("%.1f", r.percent[1]).c_str(),
                      fmt("%.1f", r.percent[2]).c_str(), fmt("%.1f", r.percent[3]).c_str(),
                      fmt("%.1f", r.percent[4]).c_str(), fmt("%.1f", r.percent[5]).c_str(), r.runs);
        os << line;
    };
    for (const StatsRow& r : rows) emit(r);
    emit(average);
    os << "average time covers successful runs only; percentages are of runs per trajectory\n";
    return os.str();
}

std::string StatsTable::to_json() const {
    using nlohmann::ordered_json;
    auto num = [](double v) { return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v); };
    auto row_json = [&](const StatsRow& r) {
        ordered_json j;
        j["trajectory"] = r.trajectory;
        j["path_distance_m"] = num(r.path_distance);
        j["average_time_s"] = num(r.average_time);
        j["runs"] = r.runs;
        for (std::size_t k = 0; k < kOutcomeCount; ++k) {
            j[std::string("percent_") + to_string(static_cast<Outcome>(k))] = r.percent[k];
        }
        j["max_abs_d_success_m"] = r.max_abs_d_success;
        return j;
    };
    ordered_json doc;
    doc["schema_version"] = 1;
    doc["average_time_note"] = "successful runs only";
    doc["rows"] = ordered_json::array();
    for (const StatsRow& r : rows) doc["rows"].push_back(row_json(r));
    doc["average"] = row_json(average);
    return doc.dump(2) + "\n";
}

std::string trace_to_csv(const Trace& trace) {
    std::string out = "t,x,y,yaw,v,d,phi,d_obs,action,reward,light\n";
    char buf[512];
    for (const TraceRecord& r : trace) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%s\n", r.t, r.x, r.y,
                      r.yaw, r.v, r.d, r.phi, r.d_obs, r.action, r.reward, to_string(r.light));
        out += buf;
    }
    return out;
}

Trace trace_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "t,x,y,yaw,v,d,phi,d_obs,action,reward,light") {
        throw HarnessError("trace: missing or wrong header");
    }
    Trace trace;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 11) throw HarnessError("trace: wrong column count on line " + std::to_string(lineno));
        double v[8];
        for (int i = 0; i < 8; ++i) {
            char* end = nullptr;
            v[i] = std::strtod(cells[i].c_str(), &end);
            if (end == cells[i].c_str() || *end != '\0') {
                throw HarnessError("trace: bad number on line " + std::to_string(lineno));
            }
        }
        TraceRecord r{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], 0, 0.0, LightView::None};
        r.action = std::stoi(cells[8]);
        char* end = nullptr;
        r.reward = std::strtod(cells[9].c_str(), &end);
        if (end == cells[9].c_str() || *end != '\0') throw HarnessError("trace: bad reward on line " + std::to_string(lineno));
        if (cells[10] == "red") {
            r.light = LightView::Red;
        } else if (cells[10] == "green") {
            r.light = LightView::Green;
        } else if (cells[10] == "none") {
            r.light = LightView::None;
        } else {
            throw HarnessError("trace: bad light value on line " + std::to_string(lineno));
        }
        trace.push_back(r);
    }
    return trace;
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw HarnessError("cannot write trace " + path.string());
    out << trace_to_csv(trace);
    if (!out) throw HarnessError("failed writing trace " + path.string());
}

Trace read_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw HarnessError("cannot read trace " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return trace_from_csv(ss.str());
}

}  // namespace qdrive
