#include "qdrive/world.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qdrive/rng.hpp"

namespace qdrive {

LightState TrafficLight::state_at(double t) const {
    const double period = cycle.red + cycle.green;
    double phase = std::fmod(t - cycle.offset, period);
    if (phase < 0.0) phase += period;
    return phase < cycle.red ? LightState::Red : LightState::Green;
}

namespace {

constexpr double kPedHalfSize = 0.3;
constexpr double kPedHeight = 1.8;
constexpr double kCarHeight = 1.5;

// Follower tuning.
constexpr double kLookahead = 60.0;
constexpr double kCorridorHalfWidth = 1.3;
constexpr double kComfortDecel = 4.0;
constexpr double kFollowerAccel = 2.0;
constexpr double kStandstillGap = 2.0;
constexpr double kMinGap = 0.3;
constexpr double kLaneEndMargin = 5.0;
constexpr double kEgoClaimTime = 3.0;  // s of ego travel that counts as entering a junction
constexpr double kYieldDecel = 8.0;

// Walker tuning.
constexpr double kWalkerEgoHorizon = 2.0;  // s of ego travel a walker will not step into

Vec2 junction_centroid(const Junction& j) {
    Vec2 c;
    for (const Vec2& p : j.polygon) c = c + p;
    return c * (1.0 / static_cast<double>(j.polygon.size()));
}

Vec2 walker_position(const CrosswalkWalker& w, const Crosswalk& cw) {
    const Vec2 u = cw.axis();
    const Vec2 t{-u.y, u.x};
    return cw.a + u * w.progress + t * w.lateral;
}

double waiting_progress(const CrosswalkWalker& w, const Crosswalk& cw) {
    return w.at_a ? w.offset_from_end : cw.length() - w.offset_from_end;
}

void sync_walker_pose(Actor& a, const Crosswalk& cw) {
    const auto& w = std::get<CrosswalkWalker>(a.script);
    const Vec2 p = walker_position(w, cw);
    a.pose.x = p.x;
    a.pose.y = p.y;
    const Vec2 u = cw.axis();
    const double yaw = rad2deg(std::atan2(u.y, u.x));
    a.pose.yaw = wrap_deg(w.at_a ? yaw : yaw + 180.0);
}

void sync_follower_pose(Actor& a, const Lane& lane) {
    const auto& f = std::get<LaneFollower>(a.script);
    const Vec2 p = lane.point_at(f.s);
    a.pose.x = p.x;
    a.pose.y = p.y;
    a.pose.yaw = lane.yaw();
}

// Longitudinal gap from the follower's front bumper to the nearest body that
// intrudes into its corridor ahead.
double corridor_gap(const World& w, std::size_t self, const Lane& lane, double front_s, double center_s) {
    const Vec2 dir = lane.direction();
    const Vec2 self_pos = w.actors[self].pose.pos();
    double gap = kLookahead;
    auto consider = [&](const VehicleState& body) {
        if (norm(body.pos() - self_pos) > kLookahead + 10.0) return;
        double s_min = 1e18, s_max = -1e18, l_min = 1e18, l_max = -1e18;
        for (const Vec2& c : body.box().corners()) {
            const Vec2 r = c - lane.start;
            const double s = dot(r, dir);
            const double l = cross(dir, r);
            s_min = std::min(s_min, s);
            s_max = std::max(s_max, s);
            l_min = std::min(l_min, l);
            l_max = std::max(l_max, l);
        }
        if (l_max < -kCorridorHalfWidth || l_min > kCorridorHalfWidth) return;
        if (s_max <= center_s) return;
        gap = std::min(gap, std::max(0.0, s_min - front_s));
    };
    consider(w.ego);
    for (std::size_t i = 0; i < w.actors.size(); ++i) {
        if (i != self) consider(w.actors[i].pose);
    }
    return gap;
}

bool lane_start_clear(const World& w, std::size_t self, const Lane& lane) {
    const Vec2 dir = lane.direction();
    auto blocks = [&](const VehicleState& body) {
        const Vec2 r = body.pos() - lane.start;
        const double s = dot(r, dir);
        return std::abs(cross(dir, r)) < 3.0 && s > -5.0 && s < 25.0;
    };
    if (blocks(w.ego)) return false;
    for (std::size_t i = 0; i < w.actors.size(); ++i) {
        if (i != self && blocks(w.actors[i].pose)) return false;
    }
    return true;
}

// True while the ego occupies, or is about to enter, the junction that
// follows a stop line. A follower the ego is queued behind never yields.
bool ego_claims_junction(const World& w, const Actor& self, const Lane& lane, Vec2 stop_point) {
    const Junction* near = nullptr;
    double best = 30.0;
    for (const Junction& j : w.map().junctions()) {
        const double dist = norm(junction_centroid(j) - stop_point);
        if (dist < best) {
            best = dist;
            near = &j;
        }
    }
    if (!near) return false;
    const Vec2 rel = w.ego.pos() - self.pose.pos();
    if (dot(rel, lane.direction()) < 0.0 && std::abs(cross(lane.direction(), rel)) < 3.0) return false;
    for (const Vec2& c : w.ego.box().corners()) {
        if (point_in_polygon(near->polygon, c)) return true;
    }
    const Vec2 ahead = w.ego.pos() + heading(w.ego.yaw) * (w.ego.half_length + kEgoClaimTime * w.ego.speed);
    return point_in_polygon(near->polygon, ahead);
}

void step_follower(World& w, std::size_t idx, double dt) {
    Actor& a = w.actors[idx];
    auto& f = std::get<LaneFollower>(a.script);
    const Lane& lane = w.map().lanes()[f.lane];
    const double front_s = f.s + a.pose.half_length;
    const double v = a.pose.speed;

    double gap = corridor_gap(w, idx, lane, front_s, f.s);
    for (const StopLine& sl : lane.stop_lines) {
        if (sl.s < front_s - 0.5) continue;
        const TrafficLight& light = w.lights[sl.light];
        const double g = sl.s - front_s;
        if (light.state_at(w.time) == LightState::Red) {
            // Too close to stop comfortably: carry on through.
            if (v * v <= 2.0 * kComfortDecel * (g + 1.0)) gap = std::min(gap, std::max(0.0, g));
        } else if (ego_claims_junction(w, a, lane, lane.point_at(sl.s))) {
            if (v * v <= 2.0 * kYieldDecel * (g + 1.0)) gap = std::min(gap, std::max(0.0, g));
        }
        break;
    }

    const double v_safe = std::sqrt(2.0 * kComfortDecel * std::max(0.0, gap - kStandstillGap));
    double v_new = std::min({v + kFollowerAccel * dt, f.target_speed, v_safe});
    v_new = std::min(std::max(0.0, v_new), std::max(0.0, gap - kMinGap) / dt);
    f.s += v_new * dt;
    a.pose.speed = v_new;

    if (f.s > lane.length() - kLaneEndMargin) {
        if (lane_start_clear(w, idx, lane)) {
            f.s = kLaneEndMargin;
        } else {
            f.s = lane.length() - kLaneEndMargin;
        }
        a.pose.speed = 0.0;
    }
    sync_follower_pose(a, lane);
}

bool crossing_clear(const World& w, const Crosswalk& cw) {
    const Box area = cw.box();
    auto threatens = [&](const VehicleState& body) {
        if (boxes_overlap(body.box(), area)) return true;
        if (body.speed <= 0.5) return false;
        const Vec2 to = cw.center() - body.pos();
        const Vec2 h = heading(body.yaw);
        return dot(h, to) > 0.0 && std::abs(cross(h, to)) < 8.0 && norm(to) < 10.0 + 6.0 * body.speed;
    };
    // The ego may be turning towards the crosswalk, so any approach within
    // range counts, not only a head-on one.
    const Vec2 to_ego = cw.center() - w.ego.pos();
    if (boxes_overlap(w.ego.box(), area)) return false;
    if (w.ego.speed > 0.5 && dot(heading(w.ego.yaw), to_ego) > 0.0 && norm(to_ego) < 10.0 + 6.0 * w.ego.speed) {
        return false;
    }
    for (const Actor& a : w.actors) {
        if (a.kind == ActorKind::Vehicle && threatens(a.pose)) return false;
    }
    return true;
}

// Scripted vehicles already hold back for anyone in their corridor, so a
// walker only waits for the ego; waiting on them as well can gridlock.
bool walker_blocked(const World& w, Vec2 p) {
    const Box me{p, 0.0, 2.0 * kPedHalfSize, 2.0 * kPedHalfSize};
    if (boxes_overlap(me, w.ego.box())) return true;
    if (w.ego.speed <= 0.5) return false;
    // The strip the ego will sweep over the next few seconds.
    const double reach = kWalkerEgoHorizon * w.ego.speed;
    const Vec2 h = heading(w.ego.yaw);
    const Box path{w.ego.pos() + h * (w.ego.half_length + reach / 2.0), w.ego.yaw, reach / 2.0,
                   w.ego.half_width + 0.5};
    return boxes_overlap(me, path);
}

void step_walker(World& w, std::size_t idx, double dt) {
    Actor& a = w.actors[idx];
    auto& wk = std::get<CrosswalkWalker>(a.script);
    const Crosswalk& cw = w.map().crosswalks()[wk.crosswalk];
    a.pose.speed = 0.0;
    if (wk.phase == CrosswalkWalker::Phase::Waiting) {
        if (w.time >= wk.trigger_time && crossing_clear(w, cw)) wk.phase = CrosswalkWalker::Phase::Crossing;
        return;
    }
    CrosswalkWalker next = wk;
    next.at_a = !wk.at_a;
    const double target = waiting_progress(next, cw);
    const double step = wk.walk_speed * dt;
    const double remaining = target - wk.progress;
    const double moved = std::abs(remaining) <= step ? remaining : std::copysign(step, remaining);
    CrosswalkWalker probe = wk;
    probe.progress += moved;
    if (walker_blocked(w, walker_position(probe, cw))) return;
    wk.progress = probe.progress;
    a.pose.speed = std::abs(moved) / dt;
    if (std::abs(remaining) <= step) {
        wk.at_a = !wk.at_a;
        wk.phase = CrosswalkWalker::Phase::Waiting;
        wk.trigger_time = w.time + wk.dwell;
    }
    sync_walker_pose(a, cw);
    // Keep facing the direction of travel while crossing.
    if (wk.phase == CrosswalkWalker::Phase::Crossing) {
        const Vec2 u = cw.axis();
        const double yaw = rad2deg(std::atan2(u.y, u.x));
        a.pose.yaw = wrap_deg(wk.at_a ? yaw : yaw + 180.0);
    }
}

bool overlaps_any(const Box& b, const World& w) {
    if (boxes_overlap(b, w.ego.box())) return true;
    for (const Actor& a : w.actors) {
        if (boxes_overlap(b, a.pose.box())) return true;
    }
    return false;
}

}  // namespace

World spawn_scene(const WorldConfig& config, std::uint64_t seed) {
    if (!config.map) throw WorldError("world config has no map");
    if (!(config.dt > 0.0 && config.dt <= 0.1)) throw WorldError("dt must lie in (0, 0.1]");
    if (config.lane_half_width != config.map->lane_half_width()) {
        throw WorldError("lane_half_width does not match the map");
    }
    const Map& map = *config.map;
    Rng rng(seed);

    World w;
    w.config = config;
    w.ego = VehicleState{config.ego_spawn.x, config.ego_spawn.y, config.ego_spawn.yaw,
                         std::clamp(config.ego_speed, 0.0, config.ego_params.v_max)};
    for (const LightSpec& l : map.lights()) w.lights.push_back({l.position, l.facing_yaw, l.cycle});

    std::uint32_t next_id = 0;

    // Vehicles on lanes, away from junctions and the ego.
    if (config.vehicles > 0) {
        if (map.lanes().empty()) throw WorldError("map has no lanes for traffic");
        std::vector<double> cum;
        double total = 0.0;
        for (const Lane& l : map.lanes()) cum.push_back(total += l.length());
        std::vector<Vec2> centers;
        for (const Junction& j : map.junctions()) centers.push_back(junction_centroid(j));

        const std::size_t max_attempts = 200 * config.vehicles;
        std::size_t attempts = 0;
        std::size_t placed = 0;
        while (placed < config.vehicles) {
            if (attempts++ >= max_attempts) throw WorldError("insufficient free lane space for vehicles");
            const double pick = uniform01(rng) * total;
            const std::size_t li = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), pick) - cum.begin());
            const Lane& lane = map.lanes()[std::min(li, map.lanes().size() - 1)];
            const double s = uniform(rng, 10.0, lane.length() - 10.0);
            const double target = uniform(rng, config.follower_speed_min, config.follower_speed_max);
            const Vec2 p = lane.point_at(s);
            if (norm(p - w.ego.pos()) < config.ego_clearance) continue;
            if (std::any_of(centers.begin(), centers.end(), [&](Vec2 c) { return norm(p - c) < 30.0; })) continue;
            Actor a;
            a.kind = ActorKind::Vehicle;
            a.pose = VehicleState{p.x, p.y, lane.yaw(), 0.0};
            a.height = kCarHeight;
            a.script = LaneFollower{static_cast<std::size_t>(&lane - map.lanes().data()), s, target};
            Box inflated = a.pose.box();
            inflated.half_length += 3.0;
            inflated.half_width += 0.3;
            if (overlaps_any(inflated, w)) continue;
            a.id = next_id++;
            w.actors.push_back(a);
            ++placed;
        }
    }

    // Pedestrians in waiting slots at crosswalk ends.
    if (config.pedestrians > 0) {
        struct Slot {
            std::size_t cw;
            bool at_a;
            double lateral;
            double depth;
        };
        std::vector<Slot> slots;
        for (std::size_t c = 0; c < map.crosswalks().size(); ++c) {
            const Crosswalk& cw = map.crosswalks()[c];
            const double half = cw.width / 2.0 - kPedHalfSize - 0.1;
            for (bool at_a : {true, false}) {
                for (double depth = kPedHalfSize + 0.3; depth <= cw.sidewalk_depth - kPedHalfSize; depth += 1.0) {
                    for (double lat = -half; lat <= half + 1e-9; lat += 0.8) slots.push_back({c, at_a, lat, depth});
                }
            }
        }
        if (slots.size() < config.pedestrians) throw WorldError("insufficient crosswalk space for pedestrians");
        for (std::size_t i = slots.size() - 1; i > 0; --i) std::swap(slots[i], slots[uniform_index(rng, i + 1)]);
        for (std::size_t i = 0; i < config.pedestrians; ++i) {
            const Slot& sl = slots[i];
            const Crosswalk& cw = map.crosswalks()[sl.cw];
            CrosswalkWalker wk;
            wk.crosswalk = sl.cw;
            wk.lateral = sl.lateral;
            wk.offset_from_end = sl.depth;
            wk.at_a = sl.at_a;
            wk.progress = waiting_progress(wk, cw);
            wk.trigger_time = uniform(rng, 0.0, 60.0);
            wk.dwell = uniform(rng, 15.0, 45.0);
            wk.walk_speed = uniform(rng, 1.1, 1.5);
            Actor a;
            a.id = next_id++;
            a.kind = ActorKind::Pedestrian;
            a.pose.half_length = kPedHalfSize;
            a.pose.half_width = kPedHalfSize;
            a.height = kPedHeight;
            a.script = wk;
            sync_walker_pose(a, cw);
            w.actors.push_back(a);
        }
    }
    return w;
}

void step_world(World& world, double dt) {
    for (std::size_t i = 0; i < world.actors.size(); ++i) {
        if (std::holds_alternative<LaneFollower>(world.actors[i].script)) {
            step_follower(world, i, dt);
        } else {
            step_walker(world, i, dt);
        }
    }
    ++world.steps;
    world.time = static_cast<double>(world.steps) * dt;
}

std::vector<CollisionEvent> detect_collisions(World& world) {
    std::vector<CollisionEvent> events;
    auto record = [&](std::uint32_t id, CollisionKind kind) {
        auto it = std::find_if(world.contacts.begin(), world.contacts.end(),
                               [id](const ContactRecord& c) { return c.actor_id == id; });
        if (it == world.contacts.end()) {
            world.contacts.push_back({id, world.time});
            events.push_back({world.time, kind, id});
            return;
        }
        if (world.time - it->last_contact >= world.config.contact_separation) {
            events.push_back({world.time, kind, id});
        }
        it->last_contact = world.time;
    };

    const Box ego = world.ego.box();
    for (const Actor& a : world.actors) {
        if (boxes_overlap(ego, a.pose.box())) {
            record(a.id, a.kind == ActorKind::Vehicle ? CollisionKind::Vehicle : CollisionKind::Pedestrian);
        }
    }
    for (const Vec2& c : ego.corners()) {
        if (!world.map().is_drivable(c)) {
            record(kSidewalkId, CollisionKind::Sidewalk);
            break;
        }
    }
    return events;
}

LightView relevant_light(const World& world, double range, double cone) {
    const Vec2 h = heading(world.ego.yaw);
    double best = range;
    LightView view = LightView::None;
    for (const TrafficLight& l : world.lights) {
        const Vec2 to = l.position - world.ego.pos();
        const double dist = norm(to);
        if (dist > best || dist == 0.0) continue;
        const double bearing = rad2deg(std::acos(std::clamp(dot(h, to) / dist, -1.0, 1.0)));
        if (bearing > cone) continue;
        if (std::abs(wrap_deg(world.ego.yaw - l.facing_yaw)) > cone) continue;
        best = dist;
        view = l.state_at(world.time) == LightState::Red ? LightView::Red : LightView::Green;
    }
    return view;
}

}  // namespace qdrive
