#include <cmath>
#include <memory>

#include "doctest.h"
#include "qdrive/training.hpp"
#include "qdrive/vehicle.hpp"
#include "qdrive/world.hpp"

using namespace qdrive;

namespace {

MapPtr straight_map(double length = 300.0) {
    auto m = std::make_shared<Map>(Map::straight_road(length));
    m->build_raster();
    return m;
}

World empty_world(MapPtr map, Pose ego = {10.0, -1.75, 0.0}) {
    WorldConfig wc;
    wc.map = std::move(map);
    wc.vehicles = 0;
    wc.pedestrians = 0;
    wc.ego_spawn = ego;
    return spawn_scene(wc, 1);
}

Actor follower(std::uint32_t id, std::size_t lane, double s, double speed, double target, const Map& map) {
    Actor a;
    a.id = id;
    a.kind = ActorKind::Vehicle;
    const Vec2 p = map.lanes()[lane].point_at(s);
    a.pose = VehicleState{p.x, p.y, map.lanes()[lane].yaw(), speed};
    a.script = LaneFollower{lane, s, target};
    return a;
}

}  // namespace

TEST_CASE("vehicle at rest stays at rest") {
    const VehicleState s{1.0, 2.0, 30.0, 0.0};
    const VehicleState n = step_vehicle(s, {}, 0.05);
    CHECK(n.x == s.x);
    CHECK(n.y == s.y);
    CHECK(n.yaw == s.yaw);
    CHECK(n.speed == 0.0);
}

TEST_CASE("straight-line kinematics") {
    VehicleParams p;
    p.drag = 0.0;
    const VehicleState n = step_vehicle({0, 0, 30.0, 10.0}, {}, 0.1, p);
    CHECK(std::hypot(n.x, n.y) == doctest::Approx(1.0));
    CHECK(n.y / n.x == doctest::Approx(std::tan(deg2rad(30.0))));
}

TEST_CASE("full right steer matches fine-step integration") {
    VehicleParams p;
    p.drag = 0.0;
    VehicleState s{0, 0, 0, 5.0};
    for (int i = 0; i < 20; ++i) s = step_vehicle(s, {0.0, 1.0, 0.0}, 0.05, p);
    // Independent fine integration of yaw' = -(v/L) tan(delta).
    double yaw = 0.0;
    for (int i = 0; i < 10000; ++i) yaw -= rad2deg(5.0 / p.wheelbase * std::tan(deg2rad(p.max_steer))) * 1e-4;
    CHECK(std::abs(wrap_deg(s.yaw - yaw)) < 1.0);
    CHECK(s.yaw < 0.0);
}

TEST_CASE("speed is clamped to [0, v_max]") {
    VehicleState s{0, 0, 0, 16.0};
    for (int i = 0; i < 100; ++i) s = step_vehicle(s, {1.0, 0.0, 0.0}, 0.05);
    CHECK(s.speed == doctest::Approx(16.7));
    for (int i = 0; i < 100; ++i) s = step_vehicle(s, {0.0, 0.0, 1.0}, 0.05);
    CHECK(s.speed == 0.0);
}

TEST_CASE("light cycle arithmetic and periodicity") {
    TrafficLight l{{0, 0}, 0.0, {10.0, 10.0, 0.0}};
    CHECK(l.state_at(15.0) == LightState::Green);
    CHECK(l.state_at(5.0) == LightState::Red);
    for (double t = 0.0; t < 40.0; t += 0.37) CHECK(l.state_at(t) == l.state_at(t + 20.0));
}

TEST_CASE("empty world only advances time") {
    World w = empty_world(straight_map());
    const VehicleState ego = w.ego;
    step_world(w, 0.05);
    step_world(w, 0.05);
    CHECK(w.time == doctest::Approx(0.1));
    CHECK(w.actors.empty());
    CHECK(w.ego.x == ego.x);
    CHECK(detect_collisions(w).empty());
}

TEST_CASE("follower stops behind a stopped leader without overlap") {
    const MapPtr map = straight_map();
    World w = empty_world(map, {280.0, 1.75, 180.0});
    const double leader_s = 60.0;
    w.actors.push_back(follower(0, 0, leader_s, 0.0, 0.0, *map));
    // 5 m between bumpers.
    w.actors.push_back(follower(1, 0, leader_s - 4.4 - 5.0, 6.0, 10.0, *map));
    double prev = w.actors[1].pose.speed;
    for (int i = 0; i < 400; ++i) {
        step_world(w, 0.05);
        const double v = w.actors[1].pose.speed;
        REQUIRE(v <= prev + 1e-12);
        REQUIRE_FALSE(boxes_overlap(w.actors[0].pose.box(), w.actors[1].pose.box()));
        prev = v;
    }
    CHECK(prev == 0.0);
}

TEST_CASE("collision detection") {
    const MapPtr map = straight_map();
    World w = empty_world(map);
    Actor ped;
    ped.id = 9;
    ped.kind = ActorKind::Pedestrian;
    ped.pose = VehicleState{w.ego.x + 10.0, w.ego.y, 0.0, 0.0, 0.3, 0.3};
    w.actors.push_back(ped);
    CHECK(detect_collisions(w).empty());

    w.actors[0].pose.x = w.ego.x;
    const auto ev = detect_collisions(w);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].other_kind == CollisionKind::Pedestrian);
    CHECK(ev[0].actor_id == 9);
    // The same contact is not reported again within the separation window.
    step_world(w, 0.05);
    w.actors[0].pose.x = w.ego.x;
    w.actors[0].pose.y = w.ego.y;
    CHECK(detect_collisions(w).empty());
}

TEST_CASE("leaving the road is a sidewalk contact") {
    World w = empty_world(straight_map(), {50.0, -4.4, 0.0});
    const auto ev = detect_collisions(w);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].other_kind == CollisionKind::Sidewalk);
    CHECK(ev[0].actor_id == kSidewalkId);
}

TEST_CASE("spawn_scene on the shipped town") {
    WorldConfig wc;
    wc.map = load_map(default_map_path());
    const auto& r = wc.map->route("traj1_straight").poses.front();
    wc.ego_spawn = r;

    wc.vehicles = 0;
    wc.pedestrians = 0;
    CHECK(spawn_scene(wc, 3).actors.empty());

    wc.vehicles = 35;
    wc.pedestrians = 80;
    const World a = spawn_scene(wc, 3);
    const World b = spawn_scene(wc, 3);
    REQUIRE(a.actors.size() == 115);
    std::size_t vehicles = 0;
    for (std::size_t i = 0; i < a.actors.size(); ++i) {
        CHECK(a.actors[i].pose.x == b.actors[i].pose.x);
        CHECK(a.actors[i].pose.y == b.actors[i].pose.y);
        if (a.actors[i].kind == ActorKind::Vehicle) ++vehicles;
        for (std::size_t j = i + 1; j < a.actors.size(); ++j) {
            CHECK_FALSE(boxes_overlap(a.actors[i].pose.box(), a.actors[j].pose.box()));
        }
        CHECK_FALSE(boxes_overlap(a.actors[i].pose.box(), a.ego.box()));
    }
    CHECK(vehicles == 35);

    wc.vehicles = 2000;
    CHECK_THROWS_AS(spawn_scene(wc, 3), WorldError);
}

TEST_CASE("scripted traffic is deterministic") {
    WorldConfig wc;
    wc.map = load_map(default_map_path());
    wc.ego_spawn = wc.map->route("traj2_right").poses.front();
    World a = spawn_scene(wc, 21);
    World b = spawn_scene(wc, 21);
    for (int i = 0; i < 400; ++i) {
        step_world(a, 0.05);
        step_world(b, 0.05);
    }
    for (std::size_t i = 0; i < a.actors.size(); ++i) {
        REQUIRE(a.actors[i].pose.x == b.actors[i].pose.x);
        REQUIRE(a.actors[i].pose.y == b.actors[i].pose.y);
        REQUIRE(a.actors[i].pose.speed == b.actors[i].pose.speed);
    }
}

TEST_CASE("relevant light needs range and a matching approach") {
    World w = empty_world(straight_map());
    w.lights.push_back({{w.ego.x + 15.0, w.ego.y - 3.0}, 0.0, {10.0, 10.0, 0.0}});
    CHECK(relevant_light(w) == LightView::Red);
    w.time = 12.0;
    CHECK(relevant_light(w) == LightView::Green);
    w.lights[0].facing_yaw = 180.0;
    CHECK(relevant_light(w) == LightView::None);
    w.lights[0].facing_yaw = 0.0;
    w.lights[0].position.x = w.ego.x + 40.0;
    CHECK(relevant_light(w) == LightView::None);
}
