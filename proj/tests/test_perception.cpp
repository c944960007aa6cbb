#include <cmath>
#include <memory>

#include "doctest.h"
#include "qdrive/perception.hpp"
#include "qdrive/state_rep.hpp"

using namespace qdrive;

namespace {

MapPtr straight_map() {
    auto m = std::make_shared<Map>(Map::straight_road(300.0));
    m->build_raster();
    return m;
}

World ego_only(const MapPtr& map) {
    WorldConfig wc;
    wc.map = map;
    wc.vehicles = 0;
    wc.pedestrians = 0;
    wc.ego_spawn = {20.0, -1.75, 0.0};
    return spawn_scene(wc, 1);
}

// Vehicle whose rear bumper is `gap` metres ahead of the camera.
Actor car_ahead(const World& w, const CameraConfig& cam, double gap, double lateral = 0.0) {
    Actor a;
    a.kind = ActorKind::Vehicle;
    a.pose = VehicleState{w.ego.x + cam.forward_offset + gap + 2.2, w.ego.y + lateral, 0.0, 0.0};
    return a;
}

std::size_t count(const SegFrame& f, SegClass c) {
    std::size_t n = 0;
    for (SegClass s : f.data) n += s == c;
    return n;
}

}  // namespace

TEST_CASE("empty road renders road and marking, no actors") {
    const World w = ego_only(straight_map());
    const CameraConfig cam;
    const RenderedFrames f = render_frames(w, cam);
    CHECK(count(f.seg, SegClass::Road) > 0);
    CHECK(count(f.seg, SegClass::LaneMarking) > 0);
    CHECK(count(f.seg, SegClass::Vehicle) == 0);
    CHECK(count(f.seg, SegClass::Pedestrian) == 0);
    for (double d : f.depth.data) {
        CHECK(d > 0.0);
        CHECK(d <= cam.d_max);
    }
}

TEST_CASE("vehicle dead ahead renders at its depth") {
    World w = ego_only(straight_map());
    const CameraConfig cam;
    w.actors.push_back(car_ahead(w, cam, 25.0));
    const RenderedFrames f = render_frames(w, cam);
    std::size_t n = 0;
    for (std::size_t i = 0; i < f.seg.data.size(); ++i) {
        if (f.seg.data[i] != SegClass::Vehicle) continue;
        ++n;
        CHECK(f.depth.data[i] == doctest::Approx(25.0).epsilon(0.5 / 25.0));
    }
    CHECK(n > 0);
}

TEST_CASE("vehicle outside the horizontal field of view is culled") {
    World w = ego_only(straight_map());
    const CameraConfig cam;
    const Vec2 c{w.ego.x + cam.forward_offset, w.ego.y};
    Actor a;
    a.kind = ActorKind::Vehicle;
    a.pose = VehicleState{c.x + 30.0 * std::cos(deg2rad(30.0)), c.y + 30.0 * std::sin(deg2rad(30.0)), 0.0, 0.0};
    w.actors.push_back(a);
    CHECK(count(render_frames(w, cam).seg, SegClass::Vehicle) == 0);
}

TEST_CASE("parallel and reference renderers agree exactly") {
    WorldConfig wc;
    wc.map = straight_map();
    wc.vehicles = 6;
    wc.pedestrians = 0;
    wc.ego_spawn = {20.0, -1.75, 0.0};
    wc.ego_clearance = 8.0;
    const World w = spawn_scene(wc, 4);
    const CameraConfig cam;
    const RenderedFrames a = render_frames(w, cam);
    const RenderedFrames b = render_frames_reference(w, cam);
    CHECK(a.seg == b.seg);
    CHECK(a.depth == b.depth);
}

TEST_CASE("quadratic lane fit") {
    std::vector<PixelPoint> vertical;
    for (int r = 0; r < 20; ++r) vertical.push_back({40.0, double(r)});
    const LaneFit v = fit_quadratic(vertical);
    CHECK(v.poly.a == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(v.poly.b == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(v.poly.c == doctest::Approx(40.0));

    std::vector<PixelPoint> curve;
    for (int r = 0; r < 96; r += 3) curve.push_back({0.01 * r * r - 0.5 * r + 60.0, double(r)});
    const LaneFit q = fit_quadratic(curve);
    CHECK(std::abs(q.poly.a - 0.01) < 1e-6);
    CHECK(std::abs(q.poly.b + 0.5) < 1e-6);
    CHECK(std::abs(q.poly.c - 60.0) < 1e-6);

    const std::vector<PixelPoint> two{{1, 1}, {2, 2}};
    CHECK_THROWS_AS(fit_quadratic(two), PerceptionError);
}

TEST_CASE("lane fit on a rendered straight road sees the centre marking") {
    const World w = ego_only(straight_map());
    const CameraConfig cam;
    const LaneFit fit = fit_lane_polynomial(render_frames(w, cam).seg);
    // The marking is left of the ego, so the curve crosses the bottom row left of centre.
    CHECK(fit.poly.column_at(cam.height - 1) < cam.width / 2.0);
    CHECK(fit.rms < 2.0);
}

TEST_CASE("opposite-lane mask") {
    SegFrame f(10, 4, SegClass::Vehicle);
    CHECK(mask_opposite_lane(f, {0, 0, 0}) == f);
    CHECK(count(mask_opposite_lane(f, {0, 0, 10}), SegClass::None) == 40);
    const SegFrame half = mask_opposite_lane(f, {0, 0, 6});
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 6; ++c) CHECK(half.at(c, r) == SegClass::None);
        for (int c = 6; c < 10; ++c) CHECK(half.at(c, r) == SegClass::Vehicle);
    }
    const LanePoly p{0.1, -0.3, 4.2};
    CHECK(mask_opposite_lane(mask_opposite_lane(f, p), p) == mask_opposite_lane(f, p));
}

TEST_CASE("obstacle distance estimate from masks") {
    SegFrame seg(8, 8, SegClass::Road);
    DepthFrame depth(8, 8, 1000.0);
    CHECK(estimate_obstacle_distance(seg, depth, 1000.0) == 1000.0);

    for (int c = 0; c < 4; ++c) {
        seg.at(c, 2) = SegClass::Vehicle;
        depth.at(c, 2) = 25.0;
    }
    CHECK(estimate_obstacle_distance(seg, depth, 1000.0) == 25.0);

    depth.at(0, 2) = 45.0;  // vehicle mean (45 + 3 * 25) / 4 = 30
    seg.at(5, 5) = SegClass::Pedestrian;
    depth.at(5, 5) = 20.0;
    CHECK(estimate_obstacle_distance(seg, depth, 1000.0) == doctest::Approx(20.0));
    seg.at(5, 5) = SegClass::Road;
    CHECK(estimate_obstacle_distance(seg, depth, 1000.0) == doctest::Approx(30.0));
}

TEST_CASE("oracle obstacle distance") {
    World w = ego_only(straight_map());
    const CameraConfig cam;
    CHECK(oracle_obstacle_distance(w, cam) == cam.d_max);

    w.actors.push_back(car_ahead(w, cam, 25.0));
    CHECK(std::abs(oracle_obstacle_distance(w, cam) - 25.0) <= 2.2);

    w.actors[0].pose.y = 1.75;  // opposing lane
    w.actors[0].pose.yaw = 180.0;
    CHECK(oracle_obstacle_distance(w, cam) == cam.d_max);
}

TEST_CASE("observation on the centreline of an empty road") {
    World w = ego_only(straight_map());
    w.ego.speed = 4.0;
    const Trajectory traj = build_trajectory(w.map().route("straight").poses, 1.0);
    const CameraConfig cam;
    for (PerceptionMode m : {PerceptionMode::Oracle, PerceptionMode::Pipeline}) {
        const Observation o = assemble_observation(w, traj, m, cam);
        CHECK(o.d == doctest::Approx(0.0));
        CHECK(o.phi == doctest::Approx(0.0));
        CHECK(o.d_obs == cam.d_max);
        CHECK(o.v == 4.0);
    }
    w.ego.y += 1.0;
    CHECK(assemble_observation(w, traj, PerceptionMode::Oracle, cam).d == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("pipeline falls back to the previous lane fit") {
    World w = ego_only(straight_map());
    const CameraConfig cam;
    PipelineState st;
    pipeline_obstacle_distance(w, cam, st);
    REQUIRE(st.last_fit.has_value());
    const LanePoly kept = *st.last_fit;
    st.min_fit_pixels = 1u << 30;  // reject every new fit
    w.ego.y += 0.5;
    pipeline_obstacle_distance(w, cam, st);
    CHECK(st.last_fit->c == kept.c);
}
