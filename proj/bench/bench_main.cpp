#include <benchmark/benchmark.h>

#include "qdrive/harness.hpp"
#include "qdrive/perception.hpp"
#include "qdrive/training.hpp"

using namespace qdrive;

namespace {

const MapPtr& town() {
    static const MapPtr map = load_map(default_map_path());
    return map;
}

World scene() {
    WorldConfig wc;
    wc.map = town();
    const Trajectory traj = build_trajectory(town()->route("traj1_straight").poses, 1.0);
    const Waypoint& w = traj.waypoints.front();
    wc.ego_spawn = {w.x, w.y, w.yaw};
    return spawn_scene(wc, 7);
}

PolicyBundle random_policy() {
    Rng rng(3);
    PolicyBundle p{make_braking_net(), make_driving_net(), {}};
    init_glorot(p.brake_net, rng);
    init_glorot(p.drive_net, rng);
    return p;
}

CampaignConfig small_campaign() {
    CampaignConfig c;
    c.episode.world.map = town();
    c.episode.timeout = 20.0;
    c.trajectories = {"traj4_short"};
    c.runs = 4;
    return c;
}

void BM_RenderParallel(benchmark::State& st) {
    const World w = scene();
    const CameraConfig cam;
    for (auto _ : st) benchmark::DoNotOptimize(render_frames(w, cam));
}

void BM_RenderReference(benchmark::State& st) {
    const World w = scene();
    const CameraConfig cam;
    for (auto _ : st) benchmark::DoNotOptimize(render_frames_reference(w, cam));
}

void BM_SuiteParallel(benchmark::State& st) {
    const auto cfg = small_campaign();
    const auto policy = random_policy();
    for (auto _ : st) benchmark::DoNotOptimize(evaluate_suite(cfg, policy));
}

void BM_SuiteSerial(benchmark::State& st) {
    const auto cfg = small_campaign();
    const auto policy = random_policy();
    for (auto _ : st) benchmark::DoNotOptimize(evaluate_suite_serial(cfg, policy));
}

}  // namespace

BENCHMARK(BM_RenderParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SuiteParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SuiteSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
