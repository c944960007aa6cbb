#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qdrive/config.hpp"
#include "qdrive/harness.hpp"
#include "qdrive/model_io.hpp"
#include "qdrive/perception.hpp"
#include "qdrive/report.hpp"
#include "qdrive/rewards.hpp"
#include "qdrive/state_rep.hpp"
#include "qdrive/training.hpp"

namespace fs = std::filesystem;
using namespace qdrive;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int failures = 0;

void report(int id, const char* name, double limit_s, const std::function<Verdict()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < limit_s;
    const bool ok = v.pass && in_time;
    if (!ok) ++failures;
    std::printf("criterion %d %s %s: %s (%.2f s, limit %.0f s%s)\n", id, ok ? "PASS" : "FAIL", name, v.detail.c_str(),
                secs, limit_s, in_time ? "" : ", over time");
    std::fflush(stdout);
}

double first_last_gap(const std::vector<double>& curve) {
    const std::size_t n = curve.size();
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        first += curve[i] / 5.0;
        last += curve[n - 5 + i] / 5.0;
    }
    return last - first;
}

// Smallest |pre-activation| of any relu unit over the batch.
double relu_margin(const QNet& net, const Batch& batch) {
    double margin = INFINITY;
    for (const auto& x : batch.inputs) {
        std::vector<double> a = x;
        for (const DenseLayer& l : net.layers) {
            std::vector<double> z(l.output_dim);
            for (std::size_t o = 0; o < l.output_dim; ++o) {
                z[o] = l.bias[o];
                for (std::size_t i = 0; i < l.input_dim; ++i) z[o] += l.w(o, i) * a[i];
                if (l.activation == Activation::Relu) {
                    margin = std::min(margin, std::abs(z[o]));
                    z[o] = std::max(0.0, z[o]);
                }
            }
            a = std::move(z);
        }
    }
    return margin;
}

// 1. Analytic gradients against central differences of a loss computed here
// from forward() alone. Instances with a relu input within 1e-3 of its kink
// are redrawn; the relative error uses a 1e-6 floor on its denominator.
Verdict gradient_oracle() {
    const double h = 1e-5;
    double worst = 0.0;
    std::size_t checked = 0, redrawn = 0;
    Rng rng(20240601);
    for (int shape = 0; shape < 2; ++shape) {
        for (int inst = 0; inst < 50; ++inst) {
            QNet net = shape == 0 ? make_braking_net() : make_driving_net();
            init_glorot(net, rng);
            for (auto& l : net.layers) {
                for (double& b : l.bias) b = uniform(rng, -0.5, 0.5);
            }
            Batch batch;
            for (int i = 0; i < 8; ++i) {
                batch.inputs.push_back({uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0)});
                batch.actions.push_back(uniform_index(rng, net.output_dim()));
                batch.targets.push_back(uniform(rng, -3.0, 3.0));
            }
            if (relu_margin(net, batch) < 1e-3) {
                ++redrawn;
                --inst;
                continue;
            }
            auto loss = [&](const QNet& n) {
                double s = 0.0;
                for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
                    const double e = forward(n, batch.inputs[i])[batch.actions[i]] - batch.targets[i];
                    s += e * e;
                }
                return s / static_cast<double>(batch.inputs.size());
            };
            NetGrads g = NetGrads::zeros_like(net);
            gradients(net, batch, g);
            auto probe = [&](double& param, double analytic) {
                const double keep = param;
                param = keep + h;
                const double lp = loss(net);
                param = keep - h;
                const double lm = loss(net);
                param = keep;
                const double numeric = (lp - lm) / (2.0 * h);
                const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
                worst = std::max(worst, std::abs(analytic - numeric) / scale);
                ++checked;
            };
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                for (std::size_t i = 0; i < net.layers[l].weights.size(); ++i) probe(net.layers[l].weights[i], g.weights[l][i]);
                for (std::size_t i = 0; i < net.layers[l].bias.size(); ++i) probe(net.layers[l].bias[i], g.bias[l][i]);
            }
        }
    }
    return {worst < 1e-4, fmt("worst relative error %.2e over %zu parameters of 100 nets (%zu near-kink draws redrawn)",
                              worst, checked, redrawn)};
}

// 2. Lateral distance against cross(u, w_t - p) / |u| on random polylines.
Verdict geometry_oracle() {
    Rng rng(77);
    double worst = 0.0;
    std::size_t accepted = 0, antisym_bad = 0;
    while (accepted < 1000) {
        Trajectory traj;
        double x = uniform(rng, -500.0, 500.0), y = uniform(rng, -500.0, 500.0);
        double heading = uniform(rng, -std::numbers::pi, std::numbers::pi);
        for (std::size_t i = 0; i < 6; ++i) {
            const double len = uniform(rng, 1.0, 20.0);
            const double nx = x + len * std::cos(heading), ny = y + len * std::sin(heading);
            traj.waypoints.push_back({x, y, rad2deg(heading), i});
            x = nx;
            y = ny;
            heading += uniform(rng, -0.6, 0.6);
        }
        traj.waypoints.push_back({x, y, traj.waypoints.back().yaw, 6});

        const std::size_t t = uniform_index(rng, 6);
        const Waypoint& a = traj.waypoints[t];
        const Waypoint& b = traj.waypoints[t + 1];
        const double ux = b.x - a.x, uy = b.y - a.y;
        const double ulen = std::hypot(ux, uy);
        const double s = uniform(rng, 0.01, 0.49);
        const double n = uniform(rng, -3.0, 3.0);
        const Vec2 p{a.x + s * ux - n * uy / ulen, a.y + s * uy + n * ux / ulen};

        std::size_t nearest = 0;
        double best = INFINITY;
        for (std::size_t i = 0; i < traj.waypoints.size(); ++i) {
            const double dd = std::hypot(p.x - traj.waypoints[i].x, p.y - traj.waypoints[i].y);
            if (dd < best) {
                best = dd;
                nearest = i;
            }
        }
        if (nearest != t) continue;
        ++accepted;

        const double oracle = (ux * (a.y - p.y) - uy * (a.x - p.x)) / ulen;
        const double d = signed_lateral_distance(traj, p);
        worst = std::max(worst, std::abs(d - oracle));

        Trajectory mirror = traj;
        for (Waypoint& w : mirror.waypoints) {
            w.y = -w.y;
            w.yaw = -w.yaw;
        }
        if (signed_lateral_distance(mirror, {p.x, -p.y}) != -d) ++antisym_bad;
    }
    return {worst < 1e-9 && antisym_bad == 0,
            fmt("max |delta| %.2e over %zu configurations, %zu reflection mismatches", worst, accepted, antisym_bad)};
}

// 3. Rendered pipeline estimate against the geometric oracle.
Verdict perception_fidelity() {
    auto map = std::make_shared<Map>(Map::straight_road(400.0));
    map->build_raster();
    const CameraConfig cam;
    Rng rng(31);
    WorldConfig wc;
    wc.map = map;
    wc.vehicles = 0;
    wc.pedestrians = 0;

    std::size_t bad = 0;
    double worst_excess = -INFINITY;
    for (int i = 0; i < 200; ++i) {
        wc.ego_spawn = {uniform(rng, 10.0, 100.0), -1.75 + uniform(rng, -0.4, 0.4), uniform(rng, -4.0, 4.0)};
        World w = spawn_scene(wc, static_cast<std::uint64_t>(i));
        Actor a;
        a.id = 1;
        a.kind = i % 4 == 3 ? ActorKind::Pedestrian : ActorKind::Vehicle;
        const double gap = uniform(rng, 4.0, 80.0);
        const double ahead = w.ego.x + cam.forward_offset + gap;
        const double yaw = a.kind == ActorKind::Vehicle ? uniform(rng, -10.0, 10.0) : uniform(rng, -180.0, 180.0);
        a.pose = VehicleState{ahead, -1.75 + uniform(rng, -0.5, 0.5), yaw, 0.0};
        w.actors.push_back(a);

        PipelineState ps;
        const double oracle = oracle_obstacle_distance(w, cam);
        const double pipeline = pipeline_obstacle_distance(w, cam, ps);
        const double tol = std::max(1.0, 0.05 * oracle);
        worst_excess = std::max(worst_excess, std::abs(pipeline - oracle) - tol);
        if (!(std::abs(pipeline - oracle) <= tol)) ++bad;
    }

    wc.ego_spawn = {50.0, -1.75, 0.0};
    const World empty = spawn_scene(wc, 0);
    PipelineState ps;
    const bool empty_ok = pipeline_obstacle_distance(empty, cam, ps) == cam.d_max &&
                          oracle_obstacle_distance(empty, cam) == cam.d_max;
    return {bad == 0 && empty_ok, fmt("%zu of 200 scenes outside tolerance (worst excess %.3f m), empty scene %s", bad,
                                      worst_excess, empty_ok ? "returns d_max" : "wrong")};
}

struct Trained {
    TrainResult brake;
    TrainResult drive;
    TrainConfig brake_cfg = default_braking_config();
    TrainConfig drive_cfg = default_driving_config();
    bool have_brake = false;
    bool have_drive = false;
};

Verdict braking_trend(Trained& t) {
    t.brake = train_braking_model(t.brake_cfg);
    t.have_brake = true;
    const double gap = first_last_gap(t.brake.curve);
    const InputScaling& sc = t.brake_cfg.scaling;
    const auto close = sc.braking_input({0.0, 0.0, 1.0, 30.0 / 3.6});
    const auto far = sc.braking_input({0.0, 0.0, 120.0, 5.0 / 3.6});
    const std::size_t a_close = argmax(forward(t.brake.net, close));
    const std::size_t a_far = argmax(forward(t.brake.net, far));
    return {gap >= 50.0 && a_close == 0 && a_far == 1,
            fmt("last-5 minus first-5 = %.1f; greedy at (30 km/h, 1 m) %s, at (5 km/h, 120 m) %s", gap,
                a_close == 0 ? "brake" : "drive", a_far == 0 ? "brake" : "drive")};
}

Verdict driving_trend(Trained& t) {
    t.drive = train_driving_model(t.drive_cfg);
    t.have_drive = true;
    const double gap = first_last_gap(t.drive.curve);
    const auto in = t.drive_cfg.scaling.driving_input({0.0, 0.0, 100.0, 5.0});
    const std::size_t a = argmax(forward(t.drive.net, in));
    return {gap >= 500.0 && a == 0,
            fmt("last-5 minus first-5 = %.1f; greedy at (0, 0) is %s", gap, to_string(static_cast<Action>(a + 1)))};
}

CampaignResult campaign(const Trained& t, std::size_t runs, double noise_pct) {
    if (!t.have_brake || !t.have_drive) throw std::runtime_error("trained models unavailable");
    EvalSettings e;
    e.runs = runs;
    e.noise_pct = noise_pct;
    e.write_traces = false;
    CampaignConfig cc = make_campaign(e, load_map(default_map_path()));
    const PolicyBundle policy{t.brake.net, t.drive.net, t.brake_cfg.scaling};
    return evaluate_suite(cc, policy);
}

Verdict lane_keeping(const Trained& t) {
    std::string detail;
    bool ok = true;
    for (double noise : {0.0, 5.0}) {
        const CampaignResult r = campaign(t, 10, noise);
        std::size_t successes = 0;
        for (const auto& eps : r.episodes) {
            for (const EpisodeResult& e : eps) successes += e.outcome == Outcome::Success;
        }
        const double worst = r.table.average.max_abs_d_success;
        const double limit = noise == 0.0 ? 1.5 : 2.0;
        ok = ok && successes > 0 && worst <= limit;
        detail += fmt("%s%.0f%% noise: max |d| %.2f m over %zu successful runs (limit %.1f)", detail.empty() ? "" : "; ",
                      noise, worst, successes, limit);
    }
    return {ok, detail};
}

Verdict campaign_success(const Trained& t, const fs::path& out) {
    const CampaignResult r = campaign(t, 25, 5.0);
    fs::create_directories(out);
    write_text(out / "campaign_stats.txt", r.table.to_text());
    write_text(out / "campaign_stats.json", r.table.to_json());
    std::istringstream lines(r.table.to_text());
    for (std::string line; std::getline(lines, line);) std::printf("    %s\n", line.c_str());
    bool shape_ok = r.table.rows.size() == 4;
    for (const StatsRow& row : r.table.rows) {
        double sum = 0.0;
        for (double p : row.percent) sum += p;
        shape_ok = shape_ok && row.runs == 25 && std::abs(sum - 100.0) < 1e-9;
    }
    const double success = r.table.average.percent[static_cast<std::size_t>(Outcome::Success)];
    return {shape_ok && success >= 80.0,
            fmt("average success %.1f%% over %zu trajectories x 25 runs at 5%% noise", success, r.table.rows.size())};
}

std::vector<fs::path> files_under(const fs::path& root) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

// 8. Runs the command-line tool twice and compares every output byte.
Verdict determinism(const std::string& cli, const fs::path& out) {
    const fs::path cfg = out / "determinism_config.json";
    fs::create_directories(out);
    write_text(cfg, R"({"schema_version": 1, "eval": {"runs": 4}})" "\n");
    double first_pass = 0.0, second_pass = 0.0;
    for (const char* run : {"a", "b"}) {
        const fs::path dir = out / "determinism" / run;
        fs::remove_all(dir);
        const auto t0 = std::chrono::steady_clock::now();
        for (const char* sub : {"train-brake", "train-drive", "eval"}) {
            const std::string cmd = "\"" + cli + "\" " + sub + " --config \"" + cfg.string() + "\" --seed 3 --noise 5 --out \"" +
                                    dir.string() + "\" > /dev/null";
            if (std::system(cmd.c_str()) != 0) return {false, std::string(sub) + " exited with an error"};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        (std::string(run) == "a" ? first_pass : second_pass) = secs;
    }
    const fs::path a = out / "determinism" / "a", b = out / "determinism" / "b";
    const auto fa = files_under(a), fb = files_under(b);
    if (fa != fb) return {false, "output file sets differ"};
    std::size_t models = 0, traces = 0, stats = 0;
    for (const fs::path& f : fa) {
        if (slurp(a / f) != slurp(b / f)) return {false, "differs: " + f.string()};
        const std::string name = f.filename().string();
        models += name.ends_with("_model.json");
        traces += f.parent_path().filename() == "traces";
        stats += name.starts_with("stats.");
    }
    const bool complete = models == 2 && traces == 16 && stats == 2;
    return {complete && second_pass < 2.0 * first_pass + 1.0,
            fmt("%zu files identical (%zu models, %zu traces, %zu stats); passes took %.1f s and %.1f s", fa.size(), models,
                traces, stats, first_pass, second_pass)};
}

Verdict reward_values() {
    const RewardParamsBrake pb;
    const RewardParamsDrive pd;
    const double got[6] = {reward_braking(0.0, 50.0, BrakeChoice::Brake, false, pb),
                           reward_braking(0.5, 200.0, BrakeChoice::Brake, false, pb),
                           reward_braking(5.0, 2.0, BrakeChoice::Drive, true, pb),
                           reward_driving(0.0, 0.0, 1, 1, false, pd),
                           reward_driving(2.5, 0.0, 1, 1, false, pd),
                           reward_driving(3.5, 0.0, 1, 2, false, pd)};
    const double want[6] = {203.0, -7.0, -201.0, 5.0, -5.0, -210.0};
    bool ok = true;
    for (int i = 0; i < 6; ++i) ok = ok && got[i] == want[i];
    return {ok, fmt("braking %g, %g, %g; driving %g, %g, %g", got[0], got[1], got[2], got[3], got[4], got[5])};
}

Verdict serialization(const fs::path& out, const fs::path& fixtures) {
    fs::create_directories(out);
    Rng rng(99);
    std::size_t mismatches = 0;
    for (ModelKind kind : {ModelKind::Braking, ModelKind::Driving}) {
        ModelFile m;
        m.kind = kind;
        m.net = kind == ModelKind::Braking ? make_braking_net() : make_driving_net();
        init_glorot(m.net, rng);
        for (auto& l : m.net.layers) {
            for (double& b : l.bias) b = uniform(rng, -1.0, 1.0) / 7.0;
        }
        const fs::path p = out / "roundtrip_model.json";
        save_model(m, p);
        const ModelFile back = load_model(p);
        for (int i = 0; i < 100; ++i) {
            const std::vector<double> x{uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0)};
            const auto qa = forward(m.net, x);
            const auto qb = forward(back.net, x);
            for (std::size_t k = 0; k < qa.size(); ++k) {
                if (std::bit_cast<std::uint64_t>(qa[k]) != std::bit_cast<std::uint64_t>(qb[k])) ++mismatches;
            }
        }
        if (!(back == m)) ++mismatches;
    }
    std::size_t corrupt = 0, rejected = 0;
    for (const fs::path& f : files_under(fixtures)) {
        if (f.filename().string().starts_with("valid_")) continue;
        ++corrupt;
        try {
            load_model(fixtures / f);
        } catch (const ModelError&) {
            ++rejected;
        }
    }
    return {mismatches == 0 && corrupt > 0 && rejected == corrupt,
            fmt("%zu bitwise mismatches over 200 forward passes; %zu of %zu corrupt fixtures rejected", mismatches, rejected,
                corrupt)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qdrive acceptance checks"};
    std::string out = "acceptance_out";
    std::string cli = QDRIVE_CLI_PATH;
    std::string fixtures = QDRIVE_FIXTURE_DIR;
    app.add_option("--out", out, "Scratch directory");
    app.add_option("--cli", cli, "Path of the qdrive executable");
    app.add_option("--fixtures", fixtures, "Corrupt model fixtures");
    CLI11_PARSE(app, argc, argv);

    Trained trained;
    report(1, "gradient oracle", 10, gradient_oracle);
    report(2, "geometry oracle", 1, geometry_oracle);
    report(3, "perception fidelity", 30, perception_fidelity);
    report(4, "braking training trend", 120, [&] { return braking_trend(trained); });
    report(5, "driving training trend", 300, [&] { return driving_trend(trained); });
    report(6, "lane keeping", 300, [&] { return lane_keeping(trained); });
    report(7, "campaign success", 600, [&] { return campaign_success(trained, out); });
    report(8, "determinism", 600, [&] { return determinism(cli, out); });
    report(9, "reward values", 1, reward_values);
    report(10, "model serialization", 1, [&] { return serialization(out, fixtures); });
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
