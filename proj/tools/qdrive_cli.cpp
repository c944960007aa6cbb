#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qdrive/config.hpp"
#include "qdrive/harness.hpp"
#include "qdrive/model_io.hpp"
#include "qdrive/perception.hpp"
#include "qdrive/report.hpp"
#include "qdrive/training.hpp"

namespace fs = std::filesystem;
using namespace qdrive;

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> noise;
    std::optional<std::string> mode;
    std::string out = "out";
};

void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config, "JSON config file; keys override the built-in defaults")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "Random seed");
    sub->add_option("--noise", f.noise, "Percent of steps replaced by a random action")->check(CLI::Range(0.0, 100.0));
    sub->add_option("--mode", f.mode, "Obstacle distance source")->check(CLI::IsMember({"oracle", "pipeline"}));
    sub->add_option("--out", f.out, "Output directory");
}

AppConfig resolve(const CommonFlags& f) {
    AppConfig cfg = f.config.empty() ? AppConfig{} : load_config(f.config);
    if (f.seed) {
        cfg.train_brake.seed = *f.seed;
        cfg.train_drive.seed = *f.seed;
        cfg.eval.seed = *f.seed;
    }
    if (f.noise) cfg.eval.noise_pct = *f.noise;
    if (f.mode) {
        const PerceptionMode m = perception_mode_from_string(*f.mode);
        cfg.train_brake.perception = m;
        cfg.eval.mode = m;
    }
    return cfg;
}

std::string map_path_or_default(const std::string& p) { return p.empty() ? default_map_path() : p; }

void write_curve(const fs::path& dir, const std::string& stem, const std::vector<double>& curve,
                 const std::string& title) {
    write_text(dir / (stem + "_curve.csv"), curve_to_csv(curve));
    write_text(dir / (stem + "_curve.svg"), svg_curve(curve, title));
}

int cmd_train(const CommonFlags& f, bool braking) {
    const AppConfig app = resolve(f);
    const fs::path out(f.out);
    fs::create_directories(out);
    const TrainConfig& tc = braking ? app.train_brake : app.train_drive;

    const TrainResult r = braking ? train_braking_model(tc) : train_driving_model(tc);
    ModelFile m;
    m.kind = braking ? ModelKind::Braking : ModelKind::Driving;
    m.net = r.net;
    m.scaling = tc.scaling;
    if (braking) {
        m.brake_reward = tc.brake_reward;
    } else {
        m.drive_reward = tc.drive_reward;
    }
    const std::string stem = braking ? "brake" : "drive";
    save_model(m, out / (stem + "_model.json"));
    write_curve(out, stem, r.curve, braking ? "Braking model reward" : "Driving model reward");

    const std::size_t n = r.curve.size();
    const std::size_t k = std::min<std::size_t>(5, n);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        first += r.curve[i] / static_cast<double>(k);
        last += r.curve[n - k + i] / static_cast<double>(k);
    }
    std::printf("%s model: %zu episodes, %zu gradient steps, first-%zu mean %.2f, last-%zu mean %.2f\n",
                stem.c_str(), n, r.grad_steps, k, first, k, last);
    std::printf("wrote %s\n", (out / (stem + "_model.json")).string().c_str());
    return 0;
}

PolicyBundle load_bundle(const fs::path& brake_path, const fs::path& drive_path, RewardParamsBrake& brake_reward,
                         RewardParamsDrive& drive_reward) {
    const ModelFile b = load_model(brake_path);
    const ModelFile d = load_model(drive_path);
    if (b.kind != ModelKind::Braking) throw ModelError(brake_path.string() + " is not a braking model");
    if (d.kind != ModelKind::Driving) throw ModelError(drive_path.string() + " is not a driving model");
    if (!(b.scaling == d.scaling)) throw ModelError("braking and driving models use different input scaling");
    if (b.brake_reward) brake_reward = *b.brake_reward;
    if (d.drive_reward) drive_reward = *d.drive_reward;
    return {b.net, d.net, b.scaling};
}

int cmd_eval(const CommonFlags& f, const std::string& brake_model, const std::string& drive_model) {
    const AppConfig app = resolve(f);
    const fs::path out(f.out);
    fs::create_directories(out);
    const fs::path bpath = brake_model.empty() ? out / "brake_model.json" : fs::path(brake_model);
    const fs::path dpath = drive_model.empty() ? out / "drive_model.json" : fs::path(drive_model);

    CampaignConfig cc = make_campaign(app.eval, load_map(map_path_or_default(app.eval.map_path)));
    cc.episode.brake_reward = app.train_brake.brake_reward;
    cc.episode.drive_reward = app.train_drive.drive_reward;
    const PolicyBundle policy = load_bundle(bpath, dpath, cc.episode.brake_reward, cc.episode.drive_reward);

    const CampaignResult res = evaluate_suite(cc, policy);
    write_text(out / "stats.txt", res.table.to_text());
    write_text(out / "stats.json", res.table.to_json());
    if (cc.keep_traces) {
        const fs::path tdir = out / "traces";
        const fs::path pdir = out / "plots";
        fs::create_directories(tdir);
        fs::create_directories(pdir);
        for (std::size_t ti = 0; ti < res.episodes.size(); ++ti) {
            const std::string& name = res.table.rows[ti].trajectory;
            std::vector<Trace> traces;
            for (std::size_t ri = 0; ri < res.episodes[ti].size(); ++ri) {
                char file[256];
                std::snprintf(file, sizeof file, "%s_run%03zu.csv", name.c_str(), ri);
                write_trace(res.episodes[ti][ri].trace, tdir / file);
                traces.push_back(res.episodes[ti][ri].trace);
            }
            emit_plots(traces, pdir, name);
        }
    }
    std::cout << res.table.to_text();
    return 0;
}

// Groups <name>_runNNN.csv traces by name and plots each group; *_curve.csv
// files become reward curves.
int cmd_plot(const std::string& in_dir, const std::string& out_dir) {
    const fs::path in(in_dir);
    const fs::path out(out_dir);
    if (!fs::is_directory(in)) throw std::runtime_error("not a directory: " + in.string());
    fs::create_directories(out);

    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(in)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());

    std::map<std::string, std::vector<Trace>> groups;
    std::size_t written = 0;
    for (const fs::path& p : files) {
        const std::string stem = p.stem().string();
        if (stem.size() > 6 && stem.ends_with("_curve")) {
            const auto curve = curve_from_csv(read_text(p));
            write_text(out / (stem + ".svg"), svg_curve(curve, stem.substr(0, stem.size() - 6) + " reward"));
            ++written;
            continue;
        }
        const auto cut = stem.rfind("_run");
        groups[cut == std::string::npos ? stem : stem.substr(0, cut)].push_back(read_trace(p));
    }
    for (const auto& [name, traces] : groups) written += emit_plots(traces, out, name).size();
    if (written == 0) throw std::runtime_error("no traces or curves found in " + in.string());
    std::printf("wrote %zu plots to %s\n", written, out.string().c_str());
    return 0;
}

void write_pgm(const fs::path& path, int w, int h, const std::vector<unsigned char>& px) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "P5\n" << w << ' ' << h << "\n255\n";
    os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

int cmd_render(const CommonFlags& f, const std::string& route, double advance) {
    const AppConfig app = resolve(f);
    const fs::path out(f.out);
    fs::create_directories(out);
    const MapPtr map = load_map(map_path_or_default(app.eval.map_path));
    const Trajectory traj = build_trajectory(map->route(route).poses, app.eval.waypoint_spacing);
    const std::size_t wi = std::min(traj.waypoints.size() - 1,
                                    static_cast<std::size_t>(std::max(0.0, advance) / app.eval.waypoint_spacing));
    const Waypoint& w = traj.waypoints[wi];

    WorldConfig wc = make_campaign(app.eval, map).episode.world;
    wc.ego_spawn = {w.x, w.y, w.yaw};
    const World world = spawn_scene(wc, app.eval.seed);
    const CameraConfig& cam = app.eval.camera;
    const RenderedFrames fr = render_frames(world, cam);

    std::vector<unsigned char> seg(fr.seg.data.size()), depth(fr.depth.data.size());
    for (std::size_t i = 0; i < seg.size(); ++i) seg[i] = static_cast<unsigned char>(fr.seg.data[i]) * 50;
    for (std::size_t i = 0; i < depth.size(); ++i) {
        const double q = std::clamp(fr.depth.data[i] / 100.0, 0.0, 1.0);
        depth[i] = static_cast<unsigned char>(std::lround(255.0 * (1.0 - q)));
    }
    write_pgm(out / "seg.pgm", fr.seg.width, fr.seg.height, seg);
    write_pgm(out / "depth.pgm", fr.depth.width, fr.depth.height, depth);

    PipelineState ps;
    const double oracle = oracle_obstacle_distance(world, cam);
    const double pipeline = pipeline_obstacle_distance(world, cam, ps);
    char buf[256];
    std::snprintf(buf, sizeof buf, "route %s waypoint %zu\noracle_d_obs %.6f\npipeline_d_obs %.6f\n", route.c_str(),
                  wi, oracle, pipeline);
    write_text(out / "d_obs.txt", buf);
    std::cout << buf;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qdrive: reduced-state DQN driving in a 2D traffic simulator"};
    app.require_subcommand(1);

    CommonFlags tb, td, ev, rd;
    auto* train_brake = app.add_subcommand("train-brake", "Train the braking model");
    add_common(train_brake, tb);
    auto* train_drive = app.add_subcommand("train-drive", "Train the driving model");
    add_common(train_drive, td);

    auto* eval = app.add_subcommand("eval", "Run the evaluation campaign with trained models");
    add_common(eval, ev);
    std::string brake_model, drive_model;
    eval->add_option("--brake-model", brake_model, "Braking model (default <out>/brake_model.json)");
    eval->add_option("--drive-model", drive_model, "Driving model (default <out>/drive_model.json)");

    auto* plot = app.add_subcommand("plot", "Plot traces and training curves found under a directory");
    std::string plot_in, plot_out = "plots";
    plot->add_option("--in", plot_in, "Directory with trace and curve CSV files")->required();
    plot->add_option("--out", plot_out, "Output directory");

    auto* render = app.add_subcommand("render-debug", "Dump camera frames as PGM and compare obstacle distances");
    add_common(render, rd);
    std::string route = "traj1_straight";
    double advance = 0.0;
    render->add_option("--route", route, "Route to place the ego on");
    render->add_option("--advance", advance, "Metres along the route");

    auto* dump = app.add_subcommand("dump-config", "Print the resolved configuration as JSON");
    CommonFlags dc;
    add_common(dump, dc);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_brake) return cmd_train(tb, true);
        if (*train_drive) return cmd_train(td, false);
        if (*eval) return cmd_eval(ev, brake_model, drive_model);
        if (*plot) return cmd_plot(plot_in, plot_out);
        if (*render) return cmd_render(rd, route, advance);
        if (*dump) {
            std::cout << config_to_json(resolve(dc));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
