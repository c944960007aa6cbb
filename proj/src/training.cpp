#include "qdrive/training.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "qdrive/map.hpp"
#include "qdrive/policy.hpp"
#include "qdrive/replay.hpp"
#include "qdrive/world.hpp"

namespace qdrive {

void TrainConfig::validate() const {
    if (episodes == 0) throw TrainError("episodes must be positive");
    if (!(lr > 0.0)) throw TrainError("lr must be positive");
    if (batch == 0) throw TrainError("batch must be at least 1");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw TrainError("gamma must lie in [0, 1)");
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
        throw TrainError("epsilon must lie in [0, 1]");
    }
    if (target_sync == 0) throw TrainError("target_sync must be positive");
    if (replay_capacity < batch) throw TrainError("replay capacity smaller than batch");
    if (updates_per_step == 0) throw TrainError("updates_per_step must be positive");
    if (!(reward_scale > 0.0)) throw TrainError("reward_scale must be positive");
    if (!(dt > 0.0 && dt <= 0.1)) throw TrainError("dt must lie in (0, 0.1]");
    if (!(leader_min > 0.0 && leader_min <= leader_max)) throw TrainError("bad leader distance range");
    if (leader_max + 20.0 > road_length) throw TrainError("road too short for the leader range");
    if (!(ego_speed_min_kmh >= 0.0 && ego_speed_min_kmh <= ego_speed_max_kmh)) throw TrainError("bad ego speed range");
    if (drive_routes.empty()) throw TrainError("no driving routes");
    if (drive_reward.d_soft >= drive_reward.d_hard) throw TrainError("d_soft must be below d_hard");
    camera.validate();
}

double TrainConfig::epsilon_for(std::size_t episode) const {
    if (epsilon_decay_episodes == 0 || episode >= epsilon_decay_episodes) return epsilon_end;
    const double f = static_cast<double>(episode) / static_cast<double>(epsilon_decay_episodes);
    return epsilon_start + (epsilon_end - epsilon_start) * f;
}

std::string default_map_path() {
#ifdef QDRIVE_DATA_DIR
    return std::string(QDRIVE_DATA_DIR) + "/town.json";
#else
    return "data/town.json";
#endif
}

TrainConfig default_braking_config() {
    TrainConfig c;
    c.updates_per_step = 15;
    c.reward_scale = 0.1;
    return c;
}

TrainConfig default_driving_config() {
    TrainConfig c;
    c.updates_per_step = 25;
    c.reward_scale = 0.01;
    return c;
}

namespace {

struct StepOutcome {
    std::vector<double> next_obs;
    double reward = 0.0;
    bool terminal = false;  // no bootstrapping from next_obs
    bool done = false;      // episode ends (terminal or truncated)
};

// Shared DQN loop. Env provides reset(episode, rng) -> obs and step(action) -> StepOutcome.
template <class Env>
TrainResult run_dqn(const TrainConfig& cfg, QNet net, Env& env, std::size_t max_steps) {
    Rng rng(cfg.seed);
    init_glorot(net, rng);
    QNet target = net;
    AdamState opt = AdamState::for_net(net, cfg.lr);
    ReplayBuffer replay(cfg.replay_capacity);
    NetGrads grads = NetGrads::zeros_like(net);

    TrainResult result;
    for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
        const double eps = cfg.epsilon_for(ep);
        std::vector<double> obs = env.reset(ep, rng);
        double total = 0.0;
        std::size_t steps = 0;
        while (steps < max_steps) {
            const std::vector<double> q = forward(net, obs);
            const std::size_t a = epsilon_greedy(q, eps, rng);
            StepOutcome out = env.step(a);
            total += out.reward;
            ++steps;
            Transition t{obs, a, out.reward * cfg.reward_scale, out.next_obs, out.terminal};
            if constexpr (requires { env.mirror(t); }) {
                if (cfg.mirror_augment) replay.push(env.mirror(t));
            }
            replay.push(std::move(t));

            if (replay.size() >= cfg.batch) {
                for (std::size_t u = 0; u < cfg.updates_per_step; ++u) {
                    const auto sample = replay.sample(cfg.batch, rng);
                    Batch b;
                    b.targets = td_targets(sample, target, cfg.gamma);
                    for (const Transition& t : sample) {
                        b.inputs.push_back(t.obs);
                        b.actions.push_back(t.action);
                    }
                    gradients(net, b, grads);
                    adam_step(opt, net, grads);
                    if (++result.grad_steps % cfg.target_sync == 0) target = net;
                }
            }
            obs = std::move(out.next_obs);
            if (out.done) break;
        }
        result.curve.push_back(total);
        result.episode_steps.push_back(steps);
    }
    result.net = std::move(net);
    return result;
}

std::vector<double> as_vec(const std::array<double, 2>& a) { return {a[0], a[1]}; }

class BrakingEnv {
public:
    explicit BrakingEnv(const TrainConfig& cfg) : cfg_(cfg) {
        auto map = std::make_shared<Map>(Map::straight_road(cfg.road_length));
        if (cfg.perception == PerceptionMode::Pipeline) map->build_raster();
        map_ = map;
        const auto& route = map_->route("straight");
        traj_ = build_trajectory(route.poses, 1.0);
        world_cfg_.map = map_;
        world_cfg_.vehicles = 0;
        world_cfg_.pedestrians = 0;
        world_cfg_.dt = cfg.dt;
        world_cfg_.ego_params = cfg.vehicle;
        world_cfg_.ego_spawn = route.poses.front();
    }

    std::vector<double> reset(std::size_t, Rng& rng) {
        const double gap = uniform(rng, cfg_.leader_min, cfg_.leader_max);
        world_cfg_.ego_speed = uniform(rng, cfg_.ego_speed_min_kmh, cfg_.ego_speed_max_kmh) / 3.6;
        world_ = spawn_scene(world_cfg_, 0);
        const Lane& lane = map_->lanes().front();
        const double s = world_cfg_.ego_spawn.x - lane.start.x + gap;
        Actor leader;
        leader.id = 0;
        leader.kind = ActorKind::Vehicle;
        const Vec2 p = lane.point_at(s);
        leader.pose = VehicleState{p.x, p.y, lane.yaw(), 0.0};
        leader.script = LaneFollower{0, s, 0.0};
        world_.actors.push_back(leader);
        pipeline_ = PipelineState{};
        obs_ = observe();
        return as_vec(cfg_.scaling.braking_input(obs_));
    }

    StepOutcome step(std::size_t a) {
        const BrakeChoice choice = a == 0 ? BrakeChoice::Brake : BrakeChoice::Drive;
        const Action act = choice == BrakeChoice::Brake ? Action::Brake : Action::Straight;
        world_.ego = step_vehicle(world_.ego, action_to_control(act), cfg_.dt, cfg_.vehicle);
        step_world(world_, cfg_.dt);
        const bool collided = !detect_collisions(world_).empty();
        obs_ = observe();
        const RewardParamsBrake& p = cfg_.brake_reward;
        const double v = p.speed_in_kmh ? obs_.v * 3.6 : obs_.v;
        StepOutcome out;
        out.reward = reward_braking(v, obs_.d_obs, choice, collided, p);
        const bool stopped = v <= p.v_stop_eps && obs_.d_obs < p.stop_d;
        out.terminal = collided || (cfg_.stop_is_terminal && stopped);
        out.done = out.terminal;
        out.next_obs = as_vec(cfg_.scaling.braking_input(obs_));
        return out;
    }

private:
    Observation observe() { return assemble_observation(world_, traj_, cfg_.perception, cfg_.camera, &pipeline_); }

    const TrainConfig& cfg_;
    MapPtr map_;
    Trajectory traj_;
    WorldConfig world_cfg_;
    World world_;
    PipelineState pipeline_;
    Observation obs_;
};

class DrivingEnv {
public:
    explicit DrivingEnv(const TrainConfig& cfg) : cfg_(cfg) {
        map_ = std::make_shared<Map>(Map::load(cfg.map_path.empty() ? default_map_path() : cfg.map_path));
        for (const std::string& name : cfg.drive_routes) {
            const auto& route = map_->route(name);
            starts_.push_back(route.poses.front());
            trajs_.push_back(build_trajectory(route.poses, cfg.waypoint_spacing));
        }
        world_cfg_.map = map_;
        world_cfg_.vehicles = 0;
        world_cfg_.pedestrians = 0;
        world_cfg_.dt = cfg.dt;
        world_cfg_.ego_params = cfg.vehicle;
    }

    std::vector<double> reset(std::size_t episode, Rng& rng) {
        current_ = episode % trajs_.size();
        Pose start = starts_[current_];
        const double off = uniform(rng, -cfg_.spawn_offset, cfg_.spawn_offset);
        const double dyaw = uniform(rng, -cfg_.spawn_yaw, cfg_.spawn_yaw);
        const double r = deg2rad(start.yaw);
        // Positive offset is to the right of the heading.
        start.x += off * std::sin(r);
        start.y -= off * std::cos(r);
        start.yaw = wrap_deg(start.yaw + dyaw);
        world_cfg_.ego_spawn = start;
        world_cfg_.ego_speed = 0.0;
        world_ = spawn_scene(world_cfg_, 0);
        obs_ = observe();
        return as_vec(cfg_.scaling.driving_input(obs_));
    }

    StepOutcome step(std::size_t a) {
        const int action = static_cast<int>(a) + 1;
        const int ref = heuristic_driving_policy(obs_.d, obs_.phi);
        world_.ego = step_vehicle(world_.ego, action_to_control(static_cast<Action>(action)), cfg_.dt, cfg_.vehicle);
        step_world(world_, cfg_.dt);
        const bool collided = !detect_collisions(world_).empty();
        obs_ = observe();
        const RewardParamsDrive& p = cfg_.drive_reward;
        StepOutcome out;
        out.reward = reward_driving(obs_.d, obs_.phi, action, ref, collided, p);
        const Trajectory& traj = trajs_[current_];
        const bool at_goal = norm(world_.ego.pos() - traj.goal().pos()) <= traj.goal_radius;
        out.terminal = std::abs(obs_.d) > p.d_hard || std::abs(obs_.phi) > p.phi_hard ||
                       (cfg_.terminate_on_collision && collided);
        // The route end carries no reward of its own, so it truncates rather
        // than terminates: targets keep bootstrapping there.
        out.done = out.terminal || at_goal;
        out.next_obs = as_vec(cfg_.scaling.driving_input(obs_));
        return out;
    }

    // Reflection across the path: d and phi flip sign, left and right swap.
    // pi_d and R_d are symmetric under it.
    static Transition mirror(const Transition& t) {
        static constexpr std::size_t swap[5] = {0, 2, 1, 4, 3};
        return {{-t.obs[0], -t.obs[1]}, swap[t.action], t.reward, {-t.next_obs[0], -t.next_obs[1]}, t.done};
    }

private:
    Observation observe() const {
        Observation o;
        const Trajectory& traj = trajs_[current_];
        o.d = signed_lateral_distance(traj, world_.ego.pos());
        o.phi = heading_error(traj, world_.ego);
        o.v = world_.ego.speed;
        return o;
    }

    const TrainConfig& cfg_;
    MapPtr map_;
    std::vector<Pose> starts_;
    std::vector<Trajectory> trajs_;
    std::size_t current_ = 0;
    WorldConfig world_cfg_;
    World world_;
    Observation obs_;
};

}  // namespace

TrainResult train_braking_model(const TrainConfig& cfg) {
    cfg.validate();
    BrakingEnv env(cfg);
    return run_dqn(cfg, make_braking_net(), env, cfg.max_steps ? cfg.max_steps : 1000);
}

TrainResult train_driving_model(const TrainConfig& cfg) {
    cfg.validate();
    DrivingEnv env(cfg);
    return run_dqn(cfg, make_driving_net(), env, cfg.max_steps ? cfg.max_steps : 3000);
}

}  // namespace qdrive
