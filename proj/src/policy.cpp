#include "qdrive/policy.hpp"

namespace qdrive {

const char* to_string(Action a) {
    switch (a) {
        case Action::Brake: return "brake";
        case Action::Straight: return "straight";
        case Action::Left: return "left";
        case Action::Right: return "right";
        case Action::SlightLeft: return "slight_left";
        case Action::SlightRight: return "slight_right";
    }
    return "?";
}

ControlCommand action_to_control(Action a) {
    switch (a) {
        case Action::Brake: return {0.0, 0.0, 1.0};
        case Action::Straight: return {0.5, 0.0, 0.0};
        case Action::Left: return {0.4, -0.7, 0.0};
        case Action::Right: return {0.4, 0.7, 0.0};
        case Action::SlightLeft: return {0.5, -0.2, 0.0};
        case Action::SlightRight: return {0.5, 0.2, 0.0};
    }
    return {0.0, 0.0, 1.0};
}

Action decide_action(const Observation& obs, LightView light, const PolicyBundle& policy) {
    if (light == LightView::Red) return Action::Brake;
    const auto bin = policy.scaling.braking_input(obs);
    if (argmax(forward(policy.brake_net, bin)) == 0) return Action::Brake;
    const auto din = policy.scaling.driving_input(obs);
    return static_cast<Action>(1 + argmax(forward(policy.drive_net, din)));
}

Action inject_noise(Action a, double pct, Rng& rng, std::span<const Action> pool) {
    const double u = uniform01(rng);
    const std::size_t pick = uniform_index(rng, pool.size());
    return u < pct ? pool[pick] : a;
}

}  // namespace qdrive
