#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "qdrive/qnet.hpp"
#include "qdrive/state_rep.hpp"
#include "qdrive/vehicle.hpp"
#include "qdrive/world.hpp"

namespace qdrive {

enum class Action : std::uint8_t { Brake = 0, Straight, Left, Right, SlightLeft, SlightRight };

inline constexpr std::array<Action, 6> kAllActions{Action::Brake, Action::Straight, Action::Left,
                                                   Action::Right, Action::SlightLeft, Action::SlightRight};
inline constexpr std::array<Action, 5> kDrivingActions{Action::Straight, Action::Left, Action::Right,
                                                       Action::SlightLeft, Action::SlightRight};

const char* to_string(Action a);

ControlCommand action_to_control(Action a);

// The two trained heads plus the scaling their inputs were trained with.
struct PolicyBundle {
    QNet brake_net;
    QNet drive_net;
    InputScaling scaling;
};

// Red light -> brake. Otherwise the braking head gates; when it says drive,
// the driving head picks among actions 1..5.
Action decide_action(const Observation& obs, LightView light, const PolicyBundle& policy);

// With probability pct, replaces a by a uniform draw from pool.
Action inject_noise(Action a, double pct, Rng& rng, std::span<const Action> pool);

}  // namespace qdrive
