#pragma once

#include <cstddef>

namespace qdrive {

// Which inequality gates the first two terms of the braking reward.
//   SpeedBelowDistance: [v < slope*d_obs + intercept] (the printed form).
//   DistanceBelowSpeed: [d_obs < alt_slope*v + alt_intercept], i.e. "too close
//   for the current speed"; the complement gates the second term.
enum class BrakeGate { SpeedBelowDistance, DistanceBelowSpeed };

struct RewardParamsBrake {
    BrakeGate gate = BrakeGate::SpeedBelowDistance;
    double slope = 10.0;
    double intercept = 10.0;
    double alt_slope = 0.5;      // m per km/h
    double alt_intercept = 2.0;  // m
    double slow_v = 1.0;         // km/h
    double far_d = 100.0;
    double stop_bonus = 200.0;
    double stop_d = 150.0;
    double far_penalty = 10.0;
    double collision_penalty = 200.0;
    double v_stop_eps = 0.05;    // km/h; "v = 0"
    bool speed_in_kmh = true;

    bool operator==(const RewardParamsBrake&) const = default;
};

struct RewardParamsDrive {
    double match_bonus = 5.0;
    double d_soft = 2.0;
    double d_hard = 3.0;
    double phi_hard = 100.0;
    double soft_penalty = 10.0;
    double hard_penalty = 200.0;
    double collision_penalty = 200.0;

    bool operator==(const RewardParamsDrive&) const = default;
};

enum class BrakeChoice : std::size_t { Brake = 0, Drive = 1 };

// v in the unit selected by params.speed_in_kmh (callers convert), d_obs in m.
double reward_braking(double v, double d_obs, BrakeChoice a, bool collided, const RewardParamsBrake& p = {});

// a and a_ref are driving actions 1..5.
double reward_driving(double d, double phi, int a, int a_ref, bool collided, const RewardParamsDrive& p = {});

// Hand-written steering rule used as the reference policy inside the driving
// reward. Returns a driving action 1..5.
int heuristic_driving_policy(double d, double phi);

}  // namespace qdrive
