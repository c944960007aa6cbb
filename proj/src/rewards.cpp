#include "qdrive/rewards.hpp"

#include <cmath>

namespace qdrive {

namespace {
constexpr double ind(bool b) { return b ? 1.0 : 0.0; }
}  // namespace

double reward_braking(double v, double d_obs, BrakeChoice a, bool collided, const RewardParamsBrake& p) {
    const double brake = ind(a == BrakeChoice::Brake);
    const double drive = ind(a == BrakeChoice::Drive);
    bool first = false;
    bool second = false;
    if (p.gate == BrakeGate::SpeedBelowDistance) {
        const double limit = p.slope * d_obs + p.intercept;
        first = v < limit;
        second = v > limit;
    } else {
        const double limit = p.alt_slope * v + p.alt_intercept;
        first = d_obs < limit;
        second = d_obs > limit;
    }
    double r = ind(first) * (3.0 * brake - drive) + 2.0 * ind(second) * (2.0 * drive - 1.0);
    r -= p.far_penalty * ind(v < p.slow_v) * ind(d_obs > p.far_d);
    r += p.stop_bonus * ind(v <= p.v_stop_eps) * ind(d_obs < p.stop_d);
    r -= p.collision_penalty * ind(collided);
    return r;
}

double reward_driving(double d, double phi, int a, int a_ref, bool collided, const RewardParamsDrive& p) {
    return p.match_bonus * ind(a == a_ref) - p.soft_penalty * ind(std::abs(d) > p.d_soft) -
           p.hard_penalty * ind(std::abs(d) > p.d_hard) - p.hard_penalty * ind(std::abs(phi) > p.phi_hard) -
           p.collision_penalty * ind(collided);
}

int heuristic_driving_policy(double d, double phi) {
    // Positive d is right of the path and positive phi is yawed left, so a
    // negative e asks for a left correction.
    const double e = -(d - 0.05 * phi);
    const double mag = std::abs(e);
    if (mag < 0.3) return 1;
    const bool left = e < 0.0;
    if (mag < 1.0) return left ? 4 : 5;
    return left ? 2 : 3;
}

}  // namespace qdrive
