#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qdrive/qnet.hpp"
#include "qdrive/rng.hpp"

namespace qdrive {

// Inputs are already scaled and restricted to the owning model's features.
struct Transition {
    std::vector<double> obs;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool done = false;
};

class ReplayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fixed-capacity FIFO ring of transitions with uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 10000);

    void push(Transition t);
    // Uniform with replacement.
    std::vector<Transition> sample(std::size_t batch, Rng& rng) const;

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    // i-th oldest transition.
    const Transition& at(std::size_t i) const;

private:
    std::size_t capacity_;
    std::size_t head_ = 0;  // next slot to overwrite once full
    std::vector<Transition> items_;
};

// Uniform over all actions with probability epsilon, otherwise argmax.
std::size_t epsilon_greedy(std::span<const double> q, double epsilon, Rng& rng);

// y_i = r_i for terminal transitions, else r_i + gamma * max_a Q_target(s'_i, a).
std::vector<double> td_targets(const std::vector<Transition>& batch, const QNet& target, double gamma);

}  // namespace qdrive
