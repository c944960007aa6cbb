#include "qdrive/replay.hpp"

#include <algorithm>

namespace qdrive {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ReplayError("replay capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
        return;
    }
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= items_.size()) throw ReplayError("replay index out of range");
    return items_[(head_ + i) % items_.size()];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
    if (batch == 0 || items_.size() < batch) throw ReplayError("replay buffer holds fewer transitions than the batch");
    std::vector<Transition> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) out.push_back(items_[uniform_index(rng, items_.size())]);
    return out;
}

std::size_t epsilon_greedy(std::span<const double> q, double epsilon, Rng& rng) {
    // Always draw so the random stream does not depend on the branch taken.
    const double u = uniform01(rng);
    const std::size_t pick = uniform_index(rng, q.size());
    return u < epsilon ? pick : argmax(q);
}

std::vector<double> td_targets(const std::vector<Transition>& batch, const QNet& target, double gamma) {
    std::vector<double> y;
    y.reserve(batch.size());
    for (const Transition& t : batch) {
        if (t.done) {
            y.push_back(t.reward);
            continue;
        }
        const std::vector<double> q = forward(target, t.next_obs);
        y.push_back(t.reward + gamma * *std::max_element(q.begin(), q.end()));
    }
    return y;
}

}  // namespace qdrive
