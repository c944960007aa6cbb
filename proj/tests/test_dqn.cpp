#include <array>
#include <cmath>
#include <map>

#include "doctest.h"
#include "qdrive/qnet.hpp"
#include "qdrive/replay.hpp"
#include "qdrive/training.hpp"

using namespace qdrive;

namespace {

Transition tr(double r, bool done, std::vector<double> next = {0.0, 0.0}) {
    return Transition{{0.0, 0.0}, 0, r, std::move(next), done};
}

}  // namespace

TEST_CASE("shipped net shapes") {
    const QNet b = make_braking_net();
    REQUIRE(b.layers.size() == 1);
    CHECK(b.input_dim() == 2);
    CHECK(b.output_dim() == 2);
    CHECK(b.layers[0].activation == Activation::Linear);
    const QNet d = make_driving_net();
    REQUIRE(d.layers.size() == 2);
    CHECK(d.layers[0].output_dim == 8);
    CHECK(d.layers[0].activation == Activation::Relu);
    CHECK(d.output_dim() == 5);
    CHECK(d.layers[1].activation == Activation::Linear);
}

TEST_CASE("forward pass arithmetic") {
    QNet zero = make_driving_net();
    const std::array<double, 2> x{0.3, -0.7};
    for (double q : forward(zero, x)) CHECK(q == 0.0);

    QNet id = make_braking_net();
    id.layers[0].w(0, 0) = 1.0;
    id.layers[0].w(1, 1) = 1.0;
    id.layers[0].bias = {1.0, -1.0};
    const std::array<double, 2> in{3.0, 4.0};
    const auto out = forward(id, in);
    CHECK(out[0] == 4.0);
    CHECK(out[1] == 3.0);

    QNet relu;
    relu.layers.emplace_back(2, 1, Activation::Relu);
    relu.layers[0].weights = {1.0, 1.0};
    relu.layers[0].bias = {-10.0};
    CHECK(forward(relu, in)[0] == 0.0);

    const std::array<double, 3> wrong{1, 2, 3};
    CHECK_THROWS_AS(forward(id, wrong), NetError);
}

TEST_CASE("validate rejects broken chains") {
    QNet n = make_driving_net();
    n.layers[1].input_dim = 7;
    CHECK_THROWS_AS(n.validate(), NetError);
    QNet m = make_braking_net();
    m.layers[0].bias.pop_back();
    CHECK_THROWS_AS(m.validate(), NetError);
}

TEST_CASE("glorot init stays inside its bound") {
    QNet n = make_driving_net();
    Rng rng(2);
    init_glorot(n, rng);
    const double b0 = std::sqrt(6.0 / (2 + 8));
    for (double w : n.layers[0].weights) CHECK(std::abs(w) <= b0);
    for (double b : n.layers[0].bias) CHECK(b == 0.0);
}

TEST_CASE("gradients vanish at zero loss") {
    QNet n = make_driving_net();
    Rng rng(3);
    init_glorot(n, rng);
    Batch b;
    for (int i = 0; i < 4; ++i) {
        b.inputs.push_back({uniform(rng, -1, 1), uniform(rng, -1, 1)});
        b.actions.push_back(static_cast<std::size_t>(i % 5));
        b.targets.push_back(forward(n, b.inputs.back())[b.actions.back()]);
    }
    NetGrads g = NetGrads::zeros_like(n);
    CHECK(gradients(n, b, g) == 0.0);
    for (const auto& l : g.weights) {
        for (double v : l) CHECK(v == 0.0);
    }
}

TEST_CASE("single-sample linear gradient is 2(Q - y) x") {
    QNet n = make_braking_net();
    Rng rng(4);
    init_glorot(n, rng);
    const std::vector<double> x{0.4, -1.2};
    const double y = 0.25;
    Batch b{{x}, {1}, {y}};
    NetGrads g = NetGrads::zeros_like(n);
    const double q = forward(n, x)[1];
    CHECK(gradients(n, b, g) == doctest::Approx((q - y) * (q - y)));
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(g.weights[0][0 * 2 + i] == 0.0);
        CHECK(g.weights[0][1 * 2 + i] == doctest::Approx(2.0 * (q - y) * x[i]));
    }
    CHECK(g.bias[0][1] == doctest::Approx(2.0 * (q - y)));
    CHECK(g.bias[0][0] == 0.0);
}

TEST_CASE("adam step") {
    QNet n;
    n.layers.emplace_back(1, 1, Activation::Linear);
    AdamState opt = AdamState::for_net(n, 0.1);
    NetGrads zero = NetGrads::zeros_like(n);
    adam_step(opt, n, zero);
    CHECK(opt.step == 1);
    CHECK(n.layers[0].weights[0] == 0.0);

    QNet m;
    m.layers.emplace_back(1, 1, Activation::Linear);
    AdamState o2 = AdamState::for_net(m, 0.1);
    NetGrads g = NetGrads::zeros_like(m);
    g.weights[0][0] = 1.0;
    adam_step(o2, m, g);
    CHECK(std::abs(m.layers[0].weights[0] + 0.1) < 1e-6);
    CHECK(m.layers[0].bias[0] == 0.0);

    QNet a = make_driving_net(), c = make_driving_net();
    Rng r1(8), r2(8);
    init_glorot(a, r1);
    init_glorot(c, r2);
    AdamState oa = AdamState::for_net(a, 1e-3), oc = AdamState::for_net(c, 1e-3);
    NetGrads ga = NetGrads::zeros_like(a);
    for (auto& l : ga.weights) {
        for (double& v : l) v = 0.3;
    }
    for (int i = 0; i < 5; ++i) {
        adam_step(oa, a, ga);
        adam_step(oc, c, ga);
    }
    CHECK(a == c);
}

TEST_CASE("replay ring semantics and sampling") {
    ReplayBuffer rb(3);
    for (int i = 0; i < 4; ++i) rb.push(tr(i, false));
    CHECK(rb.size() == 3);
    CHECK(rb.at(0).reward == 1.0);
    CHECK(rb.at(2).reward == 3.0);

    Rng a(5), b(5);
    const auto s1 = rb.sample(3, a);
    const auto s2 = rb.sample(3, b);
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i].reward == s2[i].reward);

    ReplayBuffer small(10);
    small.push(tr(0, false));
    Rng c(1);
    CHECK_THROWS_AS(small.sample(2, c), ReplayError);
}

TEST_CASE("replay sampling is uniform") {
    ReplayBuffer rb(4);
    for (int i = 0; i < 4; ++i) rb.push(tr(i, false));
    Rng rng(6);
    std::map<double, int> freq;
    const int n = 100000;
    for (int i = 0; i < n / 4; ++i) {
        for (const Transition& t : rb.sample(4, rng)) ++freq[t.reward];
    }
    for (const auto& [k, c] : freq) CHECK(std::abs(c / double(n) - 0.25) < 0.02);
}

TEST_CASE("epsilon-greedy") {
    Rng rng(7);
    const std::array<double, 3> q{1, 5, 2};
    CHECK(epsilon_greedy(q, 0.0, rng) == 1);
    const std::array<double, 2> tie{3, 3};
    CHECK(epsilon_greedy(tie, 0.0, rng) == 0);
    const std::array<double, 5> five{0, 0, 0, 0, 9};
    std::array<int, 5> counts{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[epsilon_greedy(five, 1.0, rng)];
    for (int c : counts) CHECK(std::abs(c / double(n) - 0.2) < 0.01);
}

TEST_CASE("TD targets") {
    QNet target = make_braking_net();
    target.layers[0].bias = {1.0, 3.0};
    const std::vector<Transition> terminal{tr(7.0, true)};
    CHECK(td_targets(terminal, target, 0.99)[0] == 7.0);
    const std::vector<Transition> live{tr(1.0, false)};
    CHECK(td_targets(live, target, 0.0)[0] == 1.0);
    CHECK(td_targets(live, target, 0.99)[0] == doctest::Approx(3.97));
}

TEST_CASE("epsilon schedule") {
    TrainConfig c;
    CHECK(c.epsilon_for(0) == 1.0);
    CHECK(c.epsilon_for(30) == doctest::Approx(0.05));
    CHECK(c.epsilon_for(39) == doctest::Approx(0.05));
    CHECK(c.epsilon_for(15) == doctest::Approx(1.0 - 0.95 * 15.0 / 30.0));
}

TEST_CASE("training config validation") {
    TrainConfig c = default_braking_config();
    CHECK_NOTHROW(c.validate());
    c.gamma = 1.5;
    CHECK_THROWS_AS(c.validate(), TrainError);
    c = default_braking_config();
    c.replay_capacity = 4;
    CHECK_THROWS_AS(c.validate(), TrainError);
}

TEST_CASE("training is deterministic for a seed") {
    TrainConfig c = default_braking_config();
    c.episodes = 3;
    const TrainResult a = train_braking_model(c);
    const TrainResult b = train_braking_model(c);
    CHECK(a.net == b.net);
    CHECK(a.curve == b.curve);
    c.seed = 1;
    CHECK_FALSE(train_braking_model(c).curve == a.curve);
}
