#include "qdrive/qnet.hpp"

#include <algorithm>
#include <cmath>

namespace qdrive {

std::string to_string(Activation a) { return a == Activation::Relu ? "relu" : "linear"; }

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "linear") return Activation::Linear;
    throw NetError("unknown activation '" + s + "'");
}

void QNet::validate() const {
    if (layers.empty()) throw NetError("network has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const DenseLayer& L = layers[l];
        if (L.input_dim == 0 || L.output_dim == 0) throw NetError("layer with zero dimension");
        if (L.weights.size() != L.input_dim * L.output_dim || L.bias.size() != L.output_dim) {
            throw NetError("layer storage does not match its dimensions");
        }
        if (l > 0 && layers[l - 1].output_dim != L.input_dim) throw NetError("layer dimensions do not chain");
    }
}

QNet make_braking_net() { return QNet{{DenseLayer(2, 2, Activation::Linear)}}; }

QNet make_driving_net() {
    return QNet{{DenseLayer(2, 8, Activation::Relu), DenseLayer(8, 5, Activation::Linear)}};
}

void init_glorot(QNet& net, Rng& rng) {
    for (DenseLayer& L : net.layers) {
        const double limit = std::sqrt(6.0 / static_cast<double>(L.input_dim + L.output_dim));
        for (double& w : L.weights) w = uniform(rng, -limit, limit);
        std::fill(L.bias.begin(), L.bias.end(), 0.0);
    }
}

namespace {

// Pre-activations and activations of every layer for one input.
struct Activations {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;  // post[0] is the input
};

Activations run(const QNet& net, std::span<const double> input) {
    if (input.size() != net.input_dim()) throw NetError("input dimension does not match the network");
    Activations a;
    a.post.emplace_back(input.begin(), input.end());
    for (const DenseLayer& L : net.layers) {
        const std::vector<double>& x = a.post.back();
        std::vector<double> z(L.output_dim);
        for (std::size_t o = 0; o < L.output_dim; ++o) {
            double acc = L.bias[o];
            for (std::size_t i = 0; i < L.input_dim; ++i) acc += L.w(o, i) * x[i];
            z[o] = acc;
        }
        std::vector<double> y = z;
        if (L.activation == Activation::Relu) {
            for (double& v : y) v = v > 0.0 ? v : 0.0;
        }
        a.pre.push_back(std::move(z));
        a.post.push_back(std::move(y));
    }
    return a;
}

}  // namespace

std::vector<double> forward(const QNet& net, std::span<const double> input) { return run(net, input).post.back(); }

NetGrads NetGrads::zeros_like(const QNet& net) {
    NetGrads g;
    for (const DenseLayer& L : net.layers) {
        g.weights.emplace_back(L.weights.size(), 0.0);
        g.bias.emplace_back(L.bias.size(), 0.0);
    }
    return g;
}

double gradients(const QNet& net, const Batch& batch, NetGrads& out) {
    out = NetGrads::zeros_like(net);
    const std::size_t n = batch.inputs.size();
    if (n == 0 || batch.actions.size() != n || batch.targets.size() != n) throw NetError("inconsistent batch shapes");
    const double scale = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
        const Activations a = run(net, batch.inputs[b]);
        const std::size_t act = batch.actions[b];
        if (act >= net.output_dim()) throw NetError("action index outside the network head");
        const double err = a.post.back()[act] - batch.targets[b];
        loss += err * err * scale;

        // dL/d(output) is nonzero only on the chosen action.
        std::vector<double> delta(net.output_dim(), 0.0);
        delta[act] = 2.0 * err * scale;
        for (std::size_t l = net.layers.size(); l-- > 0;) {
            const DenseLayer& L = net.layers[l];
            if (L.activation == Activation::Relu) {
                for (std::size_t o = 0; o < L.output_dim; ++o) {
                    if (a.pre[l][o] <= 0.0) delta[o] = 0.0;
                }
            }
            const std::vector<double>& x = a.post[l];
            for (std::size_t o = 0; o < L.output_dim; ++o) {
                out.bias[l][o] += delta[o];
                for (std::size_t i = 0; i < L.input_dim; ++i) out.weights[l][o * L.input_dim + i] += delta[o] * x[i];
            }
            if (l == 0) break;
            std::vector<double> prev(L.input_dim, 0.0);
            for (std::size_t o = 0; o < L.output_dim; ++o) {
                for (std::size_t i = 0; i < L.input_dim; ++i) prev[i] += L.w(o, i) * delta[o];
            }
            delta = std::move(prev);
        }
    }
    return loss;
}

AdamState AdamState::for_net(const QNet& net, double lr) {
    AdamState s;
    s.lr = lr;
    s.m = NetGrads::zeros_like(net);
    s.v = NetGrads::zeros_like(net);
    return s;
}

void adam_step(AdamState& opt, QNet& net, const NetGrads& grads) {
    ++opt.step;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
    auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                      std::vector<double>& v) {
        if (p.size() != g.size() || m.size() != g.size()) throw NetError("optimizer state shape mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
            v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            p[i] -= opt.lr * m_hat / (std::sqrt(v_hat) + opt.eps);
        }
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        update(net.layers[l].weights, grads.weights[l], opt.m.weights[l], opt.v.weights[l]);
        update(net.layers[l].bias, grads.bias[l], opt.m.bias[l], opt.v.bias[l]);
    }
}

std::size_t argmax(std::span<const double> q) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < q.size(); ++i) {
        if (q[i] > q[best]) best = i;
    }
    return best;
}

}  // namespace qdrive
