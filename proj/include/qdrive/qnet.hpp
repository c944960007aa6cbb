#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdrive/rng.hpp"

namespace qdrive {

enum class Activation { Linear, Relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    Activation activation = Activation::Linear;
    std::vector<double> weights;  // output_dim x input_dim, row-major
    std::vector<double> bias;     // output_dim

    DenseLayer() = default;
    DenseLayer(std::size_t in, std::size_t out, Activation act)
        : input_dim(in), output_dim(out), activation(act), weights(in * out, 0.0), bias(out, 0.0) {}

    double& w(std::size_t o, std::size_t i) { return weights[o * input_dim + i]; }
    double w(std::size_t o, std::size_t i) const { return weights[o * input_dim + i]; }
    bool operator==(const DenseLayer&) const = default;
};

class NetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dense feed-forward Q-function.
struct QNet {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const { return layers.front().input_dim; }
    std::size_t output_dim() const { return layers.back().output_dim; }
    // Throws NetError unless adjacent layer dimensions chain and storage sizes match.
    void validate() const;
    bool operator==(const QNet&) const = default;
};

// Braking head: 2 -> 2 linear. Outputs (brake, drive).
QNet make_braking_net();
// Driving head: 2 -> 8 relu -> 5 linear. Outputs actions 1..5.
QNet make_driving_net();

// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
void init_glorot(QNet& net, Rng& rng);

std::vector<double> forward(const QNet& net, std::span<const double> input);

// Gradients have the same shape as the network parameters.
struct NetGrads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;

    static NetGrads zeros_like(const QNet& net);
};

struct Batch {
    std::vector<std::vector<double>> inputs;
    std::vector<std::size_t> actions;
    std::vector<double> targets;
};

// Exact gradient of (1/B) sum_i (Q(s_i, a_i) - y_i)^2; returns the loss.
double gradients(const QNet& net, const Batch& batch, NetGrads& out);

struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t step = 0;
    NetGrads m;
    NetGrads v;

    static AdamState for_net(const QNet& net, double lr);
};

// Bias-corrected Adam update in place.
void adam_step(AdamState& opt, QNet& net, const NetGrads& grads);

std::size_t argmax(std::span<const double> q);

}  // namespace qdrive
