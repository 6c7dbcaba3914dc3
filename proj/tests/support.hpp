#pragma once

// Shared helpers for the unit and acceptance tests.

#include <random>
#include <vector>

#include "ejcorr/neural.hpp"

namespace ejcorr::support {

/// True when every relu pre-activation on the input sits at least `margin` away from 0.
inline bool away_from_kinks(const nn::DenseNet& net, std::span<const double> x, double margin) {
    nn::DenseNet copy = net;
    copy.set_training(false);
    nn::ForwardTrace t;
    copy.forward(x, t);
    for (std::size_t li = 0; li < net.layer_count(); ++li)
        if (net.layers()[li].activation == nn::Activation::relu)
            for (double p : t.pre[li])
                if (std::abs(p) < margin) return false;
    return true;
}

struct GradientCase {
    nn::DenseNet net;
    std::vector<double> input;
    int loss = 0;  // 0 squared error, 1 linear, 2 log loss (sigmoid output only)
    std::vector<double> target;
};

/// Random topology, activations, He-initialized weights, biases, input and loss. Inputs are redrawn
/// until no relu unit sits within 1e-3 of its kink.
inline GradientCase random_gradient_case(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (;;) {
        const auto inputs = static_cast<std::size_t>(pick(1, 5));
        const int depth = pick(1, 4);
        std::vector<nn::LayerSpec> specs;
        for (int l = 0; l < depth; ++l) {
            const bool last = l + 1 == depth;
            const auto width = static_cast<std::size_t>(last ? pick(1, 3) : pick(1, 6));
            const auto act = static_cast<nn::Activation>(pick(0, 2));
            specs.push_back({width, act});
        }
        nn::DenseNet net(inputs, specs, 0.0, rng());
        std::uniform_real_distribution<double> small(-0.5, 0.5);
        for (std::size_t li = 0; li < net.layer_count(); ++li)
            for (auto& b : net.layer(li).bias) b = small(rng);
        GradientCase c{net, {}, 0, {}};
        for (int attempt = 0; attempt < 200; ++attempt) {
            c.input.assign(inputs, 0.0);
            for (auto& v : c.input) v = u(rng);
            if (away_from_kinks(c.net, c.input, 1e-3)) break;
            c.input.clear();
        }
        if (c.input.empty()) continue;
        const bool sigmoid_out = specs.back().activation == nn::Activation::sigmoid && specs.back().outputs == 1;
        c.loss = sigmoid_out ? pick(0, 2) : pick(0, 1);
        c.target.assign(specs.back().outputs, 0.0);
        for (auto& v : c.target) v = u(rng);
        if (c.loss == 2) c.target = {static_cast<double>(pick(0, 1))};
        return c;
    }
}

inline double check(const GradientCase& c) {
    switch (c.loss) {
        case 0: return nn::grad_check(c.net, c.input, nn::SquaredErrorLoss{c.target});
        case 1: return nn::grad_check(c.net, c.input, nn::LinearLoss{c.target});
        default: return nn::grad_check(c.net, c.input, nn::LogLoss{c.target[0]});
    }
}

}  // namespace ejcorr::support
