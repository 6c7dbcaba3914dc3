#pragma once

// Small dense feed-forward networks with manual backpropagation, inverted
// dropout and Adam. Sized for the tiny tabular networks used here (tens of
// inputs, hidden width 16), so everything is plain loops over std::vector.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ejcorr/errors.hpp"

namespace ejcorr::nn {

enum class Activation { relu, sigmoid, identity };

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        case Activation::identity: return "identity";
    }
    return "?";
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "identity") return Activation::identity;
    throw DataError("unknown activation '" + s + "'");
}

inline double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double activate(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0 ? x : 0.0;
        case Activation::sigmoid: return sigmoid(x);
        case Activation::identity: return x;
    }
    return x;
}

// Derivative expressed through the pre-activation and the activation value.
// The relu subgradient at 0 is 0.
inline double activate_derivative(Activation a, double pre, double post) {
    switch (a) {
        case Activation::relu: return pre > 0 ? 1.0 : 0.0;
        case Activation::sigmoid: return post * (1.0 - post);
        case Activation::identity: return 1.0;
    }
    return 1.0;
}

struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;  // outputs x inputs, row-major
    std::vector<double> bias;
    Activation activation = Activation::identity;
};

struct LayerSpec {
    std::size_t outputs;
    Activation activation;
};

/// Gradients (or any per-parameter quantity) in the order W0, b0, W1, b1, ...
using ParamTensors = std::vector<std::vector<double>>;

/// Where the gradient passed to backward() is taken.
enum class GradientAt { output, preactivation };

/// Everything backward() needs from one forward pass on one sample.
struct ForwardTrace {
    std::vector<std::vector<double>> inputs;   // input seen by layer i
    std::vector<std::vector<double>> pre;      // pre-activation of layer i
    std::vector<std::vector<double>> post;     // activation of layer i before dropout
    std::vector<std::vector<double>> dropout;  // multiplier on layer i's output (hidden layers only)
    std::vector<double> output;
    std::size_t layer_count = 0;
    // scratch space for backward()
    mutable std::vector<double> delta, carry;
};

class DenseNet {
public:
    DenseNet() = default;

    /// Builds a network with uniform He-style initialization U(-sqrt(6/fan_in), sqrt(6/fan_in))
    /// for the weights and zero biases.
    DenseNet(std::size_t inputs, std::span<const LayerSpec> specs, double dropout_rate,
             std::uint64_t seed)
        : dropout_rate_(dropout_rate), rng_(seed) {
        if (specs.empty()) throw UsageError("network needs at least one layer");
        std::size_t fan_in = inputs;
        for (const auto& spec : specs) {
            if (spec.outputs == 0) throw UsageError("layer width must be positive");
            DenseLayer layer;
            layer.inputs = fan_in;
            layer.outputs = spec.outputs;
            layer.activation = spec.activation;
            layer.weights.resize(fan_in * spec.outputs);
            layer.bias.assign(spec.outputs, 0.0);
            const double limit = fan_in > 0 ? std::sqrt(6.0 / static_cast<double>(fan_in)) : 0.0;
            std::uniform_real_distribution<double> u(-limit, limit);
            for (auto& w : layer.weights) w = limit > 0 ? u(rng_) : 0.0;
            layers_.push_back(std::move(layer));
            fan_in = spec.outputs;
        }
        check_dropout();
    }

    /// Wraps explicitly supplied layers (deserialization, hand-built test nets).
    static DenseNet from_layers(std::vector<DenseLayer> layers, double dropout_rate,
                                std::uint64_t seed = 0) {
        if (layers.empty()) throw UsageError("network needs at least one layer");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const auto& l = layers[i];
            if (l.weights.size() != l.inputs * l.outputs || l.bias.size() != l.outputs)
                throw UsageError("layer " + std::to_string(i) + " parameter shape mismatch");
            if (i > 0 && layers[i - 1].outputs != l.inputs)
                throw UsageError("layer " + std::to_string(i) + " input size does not match previous output");
        }
        DenseNet net;
        net.layers_ = std::move(layers);
        net.dropout_rate_ = dropout_rate;
        net.rng_.seed(seed);
        net.check_dropout();
        return net;
    }

    std::size_t input_size() const { return layers_.empty() ? 0 : layers_.front().inputs; }
    std::size_t output_size() const { return layers_.empty() ? 0 : layers_.back().outputs; }
    std::size_t layer_count() const { return layers_.size(); }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    DenseLayer& layer(std::size_t i) { return layers_.at(i); }

    double dropout_rate() const { return dropout_rate_; }
    bool training() const { return training_; }
    void set_training(bool on) { training_ = on; }

    /// Inference pass (no dropout regardless of mode).
    std::vector<double> predict(std::span<const double> x) const {
        check_input(x);
        std::vector<double> cur(x.begin(), x.end()), next;
        for (const auto& l : layers_) {
            next.assign(l.outputs, 0.0);
            for (std::size_t o = 0; o < l.outputs; ++o) {
                const double* w = l.weights.data() + o * l.inputs;
                double acc = l.bias[o];
                for (std::size_t i = 0; i < l.inputs; ++i) acc += w[i] * cur[i];
                next[o] = activate(l.activation, acc);
            }
            cur.swap(next);
        }
        return cur;
    }

    /// Forward pass honoring the current mode; dropout masks are drawn in training mode.
    std::vector<double> forward(std::span<const double> x) {
        ForwardTrace t;
        forward(x, t);
        return t.output;
    }

    /// Forward pass that records what backward() needs. The trace's buffers are
    /// reused across calls.
    void forward(std::span<const double> x, ForwardTrace& t) {
        check_input(x);
        const std::size_t L = layers_.size();
        t.layer_count = L;
        t.inputs.resize(L);
        t.pre.resize(L);
        t.post.resize(L);
        t.dropout.resize(L);
        t.inputs[0].assign(x.begin(), x.end());
        const bool drop = training_ && dropout_rate_ > 0.0;
        const double keep = 1.0 - dropout_rate_;
        for (std::size_t li = 0; li < L; ++li) {
            const auto& l = layers_[li];
            auto& in = t.inputs[li];
            auto& pre = t.pre[li];
            auto& post = t.post[li];
            pre.resize(l.outputs);
            post.resize(l.outputs);
            for (std::size_t o = 0; o < l.outputs; ++o) {
                const double* w = l.weights.data() + o * l.inputs;
                double acc = l.bias[o];
                for (std::size_t i = 0; i < l.inputs; ++i) acc += w[i] * in[i];
                pre[o] = acc;
                post[o] = activate(l.activation, acc);
            }
            auto& mask = t.dropout[li];
            const bool hidden = li + 1 < L;
            if (hidden && drop) {
                mask.resize(l.outputs);
                for (auto& m : mask) m = static_cast<double>(rng_() >> 11) * 0x1.0p-53 < keep ? 1.0 / keep : 0.0;
            } else {
                mask.clear();
            }
            auto& out = hidden ? t.inputs[li + 1] : t.output;
            out.resize(l.outputs);
            for (std::size_t o = 0; o < l.outputs; ++o)
                out[o] = mask.empty() ? post[o] : post[o] * mask[o];
        }
    }

    ParamTensors zero_gradients() const {
        ParamTensors g;
        g.reserve(layers_.size() * 2);
        for (const auto& l : layers_) {
            g.emplace_back(l.weights.size(), 0.0);
            g.emplace_back(l.bias.size(), 0.0);
        }
        return g;
    }

    /// Backpropagates `grad` (dLoss/d output, or dLoss/d final pre-activation) through
    /// the recorded pass. Parameter gradients are added to `grads` scaled by `scale`;
    /// the gradient with respect to the network input is written to `input_grad`
    /// when requested. Pass `grads == nullptr` to only propagate to the input.
    void backward(const ForwardTrace& t, std::span<const double> grad, ParamTensors* grads,
                  std::vector<double>* input_grad = nullptr, double scale = 1.0,
                  GradientAt at = GradientAt::output) const {
        const std::size_t L = layers_.size();
        if (t.layer_count != L || t.pre.size() != L || t.output.size() != output_size())
            throw UsageError("backward called without a matching forward trace");
        for (std::size_t li = 0; li < L; ++li)
            if (t.pre[li].size() != layers_[li].outputs || t.inputs[li].size() != layers_[li].inputs)
                throw UsageError("backward called without a matching forward trace");
        if (grad.size() != output_size()) throw UsageError("output gradient has wrong size");
        if (grads && grads->size() != 2 * L) throw UsageError("gradient tensors do not match network");

        auto& delta = t.delta;
        auto& prev = t.carry;
        delta.assign(grad.begin(), grad.end());
        for (std::size_t li = L; li-- > 0;) {
            const auto& l = layers_[li];
            // delta: dLoss/d(output of layer li, after dropout) -> dLoss/d pre-activation
            const bool at_pre = (li + 1 == L) && at == GradientAt::preactivation;
            if (!at_pre) {
                const auto& mask = t.dropout[li];
                for (std::size_t o = 0; o < l.outputs; ++o) {
                    double d = delta[o];
                    if (!mask.empty()) d *= mask[o];
                    delta[o] = d * activate_derivative(l.activation, t.pre[li][o], t.post[li][o]);
                }
            }
            const auto& in = t.inputs[li];
            if (grads) {
                auto& gw = (*grads)[2 * li];
                auto& gb = (*grads)[2 * li + 1];
                for (std::size_t o = 0; o < l.outputs; ++o) {
                    const double d = delta[o] * scale;
                    if (d == 0.0) continue;
                    double* row = gw.data() + o * l.inputs;
                    for (std::size_t i = 0; i < l.inputs; ++i) row[i] += d * in[i];
                    gb[o] += d;
                }
            }
            if (li > 0 || input_grad) {
                prev.assign(l.inputs, 0.0);
                for (std::size_t o = 0; o < l.outputs; ++o) {
                    const double d = delta[o];
                    if (d == 0.0) continue;
                    const double* w = l.weights.data() + o * l.inputs;
                    for (std::size_t i = 0; i < l.inputs; ++i) prev[i] += d * w[i];
                }
                delta.swap(prev);
            }
        }
        if (input_grad) *input_grad = delta;
    }

    /// Convenience: fresh parameter gradients for one sample.
    ParamTensors gradients(const ForwardTrace& t, std::span<const double> grad) const {
        auto g = zero_gradients();
        backward(t, grad, &g);
        return g;
    }

    /// Mutable views over every parameter tensor, in ParamTensors order.
    std::vector<std::span<double>> parameters() {
        std::vector<std::span<double>> p;
        for (auto& l : layers_) {
            p.emplace_back(l.weights);
            p.emplace_back(l.bias);
        }
        return p;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
        return n;
    }

    bool all_finite() const {
        for (const auto& l : layers_) {
            for (double w : l.weights)
                if (!std::isfinite(w)) return false;
            for (double b : l.bias)
                if (!std::isfinite(b)) return false;
        }
        return true;
    }

private:
    void check_input(std::span<const double> x) const {
        if (layers_.empty()) throw UsageError("network has no layers");
        if (x.size() != input_size())
            throw UsageError("input has " + std::to_string(x.size()) + " values, network expects " +
                             std::to_string(input_size()));
    }
    void check_dropout() const {
        if (!(dropout_rate_ >= 0.0 && dropout_rate_ < 1.0))
            throw UsageError("dropout rate must lie in [0, 1)");
    }

    std::vector<DenseLayer> layers_;
    double dropout_rate_ = 0.0;
    bool training_ = false;
    std::mt19937_64 rng_{0};
};

struct TrainConfig {
    std::size_t max_epochs = 1000;
    std::size_t batch_size = 8;
    std::size_t hidden_size = 16;
    double dropout_rate = 0.2;
    std::uint64_t seed = 0;

    void validate() const {
        if (max_epochs < 1) throw UsageError("max_epochs must be >= 1");
        if (batch_size < 1) throw UsageError("batch_size must be >= 1");
        if (hidden_size < 1) throw UsageError("hidden_size must be >= 1");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw UsageError("dropout_rate must lie in [0, 1)");
    }
};

struct AdamState {
    double learn_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    ParamTensors first_moment;
    ParamTensors second_moment;
};

/// One Adam step with bias correction. Accumulators are created on first use and
/// must mirror the parameter shapes afterwards. Nothing is modified when a
/// gradient is non-finite.
inline void adam_update(std::span<const std::span<double>> params, const ParamTensors& grads,
                        AdamState& s) {
    if (grads.size() != params.size()) throw UsageError("adam: gradient/parameter count mismatch");
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (grads[k].size() != params[k].size()) throw UsageError("adam: gradient shape mismatch");
        for (double g : grads[k])
            if (!std::isfinite(g)) throw DivergenceError("adam: non-finite gradient");
    }
    if (s.first_moment.empty()) {
        for (const auto& p : params) {
            s.first_moment.emplace_back(p.size(), 0.0);
            s.second_moment.emplace_back(p.size(), 0.0);
        }
    }
    if (s.first_moment.size() != params.size()) throw UsageError("adam: state shape mismatch");
    ++s.step;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& m = s.first_moment[k];
        auto& v = s.second_moment[k];
        if (m.size() != params[k].size()) throw UsageError("adam: state shape mismatch");
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double g = grads[k][i];
            m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
            v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g * g;
            params[k][i] -= s.learn_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.epsilon);
        }
    }
}

inline void adam_update(DenseNet& net, const ParamTensors& grads, AdamState& s) {
    auto p = net.parameters();
    adam_update(std::span<const std::span<double>>(p), grads, s);
}

// Losses used by the gradient checker. Each maps the network output to a scalar
// and its gradient.

struct SquaredErrorLoss {
    std::vector<double> target;
    double value(std::span<const double> out) const {
        double s = 0;
        for (std::size_t i = 0; i < out.size(); ++i) s += 0.5 * (out[i] - target[i]) * (out[i] - target[i]);
        return s;
    }
    std::vector<double> gradient(std::span<const double> out) const {
        std::vector<double> g(out.size());
        for (std::size_t i = 0; i < out.size(); ++i) g[i] = out[i] - target[i];
        return g;
    }
};

struct LinearLoss {
    std::vector<double> coefficients;
    double value(std::span<const double> out) const {
        double s = 0;
        for (std::size_t i = 0; i < out.size(); ++i) s += coefficients[i] * out[i];
        return s;
    }
    std::vector<double> gradient(std::span<const double>) const { return coefficients; }
};

/// Binary cross-entropy on a single probability output.
struct LogLoss {
    double label = 1.0;
    double value(std::span<const double> out) const {
        return -(label * std::log(out[0]) + (1.0 - label) * std::log(1.0 - out[0]));
    }
    std::vector<double> gradient(std::span<const double> out) const {
        return {-label / out[0] + (1.0 - label) / (1.0 - out[0])};
    }
};

/// |a - n| / max(|a|, |n|, 1e-8)
inline double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) /
           std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

/// Central finite differences of `f` with respect to every entry of `params`.
inline std::vector<std::vector<double>> central_differences(
    std::span<const std::span<double>> params, const std::function<double()>& f, double h = 1e-5) {
    std::vector<std::vector<double>> out;
    for (auto p : params) {
        std::vector<double> g(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double keep = p[i];
            p[i] = keep + h;
            const double up = f();
            p[i] = keep - h;
            const double down = f();
            p[i] = keep;
            g[i] = (up - down) / (2.0 * h);
        }
        out.push_back(std::move(g));
    }
    return out;
}

/// Largest relative error between analytic and central-difference gradients
/// over all parameters. The check runs on a copy with dropout disabled.
template <class Loss>
double grad_check(const DenseNet& original, std::span<const double> input, const Loss& loss,
                  double h = 1e-5) {
    DenseNet net = original;
    net.set_training(false);
    ForwardTrace t;
    net.forward(input, t);
    const auto analytic = net.gradients(t, loss.gradient(t.output));
    auto params = net.parameters();
    const auto numeric = central_differences(
        std::span<const std::span<double>>(params),
        [&] { return loss.value(net.predict(input)); }, h);
    double worst = 0.0;
    for (std::size_t k = 0; k < analytic.size(); ++k)
        for (std::size_t i = 0; i < analytic[k].size(); ++i)
            worst = std::max(worst, relative_error(analytic[k][i], numeric[k][i]));
    return worst;
}

}  // namespace ejcorr::nn
