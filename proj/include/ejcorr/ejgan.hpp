#pragma once

// Generator/discriminator pair that learns to predict the judgment variable z
// from the remaining features s. The generator's residual |G(s) - z| on a new
// point measures how far that point's judgment value lies from what the
// training data would suggest.

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ejcorr/errors.hpp"
#include "ejcorr/matrix.hpp"
#include "ejcorr/neural.hpp"
#include "ejcorr/scaling.hpp"
#include "ejcorr/textio.hpp"

namespace ejcorr {

struct GanConfig {
    nn::TrainConfig train;
    std::size_t generator_layers = 2;
    std::size_t discriminator_layers = 4;
    // Adam step size. 0.01 collapses the relu generator to a constant zero
    // output on most seeds; 0.001 trains reliably.
    double learn_rate = 0.001;
    /// Use -log D(s, G(s)) for the generator instead of log(1 - D(s, G(s))).
    bool non_saturating = false;

    void validate() const {
        train.validate();
        if (generator_layers < 1 || discriminator_layers < 1)
            throw UsageError("generator and discriminator need at least one layer");
        if (!(learn_rate > 0)) throw UsageError("learn_rate must be positive");
    }
};

struct GanTrainLog {
    std::vector<double> generator_loss;
    std::vector<double> discriminator_loss;
    std::size_t batches_per_epoch = 0;
};

class EjGan {
public:
    EjGan() = default;

    /// Assembles a model from explicit parts (deserialization and tests).
    EjGan(nn::DenseNet generator, nn::DenseNet discriminator, JudgmentScaler scaler,
          Standardizer features, GanConfig config)
        : generator_(std::move(generator)),
          discriminator_(std::move(discriminator)),
          scaler_(scaler),
          features_(std::move(features)),
          config_(config),
          trained_(true) {
        generator_.set_training(false);
        discriminator_.set_training(false);
        if (generator_.output_size() != 1) throw UsageError("generator must have one output");
        if (discriminator_.input_size() != generator_.input_size() + 1 || discriminator_.output_size() != 1)
            throw UsageError("discriminator must take the generator input plus one judgment value");
        if (features_.mean.size() != generator_.input_size())
            throw UsageError("feature standardizer width does not match generator input");
    }

    /// Model for data without any non-judgment feature: it always predicts the
    /// training mean of the normalized judgment variable.
    static EjGan constant(JudgmentScaler scaler, double normalized_mean, GanConfig config) {
        EjGan g;
        g.scaler_ = scaler;
        g.config_ = config;
        g.constant_ = normalized_mean;
        g.trained_ = true;
        return g;
    }

    struct TrainResult;
    static TrainResult train(const Matrix& s_train, std::span<const double> z_train, const GanConfig& config);

    bool trained() const { return trained_; }
    bool is_constant() const { return constant_.has_value(); }
    std::size_t feature_count() const { return constant_ ? features_.mean.size() : generator_.input_size(); }
    const JudgmentScaler& scaler() const { return scaler_; }
    const GanConfig& config() const { return config_; }
    const nn::DenseNet& generator() const { return generator_; }
    const nn::DenseNet& discriminator() const { return discriminator_; }

    /// G(s) in normalized judgment space (generator in inference mode).
    double estimate_normalized(std::span<const double> s) const {
        if (!trained_) throw UsageError("EJ-GAN model has not been trained");
        if (constant_) {
            if (s.size() != features_.mean.size()) throw UsageError("feature vector has wrong length");
            return *constant_;
        }
        if (s.size() != generator_.input_size())
            throw UsageError("feature vector has " + std::to_string(s.size()) + " values, generator expects " +
                             std::to_string(generator_.input_size()));
        return generator_.predict(features_.apply(s))[0];
    }

    /// z_expected in the original units of the judgment variable.
    double estimate(std::span<const double> s) const { return scaler_.denormalize(estimate_normalized(s)); }

    /// k = |G(s) - z_norm| for a full feature vector whose judgment value sits at `judgment_index`.
    double distance_k(std::span<const double> x, std::size_t judgment_index) const {
        if (judgment_index >= x.size()) throw UsageError("judgment index out of range");
        std::vector<double> s;
        s.reserve(x.size() - 1);
        for (std::size_t j = 0; j < x.size(); ++j)
            if (j != judgment_index) s.push_back(x[j]);
        return std::abs(estimate_normalized(s) - scaler_.normalize(x[judgment_index]));
    }

    /// D(s, z) for a normalized judgment value.
    double discriminate(std::span<const double> s, double z_norm) const {
        if (!trained_ || constant_) throw UsageError("EJ-GAN model has no discriminator");
        auto in = features_.apply(s);
        in.push_back(z_norm);
        return discriminator_.predict(in)[0];
    }

    void save(std::ostream& os) const;
    static EjGan load(std::istream& is);

private:
    nn::DenseNet generator_;
    nn::DenseNet discriminator_;
    JudgmentScaler scaler_;
    Standardizer features_;
    GanConfig config_;
    std::optional<double> constant_;
    bool trained_ = false;
};

struct EjGan::TrainResult {
    EjGan model;
    GanTrainLog log;
};

namespace detail {

inline std::vector<nn::LayerSpec> gan_layers(std::size_t depth, std::size_t hidden, nn::Activation last) {
    std::vector<nn::LayerSpec> specs;
    for (std::size_t i = 0; i + 1 < depth; ++i) specs.push_back({hidden, nn::Activation::relu});
    specs.push_back({1, last});
    return specs;
}

inline void adam_step(nn::DenseNet& net, const nn::ParamTensors& grads, nn::AdamState& opt, std::size_t epoch) {
    try {
        nn::adam_update(net, grads, opt);
    } catch (const DivergenceError&) {
        throw DivergenceError("EJ-GAN training diverged at epoch " + std::to_string(epoch) + ": non-finite gradient");
    }
}

inline void zero(nn::ParamTensors& g) {
    for (auto& t : g) std::fill(t.begin(), t.end(), 0.0);
}

}  // namespace detail

/// Alternating mini-batch training: per batch the generator descends
/// mean log(1 - D(s, G(s))), then the discriminator descends
/// mean [-log D(s, z) - log(1 - D(s, G(s)))]. Runs exactly max_epochs epochs.
inline EjGan::TrainResult EjGan::train(const Matrix& s_train, std::span<const double> z_train,
                                       const GanConfig& config) {
    config.validate();
    const std::size_t n = s_train.rows();
    if (z_train.size() != n) throw DataError("S_train and Z_train have different row counts");
    if (n < config.train.batch_size)
        throw DataError("EJ-GAN needs at least batch_size (" + std::to_string(config.train.batch_size) +
                        ") training rows, got " + std::to_string(n));

    for (double v : s_train.data())
        if (!std::isfinite(v)) throw DataError("non-finite value in EJ-GAN training features");
    const auto scaler = JudgmentScaler::fit(z_train);
    std::vector<double> zn(n);
    for (std::size_t i = 0; i < n; ++i) zn[i] = scaler.normalize(z_train[i]);

    if (s_train.cols() == 0) {
        const double mean = std::accumulate(zn.begin(), zn.end(), 0.0) / static_cast<double>(n);
        return {EjGan::constant(scaler, mean, config), {}};
    }

    const auto features = Standardizer::fit(s_train);
    const Matrix s = features.apply(s_train);
    const std::size_t width = s.cols();
    const auto& tc = config.train;

    const auto g_specs = detail::gan_layers(config.generator_layers, tc.hidden_size, nn::Activation::relu);
    const auto d_specs = detail::gan_layers(config.discriminator_layers, tc.hidden_size, nn::Activation::sigmoid);
    nn::DenseNet gen(width, g_specs, tc.dropout_rate, mix_seed(tc.seed, 1));
    nn::DenseNet disc(width + 1, d_specs, tc.dropout_rate, mix_seed(tc.seed, 2));
    gen.set_training(true);
    disc.set_training(true);

    nn::AdamState g_opt, d_opt;
    g_opt.learn_rate = d_opt.learn_rate = config.learn_rate;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffler(mix_seed(tc.seed, 3));

    auto g_grad = gen.zero_gradients();
    auto d_grad = disc.zero_gradients();
    nn::ForwardTrace g_trace, d_trace;
    std::vector<double> d_input(width + 1), input_grad;
    std::vector<double> out_grad(1);

    GanTrainLog log;
    log.generator_loss.reserve(tc.max_epochs);
    log.discriminator_loss.reserve(tc.max_epochs);

    auto disc_logit = [&](std::span<const double> row, double z) {
        std::copy(row.begin(), row.end(), d_input.begin());
        d_input[width] = z;
        disc.forward(d_input, d_trace);
        return d_trace.pre.back()[0];
    };

    for (std::size_t epoch = 0; epoch < tc.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffler);
        double g_total = 0.0, d_total = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n; start += tc.batch_size) {
            const std::size_t stop = std::min(n, start + tc.batch_size);
            const double inv_m = 1.0 / static_cast<double>(stop - start);

            // Generator step; the discriminator only routes gradients here.
            detail::zero(g_grad);
            double g_loss = 0.0;
            for (std::size_t b = start; b < stop; ++b) {
                const auto row = s.row(order[b]);
                gen.forward(row, g_trace);
                const double a = disc_logit(row, g_trace.output[0]);
                const double d = nn::sigmoid(a);
                if (config.non_saturating) {
                    g_loss += nn::softplus(-a);
                    out_grad[0] = d - 1.0;
                } else {
                    g_loss += -nn::softplus(a);  // log(1 - sigmoid(a))
                    out_grad[0] = -d;
                }
                disc.backward(d_trace, out_grad, nullptr, &input_grad, 1.0, nn::GradientAt::preactivation);
                out_grad[0] = input_grad[width];
                gen.backward(g_trace, out_grad, &g_grad, nullptr, inv_m);
            }
            detail::adam_step(gen, g_grad, g_opt, epoch);

            // Discriminator step on the same mini-batch with the updated generator.
            detail::zero(d_grad);
            double d_loss = 0.0;
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t r = order[b];
                const auto row = s.row(r);
                double a = disc_logit(row, zn[r]);
                d_loss += nn::softplus(-a);  // -log D(s, z)
                out_grad[0] = nn::sigmoid(a) - 1.0;
                disc.backward(d_trace, out_grad, &d_grad, nullptr, inv_m, nn::GradientAt::preactivation);

                gen.forward(row, g_trace);
                a = disc_logit(row, g_trace.output[0]);
                d_loss += nn::softplus(a);  // -log(1 - D(s, G(s)))
                out_grad[0] = nn::sigmoid(a);
                disc.backward(d_trace, out_grad, &d_grad, nullptr, inv_m, nn::GradientAt::preactivation);
            }
            detail::adam_step(disc, d_grad, d_opt, epoch);

            g_total += g_loss * inv_m;
            d_total += d_loss * inv_m;
            ++batches;
        }
        const double gl = g_total / static_cast<double>(batches);
        const double dl = d_total / static_cast<double>(batches);
        if (!std::isfinite(gl) || !std::isfinite(dl) || !gen.all_finite() || !disc.all_finite())
            throw DivergenceError("EJ-GAN training diverged at epoch " + std::to_string(epoch));
        log.batches_per_epoch = batches;
        log.generator_loss.push_back(gl);
        log.discriminator_loss.push_back(dl);
    }

    return {EjGan(std::move(gen), std::move(disc), scaler, features, config), std::move(log)};
}

namespace detail {

inline void save_net(std::ostream& os, const char* name, const nn::DenseNet& net) {
    os << "net " << name << ' ' << net.layer_count() << ' ' << std::setprecision(17) << net.dropout_rate() << '\n';
    for (const auto& l : net.layers()) {
        os << "layer " << l.inputs << ' ' << l.outputs << ' ' << nn::to_string(l.activation) << '\n';
        textio::write_values(os, l.weights);
        textio::write_values(os, l.bias);
    }
}

inline nn::DenseNet load_net(std::istream& is, const char* name) {
    textio::expect(is, "net");
    textio::expect(is, name);
    const auto count = textio::read<std::size_t>(is, "layer count");
    const auto dropout = textio::read<double>(is, "dropout rate");
    std::vector<nn::DenseLayer> layers(count);
    for (auto& l : layers) {
        textio::expect(is, "layer");
        l.inputs = textio::read<std::size_t>(is, "layer inputs");
        l.outputs = textio::read<std::size_t>(is, "layer outputs");
        l.activation = nn::activation_from_string(textio::read<std::string>(is, "activation"));
        l.weights = textio::read_values(is, l.inputs * l.outputs, "weights");
        l.bias = textio::read_values(is, l.outputs, "bias");
    }
    return nn::DenseNet::from_layers(std::move(layers), dropout);
}

}  // namespace detail

inline void EjGan::save(std::ostream& os) const {
    if (!trained_) throw UsageError("cannot save an untrained EJ-GAN model");
    const auto& t = config_.train;
    os << "ejcorr-ejgan 1\n" << std::setprecision(17);
    os << "config " << t.max_epochs << ' ' << t.batch_size << ' ' << t.hidden_size << ' ' << t.dropout_rate << ' '
       << t.seed << ' ' << config_.generator_layers << ' ' << config_.discriminator_layers << ' '
       << config_.learn_rate << ' ' << (config_.non_saturating ? 1 : 0) << '\n';
    os << "scaler " << scaler_.train_min << ' ' << scaler_.train_max << '\n';
    os << "features " << features_.mean.size() << '\n';
    textio::write_values(os, features_.mean);
    textio::write_values(os, features_.scale);
    if (constant_) {
        os << "constant " << *constant_ << '\n';
        return;
    }
    os << "networks\n";
    detail::save_net(os, "generator", generator_);
    detail::save_net(os, "discriminator", discriminator_);
}

inline EjGan EjGan::load(std::istream& is) {
    textio::expect(is, "ejcorr-ejgan");
    if (textio::read<int>(is, "version") != 1) throw DataError("unsupported EJ-GAN model version");
    GanConfig c;
    textio::expect(is, "config");
    c.train.max_epochs = textio::read<std::size_t>(is, "max_epochs");
    c.train.batch_size = textio::read<std::size_t>(is, "batch_size");
    c.train.hidden_size = textio::read<std::size_t>(is, "hidden_size");
    c.train.dropout_rate = textio::read<double>(is, "dropout_rate");
    c.train.seed = textio::read<std::uint64_t>(is, "seed");
    c.generator_layers = textio::read<std::size_t>(is, "generator_layers");
    c.discriminator_layers = textio::read<std::size_t>(is, "discriminator_layers");
    c.learn_rate = textio::read<double>(is, "learn_rate");
    c.non_saturating = textio::read<int>(is, "non_saturating") != 0;
    textio::expect(is, "scaler");
    JudgmentScaler scaler;
    scaler.train_min = textio::read<double>(is, "scaler min");
    scaler.train_max = textio::read<double>(is, "scaler max");
    textio::expect(is, "features");
    const auto width = textio::read<std::size_t>(is, "feature count");
    Standardizer features;
    features.mean = textio::read_values(is, width, "feature means");
    features.scale = textio::read_values(is, width, "feature scales");
    const auto tag = textio::read<std::string>(is, "section");
    if (tag == "constant") {
        EjGan g = constant(scaler, textio::read<double>(is, "constant"), c);
        g.features_ = std::move(features);
        return g;
    }
    if (tag != "networks") throw DataError("model file: unexpected section '" + tag + "'");
    auto gen = detail::load_net(is, "generator");
    auto disc = detail::load_net(is, "discriminator");
    return EjGan(std::move(gen), std::move(disc), scaler, std::move(features), c);
}

}  // namespace ejcorr
