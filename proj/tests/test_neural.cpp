#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ejcorr/neural.hpp"
#include "support.hpp"

using namespace ejcorr;
using namespace ejcorr::nn;

namespace {

DenseNet single_layer(std::vector<double> w, std::vector<double> b, Activation act, std::size_t in) {
    DenseLayer l;
    l.inputs = in;
    l.outputs = b.size();
    l.weights = std::move(w);
    l.bias = std::move(b);
    l.activation = act;
    return DenseNet::from_layers({l}, 0.0);
}

}  // namespace

TEST(Forward, IdentityLayerPassesInputThrough) {
    auto net = single_layer({1, 0, 0, 1}, {0, 0}, Activation::identity, 2);
    const std::vector<double> x{1.5, -2};
    EXPECT_EQ(net.forward(x), (std::vector<double>{1.5, -2}));
}

TEST(Forward, ReluClampsNegatives) {
    auto net = single_layer({1, 0, 0, 1}, {0, 0}, Activation::relu, 2);
    const std::vector<double> x{1.5, -2};
    EXPECT_EQ(net.forward(x), (std::vector<double>{1.5, 0}));
}

TEST(Forward, ZeroWeightsSigmoidOutput) {
    DenseLayer a{2, 3, std::vector<double>(6, 0.0), std::vector<double>(3, 0.0), Activation::relu};
    DenseLayer b{3, 1, std::vector<double>(3, 0.0), {0.3}, Activation::sigmoid};
    auto net = DenseNet::from_layers({a, b}, 0.0);
    const std::vector<double> x{0.7, -1.1};
    EXPECT_NEAR(net.forward(x)[0], 0.574442516811659, 1e-12);
}

TEST(Forward, InputShapeMismatchThrows) {
    auto net = single_layer({1, 0, 0, 1}, {0, 0}, Activation::identity, 2);
    const std::vector<double> x{1.0};
    EXPECT_THROW(net.forward(x), UsageError);
    EXPECT_THROW(net.predict(x), UsageError);
}

TEST(Forward, LayerShapesMustAgree) {
    DenseLayer a{2, 3, std::vector<double>(6, 0.0), std::vector<double>(3, 0.0), Activation::relu};
    DenseLayer b{2, 1, std::vector<double>(2, 0.0), {0.0}, Activation::sigmoid};
    EXPECT_THROW(DenseNet::from_layers({a, b}, 0.0), UsageError);
    EXPECT_THROW(DenseNet::from_layers({a}, 1.0), UsageError);
}

TEST(Backward, ZeroAtOptimum) {
    auto net = single_layer({1}, {0}, Activation::identity, 1);
    ForwardTrace t;
    const std::vector<double> x{2};
    net.forward(x, t);
    const SquaredErrorLoss loss{{2.0}};
    const auto g = net.gradients(t, loss.gradient(t.output));
    EXPECT_EQ(g[0][0], 0.0);
    EXPECT_EQ(g[1][0], 0.0);
}

TEST(Backward, HandChainRule) {
    auto net = single_layer({1}, {0}, Activation::identity, 1);
    ForwardTrace t;
    const std::vector<double> x{2};
    net.forward(x, t);
    const SquaredErrorLoss loss{{1.0}};
    const auto g = net.gradients(t, loss.gradient(t.output));
    EXPECT_DOUBLE_EQ(g[0][0], 2.0);
    EXPECT_DOUBLE_EQ(g[1][0], 1.0);
    EXPECT_LT(grad_check(net, x, loss), 1e-8);
}

TEST(Backward, WithoutTraceThrows) {
    auto net = single_layer({1}, {0}, Activation::identity, 1);
    ForwardTrace empty;
    const std::vector<double> g{1.0};
    EXPECT_THROW(net.gradients(empty, g), UsageError);
}

TEST(Backward, RandomReluNetMatchesFiniteDifferences) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int rep = 0; rep < 20; ++rep) {
        const std::vector<LayerSpec> specs{{5, Activation::relu}, {1, Activation::identity}};
        DenseNet net(3, specs, 0.0, rng());
        std::vector<double> x(3);
        do {
            for (auto& v : x) v = u(rng);
        } while (!support::away_from_kinks(net, x, 1e-3));
        EXPECT_LT(grad_check(net, x, SquaredErrorLoss{{0.25}}), 1e-4);
    }
}

TEST(Backward, GradientsAreExactForTheMaskedForward) {
    const std::vector<LayerSpec> specs{{6, Activation::sigmoid}, {4, Activation::identity}, {1, Activation::sigmoid}};
    DenseNet net(3, specs, 0.4, 11);
    net.set_training(true);
    const std::vector<double> x{0.3, -0.8, 1.2};
    ForwardTrace t;
    net.forward(x, t);
    const LogLoss loss{1.0};
    const auto analytic = net.gradients(t, loss.gradient(t.output));

    // replay the same masks by hand
    auto replay = [&] {
        std::vector<double> cur = x;
        for (std::size_t li = 0; li < net.layer_count(); ++li) {
            const auto& l = net.layers()[li];
            std::vector<double> next(l.outputs);
            for (std::size_t o = 0; o < l.outputs; ++o) {
                double a = l.bias[o];
                for (std::size_t i = 0; i < l.inputs; ++i) a += l.weights[o * l.inputs + i] * cur[i];
                next[o] = activate(l.activation, a);
                if (!t.dropout[li].empty()) next[o] *= t.dropout[li][o];
            }
            cur = next;
        }
        return loss.value(cur);
    };
    auto params = net.parameters();
    const auto numeric = central_differences(std::span<const std::span<double>>(params), replay);
    double worst = 0;
    for (std::size_t k = 0; k < analytic.size(); ++k)
        for (std::size_t i = 0; i < analytic[k].size(); ++i)
            worst = std::max(worst, relative_error(analytic[k][i], numeric[k][i]));
    EXPECT_LT(worst, 1e-4);
}

TEST(Backward, InputGradientMatchesFiniteDifferences) {
    const std::vector<LayerSpec> specs{{4, Activation::sigmoid}, {1, Activation::identity}};
    DenseNet net(2, specs, 0.0, 5);
    std::vector<double> x{0.4, -0.3};
    ForwardTrace t;
    net.forward(x, t);
    std::vector<double> ig;
    const std::vector<double> one{1.0};
    net.backward(t, one, nullptr, &ig);
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto xp = x, xm = x;
        xp[i] += 1e-6;
        xm[i] -= 1e-6;
        const double fd = (net.predict(xp)[0] - net.predict(xm)[0]) / 2e-6;
        EXPECT_LT(relative_error(ig[i], fd), 1e-6);
    }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
    std::vector<double> p{0.5, -1.5};
    const std::vector<std::span<double>> params{std::span<double>(p)};
    AdamState s;
    adam_update(std::span<const std::span<double>>(params), ParamTensors{{0.0, 0.0}}, s);
    EXPECT_EQ(p, (std::vector<double>{0.5, -1.5}));
}

TEST(Adam, FirstStepMovesByLearnRate) {
    std::vector<double> p{1.0, 1.0, 1.0};
    const std::vector<std::span<double>> params{std::span<double>(p)};
    AdamState s;
    s.learn_rate = 0.01;
    adam_update(std::span<const std::span<double>>(params), ParamTensors{{3.0, -0.2, 1e-3}}, s);
    EXPECT_NEAR(p[0], 1.0 - 0.01, 1e-8);
    EXPECT_NEAR(p[1], 1.0 + 0.01, 1e-8);
    EXPECT_NEAR(p[2], 1.0 - 0.01, 1e-7);
    EXPECT_EQ(s.step, 1u);
}

TEST(Adam, TwoStepsMatchScriptedOracle) {
    const double g = 0.7, lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    // scripted oracle of the Adam recursion
    double theta = 2.0, m = 0, v = 0;
    for (int t = 1; t <= 2; ++t) {
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
        theta -= lr * mh / (std::sqrt(vh) + eps);
    }
    std::vector<double> p{2.0};
    const std::vector<std::span<double>> params{std::span<double>(p)};
    AdamState s;
    s.learn_rate = lr;
    for (int t = 0; t < 2; ++t) adam_update(std::span<const std::span<double>>(params), ParamTensors{{g}}, s);
    EXPECT_NEAR(p[0], theta, 1e-14);
    EXPECT_NEAR(p[0], 2.0 - 2 * lr, 1e-8);
}

TEST(Adam, NonFiniteGradientIsDivergence) {
    std::vector<double> p{1.0};
    const std::vector<std::span<double>> params{std::span<double>(p)};
    AdamState s;
    EXPECT_THROW(adam_update(std::span<const std::span<double>>(params), ParamTensors{{NAN}}, s), DivergenceError);
    EXPECT_EQ(p[0], 1.0);
}

TEST(GradCheck, LinearNetLinearLoss) {
    DenseNet net(3, std::vector<LayerSpec>{{2, Activation::identity}, {1, Activation::identity}}, 0.0, 3);
    const std::vector<double> x{0.2, -0.4, 1.0};
    EXPECT_LT(grad_check(net, x, LinearLoss{{1.7}}), 1e-8);
}

TEST(GradCheck, SigmoidOutputWithLogLoss) {
    DenseNet net(4, std::vector<LayerSpec>{{8, Activation::relu}, {1, Activation::sigmoid}}, 0.2, 9);
    std::vector<double> x{0.5, -0.1, 0.9, -1.2};
    ASSERT_TRUE(support::away_from_kinks(net, x, 1e-3));
    EXPECT_LT(grad_check(net, x, LogLoss{0.0}), 1e-4);
    EXPECT_LT(grad_check(net, x, LogLoss{1.0}), 1e-4);
}

TEST(GradCheck, RandomConfigurations) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto c = support::random_gradient_case(1000 + seed);
        EXPECT_LT(support::check(c), 1e-4) << "seed " << seed;
    }
}

TEST(Dropout, ExpectationMatchesUnmaskedActivation) {
    DenseNet net(2, std::vector<LayerSpec>{{3, Activation::sigmoid}, {1, Activation::identity}}, 0.2, 21);
    const std::vector<double> x{0.6, -0.4};
    net.set_training(false);
    ForwardTrace clean;
    net.forward(x, clean);
    net.set_training(true);
    std::vector<double> sum(3, 0.0);
    const int draws = 100000;
    ForwardTrace t;
    for (int i = 0; i < draws; ++i) {
        net.forward(x, t);
        for (std::size_t j = 0; j < 3; ++j) sum[j] += t.inputs[1][j];
    }
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(sum[j] / draws, clean.inputs[1][j], 0.01 * clean.inputs[1][j]);
}

TEST(Dropout, InferenceModeDoesNotMask) {
    DenseNet net(2, std::vector<LayerSpec>{{3, Activation::sigmoid}, {1, Activation::identity}}, 0.5, 21);
    const std::vector<double> x{0.6, -0.4};
    net.set_training(false);
    const auto a = net.forward(x);
    const auto b = net.forward(x);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, net.predict(x));
}

TEST(Determinism, SameSeedSameParameters) {
    const std::vector<LayerSpec> specs{{16, Activation::relu}, {1, Activation::relu}};
    DenseNet a(4, specs, 0.2, 99), b(4, specs, 0.2, 99);
    EXPECT_EQ(a.layers()[0].weights, b.layers()[0].weights);
    a.set_training(true);
    b.set_training(true);
    const std::vector<double> x{1, 2, 3, 4};
    ForwardTrace ta, tb;
    AdamState sa, sb;
    for (int i = 0; i < 20; ++i) {
        a.forward(x, ta);
        b.forward(x, tb);
        const std::vector<double> one{1.0};
        adam_update(a, a.gradients(ta, one), sa);
        adam_update(b, b.gradients(tb, one), sb);
    }
    for (std::size_t l = 0; l < 2; ++l) {
        EXPECT_EQ(a.layers()[l].weights, b.layers()[l].weights);
        EXPECT_EQ(a.layers()[l].bias, b.layers()[l].bias);
    }
    EXPECT_TRUE(a.all_finite());
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.max_epochs, 1000u);
    EXPECT_EQ(c.batch_size, 8u);
    EXPECT_EQ(c.hidden_size, 16u);
    EXPECT_DOUBLE_EQ(c.dropout_rate, 0.2);
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), UsageError);
}
