#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ejcorr/learners.hpp"

using namespace ejcorr;

namespace {

double train_accuracy(const Learner& l, const Matrix& x, std::span<const double> y) {
    const auto p = l.predict_proba(x);
    double hit = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) hit += ((p[i] >= 0.5) == (y[i] == 1.0)) ? 1.0 : 0.0;
    return hit / static_cast<double>(y.size());
}

struct Binary {
    Matrix x;
    std::vector<double> y;
};

// Two informative features plus one noise feature; labels from a noisy linear rule.
Binary noisy_linear(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Binary b{Matrix(n, 3), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 3; ++j) b.x(i, j) = nd(rng);
        b.y[i] = 1.5 * b.x(i, 0) - b.x(i, 1) + 0.5 * nd(rng) > 0 ? 1.0 : 0.0;
    }
    return b;
}

std::vector<double> parameters(const Learner& l) {
    auto p = l.logistic().weights();
    p.push_back(l.logistic().intercept());
    return p;
}

}  // namespace

TEST(Logistic, PredictExamples) {
    EXPECT_DOUBLE_EQ(LogisticModel({0.0, 0.0}, 0.0).predict_proba(std::vector<double>{3.0, -2.0}), 0.5);
    EXPECT_NEAR(LogisticModel({1.0}, 0.0).predict_proba(std::vector<double>{0.3}), 0.574442516811659, 1e-15);
    EXPECT_THROW(LogisticModel({1.0}, 0.0).predict_proba(std::vector<double>{0.3, 1.0}), UsageError);
}

TEST(Boosting, EmptyEnsembleIsHalf) {
    const BoostingModel m(0.0, 0.1, {}, 2);
    EXPECT_DOUBLE_EQ(m.predict_proba(std::vector<double>{1.0, 2.0}), 0.5);
}

TEST(Logistic, SeparableOneDimensional) {
    Matrix x(20, 1);
    std::vector<double> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
        x(i, 0) = static_cast<double>(i) - 9.5;
        y[i] = i >= 10 ? 1.0 : 0.0;
    }
    const auto l = fit_sl(x, y, LearnerKind::logistic);
    EXPECT_FALSE(l.degenerate());
    EXPECT_DOUBLE_EQ(train_accuracy(l, x, y), 1.0);
}

TEST(Boosting, ConstantFeaturesGiveBaseRate) {
    Matrix x(100, 2, 1.0);
    std::vector<double> y(100, 0.0);
    for (std::size_t i = 0; i < 70; ++i) y[i] = 1.0;
    const auto l = fit_sl(x, y, LearnerKind::gradient_boosting);
    for (double p : l.predict_proba(x)) EXPECT_NEAR(p, 0.7, 0.02);
    EXPECT_NEAR(l.boosting().init_logit(), std::log(0.7 / 0.3), 1e-12);
}

TEST(Boosting, SolvesXor) {
    Matrix x(40, 2);
    std::vector<double> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        const int a = static_cast<int>(i % 2), b = static_cast<int>((i / 2) % 2);
        x(i, 0) = a;
        x(i, 1) = b;
        y[i] = a != b ? 1.0 : 0.0;
    }
    // Oracle: split on feature 0 then feature 1 leaves four pure cells.
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            double lo = 1.0, hi = 0.0;
            for (std::size_t i = 0; i < 40; ++i)
                if (x(i, 0) == a && x(i, 1) == b) {
                    lo = std::min(lo, y[i]);
                    hi = std::max(hi, y[i]);
                }
            EXPECT_EQ(lo, hi);
        }
    const auto l = fit_sl(x, y, LearnerKind::gradient_boosting);
    EXPECT_DOUBLE_EQ(train_accuracy(l, x, y), 1.0);
}

TEST(Boosting, StagedLossNonIncreasing) {
    const auto d = noisy_linear(300, 5);
    const auto l = fit_sl(d.x, d.y, LearnerKind::gradient_boosting);
    const auto loss = l.boosting().staged_loss(d.x, d.y);
    ASSERT_EQ(loss.size(), 101u);
    for (std::size_t t = 1; t < loss.size(); ++t) EXPECT_LE(loss[t], loss[t - 1] + 1e-12) << t;
    EXPECT_LT(loss.back(), loss.front());
}

TEST(Boosting, TreesRespectDepthAndFeatures) {
    const auto d = noisy_linear(200, 6);
    const auto l = fit_sl(d.x, d.y, LearnerKind::gradient_boosting);
    for (const auto& t : l.boosting().trees()) EXPECT_NO_THROW(t.validate(3));
    for (double p : l.predict_proba(d.x)) {
        EXPECT_GE(p, kProbabilityClip);
        EXPECT_LE(p, 1.0 - kProbabilityClip);
    }
}

TEST(Learner, SingleClassIsDegenerate) {
    Matrix x(10, 2, 0.5);
    const std::vector<double> y(10, 1.0);
    for (auto kind : {LearnerKind::logistic, LearnerKind::gradient_boosting}) {
        const auto l = fit_sl(x, y, kind);
        EXPECT_TRUE(l.degenerate());
        EXPECT_FALSE(l.warning().empty());
        EXPECT_DOUBLE_EQ(l.predict_proba(x.row(0)), 1.0 - kProbabilityClip);
    }
    const auto er = fit_er(x, std::vector<double>(10, 0.0), std::vector<double>(10, 0.5));
    EXPECT_TRUE(er.degenerate());
    EXPECT_DOUBLE_EQ(er.predict_proba(x.row(0)), kProbabilityClip);
}

TEST(Learner, BadInputs) {
    Matrix x(4, 1);
    EXPECT_THROW(fit_sl(x, std::vector<double>{0, 1, 2, 0}, LearnerKind::logistic), DataError);
    EXPECT_THROW(fit_sl(x, std::vector<double>{0, 1, 0}, LearnerKind::logistic), DataError);
    EXPECT_THROW(fit_sl(Matrix(1, 1), std::vector<double>{1}, LearnerKind::logistic), DataError);
    EXPECT_THROW(fit_ws(x, std::vector<double>{0, 1.5, 0, 0}), DataError);
    EXPECT_THROW(Learner().predict_proba(std::vector<double>{1.0}), UsageError);
    BaselineConfig c;
    c.er_temperature = 0.0;
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.l2_lambda = -1.0;
    EXPECT_THROW(c.validate(), UsageError);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
    const auto d = noisy_linear(50, 7);
    const auto xs = Standardizer::fit(d.x).apply(d.x);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<double> g(50);
    for (auto& v : g) v = u(rng);
    BaselineConfig cfg;
    cfg.er_lambda = 0.7;
    cfg.er_temperature = 1.8;
    for (auto obj : {LogisticObjective::cross_entropy, LogisticObjective::absolute_deviation,
                     LogisticObjective::expectation_regularized}) {
        const LogisticProblem prob{xs, d.y, g, obj, cfg};
        std::vector<double> w{0.3, -0.7, 0.2}, b{0.1};
        std::vector<double> gw(3, 0.0);
        double gb = 0.0;
        prob.evaluate(w, b[0], &gw, &gb);
        const std::vector<std::span<double>> params{std::span<double>(w), std::span<double>(b)};
        const auto fd = nn::central_differences(std::span<const std::span<double>>(params),
                                                [&] { return prob.evaluate(w, b[0], nullptr, nullptr); });
        for (std::size_t j = 0; j < 3; ++j) EXPECT_LT(nn::relative_error(gw[j], fd[0][j]), 1e-5);
        EXPECT_LT(nn::relative_error(gb, fd[1][0]), 1e-5);
    }
}

TEST(Ws, ConstantHalfTarget) {
    const auto d = noisy_linear(200, 9);
    const auto l = fit_ws(d.x, std::vector<double>(200, 0.5));
    for (double p : l.predict_proba(d.x)) EXPECT_NEAR(p, 0.5, 0.02);
}

TEST(Ws, TracksIdentityJudgment) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix x(300, 2);
    std::vector<double> g(300);
    for (std::size_t i = 0; i < 300; ++i) {
        x(i, 0) = u(rng);
        x(i, 1) = u(rng);
        g[i] = x(i, 0);
    }
    // Oracle: best sigmoid(a (z - 0.5)) under absolute deviation, by grid search.
    double oracle = 1.0;
    for (double a = 0.5; a <= 20.0; a += 0.05) {
        double e = 0.0;
        for (std::size_t i = 0; i < 300; ++i) e += std::abs(nn::sigmoid(a * (g[i] - 0.5)) - g[i]);
        oracle = std::min(oracle, e / 300.0);
    }
    EXPECT_LT(oracle, 0.1);
    const auto l = fit_ws(x, g);
    const auto p = l.predict_proba(x);
    double mad = 0.0;
    for (std::size_t i = 0; i < 300; ++i) mad += std::abs(p[i] - g[i]) / 300.0;
    EXPECT_LT(mad, 0.1);
}

TEST(Er, ZeroLambdaEqualsSl) {
    const auto d = noisy_linear(150, 11);
    BaselineConfig c;
    c.er_lambda = 0.0;
    const auto sl = parameters(fit_sl(d.x, d.y, LearnerKind::logistic, c));
    const auto er = parameters(fit_er(d.x, d.y, std::vector<double>(150, 0.3), c));
    double dist = 0.0;
    for (std::size_t j = 0; j < sl.size(); ++j) dist += (sl[j] - er[j]) * (sl[j] - er[j]);
    EXPECT_LT(std::sqrt(dist), 1e-9);
}

TEST(Er, HugeLambdaFollowsJudgment) {
    const auto d = noisy_linear(150, 12);
    double mean = 0.0;
    for (double v : d.y) mean += v / 150.0;
    BaselineConfig c;
    c.er_lambda = 1e6;
    const auto l = fit_er(d.x, d.y, std::vector<double>(150, mean), c);
    for (double p : l.predict_proba(d.x)) EXPECT_NEAR(p, mean, 0.05);
}

TEST(Er, AlignedJudgmentKeepsDirection) {
    const auto d = noisy_linear(200, 13);
    BaselineConfig c0, c1;
    c0.er_lambda = 0.0;
    c1.er_lambda = 1.0;
    const auto a = fit_er(d.x, d.y, d.y, c0).logistic().weights();
    const auto b = fit_er(d.x, d.y, d.y, c1).logistic().weights();
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        dot += a[j] * b[j];
        na += a[j] * a[j];
        nb += b[j] * b[j];
    }
    EXPECT_GT(dot / std::sqrt(na * nb), 0.99);
}

TEST(Learner, Deterministic) {
    const auto d = noisy_linear(100, 14);
    for (auto kind : {LearnerKind::logistic, LearnerKind::gradient_boosting}) {
        std::ostringstream a, b;
        fit_sl(d.x, d.y, kind).save(a);
        fit_sl(d.x, d.y, kind).save(b);
        EXPECT_EQ(a.str(), b.str());
    }
}

TEST(Learner, SaveLoadRoundTrip) {
    const auto d = noisy_linear(100, 15);
    std::vector<Learner> models{fit_sl(d.x, d.y, LearnerKind::logistic),
                                fit_sl(d.x, d.y, LearnerKind::gradient_boosting),
                                Learner::constant(LearnerKind::logistic, 3, 0.25, "w")};
    for (const auto& m : models) {
        std::ostringstream os;
        m.save(os);
        std::istringstream is(os.str());
        const auto back = Learner::load(is);
        EXPECT_EQ(back.kind(), m.kind());
        EXPECT_EQ(back.degenerate(), m.degenerate());
        for (std::size_t i = 0; i < d.x.rows(); ++i)
            EXPECT_EQ(back.predict_proba(d.x.row(i)), m.predict_proba(d.x.row(i)));
    }
    std::istringstream bad("ejcorr-learner 9\n");
    EXPECT_THROW(Learner::load(bad), DataError);
}

TEST(Learner, KindNames) {
    EXPECT_EQ(learner_kind_from_string(to_string(LearnerKind::logistic)), LearnerKind::logistic);
    EXPECT_EQ(learner_kind_from_string(to_string(LearnerKind::gradient_boosting)), LearnerKind::gradient_boosting);
    EXPECT_THROW(learner_kind_from_string("svm"), UsageError);
}
