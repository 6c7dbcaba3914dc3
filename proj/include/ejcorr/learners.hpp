#pragma once

// Target classifiers (logistic regression, gradient-boosted trees) and the
// training-time baselines SL, WS and ER.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ejcorr/errors.hpp"
#include "ejcorr/matrix.hpp"
#include "ejcorr/neural.hpp"
#include "ejcorr/scaling.hpp"
#include "ejcorr/textio.hpp"

namespace ejcorr {

enum class LearnerKind { logistic, gradient_boosting };

inline const char* to_string(LearnerKind k) { return k == LearnerKind::logistic ? "logistic" : "gradient_boosting"; }

inline LearnerKind learner_kind_from_string(const std::string& s) {
    if (s == "logistic" || s == "lr") return LearnerKind::logistic;
    if (s == "gradient_boosting" || s == "gb" || s == "boosting") return LearnerKind::gradient_boosting;
    throw UsageError("unknown model kind '" + s + "'");
}

struct BaselineConfig {
    double l2_lambda = 1.0;
    double er_lambda = 1.0;
    double er_temperature = 1.0;
    std::size_t epochs = 1000;
    double learn_rate = 0.05;
    // gradient boosting
    std::size_t n_trees = 100;
    std::size_t max_depth = 3;
    double shrinkage = 0.1;

    void validate() const {
        if (!(l2_lambda >= 0) || !(er_lambda >= 0)) throw UsageError("regularization strengths must be >= 0");
        if (!(er_temperature > 0)) throw UsageError("er_temperature must be positive");
        if (epochs < 1) throw UsageError("epochs must be >= 1");
        if (!(learn_rate > 0)) throw UsageError("learn_rate must be positive");
        if (max_depth < 1) throw UsageError("max_depth must be >= 1");
        if (!(shrinkage > 0)) throw UsageError("shrinkage must be positive");
    }
};

inline constexpr double kProbabilityClip = 1e-6;

// ---------------------------------------------------------------------------
// Logistic regression

/// p = sigmoid(w . standardize(x) + b)
class LogisticModel {
public:
    LogisticModel() = default;
    LogisticModel(std::vector<double> weights, double intercept)
        : weights_(std::move(weights)), intercept_(intercept) {
        scaling_.mean.assign(weights_.size(), 0.0);
        scaling_.scale.assign(weights_.size(), 1.0);
    }
    LogisticModel(Standardizer scaling, std::vector<double> weights, double intercept)
        : scaling_(std::move(scaling)), weights_(std::move(weights)), intercept_(intercept) {
        if (scaling_.mean.size() != weights_.size()) throw UsageError("standardizer width does not match weights");
    }

    std::size_t feature_count() const { return weights_.size(); }
    const std::vector<double>& weights() const { return weights_; }
    double intercept() const { return intercept_; }
    const Standardizer& scaling() const { return scaling_; }

    double logit(std::span<const double> x) const {
        if (x.size() != weights_.size())
            throw UsageError("logistic model expects " + std::to_string(weights_.size()) + " features, got " +
                             std::to_string(x.size()));
        double a = intercept_;
        for (std::size_t j = 0; j < x.size(); ++j) a += weights_[j] * (x[j] - scaling_.mean[j]) / scaling_.scale[j];
        return a;
    }
    double predict_proba(std::span<const double> x) const { return nn::sigmoid(logit(x)); }

private:
    Standardizer scaling_;
    std::vector<double> weights_;
    double intercept_ = 0.0;
};

enum class LogisticObjective { cross_entropy, absolute_deviation, expectation_regularized };

/// Full-batch objective over standardized rows. theta = [w..., b].
///   cross_entropy:            mean CE(y, p) + l2/(2n) |w|^2
///   absolute_deviation:       mean |g - p| + l2/(2n) |w|^2
///   expectation_regularized:  mean [CE(y, p) + er_lambda KL(Bern(g) || Bern(sigmoid(a / T)))] + l2/(2n) |w|^2
struct LogisticProblem {
    const Matrix& x;
    std::span<const double> y;
    std::span<const double> g;
    LogisticObjective objective;
    BaselineConfig config;

    double evaluate(std::span<const double> w, double b, std::vector<double>* grad_w, double* grad_b) const {
        const std::size_t n = x.rows(), m = x.cols();
        const double inv_n = 1.0 / static_cast<double>(n);
        const double T = config.er_temperature;
        if (grad_w) grad_w->assign(m, 0.0);
        if (grad_b) *grad_b = 0.0;
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = x.row(i);
            double a = b;
            for (std::size_t j = 0; j < m; ++j) a += w[j] * row[j];
            const double p = nn::sigmoid(a);
            double da = 0.0;
            switch (objective) {
                case LogisticObjective::cross_entropy:
                    loss += nn::softplus(a) - y[i] * a;
                    da = p - y[i];
                    break;
                case LogisticObjective::absolute_deviation: {
                    const double d = p - g[i];
                    loss += std::abs(d);
                    da = (d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) * p * (1.0 - p);
                    break;
                }
                case LogisticObjective::expectation_regularized: {
                    const double gi = g[i];
                    const double log_q = -nn::softplus(-a / T), log_1q = -nn::softplus(a / T);
                    double kl = 0.0;
                    if (gi > 0) kl += gi * (std::log(gi) - log_q);
                    if (gi < 1) kl += (1.0 - gi) * (std::log1p(-gi) - log_1q);
                    loss += nn::softplus(a) - y[i] * a + config.er_lambda * kl;
                    da = (p - y[i]) + config.er_lambda * (nn::sigmoid(a / T) - gi) / T;
                    break;
                }
            }
            if (grad_w)
                for (std::size_t j = 0; j < m; ++j) (*grad_w)[j] += da * row[j] * inv_n;
            if (grad_b) *grad_b += da * inv_n;
        }
        loss *= inv_n;
        double sq = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            sq += w[j] * w[j];
            if (grad_w) (*grad_w)[j] += config.l2_lambda * inv_n * w[j];
        }
        return loss + 0.5 * config.l2_lambda * inv_n * sq;
    }
};

namespace detail {

inline LogisticModel train_logistic(const Matrix& x, std::span<const double> y, std::span<const double> g,
                                    LogisticObjective objective, const BaselineConfig& config) {
    const auto scaling = Standardizer::fit(x);
    const Matrix xs = scaling.apply(x);
    const LogisticProblem problem{xs, y, g, objective, config};
    std::vector<double> w(x.cols(), 0.0), b(1, 0.0);
    nn::ParamTensors grads(2);
    nn::AdamState adam;
    adam.learn_rate = config.learn_rate;
    const std::vector<std::span<double>> params{std::span<double>(w), std::span<double>(b)};
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double gb = 0.0;
        const double loss = problem.evaluate(w, b[0], &grads[0], &gb);
        if (!std::isfinite(loss)) throw DivergenceError("logistic training diverged at epoch " + std::to_string(epoch));
        grads[1].assign(1, gb);
        nn::adam_update(std::span<const std::span<double>>(params), grads, adam);
    }
    return LogisticModel(scaling, std::move(w), b[0]);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Regression trees and gradient boosting

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary regression tree; a row goes left when x[feature] <= threshold.
class RegressionTree {
public:
    RegressionTree() { nodes_.push_back(TreeNode{}); }
    RegressionTree(std::vector<TreeNode> nodes, std::size_t max_depth) : nodes_(std::move(nodes)), max_depth_(max_depth) {
        if (nodes_.empty()) throw DataError("regression tree without nodes");
    }

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t max_depth() const { return max_depth_; }

    double predict(std::span<const double> x) const {
        int i = 0;
        while (nodes_[i].feature >= 0) {
            const auto& n = nodes_[i];
            i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes_[i].value;
    }

    /// Checks child indices, reachability and feature bounds.
    void validate(std::size_t feature_count) const {
        std::vector<int> seen(nodes_.size(), 0);
        std::vector<int> stack{0};
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            if (i < 0 || static_cast<std::size_t>(i) >= nodes_.size() || seen[i]++)
                throw DataError("regression tree is malformed");
            const auto& n = nodes_[i];
            if (n.feature >= 0) {
                if (static_cast<std::size_t>(n.feature) >= feature_count)
                    throw DataError("regression tree uses an unknown feature");
                stack.push_back(n.left);
                stack.push_back(n.right);
            }
        }
        if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw DataError("regression tree has unreachable nodes");
    }

    /// Squared-error tree on `residual`; leaves hold one Newton step
    /// sum(residual) / sum(hessian). `sorted[f]` lists all rows ordered by feature f.
    static RegressionTree fit(const Matrix& x, const std::vector<std::vector<std::size_t>>& sorted,
                              std::span<const double> residual, std::span<const double> hessian,
                              std::size_t max_depth) {
        RegressionTree tree;
        tree.nodes_.clear();
        tree.max_depth_ = max_depth;
        std::vector<int> owner(x.rows(), 0);
        std::vector<std::size_t> all(x.rows());
        std::iota(all.begin(), all.end(), std::size_t{0});
        tree.grow(x, sorted, residual, hessian, owner, all, 0);
        return tree;
    }

private:
    int grow(const Matrix& x, const std::vector<std::vector<std::size_t>>& sorted, std::span<const double> r,
             std::span<const double> h, std::vector<int>& owner, const std::vector<std::size_t>& rows,
             std::size_t depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(TreeNode{});
        for (auto i : rows) owner[i] = id;

        double sum_r = 0.0, sum_h = 0.0, lo = r[rows[0]], hi = r[rows[0]];
        for (auto i : rows) {
            sum_r += r[i];
            sum_h += h[i];
            lo = std::min(lo, r[i]);
            hi = std::max(hi, r[i]);
        }
        nodes_[id].value = sum_h > 1e-150 ? sum_r / sum_h : 0.0;
        if (depth >= max_depth_ || hi - lo <= 1e-12 * (1.0 + std::abs(hi))) return id;

        const double cnt = static_cast<double>(rows.size());
        double best = -std::numeric_limits<double>::infinity();
        int best_f = -1;
        double best_t = 0.0;
        std::vector<std::size_t> ordered;
        ordered.reserve(rows.size());
        for (std::size_t f = 0; f < x.cols(); ++f) {
            ordered.clear();
            for (auto i : sorted[f])
                if (owner[i] == id) ordered.push_back(i);
            double left = 0.0;
            for (std::size_t k = 0; k + 1 < ordered.size(); ++k) {
                left += r[ordered[k]];
                const double v = x(ordered[k], f), next = x(ordered[k + 1], f);
                if (!(v < next)) continue;
                const double nl = static_cast<double>(k + 1), nr = cnt - nl;
                const double right = sum_r - left;
                const double score = left * left / nl + right * right / nr;
                if (best_f < 0 || score > best + 1e-12 * std::abs(best)) {
                    best = score;
                    best_f = static_cast<int>(f);
                    best_t = v + 0.5 * (next - v);
                    if (!(best_t < next)) best_t = v;
                }
            }
        }
        if (best_f < 0) return id;

        std::vector<std::size_t> left_rows, right_rows;
        for (auto i : rows) (x(i, best_f) <= best_t ? left_rows : right_rows).push_back(i);
        nodes_[id].feature = best_f;
        nodes_[id].threshold = best_t;
        const int l = grow(x, sorted, r, h, owner, left_rows, depth + 1);
        const int rr = grow(x, sorted, r, h, owner, right_rows, depth + 1);
        nodes_[id].left = l;
        nodes_[id].right = rr;
        return id;
    }

    std::vector<TreeNode> nodes_;
    std::size_t max_depth_ = 0;
};

/// F(x) = init + shrinkage * sum_t tree_t(x); p = clip(sigmoid(F)).
class BoostingModel {
public:
    BoostingModel() = default;
    BoostingModel(double init_logit, double shrinkage, std::vector<RegressionTree> trees, std::size_t feature_count)
        : init_(init_logit), shrinkage_(shrinkage), trees_(std::move(trees)), features_(feature_count) {
        for (const auto& t : trees_) t.validate(features_);
    }

    double init_logit() const { return init_; }
    double shrinkage() const { return shrinkage_; }
    const std::vector<RegressionTree>& trees() const { return trees_; }
    std::size_t feature_count() const { return features_; }

    double raw(std::span<const double> x) const {
        if (x.size() != features_)
            throw UsageError("boosting model expects " + std::to_string(features_) + " features, got " +
                             std::to_string(x.size()));
        double f = init_;
        for (const auto& t : trees_) f += shrinkage_ * t.predict(x);
        return f;
    }
    double predict_proba(std::span<const double> x) const {
        return std::clamp(nn::sigmoid(raw(x)), kProbabilityClip, 1.0 - kProbabilityClip);
    }

    /// Mean log loss on (x, y) after each prefix of trees; entry 0 is the
    /// initial constant model.
    std::vector<double> staged_loss(const Matrix& x, std::span<const double> y) const {
        std::vector<double> f(x.rows(), init_), out;
        auto loss = [&] {
            double s = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) s += nn::softplus(f[i]) - y[i] * f[i];
            return s / static_cast<double>(f.size());
        };
        out.push_back(loss());
        for (const auto& t : trees_) {
            for (std::size_t i = 0; i < f.size(); ++i) f[i] += shrinkage_ * t.predict(x.row(i));
            out.push_back(loss());
        }
        return out;
    }

    static BoostingModel fit(const Matrix& x, std::span<const double> y, const BaselineConfig& config) {
        const std::size_t n = x.rows();
        const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
        const double p0 = std::clamp(mean_y, kProbabilityClip, 1.0 - kProbabilityClip);
        const double init = std::log(p0 / (1.0 - p0));

        std::vector<std::vector<std::size_t>> sorted(x.cols(), std::vector<std::size_t>(n));
        for (std::size_t f = 0; f < x.cols(); ++f) {
            std::iota(sorted[f].begin(), sorted[f].end(), std::size_t{0});
            std::stable_sort(sorted[f].begin(), sorted[f].end(),
                             [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
        }
        std::vector<double> raw(n, init), r(n), h(n);
        std::vector<RegressionTree> trees;
        trees.reserve(config.n_trees);
        for (std::size_t t = 0; t < config.n_trees; ++t) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = nn::sigmoid(raw[i]);
                r[i] = y[i] - p;
                h[i] = p * (1.0 - p);
            }
            auto tree = RegressionTree::fit(x, sorted, r, h, config.max_depth);
            for (std::size_t i = 0; i < n; ++i) raw[i] += config.shrinkage * tree.predict(x.row(i));
            trees.push_back(std::move(tree));
        }
        return BoostingModel(init, config.shrinkage, std::move(trees), x.cols());
    }

private:
    double init_ = 0.0;
    double shrinkage_ = 0.1;
    std::vector<RegressionTree> trees_;
    std::size_t features_ = 0;
};

// ---------------------------------------------------------------------------
// Learner facade

class Learner {
public:
    Learner() = default;
    explicit Learner(LogisticModel m) : kind_(LearnerKind::logistic), logistic_(std::move(m)), fitted_(true) {}
    explicit Learner(BoostingModel m) : kind_(LearnerKind::gradient_boosting), boosting_(std::move(m)), fitted_(true) {}

    /// Constant predictor returned when the training labels hold a single class.
    static Learner constant(LearnerKind kind, std::size_t feature_count, double probability, std::string warning) {
        Learner l;
        l.kind_ = kind;
        l.fitted_ = true;
        l.degenerate_ = true;
        l.constant_ = std::clamp(probability, kProbabilityClip, 1.0 - kProbabilityClip);
        l.features_ = feature_count;
        l.warning_ = std::move(warning);
        return l;
    }

    LearnerKind kind() const { return kind_; }
    bool fitted() const { return fitted_; }
    bool degenerate() const { return degenerate_; }
    const std::string& warning() const { return warning_; }
    const LogisticModel& logistic() const { return logistic_; }
    const BoostingModel& boosting() const { return boosting_; }

    std::size_t feature_count() const {
        if (degenerate_) return features_;
        return kind_ == LearnerKind::logistic ? logistic_.feature_count() : boosting_.feature_count();
    }

    double predict_proba(std::span<const double> x) const {
        if (!fitted_) throw UsageError("model has not been fitted");
        if (degenerate_) {
            if (x.size() != features_) throw UsageError("feature vector has wrong length");
            return constant_;
        }
        return kind_ == LearnerKind::logistic ? logistic_.predict_proba(x) : boosting_.predict_proba(x);
    }

    std::vector<double> predict_proba(const Matrix& x) const {
        std::vector<double> p(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) p[i] = predict_proba(x.row(i));
        return p;
    }

    void save(std::ostream& os) const;
    static Learner load(std::istream& is);

private:
    LearnerKind kind_ = LearnerKind::logistic;
    LogisticModel logistic_;
    BoostingModel boosting_;
    bool fitted_ = false;
    bool degenerate_ = false;
    double constant_ = 0.5;
    std::size_t features_ = 0;
    std::string warning_;
};

namespace detail {

inline void check_training_rows(const Matrix& x, std::span<const double> y) {
    if (x.rows() != y.size()) throw DataError("feature and label row counts differ");
    if (x.rows() < 2) throw DataError("need at least 2 training rows");
    for (double v : y)
        if (v != 0.0 && v != 1.0) throw DataError("labels must be 0 or 1");
}

inline std::optional<Learner> single_class(LearnerKind kind, const Matrix& x, std::span<const double> y) {
    const double pos = std::accumulate(y.begin(), y.end(), 0.0);
    if (pos > 0 && pos < static_cast<double>(y.size())) return std::nullopt;
    return Learner::constant(kind, x.cols(), pos > 0 ? 1.0 : 0.0,
                             "training labels contain a single class; fitted a constant predictor");
}

}  // namespace detail

/// Plain supervised learning on the labels.
inline Learner fit_sl(const Matrix& x, std::span<const double> y, LearnerKind kind, const BaselineConfig& config = {}) {
    config.validate();
    detail::check_training_rows(x, y);
    if (auto c = detail::single_class(kind, x, y)) return *c;
    if (kind == LearnerKind::gradient_boosting) return Learner(BoostingModel::fit(x, y, config));
    return Learner(detail::train_logistic(x, y, {}, LogisticObjective::cross_entropy, config));
}

/// Weak supervision: fits sigmoid(w . x + b) to the judgment scores g_i without
/// looking at labels. Always logistic-backed.
inline Learner fit_ws(const Matrix& x, std::span<const double> g, const BaselineConfig& config = {}) {
    config.validate();
    if (x.rows() != g.size()) throw DataError("feature and judgment row counts differ");
    if (x.rows() < 2) throw DataError("need at least 2 training rows");
    for (double v : g)
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("judgment scores must lie in [0, 1]");
    return Learner(detail::train_logistic(x, {}, g, LogisticObjective::absolute_deviation, config));
}

/// Expectation regularization: cross-entropy plus er_lambda * KL toward the
/// judgment scores. Always logistic-backed.
inline Learner fit_er(const Matrix& x, std::span<const double> y, std::span<const double> g,
                      const BaselineConfig& config = {}) {
    config.validate();
    detail::check_training_rows(x, y);
    if (g.size() != y.size()) throw DataError("judgment and label row counts differ");
    for (double v : g)
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("judgment scores must lie in [0, 1]");
    if (auto c = detail::single_class(LearnerKind::logistic, x, y)) return *c;
    return Learner(detail::train_logistic(x, y, g, LogisticObjective::expectation_regularized, config));
}

// ---------------------------------------------------------------------------
// Serialization

inline void Learner::save(std::ostream& os) const {
    if (!fitted_) throw UsageError("cannot save an unfitted model");
    os << "ejcorr-learner 1\n" << std::setprecision(17);
    os << "kind " << to_string(kind_) << '\n';
    if (degenerate_) {
        os << "constant " << features_ << ' ' << constant_ << '\n';
        return;
    }
    if (kind_ == LearnerKind::logistic) {
        os << "logistic " << logistic_.feature_count() << ' ' << logistic_.intercept() << '\n';
        textio::write_values(os, logistic_.scaling().mean);
        textio::write_values(os, logistic_.scaling().scale);
        textio::write_values(os, logistic_.weights());
        return;
    }
    os << "boosting " << boosting_.feature_count() << ' ' << boosting_.init_logit() << ' ' << boosting_.shrinkage()
       << ' ' << boosting_.trees().size() << '\n';
    for (const auto& t : boosting_.trees()) {
        os << "tree " << t.nodes().size() << ' ' << t.max_depth() << '\n';
        for (const auto& n : t.nodes())
            os << n.feature << ' ' << n.threshold << ' ' << n.left << ' ' << n.right << ' ' << n.value << '\n';
    }
}

inline Learner Learner::load(std::istream& is) {
    textio::expect(is, "ejcorr-learner");
    if (textio::read<int>(is, "version") != 1) throw DataError("unsupported model version");
    textio::expect(is, "kind");
    const auto kind = learner_kind_from_string(textio::read<std::string>(is, "model kind"));
    const auto tag = textio::read<std::string>(is, "section");
    if (tag == "constant") {
        const auto m = textio::read<std::size_t>(is, "feature count");
        const auto p = textio::read<double>(is, "constant");
        auto l = constant(kind, m, p, "single-class training data");
        return l;
    }
    if (tag == "logistic") {
        const auto m = textio::read<std::size_t>(is, "feature count");
        const auto b = textio::read<double>(is, "intercept");
        Standardizer s;
        s.mean = textio::read_values(is, m, "feature means");
        s.scale = textio::read_values(is, m, "feature scales");
        auto w = textio::read_values(is, m, "weights");
        return Learner(LogisticModel(std::move(s), std::move(w), b));
    }
    if (tag != "boosting") throw DataError("model file: unexpected section '" + tag + "'");
    const auto m = textio::read<std::size_t>(is, "feature count");
    const auto init = textio::read<double>(is, "initial log-odds");
    const auto shrink = textio::read<double>(is, "shrinkage");
    const auto count = textio::read<std::size_t>(is, "tree count");
    std::vector<RegressionTree> trees;
    for (std::size_t t = 0; t < count; ++t) {
        textio::expect(is, "tree");
        const auto nn_ = textio::read<std::size_t>(is, "node count");
        const auto depth = textio::read<std::size_t>(is, "depth");
        std::vector<TreeNode> nodes(nn_);
        for (auto& n : nodes) {
            n.feature = textio::read<int>(is, "node feature");
            n.threshold = textio::read<double>(is, "node threshold");
            n.left = textio::read<int>(is, "node left");
            n.right = textio::read<int>(is, "node right");
            n.value = textio::read<double>(is, "node value");
        }
        trees.emplace_back(std::move(nodes), depth);
    }
    return Learner(BoostingModel(init, shrink, std::move(trees), m));
}

}  // namespace ejcorr
