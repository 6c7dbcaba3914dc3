#pragma once

// Judgment-variable estimators: EJ-GAN plus classical alternatives used in the
// ablation. All predict z from the remaining features s.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ejcorr/ejgan.hpp"
#include "ejcorr/errors.hpp"
#include "ejcorr/matrix.hpp"
#include "ejcorr/scaling.hpp"

namespace ejcorr {

enum class EstimatorKind { ejgan, linear_regression, ridge, knn, mean };

inline const char* to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::ejgan: return "ejgan";
        case EstimatorKind::linear_regression: return "linear_regression";
        case EstimatorKind::ridge: return "ridge";
        case EstimatorKind::knn: return "knn";
        case EstimatorKind::mean: return "mean";
    }
    return "?";
}

inline EstimatorKind estimator_kind_from_string(const std::string& s) {
    if (s == "ejgan") return EstimatorKind::ejgan;
    if (s == "linear_regression" || s == "lr" || s == "ols") return EstimatorKind::linear_regression;
    if (s == "ridge") return EstimatorKind::ridge;
    if (s == "knn") return EstimatorKind::knn;
    if (s == "mean") return EstimatorKind::mean;
    throw UsageError("unknown estimator '" + s + "'");
}

struct EstimatorParams {
    GanConfig gan;
    double ridge_penalty = 1.0;
    std::size_t knn_k = 5;
    double ols_jitter = 1e-10;
};

class JudgmentEstimator {
public:
    JudgmentEstimator() = default;

    static JudgmentEstimator from_gan(EjGan gan) {
        JudgmentEstimator e;
        e.kind_ = EstimatorKind::ejgan;
        e.scaler_ = gan.scaler();
        e.width_ = gan.feature_count();
        e.gan_ = std::move(gan);
        e.fitted_ = true;
        return e;
    }

    static JudgmentEstimator fit(EstimatorKind kind, const Matrix& s, std::span<const double> z,
                                 const EstimatorParams& params = {}, GanTrainLog* log = nullptr);

    EstimatorKind kind() const { return kind_; }
    bool fitted() const { return fitted_; }
    std::size_t feature_count() const { return width_; }
    const JudgmentScaler& scaler() const { return scaler_; }
    const EjGan& gan() const { return gan_; }
    const std::vector<double>& coefficients() const { return coef_; }
    double intercept() const { return intercept_; }

    /// z_expected in the judgment variable's original units.
    double estimate_z(std::span<const double> s) const {
        if (!fitted_) throw UsageError("estimator has not been fitted");
        if (s.size() != width_)
            throw UsageError("estimator expects " + std::to_string(width_) + " features, got " +
                             std::to_string(s.size()));
        switch (kind_) {
            case EstimatorKind::ejgan: return gan_.estimate(s);
            case EstimatorKind::mean: return intercept_;
            case EstimatorKind::linear_regression:
            case EstimatorKind::ridge: {
                double v = intercept_;
                for (std::size_t j = 0; j < width_; ++j) v += coef_[j] * s[j];
                return v;
            }
            case EstimatorKind::knn: return knn_estimate(s);
        }
        return intercept_;
    }

    double estimate_normalized(std::span<const double> s) const {
        if (kind_ == EstimatorKind::ejgan && fitted_) return gan_.estimate_normalized(s);
        return scaler_.normalize(estimate_z(s));
    }

    /// k = |estimate - z| in normalized judgment space.
    double distance_k(std::span<const double> x, std::size_t judgment_index) const {
        if (judgment_index >= x.size()) throw UsageError("judgment index out of range");
        std::vector<double> s;
        s.reserve(x.size() - 1);
        for (std::size_t j = 0; j < x.size(); ++j)
            if (j != judgment_index) s.push_back(x[j]);
        return std::abs(estimate_normalized(s) - scaler_.normalize(x[judgment_index]));
    }

private:
    double knn_estimate(std::span<const double> s) const {
        const auto q = features_.apply(s);
        std::vector<std::pair<double, std::size_t>> d(train_.rows());
        for (std::size_t i = 0; i < train_.rows(); ++i) {
            const auto r = train_.row(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j) acc += (r[j] - q[j]) * (r[j] - q[j]);
            d[i] = {acc, i};
        }
        const std::size_t k = std::min(k_, d.size());
        std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) sum += train_z_[d[i].second];
        return sum / static_cast<double>(k);
    }

    EstimatorKind kind_ = EstimatorKind::mean;
    bool fitted_ = false;
    std::size_t width_ = 0;
    JudgmentScaler scaler_;
    EjGan gan_;
    std::vector<double> coef_;
    double intercept_ = 0.0;
    Standardizer features_;
    Matrix train_;
    std::vector<double> train_z_;
    std::size_t k_ = 5;
};

namespace detail {

/// Penalized least squares on centered data; the intercept is not penalized.
inline std::pair<std::vector<double>, double> centered_least_squares(const Matrix& s, std::span<const double> z,
                                                                     double penalty) {
    const auto n = static_cast<Eigen::Index>(s.rows()), m = static_cast<Eigen::Index>(s.cols());
    Eigen::MatrixXd X(n, m);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) X(i, j) = s(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        y(i) = z[static_cast<std::size_t>(i)];
    }
    const Eigen::RowVectorXd xm = X.colwise().mean();
    const double ym = y.mean();
    X.rowwise() -= xm;
    y.array() -= ym;
    Eigen::MatrixXd A = X.transpose() * X;
    A.diagonal().array() += penalty;
    const Eigen::VectorXd beta = A.ldlt().solve(X.transpose() * y);
    std::vector<double> coef(beta.data(), beta.data() + beta.size());
    return {coef, ym - xm.dot(beta)};
}

}  // namespace detail

inline JudgmentEstimator JudgmentEstimator::fit(EstimatorKind kind, const Matrix& s, std::span<const double> z,
                                                const EstimatorParams& params, GanTrainLog* log) {
    if (s.rows() == 0 || z.empty()) throw DataError("cannot fit an estimator on empty data");
    if (s.rows() != z.size()) throw DataError("S_train and Z_train have different row counts");
    if (kind == EstimatorKind::ejgan) {
        auto r = EjGan::train(s, z, params.gan);
        if (log) *log = std::move(r.log);
        return from_gan(std::move(r.model));
    }
    JudgmentEstimator e;
    e.kind_ = kind;
    e.width_ = s.cols();
    e.scaler_ = JudgmentScaler::fit(z);
    switch (kind) {
        case EstimatorKind::mean:
            e.intercept_ = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
            break;
        case EstimatorKind::linear_regression:
            std::tie(e.coef_, e.intercept_) = detail::centered_least_squares(s, z, params.ols_jitter);
            break;
        case EstimatorKind::ridge:
            if (!(params.ridge_penalty >= 0)) throw UsageError("ridge penalty must be >= 0");
            std::tie(e.coef_, e.intercept_) = detail::centered_least_squares(s, z, params.ridge_penalty);
            break;
        case EstimatorKind::knn:
            if (params.knn_k < 1) throw UsageError("knn needs k >= 1");
            e.k_ = params.knn_k;
            e.features_ = Standardizer::fit(s);
            e.train_ = e.features_.apply(s);
            e.train_z_.assign(z.begin(), z.end());
            break;
        case EstimatorKind::ejgan: break;
    }
    e.fitted_ = true;
    return e;
}

inline JudgmentEstimator fit_estimator(EstimatorKind kind, const Matrix& s, std::span<const double> z,
                                       const EstimatorParams& params = {}, GanTrainLog* log = nullptr) {
    return JudgmentEstimator::fit(kind, s, z, params, log);
}

}  // namespace ejcorr
