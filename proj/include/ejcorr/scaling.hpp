#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "ejcorr/errors.hpp"
#include "ejcorr/matrix.hpp"

namespace ejcorr {

/// Min-max scaling of the judgment variable fitted on training values.
/// Deliberately not clipped: values beyond the training range map outside
/// [0, 1], which is what makes unseen judgment values stand out.
struct JudgmentScaler {
    double train_min = 0.0;
    double train_max = 1.0;

    static JudgmentScaler fit(std::span<const double> z) {
        if (z.empty()) throw DataError("cannot fit judgment scaler on empty data");
        JudgmentScaler s{z[0], z[0]};
        for (double v : z) {
            if (!std::isfinite(v)) throw DataError("non-finite judgment value");
            s.train_min = std::min(s.train_min, v);
            s.train_max = std::max(s.train_max, v);
        }
        if (!(s.train_max > s.train_min))
            throw DataError("judgment variable is constant on the training data; scaler is degenerate");
        return s;
    }

    double normalize(double z) const {
        if (!(train_max > train_min)) throw DataError("degenerate judgment scaler");
        return (z - train_min) / (train_max - train_min);
    }
    double denormalize(double u) const { return u * (train_max - train_min) + train_min; }

    friend bool operator==(const JudgmentScaler&, const JudgmentScaler&) = default;
};

/// Per-column standardization (zero mean, unit variance). Constant columns
/// keep scale 1 so they map to 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& x) {
        Standardizer s;
        s.mean.assign(x.cols(), 0.0);
        s.scale.assign(x.cols(), 1.0);
        if (x.rows() == 0) return s;
        const double n = static_cast<double>(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r)
            for (std::size_t c = 0; c < x.cols(); ++c) s.mean[c] += x(r, c);
        for (auto& m : s.mean) m /= n;
        std::vector<double> var(x.cols(), 0.0);
        for (std::size_t r = 0; r < x.rows(); ++r)
            for (std::size_t c = 0; c < x.cols(); ++c) {
                const double d = x(r, c) - s.mean[c];
                var[c] += d * d;
            }
        for (std::size_t c = 0; c < x.cols(); ++c) {
            const double sd = std::sqrt(var[c] / n);
            s.scale[c] = sd > 1e-12 ? sd : 1.0;
        }
        return s;
    }

    void apply(std::span<const double> in, std::span<double> out) const {
        for (std::size_t c = 0; c < in.size(); ++c) out[c] = (in[c] - mean[c]) / scale[c];
    }
    std::vector<double> apply(std::span<const double> in) const {
        if (in.size() != mean.size())
            throw UsageError("standardizer expects " + std::to_string(mean.size()) + " values, got " +
                             std::to_string(in.size()));
        std::vector<double> out(in.size());
        apply(in, out);
        return out;
    }
    Matrix apply(const Matrix& x) const {
        Matrix out(x.rows(), x.cols());
        for (std::size_t r = 0; r < x.rows(); ++r) apply(x.row(r), out.row(r));
        return out;
    }

    friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

}  // namespace ejcorr
