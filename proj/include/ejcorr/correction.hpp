#pragma once

// Distance-weighted blending of model and judgment predictions, and the
// alpha grid search.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ejcorr/errors.hpp"
#include "ejcorr/metrics.hpp"

namespace ejcorr {

struct CorrectionConfig {
    double alpha = 1.0;
    std::vector<double> alpha_grid{0.1, 0.5, 1.0, 2.0, 5.0, 8.0};
    std::size_t q_buckets = 12;

    void validate() const {
        if (!(alpha > 0)) throw UsageError("alpha must be positive");
        if (alpha_grid.empty()) throw UsageError("alpha grid must not be empty");
        for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
            if (!(alpha_grid[i] > 0)) throw UsageError("alpha grid values must be positive");
            if (i && !(alpha_grid[i] > alpha_grid[i - 1])) throw UsageError("alpha grid must be strictly increasing");
        }
        if (q_buckets < 2) throw UsageError("q_buckets must be >= 2");
    }
};

/// w = (sigmoid(alpha k) - 0.5) * 2, which equals tanh(alpha k / 2).
inline double weight(double k, double alpha) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw DomainError("weight: k must be a finite non-negative number");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("weight: alpha must be positive");
    return ((1.0 / (1.0 + std::exp(-alpha * k))) - 0.5) * 2.0;
}

struct CorrectedPrediction {
    double y_hat = 0.0;
    double g_of_z = 0.0;
    double z_expected = 0.0;
    double k = 0.0;
    double w = 0.0;
    double y_final = 0.0;
};

/// Blends with an explicit weight w in [0, 1].
inline double blend(double y_hat, double g_of_z, double w) {
    const double y = w * g_of_z + (1.0 - w) * y_hat;
    return std::clamp(y, std::min(y_hat, g_of_z), std::max(y_hat, g_of_z));
}

inline CorrectedPrediction correct(double y_hat, double g_of_z, double k, double alpha) {
    if (!(y_hat >= 0.0 && y_hat <= 1.0)) throw DomainError("correct: y_hat must lie in [0, 1]");
    if (!(g_of_z >= 0.0 && g_of_z <= 1.0)) throw DomainError("correct: g(z) must lie in [0, 1]");
    CorrectedPrediction c;
    c.y_hat = y_hat;
    c.g_of_z = g_of_z;
    c.k = k;
    c.w = weight(k, alpha);
    c.y_final = blend(y_hat, g_of_z, c.w);
    return c;
}

inline std::vector<double> correct_all(std::span<const double> y_hat, std::span<const double> g_of_z,
                                       std::span<const double> k, double alpha) {
    if (y_hat.size() != g_of_z.size() || y_hat.size() != k.size()) throw UsageError("correct: length mismatch");
    std::vector<double> out(y_hat.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = correct(y_hat[i], g_of_z[i], k[i], alpha).y_final;
    return out;
}

struct AlphaSearch {
    double alpha = 0.0;
    std::vector<double> scores;  // one per grid value
};

/// Exhaustive search; the first (smallest) alpha wins ties.
inline AlphaSearch select_alpha(std::span<const double> grid, const std::function<double(double)>& score) {
    if (grid.empty()) throw UsageError("alpha grid must not be empty");
    AlphaSearch s;
    double best = -std::numeric_limits<double>::infinity();
    for (double a : grid) {
        const double v = score(a);
        s.scores.push_back(v);
        if (v > best) {
            best = v;
            s.alpha = a;
        }
    }
    if (!std::isfinite(best)) s.alpha = grid.front();
    return s;
}

/// Validation data needed to score a candidate alpha.
struct ValidationSet {
    std::span<const double> y_hat;
    std::span<const double> g_of_z;
    std::span<const double> k;
    std::span<const double> labels;
    std::span<const double> z;
    double z_lo = 0.0;
    double z_hi = 1.0;
};

/// Picks the grid alpha maximizing the combined metric on validation.
inline AlphaSearch select_alpha(const ValidationSet& v, const CorrectionConfig& config) {
    config.validate();
    return select_alpha(config.alpha_grid, [&](double a) {
        const auto y = correct_all(v.y_hat, v.g_of_z, v.k, a);
        return evaluate(y, v.labels, v.z, v.g_of_z, config.q_buckets, v.z_lo, v.z_hi).combined;
    });
}

}  // namespace ejcorr
