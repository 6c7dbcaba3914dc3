#pragma once

// Synthetic benchmark generator and the train/validation/test splits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ejcorr/dataio.hpp"
#include "ejcorr/errors.hpp"
#include "ejcorr/judgment.hpp"

namespace ejcorr {

/// Which form draws its features from U(-1, 1) instead of U(-4, 4).
enum class NarrowRange { squared_form, exp_form };

struct SynthConfig {
    std::size_t n = 1000;
    std::optional<std::size_t> m;  // empty: drawn uniformly from 1..20
    SynthForm form = SynthForm::sigmoid_w1x;
    std::uint64_t seed = 0;
    double holdout_k_percent = 9.0;
    NarrowRange narrow = NarrowRange::squared_form;

    void validate() const {
        if (n < 10) throw UsageError("synthetic n must be >= 10");
        if (m && *m < 1) throw UsageError("synthetic m must be >= 1");
        if (!(holdout_k_percent > 0 && holdout_k_percent < 10)) throw UsageError("k must lie in (0, 10)");
    }
};

struct SynthDataset {
    Dataset data;
    std::vector<double> w1;
    std::vector<double> w2;
    std::size_t t = 0;
    double score_min = 0.0;
    double score_max = 1.0;
    JudgmentFunction g = JudgmentFunction::guarantor_shift();
};

inline double feature_half_width(SynthForm form, NarrowRange narrow) {
    const bool narrow_form = narrow == NarrowRange::squared_form ? form == SynthForm::exp_w1x_squared
                                                                 : form == SynthForm::exp_w1x;
    return narrow_form ? 1.0 : 4.0;
}

inline SynthDataset generate(const SynthConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    const std::size_t m = config.m ? *config.m : std::uniform_int_distribution<std::size_t>(1, 20)(rng);
    const std::size_t n = config.n;

    SynthDataset ds;
    std::normal_distribution<double> normal(0.0, 1.0);
    ds.w1.resize(m);
    ds.w2.resize(m);
    for (auto& w : ds.w1) w = normal(rng);
    for (auto& w : ds.w2) w = normal(rng);

    const double h = feature_half_width(config.form, config.narrow);
    std::uniform_real_distribution<double> unif(-h, h);
    Matrix x(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) x(i, j) = unif(rng);
    ds.t = std::uniform_int_distribution<std::size_t>(0, m - 1)(rng);

    std::vector<double> coef = ds.w1;
    if (config.form == SynthForm::exp_two_weights)
        for (std::size_t j = 0; j < m; ++j) coef[j] += ds.w2[j];
    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) {
        double u = 0.0;
        for (std::size_t j = 0; j < m; ++j) u += coef[j] * x(i, j);
        score[i] = raw_form(config.form, u);
        if (!std::isfinite(score[i])) throw DataError("synthetic score overflowed; use a narrower feature range");
    }
    const auto [lo, hi] = std::minmax_element(score.begin(), score.end());
    ds.score_min = *lo;
    ds.score_max = *hi;
    if (!(ds.score_max > ds.score_min)) throw DataError("synthetic scores are constant");

    Dataset& d = ds.data;
    d.x = std::move(x);
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        d.y[i] = (score[i] - ds.score_min) / (ds.score_max - ds.score_min) >= 0.5 ? 1.0 : 0.0;
    for (std::size_t j = 0; j < m; ++j) d.feature_names.push_back("x" + std::to_string(j));
    d.judgment_index = ds.t;
    d.judgment_name = d.feature_names[ds.t];

    const double c = coef[ds.t];
    double g_lo = std::numeric_limits<double>::infinity(), g_hi = -g_lo;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = raw_form(config.form, c * d.x(i, ds.t));
        g_lo = std::min(g_lo, v);
        g_hi = std::max(g_hi, v);
    }
    ds.g = JudgmentFunction::synthetic(config.form, c, g_lo, g_hi);
    return ds;
}

inline const JudgmentFunction& judgment_fn(const SynthDataset& ds) { return ds.g; }

// ---------------------------------------------------------------------------
// Splits

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
    std::size_t forced = 0;  // leading test rows taken from the top of the judgment range
};

inline std::size_t round_half_up(double v) { return static_cast<std::size_t>(std::floor(v + 0.5)); }

/// Test set = the top round(n k / 100) rows by z plus random other rows up to
/// 10% of n; the rest is shuffled into validation (10%) and training.
inline Split split_top_k(std::span<const double> z, double k_percent, std::uint64_t seed) {
    if (!(k_percent > 0 && k_percent < 10)) throw UsageError("holdout k must lie in (0, 10), got " + std::to_string(k_percent));
    const std::size_t n = z.size();
    const std::size_t n_top = round_half_up(static_cast<double>(n) * k_percent / 100.0);
    const std::size_t n_test = round_half_up(static_cast<double>(n) * 0.1);
    const std::size_t n_val = round_half_up(static_cast<double>(n) * 0.1);
    if (n_val == 0 || n_test + n_val >= n || n_top > n_test) throw DataError("too few rows for a top-k split");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return z[a] > z[b]; });

    Split s;
    s.forced = n_top;
    s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_top));
    std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(n_top), order.end());
    std::sort(rest.begin(), rest.end());
    std::mt19937_64 rng(seed);
    std::shuffle(rest.begin(), rest.end(), rng);
    const std::size_t extra = n_test - n_top;
    s.test.insert(s.test.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(extra));
    s.val.assign(rest.begin() + static_cast<std::ptrdiff_t>(extra),
                 rest.begin() + static_cast<std::ptrdiff_t>(extra + n_val));
    s.train.assign(rest.begin() + static_cast<std::ptrdiff_t>(extra + n_val), rest.end());
    return s;
}

/// Uniform random 80/10/10 split.
inline Split split_uniform(std::size_t n, std::uint64_t seed) {
    const std::size_t n_test = round_half_up(static_cast<double>(n) * 0.1);
    const std::size_t n_val = round_half_up(static_cast<double>(n) * 0.1);
    if (n_test == 0 || n_val == 0 || n_test + n_val >= n) throw DataError("too few rows for a train/validation/test split");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    Split s;
    s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test),
                 idx.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
    s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), idx.end());
    return s;
}

}  // namespace ejcorr
