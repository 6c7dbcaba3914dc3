#pragma once

// Accuracy, bucketized closeness (1 - Jensen-Shannon divergence), the harmonic
// combined score, and Welch's t-test.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "ejcorr/errors.hpp"

namespace ejcorr {

/// Fraction of rows where (prediction >= 0.5) matches the label.
inline double accuracy(std::span<const double> predictions, std::span<const double> labels) {
    if (predictions.size() != labels.size()) throw UsageError("accuracy: length mismatch");
    if (predictions.empty()) throw DataError("accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        hits += ((predictions[i] >= 0.5 ? 1.0 : 0.0) == labels[i]);
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

/// Mean prediction per linear bucket of the judgment variable's range.
struct BucketProfile {
    std::size_t q = 0;
    std::vector<double> edges;   // q + 1 values
    std::vector<double> means;   // NaN where the bucket is empty
    std::vector<std::size_t> counts;
    bool degenerate = false;     // range had zero width; everything sits in one bucket

    bool present(std::size_t b) const { return counts[b] > 0; }
    std::size_t non_empty() const {
        return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }));
    }
    double center(std::size_t b) const { return 0.5 * (edges[b] + edges[b + 1]); }
};

/// Index of the bucket holding v: floor(q (v - lo) / (hi - lo)), clamped to [0, q - 1].
inline std::size_t bucket_index(double v, std::size_t q, double lo, double hi) {
    const double t = std::floor(static_cast<double>(q) * (v - lo) / (hi - lo));
    if (!(t > 0)) return 0;
    return std::min(static_cast<std::size_t>(t), q - 1);
}

inline BucketProfile bucketize(std::span<const double> z, std::span<const double> predictions, std::size_t q,
                               double lo, double hi) {
    if (z.size() != predictions.size()) throw UsageError("bucketize: length mismatch");
    if (q < 2) throw UsageError("bucketize: q must be >= 2");
    if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) throw UsageError("bucketize: invalid range");
    BucketProfile p;
    if (hi == lo) {
        p.degenerate = true;
        p.q = 1;
        p.edges = {lo, hi};
    } else {
        p.q = q;
        p.edges.resize(q + 1);
        for (std::size_t b = 0; b <= q; ++b)
            p.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(q);
        p.edges[q] = hi;
    }
    std::vector<double> sums(p.q, 0.0);
    p.counts.assign(p.q, 0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        const std::size_t b = p.degenerate ? 0 : bucket_index(z[i], q, lo, hi);
        sums[b] += predictions[i];
        ++p.counts[b];
    }
    p.means.assign(p.q, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t b = 0; b < p.q; ++b)
        if (p.counts[b]) p.means[b] = sums[b] / static_cast<double>(p.counts[b]);
    return p;
}

inline constexpr double kJsdSmoothing = 1e-12;

/// Base-2 Jensen-Shannon divergence of two non-negative vectors, each smoothed
/// by kJsdSmoothing and normalized to sum 1.
inline double jsd(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw UsageError("jsd: length mismatch");
    if (p.empty()) throw UsageError("jsd: empty input");
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0) || !(q[i] >= 0.0)) throw DomainError("jsd: entries must be non-negative");
        if (!std::isfinite(p[i]) || !std::isfinite(q[i])) throw DomainError("jsd: entries must be finite");
    }
    const std::size_t r = p.size();
    std::vector<double> P(r), Q(r);
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        P[i] = p[i] + kJsdSmoothing;
        Q[i] = q[i] + kJsdSmoothing;
        sp += P[i];
        sq += Q[i];
    }
    double d = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        P[i] /= sp;
        Q[i] /= sq;
        const double m = 0.5 * (P[i] + Q[i]);
        d += 0.5 * P[i] * std::log2(P[i] / m) + 0.5 * Q[i] * std::log2(Q[i] / m);
    }
    return std::clamp(d, 0.0, 1.0);
}

/// Bucket means of two profiles with empty buckets dropped from both.
inline std::pair<std::vector<double>, std::vector<double>> shared_buckets(const BucketProfile& a,
                                                                          const BucketProfile& b) {
    if (a.q != b.q) throw UsageError("profiles have different bucket counts");
    std::pair<std::vector<double>, std::vector<double>> out;
    for (std::size_t i = 0; i < a.q; ++i)
        if (a.present(i) && b.present(i)) {
            out.first.push_back(a.means[i]);
            out.second.push_back(b.means[i]);
        }
    if (out.first.empty()) throw DataError("closeness is undefined: profiles share no non-empty bucket");
    return out;
}

/// Divergence of the model profile from the judgment profile.
inline double profile_jsd(const BucketProfile& model, const BucketProfile& judgment) {
    const auto [f, g] = shared_buckets(model, judgment);
    return jsd(f, g);
}

inline double closeness(const BucketProfile& model, const BucketProfile& judgment) {
    return 1.0 - profile_jsd(model, judgment);
}

/// Harmonic mean of accuracy and closeness; 0 when both are 0.
inline double combined(double accuracy, double closeness) {
    const double s = accuracy + closeness;
    return s > 0 ? 2.0 * accuracy * closeness / s : 0.0;
}

struct WelchResult {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
};

/// Welch's unequal-variance t-test, two-sided.
inline WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw DataError("welch_t: each sample needs at least 2 values");
    auto moments = [](std::span<const double> s) {
        const double n = static_cast<double>(s.size());
        const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : s) ss += (v - mean) * (v - mean);
        return std::pair{mean, ss / (n - 1.0)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ua = va / na, ub = vb / nb;
    WelchResult r;
    if (ua + ub == 0.0) {
        r.t = ma == mb ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), ma - mb);
        r.p = ma == mb ? 1.0 : 0.0;
        return r;
    }
    r.t = (ma - mb) / std::sqrt(ua + ub);
    r.df = (ua + ub) * (ua + ub) / (ua * ua / (na - 1.0) + ub * ub / (nb - 1.0));
    const boost::math::students_t dist(r.df);
    r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
    return r;
}

struct MetricsReport {
    double accuracy = 0.0;
    double closeness = 0.0;
    double combined = 0.0;
    double divergence = 0.0;  // the raw JSD behind closeness
    BucketProfile model;
    BucketProfile judgment;
};

/// All metrics of one prediction vector. `judgment_scores` holds g(z_i) per row;
/// [lo, hi] is the judgment variable's range over the full dataset.
inline MetricsReport evaluate(std::span<const double> predictions, std::span<const double> labels,
                              std::span<const double> z, std::span<const double> judgment_scores, std::size_t q,
                              double lo, double hi) {
    MetricsReport r;
    r.accuracy = accuracy(predictions, labels);
    r.model = bucketize(z, predictions, q, lo, hi);
    r.judgment = bucketize(z, judgment_scores, q, lo, hi);
    r.divergence = profile_jsd(r.model, r.judgment);
    r.closeness = 1.0 - r.divergence;
    r.combined = combined(r.accuracy, r.closeness);
    return r;
}

/// Plot-ready table: one row per bucket with its center, count and the mean
/// of every named profile (empty buckets left blank).
inline void write_profiles(std::ostream& os, const std::vector<std::string>& names,
                           const std::vector<BucketProfile>& profiles) {
    if (names.size() != profiles.size() || profiles.empty()) throw UsageError("write_profiles: bad arguments");
    os << "bucket,center,count";
    for (const auto& n : names) os << ',' << n;
    os << '\n' << std::setprecision(10);
    const auto& ref = profiles.front();
    for (std::size_t b = 0; b < ref.q; ++b) {
        os << b << ',' << ref.center(b) << ',' << ref.counts[b];
        for (const auto& p : profiles) {
            if (p.q != ref.q) throw UsageError("write_profiles: profiles have different bucket counts");
            os << ',';
            if (p.present(b)) os << p.means[b];
        }
        os << '\n';
    }
}

}  // namespace ejcorr
