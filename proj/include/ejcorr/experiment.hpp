#pragma once

// Experiment runner: data preparation, target model, baselines, estimators,
// alpha selection, correction and metrics, repeated over seeds; plus sweeps and
// report files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ejcorr/correction.hpp"
#include "ejcorr/dataio.hpp"
#include "ejcorr/errors.hpp"
#include "ejcorr/estimators.hpp"
#include "ejcorr/judgment.hpp"
#include "ejcorr/learners.hpp"
#include "ejcorr/metrics.hpp"
#include "ejcorr/synthdata.hpp"

namespace ejcorr {

enum class Method { judgment_only, sl, ws, er, ours_ejgan, ours_lr, ours_ridge, ours_knn, ours_mean };

inline constexpr Method kAllMethods[] = {Method::judgment_only, Method::sl,       Method::ws,
                                         Method::er,            Method::ours_ejgan, Method::ours_lr,
                                         Method::ours_ridge,    Method::ours_knn, Method::ours_mean};

inline const char* to_string(Method m) {
    switch (m) {
        case Method::judgment_only: return "judgment_only";
        case Method::sl: return "SL";
        case Method::ws: return "WS";
        case Method::er: return "ER";
        case Method::ours_ejgan: return "ours_ejgan";
        case Method::ours_lr: return "ours_lr";
        case Method::ours_ridge: return "ours_ridge";
        case Method::ours_knn: return "ours_knn";
        case Method::ours_mean: return "ours_mean";
    }
    return "?";
}

inline Method method_from_string(const std::string& s) {
    for (auto m : kAllMethods)
        if (s == to_string(m) || detail::lower(s) == detail::lower(to_string(m))) return m;
    throw UsageError("unknown method '" + s + "'");
}

inline bool is_corrected(Method m) {
    return m == Method::ours_ejgan || m == Method::ours_lr || m == Method::ours_ridge || m == Method::ours_knn ||
           m == Method::ours_mean;
}

inline EstimatorKind estimator_for(Method m) {
    switch (m) {
        case Method::ours_lr: return EstimatorKind::linear_regression;
        case Method::ours_ridge: return EstimatorKind::ridge;
        case Method::ours_knn: return EstimatorKind::knn;
        case Method::ours_mean: return EstimatorKind::mean;
        default: return EstimatorKind::ejgan;
    }
}

enum class SourceKind { synthetic, credit, csv };

struct DataSource {
    SourceKind kind = SourceKind::synthetic;
    SynthConfig synth;              // synthetic: form, n, m, range reading
    std::string path;               // credit / csv
    std::string label_column = "label";
    std::string judgment_column;
    std::string judgment_function;  // csv: registry name
};

struct ExperimentSpec {
    DataSource source;
    LearnerKind model = LearnerKind::logistic;
    std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
    std::size_t repetitions = 1;
    std::uint64_t base_seed = 0;
    double k_percent = 9.0;  // synthetic only
    CorrectionConfig correction;
    BaselineConfig baseline;
    EstimatorParams estimator;

    void validate() const {
        if (methods.empty()) throw UsageError("at least one method is required");
        if (repetitions < 1) throw UsageError("repetitions must be >= 1");
        if (source.kind == SourceKind::synthetic) {
            source.synth.validate();
            if (!(k_percent > 0 && k_percent < 10)) throw UsageError("k must lie in (0, 10)");
        } else if (source.path.empty()) {
            throw UsageError("a data path is required");
        }
        if (source.kind == SourceKind::csv && (source.judgment_column.empty() || source.judgment_function.empty()))
            throw UsageError("csv sources need a judgment column and a judgment function");
        correction.validate();
        baseline.validate();
        estimator.gan.validate();
    }
};

struct RunRecord {
    Method method = Method::sl;
    std::uint64_t seed = 0;
    double k_percent = std::numeric_limits<double>::quiet_NaN();  // NaN for uniform splits
    std::size_t q = 12;
    double accuracy = 0.0;
    double closeness = 0.0;
    double combined = 0.0;
    double alpha = std::numeric_limits<double>::quiet_NaN();      // corrected methods only
    double axis_value = std::numeric_limits<double>::quiet_NaN(); // set by sweeps
    double wall_seconds = 0.0;
    bool ok = true;
    std::string error;
};

struct ExperimentResult {
    std::vector<RunRecord> records;
    std::vector<std::string> profile_names;  // first successful repetition
    std::vector<BucketProfile> profiles;
};

namespace detail {

struct PreparedData {
    Dataset data;
    JudgmentFunction g = JudgmentFunction::guarantor_shift();
    Split split;
};

inline PreparedData prepare(const ExperimentSpec& spec, const std::optional<CreditData>& fixed, std::uint64_t seed) {
    PreparedData p;
    if (spec.source.kind == SourceKind::synthetic) {
        auto cfg = spec.source.synth;
        cfg.seed = seed;
        cfg.holdout_k_percent = spec.k_percent;
        auto ds = generate(cfg);
        p.data = std::move(ds.data);
        p.g = ds.g;
        p.split = split_top_k(p.data.z(), spec.k_percent, mix_seed(seed, 11));
    } else {
        p.data = fixed->data;
        p.g = fixed->g;
        p.split = split_uniform(p.data.rows(), mix_seed(seed, 11));
    }
    return p;
}

inline std::optional<CreditData> load_fixed_source(const DataSource& src) {
    if (src.kind == SourceKind::credit) return prepare_credit(src.path);
    if (src.kind == SourceKind::csv) {
        CreditData c;
        c.data = load_csv(src.path, src.label_column, src.judgment_column);
        c.g = registry_get(src.judgment_function);
        return c;
    }
    return std::nullopt;
}

struct Variant {
    std::size_t q;
    std::optional<double> alpha;  // fixed alpha instead of the grid search
    double axis_value = std::numeric_limits<double>::quiet_NaN();
};

inline std::vector<double> apply_g(const JudgmentFunction& g, std::span<const double> z) {
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = g(z[i]);
    return out;
}

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// One repetition; records are ordered by variant, then by the order of spec.methods.
inline std::vector<RunRecord> run_repetition(const ExperimentSpec& spec, const std::optional<CreditData>& fixed,
                                             std::uint64_t seed, std::span<const Variant> variants,
                                             ExperimentResult* profiles_out) {
    const auto prep = prepare(spec, fixed, seed);
    const Dataset& all = prep.data;
    const auto z_all = all.z();
    const auto [zlo_it, zhi_it] = std::minmax_element(z_all.begin(), z_all.end());
    const double z_lo = *zlo_it, z_hi = *zhi_it;
    const Dataset train = all.subset(prep.split.train);
    const Dataset val = all.subset(prep.split.val);
    const Dataset test = all.subset(prep.split.test);
    const auto z_train = train.z(), z_val = val.z(), z_test = test.z();
    const auto g_train = apply_g(prep.g, z_train), g_val = apply_g(prep.g, z_val), g_test = apply_g(prep.g, z_test);
    const double k_field = spec.source.kind == SourceKind::synthetic ? spec.k_percent
                                                                     : std::numeric_limits<double>::quiet_NaN();

    Clock target_clock;
    const Learner target = fit_sl(train.x, train.y, spec.model, spec.baseline);
    const auto yhat_val = target.predict_proba(val.x);
    const auto yhat_test = target.predict_proba(test.x);
    const double target_seconds = target_clock.seconds();

    struct MethodOutput {
        Method method = Method::sl;
        double seconds = 0.0;
        std::vector<double> test_pred;             // methods without correction
        std::vector<double> k_val, k_test;         // corrected methods
    };
    std::vector<MethodOutput> outputs;
    const Matrix s_train = train.s();
    for (Method m : spec.methods) {
        MethodOutput o;
        o.method = m;
        Clock c;
        switch (m) {
            case Method::judgment_only: o.test_pred = g_test; break;
            case Method::sl:
                o.test_pred = yhat_test;
                o.seconds += target_seconds;
                break;
            case Method::ws: o.test_pred = fit_ws(train.x, g_train, spec.baseline).predict_proba(test.x); break;
            case Method::er:
                o.test_pred = fit_er(train.x, train.y, g_train, spec.baseline).predict_proba(test.x);
                break;
            default: {
                auto params = spec.estimator;
                params.gan.train.seed = mix_seed(seed, 12);
                const auto est = fit_estimator(estimator_for(m), s_train, z_train, params);
                for (std::size_t i = 0; i < val.rows(); ++i) o.k_val.push_back(est.distance_k(val.x.row(i), val.judgment_index));
                for (std::size_t i = 0; i < test.rows(); ++i)
                    o.k_test.push_back(est.distance_k(test.x.row(i), test.judgment_index));
                o.seconds += target_seconds;
            }
        }
        o.seconds += c.seconds();
        outputs.push_back(std::move(o));
    }

    std::vector<RunRecord> records;
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        const auto& v = variants[vi];
        std::vector<BucketProfile> rep_profiles;
        std::vector<std::string> rep_names;
        for (const auto& o : outputs) {
            Clock c;
            RunRecord r;
            r.method = o.method;
            r.seed = seed;
            r.k_percent = k_field;
            r.q = v.q;
            r.axis_value = v.axis_value;
            std::vector<double> pred = o.test_pred;
            if (is_corrected(o.method)) {
                if (v.alpha) {
                    r.alpha = *v.alpha;
                } else {
                    CorrectionConfig cc = spec.correction;
                    cc.q_buckets = v.q;
                    const ValidationSet vs{yhat_val, g_val, o.k_val, val.y, z_val, z_lo, z_hi};
                    r.alpha = select_alpha(vs, cc).alpha;
                }
                pred = correct_all(yhat_test, g_test, o.k_test, r.alpha);
            }
            const auto rep = evaluate(pred, test.y, z_test, g_test, v.q, z_lo, z_hi);
            r.accuracy = rep.accuracy;
            r.closeness = rep.closeness;
            r.combined = rep.combined;
            r.wall_seconds = o.seconds + c.seconds();
            records.push_back(r);
            if (vi == 0) {
                if (rep_profiles.empty()) {
                    rep_names.push_back("judgment");
                    rep_profiles.push_back(rep.judgment);
                }
                rep_names.emplace_back(to_string(o.method));
                rep_profiles.push_back(rep.model);
            }
        }
        if (vi == 0 && profiles_out && profiles_out->profiles.empty()) {
            profiles_out->profile_names = std::move(rep_names);
            profiles_out->profiles = std::move(rep_profiles);
        }
    }
    return records;
}

/// Runs every repetition; a failing repetition yields failed records.
inline ExperimentResult run_records(const ExperimentSpec& spec, std::span<const Variant> variants,
                                    std::exception_ptr* first_error = nullptr) {
    spec.validate();
    const auto fixed = load_fixed_source(spec.source);
    ExperimentResult result;
    for (std::size_t i = 0; i < spec.repetitions; ++i) {
        const std::uint64_t seed = spec.base_seed + i;
        try {
            auto recs = run_repetition(spec, fixed, seed, variants, &result);
            result.records.insert(result.records.end(), recs.begin(), recs.end());
        } catch (const Error& e) {
            if (first_error && !*first_error) *first_error = std::current_exception();
            for (const auto& v : variants)
                for (Method m : spec.methods) {
                    RunRecord r;
                    r.method = m;
                    r.seed = seed;
                    r.k_percent = spec.source.kind == SourceKind::synthetic ? spec.k_percent
                                                                            : std::numeric_limits<double>::quiet_NaN();
                    r.q = v.q;
                    r.axis_value = v.axis_value;
                    r.ok = false;
                    r.error = e.what();
                    result.records.push_back(r);
                }
        }
    }
    return result;
}

}  // namespace detail

/// Runs `spec`; repetition i uses seed base_seed + i. Throws only when every
/// repetition failed.
inline ExperimentResult run(const ExperimentSpec& spec) {
    const detail::Variant v{spec.correction.q_buckets, std::nullopt};
    std::exception_ptr first;
    auto result = detail::run_records(spec, std::span<const detail::Variant>(&v, 1), &first);
    const bool any_ok = std::any_of(result.records.begin(), result.records.end(), [](auto& r) { return r.ok; });
    if (!any_ok && first) std::rethrow_exception(first);
    return result;
}

enum class SweepAxis { k_percent, q, alpha };

inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::k_percent: return "k_percent";
        case SweepAxis::q: return "q";
        case SweepAxis::alpha: return "alpha";
    }
    return "?";
}

inline SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "k" || s == "k_percent") return SweepAxis::k_percent;
    if (s == "q") return SweepAxis::q;
    if (s == "alpha") return SweepAxis::alpha;
    throw UsageError("unknown sweep axis '" + s + "'");
}

/// Runs `spec` once per axis value. q and alpha sweeps reuse each trained
/// repetition for every value; every record carries its axis value.
inline ExperimentResult sweep(const ExperimentSpec& spec, SweepAxis axis, const std::vector<double>& values) {
    if (values.empty()) throw UsageError("sweep needs at least one axis value");
    ExperimentResult out;
    if (axis == SweepAxis::k_percent) {
        if (spec.source.kind != SourceKind::synthetic) throw UsageError("k sweeps need a synthetic source");
        for (double k : values) {
            ExperimentSpec s = spec;
            s.k_percent = k;
            const detail::Variant v{spec.correction.q_buckets, std::nullopt, k};
            auto r = detail::run_records(s, std::span<const detail::Variant>(&v, 1));
            out.records.insert(out.records.end(), r.records.begin(), r.records.end());
            if (out.profiles.empty()) {
                out.profiles = std::move(r.profiles);
                out.profile_names = std::move(r.profile_names);
            }
        }
        return out;
    }
    std::vector<detail::Variant> variants;
    for (double v : values) {
        if (axis == SweepAxis::q) {
            if (!(v >= 2) || v != std::floor(v)) throw UsageError("q values must be integers >= 2");
            variants.push_back({static_cast<std::size_t>(v), std::nullopt, v});
        } else {
            if (!(v > 0)) throw UsageError("alpha values must be positive");
            variants.push_back({spec.correction.q_buckets, v, v});
        }
    }
    auto r = detail::run_records(spec, variants);
    std::stable_sort(r.records.begin(), r.records.end(),
                     [](const RunRecord& a, const RunRecord& b) { return a.axis_value < b.axis_value; });
    return r;
}

// ---------------------------------------------------------------------------
// Summaries and report files

struct Moments {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
};

inline Moments moments(std::span<const double> v) {
    Moments m;
    if (v.empty()) return m;
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return m;
}

struct SummaryRow {
    std::string method;
    double axis_value = std::numeric_limits<double>::quiet_NaN();
    std::size_t runs = 0;
    std::size_t failed = 0;
    Moments accuracy, closeness, combined;
};

struct SignificanceRow {
    std::string method;
    double axis_value = std::numeric_limits<double>::quiet_NaN();
    double mean_difference = std::numeric_limits<double>::quiet_NaN();
    WelchResult welch;
    bool defined = false;
};

namespace detail {

inline bool same_axis(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

/// Distinct (axis value, method) keys in first-seen order.
inline std::vector<std::pair<double, std::string>> group_keys(const std::vector<RunRecord>& records) {
    std::vector<std::pair<double, std::string>> keys;
    for (const auto& r : records) {
        const std::string m = to_string(r.method);
        const bool seen = std::any_of(keys.begin(), keys.end(),
                                      [&](auto& k) { return same_axis(k.first, r.axis_value) && k.second == m; });
        if (!seen) keys.emplace_back(r.axis_value, m);
    }
    return keys;
}

inline std::vector<double> field(const std::vector<RunRecord>& records, double axis, const std::string& method,
                                 double RunRecord::*member) {
    std::vector<double> v;
    for (const auto& r : records)
        if (r.ok && same_axis(r.axis_value, axis) && method == to_string(r.method)) v.push_back(r.*member);
    return v;
}

}  // namespace detail

inline std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
    std::vector<SummaryRow> rows;
    for (const auto& [axis, method] : detail::group_keys(records)) {
        SummaryRow s;
        s.method = method;
        s.axis_value = axis;
        for (const auto& r : records)
            if (detail::same_axis(r.axis_value, axis) && method == to_string(r.method)) (r.ok ? s.runs : s.failed)++;
        s.accuracy = moments(detail::field(records, axis, method, &RunRecord::accuracy));
        s.closeness = moments(detail::field(records, axis, method, &RunRecord::closeness));
        s.combined = moments(detail::field(records, axis, method, &RunRecord::combined));
        rows.push_back(s);
    }
    return rows;
}

/// Welch test of each ours_* method against SL on the combined metric.
inline std::vector<SignificanceRow> significance(const std::vector<RunRecord>& records) {
    std::vector<SignificanceRow> rows;
    for (const auto& [axis, method] : detail::group_keys(records)) {
        if (method.rfind("ours_", 0) != 0) continue;
        SignificanceRow s;
        s.method = method;
        s.axis_value = axis;
        const auto a = detail::field(records, axis, method, &RunRecord::combined);
        const auto b = detail::field(records, axis, "SL", &RunRecord::combined);
        if (a.size() >= 2 && b.size() >= 2) {
            s.mean_difference = moments(a).mean - moments(b).mean;
            s.welch = welch_t(a, b);
            s.defined = true;
        }
        rows.push_back(s);
    }
    return rows;
}

inline constexpr const char* kResultsHeader = "# ejcorr-results v1";

namespace detail {

inline std::string fmt(double v, int precision = 17) {
    if (std::isnan(v)) return "";
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

inline std::string sanitize(std::string s) {
    for (auto& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

inline std::string mean_sd(const Moments& m) {
    if (std::isnan(m.mean)) return "NA";
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << m.mean << " (" << m.sd << ")";
    return os.str();
}

}  // namespace detail

/// Machine-readable results: versioned header line, CSV header, one line per record.
inline void write_results(std::ostream& os, const std::vector<RunRecord>& records) {
    os << kResultsHeader << '\n';
    os << "method,seed,k_percent,q,axis_value,accuracy,closeness,combined,alpha,status,error\n";
    for (const auto& r : records) {
        os << to_string(r.method) << ',' << r.seed << ',' << detail::fmt(r.k_percent) << ',' << r.q << ','
           << detail::fmt(r.axis_value) << ',';
        if (r.ok)
            os << detail::fmt(r.accuracy) << ',' << detail::fmt(r.closeness) << ',' << detail::fmt(r.combined) << ','
               << detail::fmt(r.alpha) << ",ok,";
        else
            os << ",,,,failed," << detail::sanitize(r.error);
        os << '\n';
    }
}

inline std::vector<RunRecord> read_results(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kResultsHeader)
        throw DataError("results file: missing or unsupported version header");
    if (!std::getline(is, line)) throw DataError("results file: missing column header");
    std::vector<RunRecord> out;
    std::size_t lineno = 2;
    auto num = [&](const std::string& s) {
        if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
        double v = 0;
        if (!detail::parse_double(s, v)) throw DataError("results file line " + std::to_string(lineno) + ": bad number '" + s + "'");
        return v;
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = detail::split_csv(line, ',');
        if (f.size() != 11) throw DataError("results file line " + std::to_string(lineno) + ": expected 11 fields");
        RunRecord r;
        r.method = method_from_string(f[0]);
        r.seed = static_cast<std::uint64_t>(std::stoull(f[1]));
        r.k_percent = num(f[2]);
        r.q = static_cast<std::size_t>(std::stoul(f[3]));
        r.axis_value = num(f[4]);
        r.ok = f[9] == "ok";
        if (r.ok) {
            r.accuracy = num(f[5]);
            r.closeness = num(f[6]);
            r.combined = num(f[7]);
            r.alpha = num(f[8]);
        } else {
            r.error = f[10];
        }
        out.push_back(r);
    }
    return out;
}

inline void write_timings(std::ostream& os, const std::vector<RunRecord>& records) {
    os << "method,seed,axis_value,wall_seconds\n";
    for (const auto& r : records)
        os << to_string(r.method) << ',' << r.seed << ',' << detail::fmt(r.axis_value) << ','
           << detail::fmt(r.wall_seconds, 6) << '\n';
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "method,axis_value,runs,failed,accuracy_mean,accuracy_sd,closeness_mean,closeness_sd,combined_mean,combined_sd\n";
    for (const auto& s : rows)
        os << s.method << ',' << detail::fmt(s.axis_value) << ',' << s.runs << ',' << s.failed << ','
           << detail::fmt(s.accuracy.mean) << ',' << detail::fmt(s.accuracy.sd) << ',' << detail::fmt(s.closeness.mean)
           << ',' << detail::fmt(s.closeness.sd) << ',' << detail::fmt(s.combined.mean) << ','
           << detail::fmt(s.combined.sd) << '\n';
}

/// Human-readable table with mean (std) per method and metric.
inline void write_summary_table(std::ostream& os, const std::vector<SummaryRow>& rows, const std::string& axis = "") {
    const bool with_axis = !axis.empty();
    os << std::left;
    if (with_axis) os << std::setw(11) << axis;
    os << std::setw(15) << "method" << std::setw(7) << "runs" << std::setw(17) << "accuracy" << std::setw(17)
       << "closeness" << "combined\n";
    for (const auto& s : rows) {
        if (with_axis) os << std::setw(11) << detail::fmt(s.axis_value, 6);
        os << std::setw(15) << s.method << std::setw(7) << s.runs << std::setw(17) << detail::mean_sd(s.accuracy)
           << std::setw(17) << detail::mean_sd(s.closeness) << detail::mean_sd(s.combined);
        if (s.failed) os << "  [" << s.failed << " failed]";
        os << '\n';
    }
}

inline void write_significance(std::ostream& os, const std::vector<SignificanceRow>& rows) {
    os << "method,axis_value,baseline,mean_difference,t,df,p\n";
    for (const auto& s : rows) {
        os << s.method << ',' << detail::fmt(s.axis_value) << ",SL,";
        if (s.defined)
            os << detail::fmt(s.mean_difference) << ',' << detail::fmt(s.welch.t) << ',' << detail::fmt(s.welch.df)
               << ',' << detail::fmt(s.welch.p);
        else
            os << ",,,";
        os << '\n';
    }
}

/// Writes results.csv, timings.csv, summary.csv, summary.txt, significance.csv
/// and, when available, profiles.csv into `dir`.
inline void report(const ExperimentResult& result, const std::string& dir, const std::string& axis = "") {
    if (result.records.empty()) throw UsageError("nothing to report: no run records");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    auto open = [&](const std::string& name) {
        std::ofstream f(std::filesystem::path(dir) / name);
        if (!f) throw DataError("cannot write '" + (std::filesystem::path(dir) / name).string() + "'");
        return f;
    };
    const auto summary = summarize(result.records);
    {
        auto f = open("results.csv");
        write_results(f, result.records);
    }
    {
        auto f = open("timings.csv");
        write_timings(f, result.records);
    }
    {
        auto f = open("summary.csv");
        write_summary_csv(f, summary);
    }
    {
        auto f = open("summary.txt");
        write_summary_table(f, summary, axis);
    }
    {
        auto f = open("significance.csv");
        write_significance(f, significance(result.records));
    }
    if (!result.profiles.empty()) {
        auto f = open("profiles.csv");
        write_profiles(f, result.profile_names, result.profiles);
    }
}

}  // namespace ejcorr
