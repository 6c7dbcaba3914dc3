#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ejcorr/experiment.hpp"

using namespace ejcorr;
namespace fs = std::filesystem;

namespace {

ExperimentSpec small_synthetic() {
    ExperimentSpec s;
    s.source.kind = SourceKind::synthetic;
    s.source.synth.n = 200;
    s.source.synth.m = 3;
    s.source.synth.form = SynthForm::sigmoid_w1x;
    s.repetitions = 2;
    s.base_seed = 7;
    s.baseline.epochs = 100;
    s.baseline.n_trees = 10;
    s.estimator.gan.train.max_epochs = 5;
    return s;
}

std::string results_text(const ExperimentResult& r) {
    std::ostringstream os;
    write_results(os, r.records);
    return os.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST(Experiment, DeterministicOutput) {
    const auto spec = small_synthetic();
    const auto a = results_text(run(spec));
    const auto b = results_text(run(spec));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.rfind(kResultsHeader, 0), 0u);
    auto other = spec;
    other.base_seed = 8;
    EXPECT_NE(results_text(run(other)), a);
}

TEST(Experiment, RecordInvariants) {
    const auto spec = small_synthetic();
    const auto r = run(spec);
    EXPECT_EQ(r.records.size(), spec.repetitions * std::size(kAllMethods));
    for (const auto& rec : r.records) {
        ASSERT_TRUE(rec.ok) << rec.error;
        EXPECT_NEAR(rec.combined, combined(rec.accuracy, rec.closeness), 1e-12);
        for (double v : {rec.accuracy, rec.closeness, rec.combined}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
        if (rec.method == Method::judgment_only) {
            EXPECT_EQ(rec.closeness, 1.0);
        }
        if (is_corrected(rec.method)) {
            const auto& g = spec.correction.alpha_grid;
            EXPECT_NE(std::find(g.begin(), g.end(), rec.alpha), g.end());
        } else {
            EXPECT_TRUE(std::isnan(rec.alpha));
        }
        EXPECT_EQ(rec.k_percent, 9.0);
        EXPECT_EQ(rec.q, 12u);
    }
    EXPECT_EQ(r.profile_names.front(), "judgment");
    EXPECT_EQ(r.profiles.size(), std::size(kAllMethods) + 1);
}

TEST(Experiment, ExactEstimatorLeavesSlUntouched) {
    // z is an exact linear function of feature a, so the OLS estimator reports k ~ 0.
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(0.0, 1.0);
    const auto path = (fs::temp_directory_path() / "ejcorr_exp_linear.csv").string();
    {
        std::ofstream out(path);
        out << "a,b,z,label\n";
        for (int i = 0; i < 300; ++i) {
            const double a = std::round(nd(rng) * 100) / 100, b = nd(rng);
            const double z = (2 * a + 1 + 10) / 20;
            out << a << ',' << b << ',' << z << ',' << (a + b + 0.3 * nd(rng) > 0 ? 1 : 0) << '\n';
        }
    }
    ExperimentSpec spec;
    spec.source.kind = SourceKind::csv;
    spec.source.path = path;
    spec.source.judgment_column = "z";
    spec.source.judgment_function = "it_price";
    spec.methods = {Method::sl, Method::ours_lr};
    spec.repetitions = 3;
    const auto r = run(spec);
    for (std::size_t i = 0; i < r.records.size(); i += 2) {
        EXPECT_EQ(r.records[i].method, Method::sl);
        EXPECT_NEAR(r.records[i + 1].accuracy, r.records[i].accuracy, 0.01);
        EXPECT_TRUE(std::isnan(r.records[i].k_percent));
    }
}

TEST(Experiment, ValidationErrors) {
    auto spec = small_synthetic();
    spec.methods.clear();
    EXPECT_THROW(run(spec), UsageError);
    spec = small_synthetic();
    spec.repetitions = 0;
    EXPECT_THROW(run(spec), UsageError);
    spec = small_synthetic();
    spec.k_percent = 12;
    EXPECT_THROW(run(spec), UsageError);
    spec = {};
    spec.source.kind = SourceKind::csv;
    spec.source.path = "x.csv";
    EXPECT_THROW(spec.validate(), UsageError);
    EXPECT_THROW(method_from_string("magic"), UsageError);
    EXPECT_EQ(method_from_string("sl"), Method::sl);
}

TEST(Experiment, FailedRepetitionsAreRecorded) {
    auto spec = small_synthetic();
    spec.methods = {Method::sl, Method::ours_ejgan};
    spec.estimator.gan.train.batch_size = 100000;
    EXPECT_THROW(run(spec), DataError);
    const detail::Variant v{12, std::nullopt};
    const auto r = detail::run_records(spec, std::span<const detail::Variant>(&v, 1));
    ASSERT_EQ(r.records.size(), 4u);
    for (const auto& rec : r.records) {
        EXPECT_FALSE(rec.ok);
        EXPECT_NE(rec.error.find("batch_size"), std::string::npos);
    }
    const auto rows = summarize(r.records);
    EXPECT_EQ(rows.front().failed, 2u);
    EXPECT_EQ(rows.front().runs, 0u);
}

TEST(Experiment, ResultsRoundTrip) {
    auto spec = small_synthetic();
    spec.methods = {Method::judgment_only, Method::sl, Method::ours_mean};
    auto recs = run(spec).records;
    RunRecord bad;
    bad.method = Method::er;
    bad.seed = 99;
    bad.ok = false;
    bad.error = "broke, badly";
    recs.push_back(bad);
    std::ostringstream os;
    write_results(os, recs);
    std::istringstream is(os.str());
    const auto back = read_results(is);
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        EXPECT_EQ(back[i].method, recs[i].method);
        EXPECT_EQ(back[i].seed, recs[i].seed);
        EXPECT_EQ(back[i].ok, recs[i].ok);
        if (recs[i].ok) {
            EXPECT_EQ(back[i].combined, recs[i].combined);
            EXPECT_EQ(back[i].accuracy, recs[i].accuracy);
        }
    }
    EXPECT_EQ(back.back().error, "broke; badly");
    std::istringstream wrong("# other v9\n");
    EXPECT_THROW(read_results(wrong), DataError);
}

TEST(Sweep, SingleValueMatchesRun) {
    auto spec = small_synthetic();
    spec.methods = {Method::sl, Method::ours_knn};
    const auto base = run(spec);
    const auto s = sweep(spec, SweepAxis::k_percent, {9.0});
    ASSERT_EQ(s.records.size(), base.records.size());
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        EXPECT_EQ(s.records[i].combined, base.records[i].combined);
        EXPECT_EQ(s.records[i].axis_value, 9.0);
    }
}

TEST(Sweep, AxisGroups) {
    auto spec = small_synthetic();
    spec.methods = {Method::sl, Method::ours_mean};
    const auto q = sweep(spec, SweepAxis::q, {5, 7, 9});
    EXPECT_EQ(summarize(q.records).size(), 6u);
    for (const auto& r : q.records) EXPECT_EQ(static_cast<double>(r.q), r.axis_value);
    const auto a = sweep(spec, SweepAxis::alpha, {0.5, 2.0});
    for (const auto& r : a.records) {
        if (r.method == Method::ours_mean) {
            EXPECT_EQ(r.alpha, r.axis_value);
        }
    }
    const auto k = sweep(spec, SweepAxis::k_percent, {1, 5});
    EXPECT_EQ(summarize(k.records).size(), 4u);
    EXPECT_THROW(sweep(spec, SweepAxis::q, {1.5}), UsageError);
    EXPECT_THROW(sweep(spec, SweepAxis::alpha, {}), UsageError);
    EXPECT_EQ(sweep_axis_from_string("k"), SweepAxis::k_percent);
}

TEST(Summaries, MomentsAndSignificance) {
    const auto m = moments(std::vector<double>{1, 2, 3, 4});
    EXPECT_DOUBLE_EQ(m.mean, 2.5);
    EXPECT_NEAR(m.sd, std::sqrt(5.0 / 3.0), 1e-15);
    std::vector<RunRecord> recs;
    for (int i = 0; i < 4; ++i) {
        RunRecord a, b;
        a.method = Method::sl;
        b.method = Method::ours_ejgan;
        a.combined = 0.5 + 0.01 * i;
        b.combined = 0.7 + 0.01 * i;
        recs.push_back(a);
        recs.push_back(b);
    }
    const auto sig = significance(recs);
    ASSERT_EQ(sig.size(), 1u);
    EXPECT_NEAR(sig[0].mean_difference, 0.2, 1e-12);
    EXPECT_LT(sig[0].welch.p, 1e-4);
}

TEST(Report, WritesAllFiles) {
    auto spec = small_synthetic();
    spec.methods = {Method::judgment_only, Method::sl, Method::ours_mean};
    const auto r = run(spec);
    const auto dir = fs::temp_directory_path() / "ejcorr_report_test";
    fs::remove_all(dir);
    report(r, dir.string());
    for (const char* f : {"results.csv", "timings.csv", "summary.csv", "summary.txt", "significance.csv", "profiles.csv"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto table = slurp(dir / "summary.txt");
    EXPECT_NE(table.find("judgment_only"), std::string::npos);
    EXPECT_NE(table.find("1.000 (0.000)"), std::string::npos);
    EXPECT_EQ(slurp(dir / "results.csv").find("wall"), std::string::npos);
    EXPECT_THROW(report(ExperimentResult{}, dir.string()), UsageError);
}
