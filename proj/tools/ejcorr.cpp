// Command-line front end: generate, train, correct, evaluate, run, sweep, report.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ejcorr/ejcorr.hpp"

using namespace ejcorr;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!detail::trim(item).empty()) out.push_back(detail::trim(item));
    return out;
}

std::vector<double> parse_numbers(const std::string& s, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        double v;
        if (!detail::parse_double(item, v)) throw UsageError("bad number '" + item + "' in " + what);
        out.push_back(v);
    }
    return out;
}

// Expands `--config FILE` into `--key=value` tokens placed right after the
// subcommand, so flags given on the command line come later and win.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        std::size_t used = 0;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            used = 2;
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            used = 1;
        } else {
            continue;
        }
        std::ifstream in(path);
        if (!in) throw DataError("cannot open config file '" + path + "'");
        std::vector<std::string> tokens;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            line = detail::trim(line.substr(0, line.find('#')));
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
            tokens.push_back("--" + detail::trim(line.substr(0, eq)) + "=" + detail::trim(line.substr(eq + 1)));
        }
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + used));
        args.insert(args.begin() + 1, tokens.begin(), tokens.end());
        break;
    }
    std::reverse(args.begin(), args.end());
    return args;
}

struct SpecOptions {
    std::string source = "synthetic";
    std::string form = "sigmoid";
    std::size_t n = 1000;
    std::size_t m = 0;
    bool narrow = false;
    std::string data;
    std::string label_column = "label";
    std::string judgment_column;
    std::string judgment_function;
    std::string model = "logistic";
    std::string methods;
    std::size_t repetitions = 0;
    std::uint64_t seed = 0;
    double k = 9.0;
    std::size_t q = 12;
    std::string alpha_grid;
    GanConfig gan;
    BaselineConfig baseline;
    double ridge_penalty = 1.0;
    std::size_t knn_k = 5;
    std::string out = "results";

    void attach(CLI::App* app) {
        app->add_option("--source", source, "synthetic, credit or csv")->capture_default_str();
        app->add_option("--form", form, "synthetic form: sigmoid, exp, exp_squared, exp_two_weights")
            ->capture_default_str();
        app->add_option("--n", n, "synthetic rows")->capture_default_str();
        app->add_option("--m", m, "synthetic features (0 draws from 1..20)");
        app->add_flag("--narrow", narrow, "use [-1,1] features for the exponential form");
        app->add_option("--data", data, "data file (credit default: data/german.data)");
        app->add_option("--label-column", label_column)->capture_default_str();
        app->add_option("--judgment-column", judgment_column);
        app->add_option("--judgment-function", judgment_function, "registry name, e.g. it_price or custom:FILE");
        app->add_option("--model", model, "logistic or gradient_boosting")->capture_default_str();
        app->add_option("--methods", methods, "comma list; default all");
        app->add_option("--repetitions", repetitions, "default 100 synthetic, 20 otherwise");
        app->add_option("--seed", seed, "base seed")->capture_default_str();
        app->add_option("--k", k, "holdout percent for synthetic data")->capture_default_str();
        app->add_option("--q", q, "bucket count")->capture_default_str();
        app->add_option("--alpha-grid", alpha_grid, "comma list");
        app->add_option("--gan-epochs", gan.train.max_epochs)->capture_default_str();
        app->add_option("--gan-batch", gan.train.batch_size)->capture_default_str();
        app->add_option("--gan-hidden", gan.train.hidden_size)->capture_default_str();
        app->add_option("--gan-dropout", gan.train.dropout_rate)->capture_default_str();
        app->add_option("--gan-lr", gan.learn_rate)->capture_default_str();
        app->add_flag("--non-saturating", gan.non_saturating);
        app->add_option("--epochs", baseline.epochs, "logistic epochs")->capture_default_str();
        app->add_option("--learn-rate", baseline.learn_rate)->capture_default_str();
        app->add_option("--l2", baseline.l2_lambda)->capture_default_str();
        app->add_option("--er-lambda", baseline.er_lambda)->capture_default_str();
        app->add_option("--er-temperature", baseline.er_temperature)->capture_default_str();
        app->add_option("--trees", baseline.n_trees)->capture_default_str();
        app->add_option("--depth", baseline.max_depth)->capture_default_str();
        app->add_option("--shrinkage", baseline.shrinkage)->capture_default_str();
        app->add_option("--ridge-penalty", ridge_penalty)->capture_default_str();
        app->add_option("--knn-k", knn_k)->capture_default_str();
        app->add_option("--out", out, "output directory")->capture_default_str();
    }

    ExperimentSpec build() const {
        ExperimentSpec s;
        const auto kind = detail::lower(source);
        if (kind == "synthetic") {
            s.source.kind = SourceKind::synthetic;
        } else if (kind == "credit") {
            s.source.kind = SourceKind::credit;
            s.source.path = data.empty() ? "data/german.data" : data;
        } else if (kind == "csv") {
            s.source.kind = SourceKind::csv;
            s.source.path = data;
        } else {
            throw UsageError("unknown source '" + source + "'");
        }
        s.source.synth.form = synth_form_from_string(form);
        s.source.synth.n = n;
        if (m > 0) s.source.synth.m = m;
        if (narrow) s.source.synth.narrow = NarrowRange::exp_form;
        s.source.label_column = label_column;
        s.source.judgment_column = judgment_column;
        s.source.judgment_function = judgment_function;
        s.model = learner_kind_from_string(model);
        if (!methods.empty()) {
            s.methods.clear();
            for (const auto& name : split_list(methods)) s.methods.push_back(method_from_string(name));
        }
        s.repetitions = repetitions > 0 ? repetitions : (s.source.kind == SourceKind::synthetic ? 100 : 20);
        s.base_seed = seed;
        s.k_percent = k;
        s.correction.q_buckets = q;
        if (!alpha_grid.empty()) s.correction.alpha_grid = parse_numbers(alpha_grid, "--alpha-grid");
        s.baseline = baseline;
        s.estimator.gan = gan;
        s.estimator.ridge_penalty = ridge_penalty;
        s.estimator.knn_k = knn_k;
        s.validate();
        return s;
    }
};

std::string axis_label(SweepAxis axis) { return axis == SweepAxis::k_percent ? "k" : to_string(axis); }

void finish(const ExperimentResult& result, const std::string& out, const std::string& axis) {
    report(result, out, axis);
    write_summary_table(std::cout, summarize(result.records), axis);
    std::size_t failed = 0;
    for (const auto& r : result.records) failed += !r.ok;
    if (failed) std::cerr << "warning: " << failed << " run records failed; see " << out << "/results.csv\n";
    std::cerr << "wrote " << out << "\n";
}

struct DataOptions {
    std::string path;
    std::string label_column = "label";
    std::string judgment_column;

    void attach(CLI::App* app, bool required = true) {
        auto* o = app->add_option("--data", path, "CSV file");
        if (required) o->required();
        app->add_option("--label-column", label_column)->capture_default_str();
        app->add_option("--judgment-column", judgment_column)->required();
    }
    Dataset load() const { return load_csv(path, label_column, judgment_column); }
};

std::vector<double> judgment_scores(const JudgmentFunction& g, const Dataset& d) {
    const auto z = d.z();
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = g(z[i]);
    return out;
}

void warn_judgment(const JudgmentFunction& g) {
    if (!g.warning().empty()) std::cerr << "warning: " << g.warning() << "\n";
}

template <class T>
T load_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return T::load(in);
}

template <class T>
void save_text(const T& obj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    obj.save(out);
}

struct Predictions {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> values;  // per column

    const std::vector<double>& column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return values[i];
        throw DataError("predictions have no column '" + name + "'");
    }
};

Predictions read_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    Predictions p;
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
    p.columns = detail::split_csv(line, ',');
    p.values.resize(p.columns.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv(line, ',');
        if (cells.size() != p.columns.size())
            throw DataError(path + ":" + std::to_string(lineno) + ": wrong number of fields");
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v;
            if (!detail::parse_double(cells[c], v))
                throw DataError(path + ":" + std::to_string(lineno) + ": bad number '" + cells[c] + "'");
            p.values[c].push_back(v);
        }
    }
    return p;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Judgment-corrected classification experiments"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_unused;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_unused, "flat key = value file; flags override it");
    };

    // generate
    auto* gen = app.add_subcommand("generate", "write one synthetic dataset as CSV");
    std::string gen_form = "sigmoid", gen_out;
    std::size_t gen_n = 1000, gen_m = 0;
    std::uint64_t gen_seed = 0;
    bool gen_narrow = false;
    gen->add_option("--form", gen_form)->capture_default_str();
    gen->add_option("--n", gen_n)->capture_default_str();
    gen->add_option("--m", gen_m, "features (0 draws from 1..20)");
    gen->add_option("--seed", gen_seed)->capture_default_str();
    gen->add_flag("--narrow", gen_narrow);
    gen->add_option("--out", gen_out, "CSV path")->required();
    add_config(gen);

    // train
    auto* train = app.add_subcommand("train", "fit a target model and optionally an EJ-GAN");
    DataOptions train_data;
    train_data.attach(train);
    std::string train_model = "logistic", train_method = "SL", train_judgment, train_out, train_gan_out;
    std::uint64_t train_seed = 0;
    BaselineConfig train_baseline;
    GanConfig train_gan;
    train->add_option("--model", train_model)->capture_default_str();
    train->add_option("--method", train_method, "SL, WS or ER")->capture_default_str();
    train->add_option("--judgment-function", train_judgment, "needed by WS and ER");
    train->add_option("--out", train_out, "model file")->required();
    train->add_option("--gan-out", train_gan_out, "also train an EJ-GAN and save it here");
    train->add_option("--seed", train_seed)->capture_default_str();
    train->add_option("--epochs", train_baseline.epochs)->capture_default_str();
    train->add_option("--trees", train_baseline.n_trees)->capture_default_str();
    train->add_option("--gan-epochs", train_gan.train.max_epochs)->capture_default_str();
    train->add_option("--gan-lr", train_gan.learn_rate)->capture_default_str();
    add_config(train);

    // correct
    auto* corr = app.add_subcommand("correct", "blend model and judgment predictions");
    DataOptions corr_data;
    corr_data.attach(corr);
    std::string corr_model, corr_gan, corr_estimator = "ejgan", corr_train, corr_val, corr_judgment, corr_out,
                                      corr_grid;
    double corr_alpha = 1.0;
    std::size_t corr_q = 12;
    corr->add_option("--model", corr_model, "model file from train")->required();
    corr->add_option("--gan", corr_gan, "EJ-GAN file from train");
    corr->add_option("--estimator", corr_estimator, "fit this estimator on --train instead of loading a GAN");
    corr->add_option("--train", corr_train, "training CSV for non-GAN estimators");
    corr->add_option("--validation", corr_val, "validation CSV; selects alpha from the grid");
    corr->add_option("--alpha", corr_alpha, "used when no validation set is given")->capture_default_str();
    corr->add_option("--alpha-grid", corr_grid, "comma list");
    corr->add_option("--q", corr_q)->capture_default_str();
    corr->add_option("--judgment-function", corr_judgment)->required();
    corr->add_option("--out", corr_out, "predictions CSV")->required();
    add_config(corr);

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "accuracy, closeness and combined for a predictions file");
    DataOptions eval_data;
    eval_data.attach(eval);
    std::string eval_pred, eval_column = "y_final", eval_judgment;
    std::size_t eval_q = 12;
    eval->add_option("--predictions", eval_pred)->required();
    eval->add_option("--column", eval_column)->capture_default_str();
    eval->add_option("--judgment-function", eval_judgment)->required();
    eval->add_option("--q", eval_q)->capture_default_str();
    add_config(eval);

    // run / sweep
    auto* run_cmd = app.add_subcommand("run", "repeat the full experiment over seeds and write reports");
    SpecOptions run_opts;
    run_opts.attach(run_cmd);
    add_config(run_cmd);

    auto* sweep_cmd = app.add_subcommand("sweep", "run the experiment for each value of one axis");
    SpecOptions sweep_opts;
    sweep_opts.attach(sweep_cmd);
    std::string sweep_axis = "k", sweep_values;
    sweep_cmd->add_option("--axis", sweep_axis, "k, q or alpha")->capture_default_str();
    sweep_cmd->add_option("--values", sweep_values, "comma list")->required();
    add_config(sweep_cmd);

    // report
    auto* rep = app.add_subcommand("report", "rebuild summaries from a results file");
    std::string rep_results, rep_out, rep_axis;
    rep->add_option("--results", rep_results)->required();
    rep->add_option("--out", rep_out)->required();
    rep->add_option("--axis", rep_axis, "label for the axis column");
    add_config(rep);

    try {
        auto args = expand_config(argc, argv);
        try {
            app.parse(std::move(args));
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 1;
        }

        if (*gen) {
            SynthConfig c;
            c.form = synth_form_from_string(gen_form);
            c.n = gen_n;
            if (gen_m > 0) c.m = gen_m;
            c.seed = gen_seed;
            if (gen_narrow) c.narrow = NarrowRange::exp_form;
            const auto ds = generate(c);
            save_csv(ds.data, gen_out);
            std::cout << "judgment-column = " << ds.data.judgment_name << "\n"
                      << "judgment-function = " << ds.g.name() << "\n";
        } else if (*train) {
            const auto d = train_data.load();
            const auto x = d.x;
            const auto kind = learner_kind_from_string(train_model);
            const auto method = method_from_string(train_method);
            std::optional<Learner> model;
            if (method == Method::sl) {
                model = fit_sl(x, d.y, kind, train_baseline);
            } else if (method == Method::ws || method == Method::er) {
                if (train_judgment.empty()) throw UsageError("--judgment-function is required for WS and ER");
                const auto g = registry_get(train_judgment);
                warn_judgment(g);
                const auto scores = judgment_scores(g, d);
                model = method == Method::ws ? fit_ws(x, scores, train_baseline) : fit_er(x, d.y, scores, train_baseline);
            } else {
                throw UsageError("--method must be SL, WS or ER");
            }
            if (!model->warning().empty()) std::cerr << "warning: " << model->warning() << "\n";
            save_text(*model, train_out);
            if (!train_gan_out.empty()) {
                train_gan.train.seed = train_seed;
                const auto z = d.z();
                auto trained = EjGan::train(d.s(), z, train_gan);
                save_text(trained.model, train_gan_out);
            }
        } else if (*corr) {
            const auto d = corr_data.load();
            const auto model = load_text<Learner>(corr_model);
            const auto g = registry_get(corr_judgment);
            warn_judgment(g);
            JudgmentEstimator est;
            if (!corr_gan.empty()) {
                est = JudgmentEstimator::from_gan(load_text<EjGan>(corr_gan));
            } else {
                if (corr_train.empty()) throw UsageError("give --gan or --train with --estimator");
                const auto t = load_csv(corr_train, corr_data.label_column, corr_data.judgment_column);
                const auto z = t.z();
                est = fit_estimator(estimator_kind_from_string(corr_estimator), t.s(), z);
            }
            auto scored = [&](const Dataset& set) {
                std::vector<double> y_hat = model.predict_proba(set.x), k(set.rows());
                for (std::size_t r = 0; r < set.rows(); ++r) k[r] = est.distance_k(set.x.row(r), set.judgment_index);
                return std::pair{y_hat, k};
            };
            CorrectionConfig cc;
            cc.alpha = corr_alpha;
            cc.q_buckets = corr_q;
            if (!corr_grid.empty()) cc.alpha_grid = parse_numbers(corr_grid, "--alpha-grid");
            cc.validate();
            double alpha = corr_alpha;
            if (!corr_val.empty()) {
                const auto v = load_csv(corr_val, corr_data.label_column, corr_data.judgment_column);
                const auto [vy, vk] = scored(v);
                const auto vg = judgment_scores(g, v);
                const auto vz = v.z();
                const auto [lo, hi] = std::minmax_element(vz.begin(), vz.end());
                alpha = select_alpha(ValidationSet{vy, vg, vk, v.y, vz, *lo, *hi}, cc).alpha;
                std::cerr << "selected alpha " << alpha << "\n";
            }
            const auto [y_hat, k] = scored(d);
            const auto gz = judgment_scores(g, d);
            std::ofstream out(corr_out);
            if (!out) throw DataError("cannot write '" + corr_out + "'");
            out << "y_hat,g,k,w,y_final\n";
            for (std::size_t r = 0; r < d.rows(); ++r) {
                const auto c = correct(y_hat[r], gz[r], k[r], alpha);
                out << detail::format_double(c.y_hat) << ',' << detail::format_double(c.g_of_z) << ','
                    << detail::format_double(c.k) << ',' << detail::format_double(c.w) << ','
                    << detail::format_double(c.y_final) << '\n';
            }
        } else if (*eval) {
            const auto d = eval_data.load();
            const auto p = read_predictions(eval_pred);
            const auto& pred = p.column(eval_column);
            if (pred.size() != d.rows()) throw DataError("predictions and data have different row counts");
            const auto g = registry_get(eval_judgment);
            warn_judgment(g);
            const auto z = d.z();
            const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
            const auto r = evaluate(pred, d.y, z, judgment_scores(g, d), eval_q, *lo, *hi);
            std::cout << std::setprecision(6) << "accuracy " << r.accuracy << "\ncloseness " << r.closeness
                      << "\ncombined " << r.combined << "\n";
        } else if (*run_cmd) {
            const auto spec = run_opts.build();
            finish(run(spec), run_opts.out, "");
        } else if (*sweep_cmd) {
            const auto spec = sweep_opts.build();
            const auto axis = sweep_axis_from_string(sweep_axis);
            finish(sweep(spec, axis, parse_numbers(sweep_values, "--values")), sweep_opts.out, axis_label(axis));
        } else if (*rep) {
            std::ifstream in(rep_results);
            if (!in) throw DataError("cannot open '" + rep_results + "'");
            ExperimentResult r;
            r.records = read_results(in);
            finish(r, rep_out, rep_axis);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
