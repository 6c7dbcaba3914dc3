#pragma once

// Expert judgment functions g: z -> [0, 1] and the name registry used by the
// command-line tool.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ejcorr/errors.hpp"

namespace ejcorr {

/// Functional forms of the synthetic benchmark.
enum class SynthForm { sigmoid_w1x, exp_w1x, exp_w1x_squared, exp_two_weights };

inline const char* to_string(SynthForm f) {
    switch (f) {
        case SynthForm::sigmoid_w1x: return "sigmoid_w1x";
        case SynthForm::exp_w1x: return "exp_w1x";
        case SynthForm::exp_w1x_squared: return "exp_w1x_squared";
        case SynthForm::exp_two_weights: return "exp_two_weights";
    }
    return "?";
}

inline SynthForm synth_form_from_string(const std::string& s) {
    if (s == "sigmoid_w1x" || s == "sigmoid") return SynthForm::sigmoid_w1x;
    if (s == "exp_w1x" || s == "exp") return SynthForm::exp_w1x;
    if (s == "exp_w1x_squared" || s == "exp_squared") return SynthForm::exp_w1x_squared;
    if (s == "exp_two_weights" || s == "two_weights") return SynthForm::exp_two_weights;
    throw UsageError("unknown synthetic form '" + s + "'");
}

/// Raw (unnormalized) form value at linear score u. The two-weight form is
/// evaluated at the combined score (W1 + W2) . x, so it matches exp_w1x here.
inline double raw_form(SynthForm f, double u) {
    switch (f) {
        case SynthForm::sigmoid_w1x: return 1.0 / (1.0 + std::exp(-u));
        case SynthForm::exp_w1x:
        case SynthForm::exp_two_weights: return std::exp(u);
        case SynthForm::exp_w1x_squared: return std::exp(u * u);
    }
    return u;
}

class JudgmentFunction {
public:
    enum class Kind { price_negation, guarantor_shift, synthetic_form, custom_table };

    /// g(z) = 1 - z for a price already min-max normalized in log scale.
    static JudgmentFunction price_negation() { return JudgmentFunction(Kind::price_negation); }

    /// g(z) = 0.5 + 0.5 z for a binary guarantor indicator.
    static JudgmentFunction guarantor_shift() { return JudgmentFunction(Kind::guarantor_shift); }

    /// g(z) = (form(c z) - lo) / (hi - lo), clamped to [0, 1].
    static JudgmentFunction synthetic(SynthForm form, double coefficient, double lo, double hi) {
        JudgmentFunction g(Kind::synthetic_form);
        g.form_ = form;
        g.coefficient_ = coefficient;
        g.lo_ = lo;
        g.hi_ = hi;
        if (!(hi > lo)) g.warning_ = "judgment function is constant over the data (degenerate bounds)";
        return g;
    }

    /// Piecewise-linear interpolation of (z, g) points, clamped at both ends.
    /// Points are sorted by z; unsorted input is accepted with a warning.
    static JudgmentFunction table(std::vector<double> z, std::vector<double> g) {
        if (z.size() != g.size() || z.empty()) throw DataError("judgment table needs matching, non-empty z and g");
        JudgmentFunction f(Kind::custom_table);
        std::vector<std::size_t> idx(z.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        if (!std::is_sorted(z.begin(), z.end())) f.warning_ = "judgment table is not sorted by z";
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return z[a] < z[b]; });
        for (auto i : idx) {
            if (!std::isfinite(z[i]) || !std::isfinite(g[i])) throw DataError("judgment table has non-finite values");
            if (g[i] < 0.0 || g[i] > 1.0) throw DataError("judgment table values must lie in [0, 1]");
            f.table_z_.push_back(z[i]);
            f.table_g_.push_back(g[i]);
        }
        for (std::size_t i = 1; i < f.table_g_.size(); ++i)
            if (f.table_g_[i] < f.table_g_[i - 1] && f.warning_.empty())
                f.warning_ = "judgment table is not monotone";
        return f;
    }

    Kind kind() const { return kind_; }
    const std::string& warning() const { return warning_; }
    SynthForm form() const { return form_; }
    double coefficient() const { return coefficient_; }
    double lower_bound() const { return lo_; }
    double upper_bound() const { return hi_; }

    double operator()(double z) const { return evaluate(z); }

    double evaluate(double z) const {
        switch (kind_) {
            case Kind::price_negation: return std::clamp(1.0 - z, 0.0, 1.0);
            case Kind::guarantor_shift: return std::clamp(0.5 + 0.5 * z, 0.0, 1.0);
            case Kind::synthetic_form: {
                if (!(hi_ > lo_)) return 0.5;
                const double v = (raw_form(form_, coefficient_ * z) - lo_) / (hi_ - lo_);
                if (std::isnan(v)) return 1.0;  // inf/inf far outside the data range
                return std::clamp(v, 0.0, 1.0);
            }
            case Kind::custom_table: {
                if (z <= table_z_.front()) return table_g_.front();
                if (z >= table_z_.back()) return table_g_.back();
                const auto it = std::upper_bound(table_z_.begin(), table_z_.end(), z);
                const std::size_t j = static_cast<std::size_t>(it - table_z_.begin());
                const double z0 = table_z_[j - 1], z1 = table_z_[j];
                const double t = z1 > z0 ? (z - z0) / (z1 - z0) : 0.0;
                return table_g_[j - 1] + t * (table_g_[j] - table_g_[j - 1]);
            }
        }
        return 0.5;
    }

    /// Registry name that reproduces this function (custom tables excepted).
    std::string name() const {
        switch (kind_) {
            case Kind::price_negation: return "it_price";
            case Kind::guarantor_shift: return "credit_guarantor";
            case Kind::synthetic_form: {
                std::ostringstream os;
                os << std::setprecision(17) << "synthetic:" << to_string(form_) << ':' << coefficient_ << ':' << lo_
                   << ':' << hi_;
                return os.str();
            }
            case Kind::custom_table: return "custom";
        }
        return "?";
    }

private:
    explicit JudgmentFunction(Kind k) : kind_(k) {}

    Kind kind_;
    SynthForm form_ = SynthForm::sigmoid_w1x;
    double coefficient_ = 0.0, lo_ = 0.0, hi_ = 1.0;
    std::vector<double> table_z_, table_g_;
    std::string warning_;
};

/// Reads a two-column (z, g) CSV, with or without a header row.
inline JudgmentFunction load_judgment_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open judgment table '" + path + "'");
    std::vector<double> z, g;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DataError(path + ":" + std::to_string(lineno) + ": expected 'z,g'");
        try {
            std::size_t p1 = 0, p2 = 0;
            const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
            const double zv = std::stod(a, &p1), gv = std::stod(b, &p2);
            z.push_back(zv);
            g.push_back(gv);
        } catch (const std::exception&) {
            if (lineno == 1) continue;  // header
            throw DataError(path + ":" + std::to_string(lineno) + ": unparseable judgment table row");
        }
    }
    return JudgmentFunction::table(std::move(z), std::move(g));
}

/// it_price | credit_guarantor | synthetic:<form>:<c>:<lo>:<hi> | custom:<file>
inline JudgmentFunction registry_get(const std::string& name) {
    if (name == "it_price") return JudgmentFunction::price_negation();
    if (name == "credit_guarantor") return JudgmentFunction::guarantor_shift();
    if (name.rfind("custom:", 0) == 0) {
        auto f = load_judgment_table(name.substr(7));
        if (!f.warning().empty()) std::cerr << "warning: " << f.warning() << '\n';
        return f;
    }
    if (name.rfind("synthetic:", 0) == 0) {
        std::vector<std::string> parts;
        std::stringstream ss(name.substr(10));
        std::string part;
        while (std::getline(ss, part, ':')) parts.push_back(part);
        if (parts.size() != 4) throw UsageError("expected synthetic:<form>:<c>:<lo>:<hi>, got '" + name + "'");
        try {
            return JudgmentFunction::synthetic(synth_form_from_string(parts[0]), std::stod(parts[1]),
                                               std::stod(parts[2]), std::stod(parts[3]));
        } catch (const std::invalid_argument&) {
            throw UsageError("malformed synthetic judgment function '" + name + "'");
        }
    }
    throw UsageError("unknown judgment function '" + name + "'");
}

}  // namespace ejcorr
