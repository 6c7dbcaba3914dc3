#pragma once

// Dataset container, CSV ingestion/export and the German-credit loader.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ejcorr/errors.hpp"
#include "ejcorr/judgment.hpp"
#include "ejcorr/matrix.hpp"

namespace ejcorr {

struct Dataset {
    Matrix x;
    std::vector<double> y;
    std::vector<std::string> feature_names;
    std::size_t judgment_index = 0;
    std::string judgment_name;

    std::size_t rows() const { return x.rows(); }
    std::size_t cols() const { return x.cols(); }

    std::vector<double> z() const { return x.column(judgment_index); }
    Matrix s() const { return x.without_column(judgment_index); }

    Dataset subset(std::span<const std::size_t> idx) const {
        Dataset d;
        d.x = x.select_rows(idx);
        d.y.reserve(idx.size());
        for (auto i : idx) d.y.push_back(y[i]);
        d.feature_names = feature_names;
        d.judgment_index = judgment_index;
        d.judgment_name = judgment_name;
        return d;
    }

    void validate() const {
        if (x.rows() < 1) throw DataError("dataset has no rows");
        if (y.size() != x.rows()) throw DataError("dataset label count does not match row count");
        if (judgment_index >= x.cols()) throw DataError("judgment index out of range");
        if (feature_names.size() != x.cols()) throw DataError("feature name count does not match column count");
        for (double v : x.data())
            if (!std::isfinite(v)) throw DataError("dataset contains non-finite values");
        for (double v : y)
            if (v != 0.0 && v != 1.0) throw DataError("labels must be 0 or 1");
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct CsvOptions {
    char delimiter = ',';
    bool drop_first = false;
    std::set<std::string> categorical;  // forced categorical columns
    std::set<std::string> positive_labels{"1", "true", "yes", "good"};
    std::set<std::string> negative_labels{"0", "false", "no", "bad"};
};

namespace detail {

inline std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c); };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

inline std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

/// Splits one CSV record; double quotes group fields and "" escapes a quote.
inline std::vector<std::string> split_csv(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline bool parse_double(const std::string& s, double& v) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    if (*b == '+') ++b;
    const auto r = std::from_chars(b, e, v);
    return r.ec == std::errc() && r.ptr == e && std::isfinite(v);
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace detail

/// Reads a headed CSV. Numeric columns are parsed as doubles; categorical ones
/// (non-numeric in the first row, or listed in options.categorical) become
/// indicator columns "name=category" in alphabetical category order.
inline Dataset load_csv(const std::string& path, const std::string& label_column, const std::string& judgment_column,
                        const CsvOptions& options = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
    std::vector<std::string> header;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv(line, options.delimiter);
        if (header.empty()) {
            header = std::move(cells);
            continue;
        }
        if (cells.size() != header.size())
            throw DataError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(cells.size()));
        rows.push_back(std::move(cells));
        line_numbers.push_back(lineno);
    }
    if (header.empty()) throw DataError("'" + path + "' is empty");
    if (rows.empty()) throw DataError("'" + path + "' has a header but no data rows");

    auto find = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError("column '" + name + "' not found in '" + path + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t label_col = find(label_column);
    const std::size_t judgment_col = find(judgment_column);
    if (label_col == judgment_col) throw UsageError("label and judgment column must differ");

    Dataset d;
    std::vector<std::string> bad_labels;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto v = detail::lower(rows[r][label_col]);
        if (options.positive_labels.count(v)) d.y.push_back(1.0);
        else if (options.negative_labels.count(v)) d.y.push_back(0.0);
        else bad_labels.push_back("line " + std::to_string(line_numbers[r]) + " ('" + rows[r][label_col] + "')");
    }
    if (!bad_labels.empty()) {
        std::string msg = "label column '" + label_column + "' is not binary: ";
        for (std::size_t i = 0; i < bad_labels.size() && i < 10; ++i) msg += (i ? ", " : "") + bad_labels[i];
        if (bad_labels.size() > 10) msg += ", ... (" + std::to_string(bad_labels.size()) + " rows)";
        throw DataError(msg);
    }

    struct Column {
        std::size_t source;
        bool categorical;
        std::vector<std::string> categories;
    };
    std::vector<Column> columns;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == label_col) continue;
        double probe = 0;
        const bool cat = options.categorical.count(header[c]) || !detail::parse_double(rows[0][c], probe);
        Column col{c, cat, {}};
        if (cat) {
            if (c == judgment_col) throw DataError("judgment column '" + judgment_column + "' must be numeric");
            std::set<std::string> seen;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r][c].empty())
                    throw DataError(path + ":" + std::to_string(line_numbers[r]) + ": empty cell in column '" +
                                    header[c] + "'");
                seen.insert(rows[r][c]);
            }
            col.categories.assign(seen.begin(), seen.end());
            if (options.drop_first && !col.categories.empty()) col.categories.erase(col.categories.begin());
        }
        columns.push_back(std::move(col));
    }

    for (const auto& col : columns) {
        if (col.source == judgment_col) d.judgment_index = d.feature_names.size();
        if (!col.categorical) d.feature_names.push_back(header[col.source]);
        else
            for (const auto& cat : col.categories) d.feature_names.push_back(header[col.source] + "=" + cat);
    }
    d.judgment_name = judgment_column;
    d.x = Matrix(rows.size(), d.feature_names.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::size_t k = 0;
        for (const auto& col : columns) {
            const auto& cell = rows[r][col.source];
            if (!col.categorical) {
                double v = 0;
                if (!detail::parse_double(cell, v))
                    throw DataError(path + ":" + std::to_string(line_numbers[r]) + ": cannot parse '" + cell +
                                    "' in numeric column '" + header[col.source] + "'");
                d.x(r, k++) = v;
            } else {
                for (const auto& cat : col.categories) d.x(r, k++) = cell == cat ? 1.0 : 0.0;
            }
        }
    }
    d.validate();
    return d;
}

/// Writes the dataset as a headed CSV: every feature column, then `label`.
inline void save_csv(const Dataset& d, const std::string& path, const std::string& label_name = "label") {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (const auto& n : d.feature_names) {
        if (n.find_first_of(",\"") != std::string::npos) throw DataError("feature name '" + n + "' needs quoting");
        out << n << ',';
    }
    out << label_name << '\n';
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t c = 0; c < d.cols(); ++c) out << detail::format_double(d.x(r, c)) << ',';
        out << (d.y[r] == 1.0 ? 1 : 0) << '\n';
    }
    if (!out) throw DataError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// German credit (statlog, space-separated A-codes)

struct CreditData {
    Dataset data;
    JudgmentFunction g = JudgmentFunction::guarantor_shift();
};

inline constexpr std::size_t kCreditRows = 1000;

inline CreditData prepare_credit(const std::string& path) {
    static const char* names[20] = {"checking_status", "duration",        "credit_history",
                                    "purpose",         "credit_amount",   "savings",
                                    "employment",      "installment_rate", "personal_status",
                                    "other_debtors",   "residence_since", "property",
                                    "age",             "other_installment_plans", "housing",
                                    "existing_credits", "job",            "num_dependents",
                                    "telephone",       "foreign_worker"};
    static const bool numeric[20] = {false, true,  false, false, true,  false, false, true,  false, false,
                                     true,  false, true,  false, false, true,  false, true,  false, false};
    constexpr std::size_t other_debtors = 9;

    std::ifstream in(path);
    if (!in) throw DataError("cannot open credit data '" + path + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        std::istringstream ss(line);
        std::vector<std::string> f;
        for (std::string t; ss >> t;) f.push_back(t);
        if (f.size() != 21)
            throw DataError("credit data integrity: line " + std::to_string(lineno) + " has " +
                            std::to_string(f.size()) + " fields, expected 21");
        for (std::size_t a = 0; a < 20; ++a) {
            double v = 0;
            const bool is_num = detail::parse_double(f[a], v);
            if (numeric[a] != is_num || (!is_num && f[a].rfind('A', 0) != 0))
                throw DataError("credit data integrity: line " + std::to_string(lineno) + ", attribute " +
                                std::to_string(a + 1) + " has unexpected value '" + f[a] + "'");
        }
        if (f[20] != "1" && f[20] != "2")
            throw DataError("credit data integrity: line " + std::to_string(lineno) + " has class '" + f[20] +
                            "', expected 1 or 2");
        rows.push_back(std::move(f));
    }
    if (rows.size() != kCreditRows)
        throw DataError("credit data integrity: expected " + std::to_string(kCreditRows) + " records, found " +
                        std::to_string(rows.size()));

    std::vector<std::vector<std::string>> categories(20);
    for (std::size_t a = 0; a < 20; ++a) {
        if (numeric[a] || a == other_debtors) continue;
        std::set<std::string> seen;
        for (const auto& r : rows) seen.insert(r[a]);
        categories[a].assign(seen.begin(), seen.end());
    }

    CreditData out;
    Dataset& d = out.data;
    d.feature_names.push_back("guarantor");
    d.judgment_index = 0;
    d.judgment_name = "guarantor";
    for (std::size_t a = 0; a < 20; ++a) {
        if (a == other_debtors) continue;
        if (numeric[a]) d.feature_names.emplace_back(names[a]);
        else
            for (const auto& c : categories[a]) d.feature_names.push_back(std::string(names[a]) + "=" + c);
    }
    d.x = Matrix(rows.size(), d.feature_names.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& f = rows[r];
        std::size_t k = 0;
        d.x(r, k++) = f[other_debtors] == "A103" ? 1.0 : 0.0;
        for (std::size_t a = 0; a < 20; ++a) {
            if (a == other_debtors) continue;
            if (numeric[a]) {
                double v = 0;
                detail::parse_double(f[a], v);
                d.x(r, k++) = v;
            } else {
                for (const auto& c : categories[a]) d.x(r, k++) = f[a] == c ? 1.0 : 0.0;
            }
        }
        d.y.push_back(f[20] == "1" ? 1.0 : 0.0);
    }
    d.validate();
    return out;
}

}  // namespace ejcorr
