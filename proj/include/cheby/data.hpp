#pragma once

// Dataset loading, scaling and synthetic generators.
//
// CSV contract: first row is a header. The target column is the one
// named "target" if present, otherwise the last column. Target values
// are remapped to class ids 0..C-1 in ascending order of the original
// value, with the originals kept for reporting.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cheby/matrix.hpp"

namespace cheby {

struct Dataset {
    Matrix X;
    std::vector<int> y;
    std::size_t classes = 0;
    std::vector<std::string> feature_names;
    std::vector<double> label_values; // original target value per class id

    std::size_t size() const { return X.rows; }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_number(const std::string& s, std::size_t line_no, std::size_t col) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("csv: cannot parse \"" + s + "\" as a number (line " +
                                 std::to_string(line_no) + ", column " + std::to_string(col + 1) + ")");
    }
}

} // namespace detail

inline Dataset load_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("csv: cannot open " + path);

    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("csv: " + path + " is empty");
    std::vector<std::string> header = detail::split_csv_line(line);
    if (header.size() < 2)
        throw std::runtime_error("csv: " + path + " needs at least one feature and a target column");

    std::size_t target_col = header.size() - 1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == "target") { target_col = i; break; }

    Dataset ds;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (i != target_col) ds.feature_names.push_back(header[i]);

    std::vector<double> raw_targets;
    std::vector<double> flat;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("csv: line " + std::to_string(line_no) + " has " +
                                     std::to_string(cells.size()) + " cells, header has " +
                                     std::to_string(header.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double v = detail::parse_number(cells[i], line_no, i);
            if (i == target_col)
                raw_targets.push_back(v);
            else
                flat.push_back(v);
        }
    }
    if (raw_targets.empty()) throw std::runtime_error("csv: " + path + " has no data rows");

    const std::size_t n = raw_targets.size(), d = header.size() - 1;
    ds.X = Matrix(n, d);
    ds.X.data = std::move(flat);

    std::vector<double> values = raw_targets;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.size() < 2)
        throw std::runtime_error("csv: " + path + " holds a single class; nothing to classify");
    ds.label_values = values;
    ds.classes = values.size();
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = std::lower_bound(values.begin(), values.end(), raw_targets[i]);
        ds.y[i] = static_cast<int>(it - values.begin());
    }
    return ds;
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

/// Write a dataset in the same CSV form load_csv reads. Targets are the
/// original label values, so load_csv(save_csv(ds)) reproduces ds.
inline void save_csv(const std::string& path, const Dataset& ds) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("csv: cannot open " + path + " for writing");
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j) f << ds.feature_names[j] << ",";
    f << "target\n";
    for (std::size_t i = 0; i < ds.X.rows; ++i) {
        for (std::size_t j = 0; j < ds.X.cols; ++j) f << format_double(ds.X(i, j)) << ",";
        f << format_double(ds.label_values[ds.y[i]]) << "\n";
    }
    if (!f) throw std::runtime_error("csv: write to " + path + " failed");
}

// Per-feature min-max map onto [-1, 1], fitted on training data only.
// A constant feature maps to 0; out-of-range values at apply time are
// clamped so downstream identity-map layers stay valid.
struct Scaler {
    std::vector<double> lo;
    std::vector<double> hi;
};

inline Scaler fit_scaler(const Matrix& X) {
    Scaler s;
    s.lo.assign(X.cols, 0.0);
    s.hi.assign(X.cols, 0.0);
    if (X.rows == 0) throw std::invalid_argument("fit_scaler: empty matrix");
    for (std::size_t j = 0; j < X.cols; ++j) {
        double lo = X(0, j), hi = X(0, j);
        for (std::size_t i = 1; i < X.rows; ++i) {
            lo = std::min(lo, X(i, j));
            hi = std::max(hi, X(i, j));
        }
        s.lo[j] = lo;
        s.hi[j] = hi;
    }
    return s;
}

inline Matrix apply_scaler(const Scaler& s, const Matrix& X) {
    if (X.cols != s.lo.size()) throw std::invalid_argument("apply_scaler: column count mismatch");
    Matrix out(X.rows, X.cols);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = 0; j < X.cols; ++j) {
            double lo = s.lo[j], hi = s.hi[j];
            double v;
            if (hi <= lo) {
                v = 0.0;
            } else {
                v = 2.0 * (X(i, j) - lo) / (hi - lo) - 1.0;
                v = v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v);
            }
            out(i, j) = v;
        }
    return out;
}

inline Dataset dataset_subset(const Dataset& ds, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.classes = ds.classes;
    out.feature_names = ds.feature_names;
    out.label_values = ds.label_values;
    out.X = Matrix(idx.size(), ds.X.cols);
    out.y.resize(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t j = 0; j < ds.X.cols; ++j) out.X(r, j) = ds.X(idx[r], j);
        out.y[r] = ds.y[idx[r]];
    }
    return out;
}

struct SplitResult {
    Dataset train;
    Dataset test;
    std::vector<std::string> warnings;
};

/// Stratified train/test split. Per-class train counts start at
/// floor(train_fraction * class_count); largest-remainder rounding tops
/// them up until the train total matches round(train_fraction * n),
/// always leaving at least one test sample per class. A class with a
/// single sample goes wholly to train and is flagged.
inline SplitResult stratified_split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw std::invalid_argument("stratified_split: train_fraction must be in (0, 1)");
    std::vector<std::vector<std::size_t>> by_class(ds.classes);
    for (std::size_t i = 0; i < ds.y.size(); ++i) by_class[ds.y[i]].push_back(i);

    SplitResult result;
    std::mt19937_64 rng(seed);
    for (auto& members : by_class)
        std::shuffle(members.begin(), members.end(), rng);

    std::vector<std::size_t> train_counts(ds.classes, 0);
    std::vector<std::pair<double, std::size_t>> remainders; // (-remainder, class) for stable sort
    std::size_t eligible_total = 0, floor_total = 0;
    for (std::size_t c = 0; c < ds.classes; ++c) {
        std::size_t nc = by_class[c].size();
        if (nc <= 1) {
            if (nc == 1) {
                train_counts[c] = 1;
                result.warnings.push_back("class " + std::to_string(c) +
                                          " has a single sample; kept in train");
            }
            continue;
        }
        eligible_total += nc;
        double ideal = static_cast<double>(nc) * train_fraction;
        train_counts[c] = static_cast<std::size_t>(std::floor(ideal));
        floor_total += train_counts[c];
        remainders.push_back({-(ideal - std::floor(ideal)), c});
    }
    std::size_t want = static_cast<std::size_t>(
        std::llround(static_cast<double>(eligible_total) * train_fraction));
    std::sort(remainders.begin(), remainders.end());
    for (auto& [neg_rem, c] : remainders) {
        if (floor_total >= want) break;
        if (train_counts[c] + 1 < by_class[c].size()) { // keep one test sample per class
            ++train_counts[c];
            ++floor_total;
        }
    }

    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t c = 0; c < ds.classes; ++c) {
        const auto& members = by_class[c];
        for (std::size_t i = 0; i < members.size(); ++i)
            (i < train_counts[c] ? train_idx : test_idx).push_back(members[i]);
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    result.train = dataset_subset(ds, train_idx);
    result.test = dataset_subset(ds, test_idx);
    return result;
}

/// Two concentric rings (radii 0.4 and 0.85) with radial Gaussian noise,
/// clamped so every point stays inside [-1, 1]^2. Classes alternate, so
/// the counts differ by at most one.
inline Dataset make_rings(std::size_t n, double noise, std::uint64_t seed) {
    if (n < 8) throw std::invalid_argument("make_rings: need n >= 8");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> jitter(0.0, 1.0);

    Dataset ds;
    ds.classes = 2;
    ds.feature_names = {"x0", "x1"};
    ds.label_values = {0.0, 1.0};
    ds.X = Matrix(n, 2);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        int c = static_cast<int>(i % 2);
        double base = c == 0 ? 0.4 : 0.85;
        double theta = angle(rng);
        double r = base + noise * jitter(rng);
        r = r < 0.0 ? 0.0 : (r > 1.0 ? 1.0 : r);
        ds.X(i, 0) = r * std::cos(theta);
        ds.X(i, 1) = r * std::sin(theta);
        ds.y[i] = c;
    }
    return ds;
}

/// Uniform points in [-1, 1]^2; class 1 where the coordinates share a
/// sign, class 0 otherwise.
inline Dataset make_xor(std::size_t n, std::uint64_t seed) {
    if (n < 8) throw std::invalid_argument("make_xor: need n >= 8");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);

    Dataset ds;
    ds.classes = 2;
    ds.feature_names = {"x0", "x1"};
    ds.label_values = {0.0, 1.0};
    ds.X = Matrix(n, 2);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double a = coord(rng), b = coord(rng);
        ds.X(i, 0) = a;
        ds.X(i, 1) = b;
        ds.y[i] = a * b > 0.0 ? 1 : 0;
    }
    return ds;
}

} // namespace cheby
