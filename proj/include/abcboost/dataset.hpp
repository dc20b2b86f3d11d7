// Copyright 2026 The abcboost Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// Dense classification datasets: CSV and LIBSVM readers, label encoding,
/// the 0/1 class indicator matrix and seeded train/test splitting.

#ifndef ABCBOOST_DATASET_HPP_
#define ABCBOOST_DATASET_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "abcboost/matrix.hpp"

namespace abcboost {

enum class DataFormat { kCsv, kLibsvm };

inline DataFormat parse_data_format(std::string_view name) {
  if (name == "csv") return DataFormat::kCsv;
  if (name == "libsvm") return DataFormat::kLibsvm;
  throw Error("unknown data format '" + std::string(name) + "' (expected csv or libsvm)");
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline Error parse_error(std::size_t line_no, const std::string& what) {
  return Error("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace detail

// Maps original label tokens to contiguous class indices. Tokens are sorted
// numerically when every token is a number, lexicographically otherwise.
class LabelMapping {
 public:
  LabelMapping() = default;

  static LabelMapping from_tokens(const std::vector<std::string>& tokens) {
    std::set<std::string> distinct(tokens.begin(), tokens.end());
    std::vector<std::string> names(distinct.begin(), distinct.end());
    bool numeric = std::all_of(names.begin(), names.end(),
                               [](const std::string& t) { return detail::parse_real(t).has_value(); });
    if (numeric) {
      std::stable_sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
        return *detail::parse_real(a) < *detail::parse_real(b);
      });
    }
    return LabelMapping(std::move(names));
  }

  explicit LabelMapping(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t k = 0; k < names_.size(); ++k) {
      if (!index_.emplace(names_[k], static_cast<int>(k)).second) {
        throw Error("duplicate class name '" + names_[k] + "'");
      }
    }
  }

  std::optional<int> encode(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::string& decode(int k) const { return names_.at(static_cast<std::size_t>(k)); }

  int num_classes() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
};

struct Dataset {
  RealMatrix features;             // N x D, all finite
  std::vector<int> labels;         // length N, values in [0, num_classes)
  int num_classes = 0;
  std::vector<std::string> class_names;

  std::size_t size() const { return labels.size(); }
  std::size_t dims() const { return features.cols(); }
  LabelMapping mapping() const { return LabelMapping(class_names); }
};

// Throws unless the dataset satisfies its invariants.
inline void validate(const Dataset& d) {
  if (d.size() == 0) throw Error("dataset has no rows");
  if (d.dims() == 0) throw Error("dataset has no features");
  if (d.features.rows() != d.size()) throw Error("feature/label row count mismatch");
  if (d.num_classes < 2) throw Error("dataset needs at least 2 classes, got " + std::to_string(d.num_classes));
  if (static_cast<int>(d.class_names.size()) != d.num_classes) throw Error("class name count mismatch");
  for (double v : d.features.values()) {
    if (!std::isfinite(v)) throw Error("non-finite feature value");
  }
  for (int y : d.labels) {
    if (y < 0 || y >= d.num_classes) throw Error("label out of range");
  }
}

struct LoadOptions {
  DataFormat format = DataFormat::kCsv;
  int label_column = 0;                   // csv only
  const LabelMapping* mapping = nullptr;  // encode with an existing (training) mapping
  std::optional<std::size_t> dims;        // force the feature count (libsvm test files)
};

namespace detail {

struct RawRows {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  std::vector<std::size_t> line_numbers;
  std::size_t dims = 0;
};

inline RawRows read_csv(std::istream& in, int label_column) {
  RawRows raw;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim(line);
    if (view.empty()) continue;
    auto cells = split(view, ',');
    if (first) {
      first = false;
      width = cells.size();
      if (label_column < 0 || static_cast<std::size_t>(label_column) >= width) {
        throw parse_error(line_no, "label column " + std::to_string(label_column) + " out of range for " +
                                       std::to_string(width) + " columns");
      }
      if (width < 2) throw parse_error(line_no, "csv row needs a label and at least one feature");
      // A header row has a non-numeric feature cell; labels may be any token.
      bool header = false;
      for (std::size_t c = 0; c < width; ++c) {
        if (static_cast<int>(c) != label_column && !parse_real(cells[c])) header = true;
      }
      if (header) continue;
    }
    if (cells.size() != width) {
      throw parse_error(line_no, "expected " + std::to_string(width) + " columns, got " +
                                     std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t c = 0; c < width; ++c) {
      if (static_cast<int>(c) == label_column) continue;
      auto v = parse_real(cells[c]);
      if (!v) throw parse_error(line_no, "non-numeric value '" + std::string(trim(cells[c])) + "'");
      if (!std::isfinite(*v)) throw parse_error(line_no, "non-finite value");
      row.push_back(*v);
    }
    auto label = trim(cells[static_cast<std::size_t>(label_column)]);
    if (label.empty()) throw parse_error(line_no, "missing label");
    raw.rows.push_back(std::move(row));
    raw.labels.emplace_back(label);
    raw.line_numbers.push_back(line_no);
  }
  raw.dims = width == 0 ? 0 : width - 1;
  return raw;
}

inline RawRows read_libsvm(std::istream& in) {
  RawRows raw;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> sparse;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = trim(view.substr(0, hash));
    if (view.empty()) continue;
    std::vector<std::string_view> tokens;
    for (auto tok : split(view, ' ')) {
      for (auto t : split(tok, '\t')) {
        if (!trim(t).empty()) tokens.push_back(trim(t));
      }
    }
    std::vector<std::pair<std::size_t, double>> entries;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      auto colon = tokens[t].find(':');
      if (colon == std::string_view::npos) throw parse_error(line_no, "expected index:value, got '" +
                                                                          std::string(tokens[t]) + "'");
      auto idx_str = tokens[t].substr(0, colon);
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), idx);
      if (ec != std::errc{} || ptr != idx_str.data() + idx_str.size() || idx == 0) {
        throw parse_error(line_no, "bad feature index '" + std::string(idx_str) + "'");
      }
      auto v = parse_real(tokens[t].substr(colon + 1));
      if (!v) throw parse_error(line_no, "non-numeric value in '" + std::string(tokens[t]) + "'");
      if (!std::isfinite(*v)) throw parse_error(line_no, "non-finite value");
      raw.dims = std::max(raw.dims, idx);
      entries.emplace_back(idx - 1, *v);
    }
    raw.labels.emplace_back(tokens[0]);
    raw.line_numbers.push_back(line_no);
    sparse.push_back(std::move(entries));
  }
  for (auto& entries : sparse) {
    std::vector<double> row(raw.dims, 0.0);
    for (auto [idx, v] : entries) row[idx] = v;
    raw.rows.push_back(std::move(row));
  }
  return raw;
}

}  // namespace detail

inline Dataset read_dataset(std::istream& in, const LoadOptions& options = {}) {
  detail::RawRows raw = options.format == DataFormat::kCsv ? detail::read_csv(in, options.label_column)
                                                           : detail::read_libsvm(in);
  if (raw.rows.empty()) throw Error("empty dataset");

  std::size_t dims = raw.dims;
  if (options.dims) {
    if (options.format == DataFormat::kCsv && *options.dims != dims) {
      throw Error("expected " + std::to_string(*options.dims) + " features, file has " + std::to_string(dims));
    }
    if (dims > *options.dims) {
      throw Error("feature index " + std::to_string(dims) + " exceeds expected dimension " +
                  std::to_string(*options.dims));
    }
    dims = *options.dims;
  }

  LabelMapping mapping = options.mapping ? *options.mapping : LabelMapping::from_tokens(raw.labels);

  Dataset d;
  d.features = RealMatrix(raw.rows.size(), dims);
  d.labels.reserve(raw.rows.size());
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    std::copy(raw.rows[i].begin(), raw.rows[i].end(), d.features.row(i).begin());
    auto k = mapping.encode(raw.labels[i]);
    if (!k) throw detail::parse_error(raw.line_numbers[i], "unseen label '" + raw.labels[i] + "'");
    d.labels.push_back(*k);
  }
  d.num_classes = mapping.num_classes();
  d.class_names = mapping.names();
  validate(d);
  return d;
}

inline Dataset load_dataset(const std::string& path, const LoadOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return read_dataset(in, options);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

inline Dataset load_dataset(const std::string& path, DataFormat format, int label_column = 0) {
  LoadOptions options;
  options.format = format;
  options.label_column = label_column;
  return load_dataset(path, options);
}

// r(i, k) = 1 iff labels[i] = k.
class IndicatorMatrix {
 public:
  explicit IndicatorMatrix(const Dataset& d) : r_(d.size(), static_cast<std::size_t>(d.num_classes), 0.0) {
    for (std::size_t i = 0; i < d.size(); ++i) r_(i, static_cast<std::size_t>(d.labels[i])) = 1.0;
  }

  double operator()(std::size_t i, std::size_t k) const { return r_(i, k); }
  std::span<const double> row(std::size_t i) const { return r_.row(i); }
  std::size_t rows() const { return r_.rows(); }
  std::size_t cols() const { return r_.cols(); }

 private:
  RealMatrix r_;
};

inline IndicatorMatrix class_indicator(const Dataset& d) { return IndicatorMatrix(d); }

// Rows in the given order; the label mapping is kept.
inline Dataset subset(const Dataset& d, std::span<const std::size_t> rows) {
  Dataset out;
  out.features = RealMatrix(rows.size(), d.dims());
  out.labels.reserve(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    auto src = d.features.row(rows[j]);
    std::copy(src.begin(), src.end(), out.features.row(j).begin());
    out.labels.push_back(d.labels[rows[j]]);
  }
  out.num_classes = d.num_classes;
  out.class_names = d.class_names;
  return out;
}

// Keeps only samples of the listed classes and re-indexes them 0..classes.size()-1
// in the listed order.
inline Dataset select_classes(const Dataset& d, const std::vector<int>& classes) {
  if (classes.size() < 2) throw Error("select_classes needs at least 2 classes");
  std::vector<int> remap(static_cast<std::size_t>(d.num_classes), -1);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < classes.size(); ++j) {
    int k = classes[j];
    if (k < 0 || k >= d.num_classes) throw Error("class index out of range");
    remap[static_cast<std::size_t>(k)] = static_cast<int>(j);
    names.push_back(d.class_names[static_cast<std::size_t>(k)]);
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (remap[static_cast<std::size_t>(d.labels[i])] >= 0) rows.push_back(i);
  }
  Dataset out = subset(d, rows);
  for (int& y : out.labels) y = remap[static_cast<std::size_t>(y)];
  out.num_classes = static_cast<int>(classes.size());
  out.class_names = std::move(names);
  validate(out);
  return out;
}

namespace detail {

// Unbiased draw in [0, bound) from raw 64-bit engine output, so the split is
// identical across standard library implementations.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace detail

// Seeded random partition; each side keeps the original row order.
inline std::pair<Dataset, Dataset> train_test_split(const Dataset& d, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error("split fraction must lie in (0, 1)");
  const std::size_t n = d.size();
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n) throw Error("split fraction leaves an empty partition");

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[detail::bounded(rng, i + 1)]);
  }
  std::vector<std::size_t> train_rows(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_rows(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {subset(d, train_rows), subset(d, test_rows)};
}

}  // namespace abcboost

#endif  // ABCBOOST_DATASET_HPP_
