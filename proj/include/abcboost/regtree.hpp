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

/// Least-squares regression trees with a fixed terminal-node budget.
///
/// Trees are grown best-first: at every step the open leaf whose best split
/// removes the most squared error is split, until `max_leaves` leaves exist
/// or no leaf has an admissible split. Split search is exact. Each feature
/// is ranked once into dense codes (one per distinct training value); a
/// leaf's candidate thresholds are the midpoints between consecutive
/// distinct values present in that leaf.
///
/// Ties are broken towards the lowest feature index, then the lowest
/// threshold, and among leaves towards the earliest-created leaf. Two
/// candidate gains in one leaf tie when they differ by less than
/// kSplitTieTolerance times the leaf's sum of squared responses; splits on
/// different features that induce the same partition accumulate their sums
/// in different orders and would otherwise differ in the last bits.

#ifndef ABCBOOST_REGTREE_HPP_
#define ABCBOOST_REGTREE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "abcboost/matrix.hpp"

namespace abcboost {

inline constexpr double kSplitTieTolerance = 1e-10;

struct TreeConfig {
  int max_leaves = 10;  // J
  int min_samples_leaf = 1;

  void validate() const {
    if (max_leaves < 2) throw Error("max_leaves must be >= 2");
    if (min_samples_leaf < 1) throw Error("min_samples_leaf must be >= 1");
  }
};

struct TreeNode {
  int feature = -1;  // < 0 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf = -1;  // leaf id, leaves only
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class RegressionTree {
 public:
  RegressionTree() : nodes_(1), leaf_nodes_{0} { nodes_[0].leaf = 0; }

  // Validates a node array (as read from disk). Leaf ids must be 0..L-1 in
  // node order and children must point forward.
  static RegressionTree from_nodes(std::vector<TreeNode> nodes, std::size_t dims) {
    if (nodes.empty()) throw Error("tree has no nodes");
    RegressionTree t;
    t.nodes_ = std::move(nodes);
    t.leaf_nodes_.clear();
    std::vector<int> parents(t.nodes_.size(), 0);
    for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
      const TreeNode& n = t.nodes_[i];
      if (n.is_leaf()) {
        if (n.leaf != static_cast<int>(t.leaf_nodes_.size())) throw Error("tree leaf ids out of order");
        if (!std::isfinite(n.value)) throw Error("non-finite leaf value");
        t.leaf_nodes_.push_back(static_cast<int>(i));
        continue;
      }
      if (static_cast<std::size_t>(n.feature) >= dims) throw Error("tree feature index out of range");
      if (!std::isfinite(n.threshold)) throw Error("non-finite tree threshold");
      for (int c : {n.left, n.right}) {
        if (c <= static_cast<int>(i) || c >= static_cast<int>(t.nodes_.size())) throw Error("bad child index");
        ++parents[static_cast<std::size_t>(c)];
      }
    }
    for (std::size_t i = 1; i < parents.size(); ++i) {
      if (parents[i] != 1) throw Error("tree node without exactly one parent");
    }
    return t;
  }

  int leaf_count() const { return static_cast<int>(leaf_nodes_.size()); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  double leaf_value(int leaf) const { return nodes_[static_cast<std::size_t>(node_of(leaf))].value; }
  void set_leaf_value(int leaf, double v) { nodes_[static_cast<std::size_t>(node_of(leaf))].value = v; }

  // Routing: feature <= threshold goes left.
  int leaf_of(std::span<const double> sample) const {
    std::size_t n = 0;
    while (!nodes_[n].is_leaf()) {
      const TreeNode& node = nodes_[n];
      n = static_cast<std::size_t>(sample[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                      : node.right);
    }
    return nodes_[n].leaf;
  }

  double predict(std::span<const double> sample) const { return leaf_value(leaf_of(sample)); }

  // Same splits and topology; leaf values ignored.
  bool same_structure(const RegressionTree& other) const {
    if (nodes_.size() != other.nodes_.size()) return false;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const TreeNode& a = nodes_[i];
      const TreeNode& b = other.nodes_[i];
      if (a.feature != b.feature || a.left != b.left || a.right != b.right || a.leaf != b.leaf) return false;
      if (!a.is_leaf() && a.threshold != b.threshold) return false;
    }
    return true;
  }

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  friend class TreeLearner;

  int node_of(int leaf) const { return leaf_nodes_.at(static_cast<std::size_t>(leaf)); }

  std::vector<TreeNode> nodes_;
  std::vector<int> leaf_nodes_;
};

inline int assign_region(const RegressionTree& tree, std::span<const double> sample) {
  return tree.leaf_of(sample);
}

// A fitted tree plus, for every leaf id, the ascending training rows it holds.
struct FittedTree {
  RegressionTree tree;
  std::vector<std::vector<std::size_t>> members;
};

// Midpoint threshold t with lo <= t < hi.
inline double split_threshold(double lo, double hi) {
  double t = lo + (hi - lo) / 2.0;
  if (!std::isfinite(t)) t = lo / 2.0 + hi / 2.0;
  if (!(t < hi)) t = lo;
  return t;
}

// Holds the ranked feature columns of one training matrix so that repeated
// fits on different responses (one per class and round) share the work.
class TreeLearner {
 public:
  explicit TreeLearner(const RealMatrix& features)
      : rows_(features.rows()), dims_(features.cols()), codes_(rows_ * dims_), distinct_(dims_) {
    std::vector<std::pair<double, std::size_t>> column(rows_);
    for (std::size_t f = 0; f < dims_; ++f) {
      for (std::size_t i = 0; i < rows_; ++i) column[i] = {features(i, f), i};
      std::sort(column.begin(), column.end());
      auto& values = distinct_[f];
      std::uint32_t* codes = codes_.data() + f * rows_;
      for (const auto& [v, i] : column) {
        if (values.empty() || values.back() != v) values.push_back(v);
        codes[i] = static_cast<std::uint32_t>(values.size() - 1);
      }
      max_distinct_ = std::max(max_distinct_, values.size());
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t dims() const { return dims_; }

  FittedTree fit(std::span<const double> responses, const TreeConfig& config) const {
    config.validate();
    if (responses.size() != rows_) throw Error("fit: response length does not match the feature matrix");
    Workspace ws(max_distinct_);

    std::vector<TreeNode> nodes(1);
    std::vector<OpenLeaf> open;
    open.push_back({{}, 0, {}});
    open[0].rows.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) open[0].rows[i] = i;
    open[0].best = best_split(open[0].rows, responses, config, ws);

    int leaves = 1;
    while (leaves < config.max_leaves) {
      int chosen = -1;
      for (std::size_t l = 0; l < open.size(); ++l) {
        if (open[l].closed || !open[l].best.valid) continue;
        if (chosen < 0 || open[l].best.gain > open[static_cast<std::size_t>(chosen)].best.gain) {
          chosen = static_cast<int>(l);
        }
      }
      if (chosen < 0) break;

      OpenLeaf parent = std::move(open[static_cast<std::size_t>(chosen)]);
      open[static_cast<std::size_t>(chosen)].closed = true;
      const Split& s = parent.best;
      const std::uint32_t* codes = codes_.data() + static_cast<std::size_t>(s.feature) * rows_;

      OpenLeaf left{{}, static_cast<int>(nodes.size()), {}};
      OpenLeaf right{{}, static_cast<int>(nodes.size() + 1), {}};
      for (std::size_t r : parent.rows) (codes[r] <= s.code ? left.rows : right.rows).push_back(r);

      TreeNode& node = nodes[static_cast<std::size_t>(parent.node)];
      node.feature = s.feature;
      node.threshold = s.threshold;
      node.left = left.node;
      node.right = right.node;
      nodes.emplace_back();
      nodes.emplace_back();
      ++leaves;

      if (leaves < config.max_leaves) {
        left.best = best_split(left.rows, responses, config, ws);
        right.best = best_split(right.rows, responses, config, ws);
      }
      open.push_back(std::move(left));
      open.push_back(std::move(right));
    }

    // Number leaves in node order and attach memberships.
    std::vector<std::vector<std::size_t>*> rows_of_node(nodes.size(), nullptr);
    for (auto& l : open) {
      if (!l.closed) rows_of_node[static_cast<std::size_t>(l.node)] = &l.rows;
    }
    FittedTree out;
    out.tree.leaf_nodes_.clear();
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      if (!nodes[n].is_leaf()) continue;
      nodes[n].leaf = static_cast<int>(out.tree.leaf_nodes_.size());
      out.tree.leaf_nodes_.push_back(static_cast<int>(n));
      auto& rows = *rows_of_node[n];
      double sum = 0.0;
      for (std::size_t r : rows) sum += responses[r];
      nodes[n].value = rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
      out.members.push_back(std::move(rows));
    }
    out.tree.nodes_ = std::move(nodes);
    return out;
  }

 private:
  struct Split {
    bool valid = false;
    double gain = 0.0;
    int feature = -1;
    std::uint32_t code = 0;  // rows with code <= this go left
    double threshold = 0.0;
  };

  struct OpenLeaf {
    std::vector<std::size_t> rows;
    int node = 0;
    Split best;
    bool closed = false;
  };

  struct Group {
    std::uint32_t code;
    double sum;
    std::size_t count;
  };

  struct Workspace {
    explicit Workspace(std::size_t max_codes) : hist_sum(max_codes, 0.0), hist_count(max_codes, 0) {}
    std::vector<double> hist_sum;
    std::vector<std::size_t> hist_count;
    std::vector<std::pair<std::uint32_t, std::size_t>> pairs;
    std::vector<Group> groups;
  };

  // Per-code response sums for one feature over the leaf, ascending by code.
  // Both paths accumulate each code's responses in ascending row order, so
  // they produce bit-identical sums.
  void group_by_code(std::size_t f, const std::vector<std::size_t>& rows, std::span<const double> responses,
                     Workspace& ws) const {
    const std::uint32_t* codes = codes_.data() + f * rows_;
    const std::size_t n_codes = distinct_[f].size();
    ws.groups.clear();
    if (n_codes <= 4 * rows.size()) {
      for (std::size_t r : rows) {
        ws.hist_sum[codes[r]] += responses[r];
        ++ws.hist_count[codes[r]];
      }
      for (std::size_t c = 0; c < n_codes; ++c) {
        if (ws.hist_count[c] != 0) {
          ws.groups.push_back({static_cast<std::uint32_t>(c), ws.hist_sum[c], ws.hist_count[c]});
          ws.hist_sum[c] = 0.0;
          ws.hist_count[c] = 0;
        }
      }
      return;
    }
    ws.pairs.clear();
    for (std::size_t r : rows) ws.pairs.emplace_back(codes[r], r);
    std::sort(ws.pairs.begin(), ws.pairs.end());
    for (const auto& [code, r] : ws.pairs) {
      if (ws.groups.empty() || ws.groups.back().code != code) ws.groups.push_back({code, 0.0, 0});
      ws.groups.back().sum += responses[r];
      ++ws.groups.back().count;
    }
  }

  Split best_split(const std::vector<std::size_t>& rows, std::span<const double> responses, const TreeConfig& config,
                   Workspace& ws) const {
    Split best;
    const std::size_t n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(config.min_samples_leaf);
    if (n < 2 * min_leaf) return best;

    double total = 0.0;
    double squares = 0.0;
    double lo = responses[rows[0]];
    double hi = lo;
    for (std::size_t r : rows) {
      total += responses[r];
      squares += responses[r] * responses[r];
      lo = std::min(lo, responses[r]);
      hi = std::max(hi, responses[r]);
    }
    if (lo == hi) return best;
    const double parent_term = total * total / static_cast<double>(n);
    const double tie = kSplitTieTolerance * squares;

    for (std::size_t f = 0; f < dims_; ++f) {
      if (distinct_[f].size() < 2) continue;
      group_by_code(f, rows, responses, ws);
      double left_sum = 0.0;
      std::size_t left_n = 0;
      for (std::size_t g = 0; g + 1 < ws.groups.size(); ++g) {
        left_sum += ws.groups[g].sum;
        left_n += ws.groups[g].count;
        const std::size_t right_n = n - left_n;
        if (left_n < min_leaf || right_n < min_leaf) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(left_n) +
                            right_sum * right_sum / static_cast<double>(right_n) - parent_term;
        if (best.valid ? gain > best.gain + tie : gain > 0.0) {
          best.valid = true;
          best.gain = gain;
          best.feature = static_cast<int>(f);
          best.code = ws.groups[g].code;
          best.threshold = split_threshold(distinct_[f][ws.groups[g].code], distinct_[f][ws.groups[g + 1].code]);
        }
      }
    }
    return best;
  }

  std::size_t rows_;
  std::size_t dims_;
  std::vector<std::uint32_t> codes_;  // column-major, dims_ x rows_
  std::vector<std::vector<double>> distinct_;
  std::size_t max_distinct_ = 0;
};

inline FittedTree fit_tree(const RealMatrix& features, std::span<const double> responses,
                           const TreeConfig& config) {
  return TreeLearner(features).fit(responses, config);
}

}  // namespace abcboost

#endif  // ABCBOOST_REGTREE_HPP_
