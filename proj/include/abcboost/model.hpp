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

/// Trained ensembles: score replay, classification and the JSON model file.
///
/// Leaf values are stored unscaled; the shrinkage is applied at replay so a
/// model can be truncated to any prefix of its rounds.

#ifndef ABCBOOST_MODEL_HPP_
#define ABCBOOST_MODEL_HPP_

#include <cstddef>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "abcboost/matrix.hpp"
#include "abcboost/regtree.hpp"

namespace abcboost {

inline constexpr int kModelFormatVersion = 1;

// Boosting algorithm family member. mart trains K trees per round; the
// others train K-1 trees against a base class whose score is the negated
// sum of the rest.
struct Variant {
  enum class Kind { kMart, kAbc, kMb, kFixedBase };

  Kind kind = Kind::kAbc;
  int fixed_base = -1;  // kFixedBase only

  static Variant mart() { return {Kind::kMart, -1}; }
  static Variant abc() { return {Kind::kAbc, -1}; }
  static Variant mb() { return {Kind::kMb, -1}; }
  static Variant fixed(int base) { return {Kind::kFixedBase, base}; }

  bool uses_base() const { return kind != Kind::kMart; }
  // Base-class derivatives (abc, fixed base) versus MART derivatives (mart, mb).
  bool abc_derivatives() const { return kind == Kind::kAbc || kind == Kind::kFixedBase; }
  bool adaptive_base() const { return kind == Kind::kAbc || kind == Kind::kMb; }

  // "mart", "abc", "mb", "b<k>".
  std::string name() const {
    switch (kind) {
      case Kind::kMart: return "mart";
      case Kind::kAbc: return "abc";
      case Kind::kMb: return "mb";
      case Kind::kFixedBase: return "b" + std::to_string(fixed_base);
    }
    return "?";
  }

  // Accepts the names above plus "fixed_base", which takes its class from
  // `base`.
  static Variant parse(const std::string& s, std::optional<int> base = std::nullopt) {
    if (s == "mart") return mart();
    if (s == "abc") return abc();
    if (s == "mb") return mb();
    if (s == "fixed_base" || s == "fixed") {
      if (!base) throw Error("variant fixed_base needs a base class index");
      return fixed(*base);
    }
    if (s.size() > 1 && s[0] == 'b') {
      try {
        std::size_t used = 0;
        int k = std::stoi(s.substr(1), &used);
        if (used == s.size() - 1) return fixed(k);
      } catch (const std::exception&) {
      }
    }
    throw Error("unknown variant '" + s + "' (expected mart, abc, mb, fixed_base or b<k>)");
  }

  friend bool operator==(const Variant&, const Variant&) = default;
};

// One boosting step. For base-class rounds, trees[j] belongs to the j-th
// class in ascending order with the base skipped.
struct Round {
  std::optional<int> base;
  std::vector<RegressionTree> trees;

  int class_of(std::size_t j) const {
    int k = static_cast<int>(j);
    return base && k >= *base ? k + 1 : k;
  }

  friend bool operator==(const Round&, const Round&) = default;
};

// Score row operations shared by training and replay so both produce the
// same bits.
inline void mirror_base(std::span<double> scores, int base) {
  double sum = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (static_cast<int>(k) != base) sum += scores[k];
  }
  scores[static_cast<std::size_t>(base)] = -sum;
}

inline void recenter_row(std::span<double> scores) {
  double sum = 0.0;
  for (double s : scores) sum += s;
  const double mean = sum / static_cast<double>(scores.size());
  for (double& s : scores) s -= mean;
}

struct Model {
  int num_classes = 0;
  std::size_t dims = 0;
  double shrinkage = 0.1;
  Variant variant;
  bool recenter = false;
  std::vector<std::string> class_names;
  std::vector<Round> rounds;

  std::size_t round_count() const { return rounds.size(); }

  // Adds round m's contribution to a score row.
  void apply_round(std::size_t m, std::span<const double> sample, std::span<double> scores) const {
    const Round& round = rounds[m];
    for (std::size_t j = 0; j < round.trees.size(); ++j) {
      scores[static_cast<std::size_t>(round.class_of(j))] += shrinkage * round.trees[j].predict(sample);
    }
    if (round.base) {
      mirror_base(scores, *round.base);
    } else if (recenter) {
      recenter_row(scores);
    }
  }

  // Throws if the structure contradicts the variant.
  void validate() const {
    if (num_classes < 2) throw Error("model needs at least 2 classes");
    if (dims == 0) throw Error("model has zero feature dimension");
    if (!(shrinkage > 0.0 && shrinkage <= 1.0)) throw Error("model shrinkage outside (0, 1]");
    if (static_cast<int>(class_names.size()) != num_classes) throw Error("model class name count mismatch");
    if (variant.kind == Variant::Kind::kFixedBase && (variant.fixed_base < 0 || variant.fixed_base >= num_classes)) {
      throw Error("model fixed base out of range");
    }
    const auto K = static_cast<std::size_t>(num_classes);
    for (std::size_t m = 0; m < rounds.size(); ++m) {
      const Round& r = rounds[m];
      const std::string where = "round " + std::to_string(m + 1) + ": ";
      if (variant.uses_base()) {
        if (!r.base || *r.base < 0 || *r.base >= num_classes) throw Error(where + "missing or invalid base class");
        if (variant.kind == Variant::Kind::kFixedBase && *r.base != variant.fixed_base) {
          throw Error(where + "base differs from the fixed base");
        }
        if (r.trees.size() != K - 1) throw Error(where + "expected K-1 trees");
      } else {
        if (r.base) throw Error(where + "mart rounds carry no base class");
        if (r.trees.size() != K) throw Error(where + "expected K trees");
      }
      for (const auto& t : r.trees) {
        for (const auto& n : t.nodes()) {
          if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= dims) {
            throw Error(where + "tree feature index out of range");
          }
        }
      }
    }
  }

  friend bool operator==(const Model&, const Model&) = default;
};

inline std::vector<double> predict_scores(const Model& model, std::span<const double> sample,
                                          std::size_t up_to_round) {
  if (sample.size() != model.dims) {
    throw Error("sample has " + std::to_string(sample.size()) + " features, model expects " +
                std::to_string(model.dims));
  }
  if (up_to_round > model.round_count()) throw Error("requested more rounds than the model holds");
  std::vector<double> scores(static_cast<std::size_t>(model.num_classes), 0.0);
  for (std::size_t m = 0; m < up_to_round; ++m) model.apply_round(m, sample, scores);
  return scores;
}

inline std::vector<double> predict_scores(const Model& model, std::span<const double> sample) {
  return predict_scores(model, sample, model.round_count());
}

// Lowest index wins ties.
inline int argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return static_cast<int>(best);
}

// Softmax is monotone, so the argmax of the scores is the argmax of the
// class probabilities.
inline int predict_class(const Model& model, std::span<const double> sample) {
  return argmax(predict_scores(model, sample));
}

namespace detail {

using nlohmann::json;

inline json tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const TreeNode& n : tree.nodes()) {
    if (n.is_leaf()) {
      nodes.push_back({{"leaf", n.leaf}, {"value", n.value}});
    } else {
      nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
    }
  }
  return {{"nodes", std::move(nodes)}};
}

inline RegressionTree tree_from_json(const json& j, std::size_t dims) {
  std::vector<TreeNode> nodes;
  for (const json& n : j.at("nodes")) {
    TreeNode node;
    if (n.contains("leaf")) {
      node.leaf = n.at("leaf").get<int>();
      node.value = n.at("value").get<double>();
    } else {
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
      if (node.feature < 0) throw Error("negative feature index");
    }
    nodes.push_back(node);
  }
  return RegressionTree::from_nodes(std::move(nodes), dims);
}

}  // namespace detail

inline nlohmann::json model_to_json(const Model& model) {
  using nlohmann::json;
  json rounds = json::array();
  for (const Round& r : model.rounds) {
    json trees = json::array();
    for (const auto& t : r.trees) trees.push_back(detail::tree_to_json(t));
    rounds.push_back({{"base", r.base ? json(*r.base) : json(nullptr)}, {"trees", std::move(trees)}});
  }
  json j = {
      {"version", kModelFormatVersion},
      {"K", model.num_classes},
      {"D", model.dims},
      {"nu", model.shrinkage},
      {"variant", model.variant.kind == Variant::Kind::kFixedBase ? "fixed_base" : model.variant.name()},
      {"recenter", model.recenter},
      {"class_names", model.class_names},
      {"rounds", std::move(rounds)},
  };
  if (model.variant.kind == Variant::Kind::kFixedBase) j["fixed_base"] = model.variant.fixed_base;
  return j;
}

inline Model model_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object() || !j.contains("version")) throw Error("missing version field");
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw Error("unsupported model version " + j.at("version").dump());
    }
    Model m;
    m.num_classes = j.at("K").get<int>();
    m.dims = j.at("D").get<std::size_t>();
    m.shrinkage = j.at("nu").get<double>();
    std::optional<int> fixed;
    if (j.contains("fixed_base")) fixed = j.at("fixed_base").get<int>();
    m.variant = Variant::parse(j.at("variant").get<std::string>(), fixed);
    m.recenter = j.value("recenter", false);
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& r : j.at("rounds")) {
      Round round;
      if (!r.at("base").is_null()) round.base = r.at("base").get<int>();
      for (const auto& t : r.at("trees")) round.trees.push_back(detail::tree_from_json(t, m.dims));
      m.rounds.push_back(std::move(round));
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("model schema violation: ") + e.what());
  }
}

inline void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file '" + path + "'");
  out << model_to_json(model).dump() << '\n';
  if (!out) throw Error("failed writing model file '" + path + "'");
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("model file '" + path + "' is truncated or not valid JSON: " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const Error& e) {
    throw Error("model file '" + path + "': " + e.what());
  }
}

}  // namespace abcboost

#endif  // ABCBOOST_MODEL_HPP_
