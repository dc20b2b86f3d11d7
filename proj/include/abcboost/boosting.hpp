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

/// MART and adaptive-base-class MART training loops.
///
/// Every round reads one frozen probability matrix computed from the scores
/// at the start of the round. mart fits K trees to r_k - p_k. The base-class
/// family (abc, mb, fixed base) fits K-1 trees for the non-base classes,
/// pins the base score to minus the sum of the others, refreshes P, and for
/// abc and mb re-selects the base as the class with the largest training
/// loss. mb uses the MART derivatives and leaf factor inside that loop;
/// fixed base uses the abc derivatives and never re-selects.

#ifndef ABCBOOST_BOOSTING_HPP_
#define ABCBOOST_BOOSTING_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "abcboost/dataset.hpp"
#include "abcboost/derivatives.hpp"
#include "abcboost/loss.hpp"
#include "abcboost/matrix.hpp"
#include "abcboost/metrics.hpp"
#include "abcboost/model.hpp"
#include "abcboost/regtree.hpp"

namespace abcboost {

enum class InitialBase { kLowest, kRandom };

struct TrainConfig {
  int leaves = 10;         // J
  double shrinkage = 0.1;  // nu
  int rounds = 1000;       // M
  Variant variant = Variant::abc();
  bool recenter = false;  // mart only
  int min_samples_leaf = 1;
  std::uint64_t seed = 0;
  InitialBase initial_base_mode = InitialBase::kLowest;
  std::optional<int> initial_base;  // overrides the mode when set
  // Training stops once the loss drops below this times N.
  double early_stop_per_sample = 1e-10;

  TreeConfig tree() const { return {leaves, min_samples_leaf}; }

  void validate(int num_classes) const {
    if (leaves < 2) throw Error("leaves (J) must be >= 2");
    if (rounds < 0) throw Error("rounds (M) must be >= 0");
    if (!(shrinkage > 0.0 && shrinkage <= 1.0)) throw Error("shrinkage must lie in (0, 1]");
    if (min_samples_leaf < 1) throw Error("min samples per leaf must be >= 1");
    if (num_classes < 2) throw Error("training needs K >= 2");
    if (variant.kind == Variant::Kind::kFixedBase &&
        (variant.fixed_base < 0 || variant.fixed_base >= num_classes)) {
      throw Error("fixed base class " + std::to_string(variant.fixed_base) + " out of range for K=" +
                  std::to_string(num_classes));
    }
    if (initial_base && (*initial_base < 0 || *initial_base >= num_classes)) {
      throw Error("initial base class out of range");
    }
  }
};

struct TrainState {
  RealMatrix scores;  // F, N x K
  RealMatrix probs;   // P, N x K
  int base = -1;
  int round = 0;

  static TrainState initial(std::size_t n, int num_classes) {
    const auto K = static_cast<std::size_t>(num_classes);
    TrainState s;
    s.scores = RealMatrix(n, K, 0.0);
    s.probs = RealMatrix(n, K, 1.0 / static_cast<double>(num_classes));
    return s;
  }

  void refresh_probabilities() {
    for (std::size_t i = 0; i < scores.rows(); ++i) softmax_row(scores.row(i), probs.row(i));
  }
};

struct RoundRecord {
  int round = 0;
  std::optional<int> base;  // base class the round trained against
  double train_loss = 0.0;
  std::vector<double> class_losses;
  std::optional<std::size_t> test_errors;
};

// Per-dataset pieces reused by every round.
struct TrainingData {
  explicit TrainingData(const Dataset& d) : data(d), indicator(d), learner(d.features) {}

  const Dataset& data;
  IndicatorMatrix indicator;
  TreeLearner learner;
};

namespace detail {

template <typename LeafValue>
RegressionTree fit_class_tree(TrainState& state, const TrainingData& td, const TrainConfig& config, int k,
                              std::span<const double> responses, LeafValue&& leaf_value) {
  FittedTree fit = td.learner.fit(responses, config.tree());
  const auto kk = static_cast<std::size_t>(k);
  for (int leaf = 0; leaf < fit.tree.leaf_count(); ++leaf) {
    const auto& rows = fit.members[static_cast<std::size_t>(leaf)];
    const double beta = leaf_value(rows);
    fit.tree.set_leaf_value(leaf, beta);
    const double step = config.shrinkage * beta;
    for (std::size_t r : rows) state.scores(r, kk) += step;
  }
  return std::move(fit.tree);
}

inline std::vector<double> gather(std::span<const double> values, const std::vector<std::size_t>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(values[r]);
  return out;
}

}  // namespace detail

inline Round boost_round_mart(TrainState& state, const TrainingData& td, const TrainConfig& config) {
  const int K = td.data.num_classes;
  Round round;
  for (int k = 0; k < K; ++k) {
    const std::vector<double> residuals = mart_pseudo_response(td.indicator, state.probs, k);
    std::vector<double> pk(td.data.size());
    for (std::size_t i = 0; i < pk.size(); ++i) pk[i] = state.probs(i, static_cast<std::size_t>(k));
    round.trees.push_back(detail::fit_class_tree(state, td, config, k, residuals, [&](const auto& rows) {
      return mart_leaf_value(detail::gather(residuals, rows), detail::gather(pk, rows), K);
    }));
  }
  if (config.recenter) {
    for (std::size_t i = 0; i < state.scores.rows(); ++i) recenter_row(state.scores.row(i));
  }
  state.refresh_probabilities();
  ++state.round;
  return round;
}

// One round of the base-class family; the variant decides the derivatives
// and whether the base is re-selected afterwards.
inline Round boost_round_abc(TrainState& state, const TrainingData& td, const TrainConfig& config) {
  const int K = td.data.num_classes;
  const int b = state.base;
  if (b < 0 || b >= K) throw Error("boost_round_abc: base class not set");
  Round round;
  round.base = b;
  for (int k = 0; k < K; ++k) {
    if (k == b) continue;
    if (config.variant.abc_derivatives()) {
      const std::vector<double> responses = abc_pseudo_response(td.indicator, state.probs, k, b);
      const std::vector<double> second = abc_second_derivative(state.probs, k, b);
      round.trees.push_back(detail::fit_class_tree(state, td, config, k, responses, [&](const auto& rows) {
        return abc_leaf_value(detail::gather(responses, rows), detail::gather(second, rows));
      }));
    } else {
      const std::vector<double> residuals = mart_pseudo_response(td.indicator, state.probs, k);
      std::vector<double> pk(td.data.size());
      for (std::size_t i = 0; i < pk.size(); ++i) pk[i] = state.probs(i, static_cast<std::size_t>(k));
      round.trees.push_back(detail::fit_class_tree(state, td, config, k, residuals, [&](const auto& rows) {
        return mart_leaf_value(detail::gather(residuals, rows), detail::gather(pk, rows), K);
      }));
    }
  }
  for (std::size_t i = 0; i < state.scores.rows(); ++i) mirror_base(state.scores.row(i), b);
  state.refresh_probabilities();
  if (config.variant.adaptive_base()) state.base = select_base_class(state.probs, td.data.labels);
  ++state.round;
  return round;
}

struct TrainResult {
  Model model;
  std::vector<RoundRecord> history;  // history[0] is the untrained state
  TrainState state;
};

using RoundCallback = std::function<void(const RoundRecord&, const TrainState&)>;

inline int initial_base_class(const TrainConfig& config, int num_classes) {
  if (config.variant.kind == Variant::Kind::kFixedBase) return config.variant.fixed_base;
  if (config.initial_base) return *config.initial_base;
  if (config.initial_base_mode == InitialBase::kRandom) {
    std::mt19937_64 rng(config.seed);
    return static_cast<int>(rng() % static_cast<std::uint64_t>(num_classes));
  }
  return 0;
}

inline std::size_t count_errors(const RealMatrix& scores, std::span<const int> labels) {
  std::size_t errors = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (argmax(scores.row(i)) != labels[i]) ++errors;
  }
  return errors;
}

// Runs up to config.rounds rounds from F = 0 and records the loss (and test
// errors when a test set is given) before the first round and after each one.
inline TrainResult train(const Dataset& data, const TrainConfig& config, const Dataset* test = nullptr,
                         const RoundCallback& on_round = {}) {
  validate(data);
  config.validate(data.num_classes);
  if (test && test->dims() != data.dims()) throw Error("test set feature dimension differs from training set");
  if (test && test->num_classes != data.num_classes) throw Error("test set class count differs from training set");

  const TrainingData td(data);
  TrainResult result;
  Model& model = result.model;
  model.num_classes = data.num_classes;
  model.dims = data.dims();
  model.shrinkage = config.shrinkage;
  model.variant = config.variant;
  model.recenter = config.recenter && !config.variant.uses_base();
  model.class_names = data.class_names;

  TrainState& state = result.state;
  state = TrainState::initial(data.size(), data.num_classes);
  if (config.variant.uses_base()) state.base = initial_base_class(config, data.num_classes);

  TrainConfig effective = config;
  effective.recenter = model.recenter;

  RealMatrix test_scores;
  if (test) test_scores = RealMatrix(test->size(), static_cast<std::size_t>(data.num_classes), 0.0);

  auto record = [&](std::optional<int> base) {
    RoundRecord rec;
    rec.round = state.round;
    rec.base = base;
    rec.class_losses = per_class_loss(state.probs, data.labels);
    rec.train_loss = multinomial_loss(state.probs, data.labels);
    if (test) rec.test_errors = count_errors(test_scores, test->labels);
    if (on_round) on_round(rec, state);
    result.history.push_back(std::move(rec));
  };

  record(std::nullopt);
  const double stop_below = config.early_stop_per_sample * static_cast<double>(data.size());
  for (int m = 0; m < config.rounds; ++m) {
    if (result.history.back().train_loss < stop_below) break;
    std::optional<int> base;
    if (config.variant.uses_base()) {
      base = state.base;
      model.rounds.push_back(boost_round_abc(state, td, effective));
    } else {
      model.rounds.push_back(boost_round_mart(state, td, effective));
    }
    if (test) {
      for (std::size_t i = 0; i < test->size(); ++i) {
        model.apply_round(model.rounds.size() - 1, test->features.row(i), test_scores.row(i));
      }
    }
    record(base);
  }
  return result;
}

}  // namespace abcboost

#endif  // ABCBOOST_BOOSTING_HPP_
