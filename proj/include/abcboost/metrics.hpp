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

#ifndef ABCBOOST_METRICS_HPP_
#define ABCBOOST_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "abcboost/dataset.hpp"
#include "abcboost/loss.hpp"
#include "abcboost/matrix.hpp"
#include "abcboost/model.hpp"

namespace abcboost {

inline std::size_t misclassification_count(const Model& model, const Dataset& data) {
  if (data.dims() != model.dims) {
    throw Error("dataset has " + std::to_string(data.dims()) + " features, model expects " +
                std::to_string(model.dims));
  }
  std::size_t errors = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predict_class(model, data.features.row(i)) != data.labels[i]) ++errors;
  }
  return errors;
}

// R_err in percent: the share of baseline errors removed by the new model.
inline double relative_improvement(std::size_t errors_baseline, std::size_t errors_new) {
  if (errors_baseline == 0) throw Error("relative improvement is undefined for a zero-error baseline");
  return (static_cast<double>(errors_baseline) - static_cast<double>(errors_new)) /
         static_cast<double>(errors_baseline) * 100.0;
}

struct SignificanceTest {
  double z = 0.0;
  double p_value = 0.5;
  bool degenerate = false;  // zero standard error with unequal counts
};

// One-sided test that error rate a exceeds error rate b, comparing two
// binomial proportions on the same n test samples through the normal
// approximation.
inline SignificanceTest binomial_test(std::size_t errors_a, std::size_t errors_b, std::size_t n_test) {
  if (n_test == 0) throw Error("binomial test needs at least one test sample");
  if (errors_a > n_test || errors_b > n_test) throw Error("error count exceeds test size");
  const double n = static_cast<double>(n_test);
  const double pa = static_cast<double>(errors_a) / n;
  const double pb = static_cast<double>(errors_b) / n;
  const double se = std::sqrt(pa * (1.0 - pa) / n + pb * (1.0 - pb) / n);
  SignificanceTest t;
  if (se == 0.0) {
    if (errors_a == errors_b) return t;
    t.degenerate = true;
    t.z = pa > pb ? INFINITY : -INFINITY;
    t.p_value = pa > pb ? 0.0 : 1.0;
    return t;
  }
  t.z = (pa - pb) / se;
  t.p_value = 0.5 * std::erfc(t.z / std::sqrt(2.0));
  return t;
}

inline double binomial_pvalue(std::size_t errors_a, std::size_t errors_b, std::size_t n_test) {
  return binomial_test(errors_a, errors_b, n_test).p_value;
}

struct Comparison {
  double relative_improvement = 0.0;  // percent
  SignificanceTest test;
};

struct EvalReport {
  std::size_t error_count = 0;
  double error_rate = 0.0;
  std::optional<double> loss;
  std::vector<double> per_class_losses;
  std::optional<Comparison> comparison;
};

// Class probabilities of every sample under the full model.
inline RealMatrix predict_probabilities(const Model& model, const Dataset& data) {
  RealMatrix probs(data.size(), static_cast<std::size_t>(model.num_classes));
  for (std::size_t i = 0; i < data.size(); ++i) {
    softmax_row(predict_scores(model, data.features.row(i)), probs.row(i));
  }
  return probs;
}

inline EvalReport evaluate(const Model& model, const Dataset& data, const Model* baseline = nullptr) {
  EvalReport report;
  report.error_count = misclassification_count(model, data);
  report.error_rate = static_cast<double>(report.error_count) / static_cast<double>(data.size());
  RealMatrix probs = predict_probabilities(model, data);
  report.loss = multinomial_loss(probs, data.labels);
  report.per_class_losses = per_class_loss(probs, data.labels);
  if (baseline) {
    const std::size_t base_errors = misclassification_count(*baseline, data);
    Comparison c;
    if (base_errors > 0) c.relative_improvement = relative_improvement(base_errors, report.error_count);
    c.test = binomial_test(base_errors, report.error_count, data.size());
    report.comparison = c;
  }
  return report;
}

}  // namespace abcboost

#endif  // ABCBOOST_METRICS_HPP_
