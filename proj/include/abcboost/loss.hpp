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

/// Multi-class logistic model: softmax probabilities and the negative
/// multinomial log-likelihood.

#ifndef ABCBOOST_LOSS_HPP_
#define ABCBOOST_LOSS_HPP_

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "abcboost/matrix.hpp"

namespace abcboost {

// Lower clip for probabilities inside logarithms. P itself is never clipped.
inline constexpr double kLogProbabilityFloor = 1e-15;

inline double neg_log_prob(double p) { return -std::log(std::max(p, kLogProbabilityFloor)); }

// p_k = exp(F_k) / sum_s exp(F_s), evaluated after subtracting the row max.
inline void softmax_row(std::span<const double> scores, std::span<double> probs) {
  assert(scores.size() == probs.size() && !scores.empty());
  const double top = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    probs[k] = std::exp(scores[k] - top);
    total += probs[k];
  }
  for (double& p : probs) p /= total;
}

inline std::vector<double> softmax_row(std::span<const double> scores) {
  std::vector<double> probs(scores.size());
  softmax_row(scores, probs);
  return probs;
}

// Negative multinomial log-likelihood, sum_i -log p(i, y_i).
inline double multinomial_loss(const RealMatrix& probs, std::span<const int> labels) {
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    loss += neg_log_prob(probs(i, static_cast<std::size_t>(labels[i])));
  }
  return loss;
}

// L^(k): the loss restricted to samples of class k.
inline std::vector<double> per_class_loss(const RealMatrix& probs, std::span<const int> labels) {
  std::vector<double> losses(probs.cols(), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto k = static_cast<std::size_t>(labels[i]);
    losses[k] += neg_log_prob(probs(i, k));
  }
  return losses;
}

}  // namespace abcboost

#endif  // ABCBOOST_LOSS_HPP_
