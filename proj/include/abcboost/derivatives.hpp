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

/// Loss derivatives and one-step Newton leaf values.
///
/// MART differentiates the unconstrained softmax loss per class:
///   response  r_k - p_k,   hessian  p_k (1 - p_k),
/// and scales each Newton step by (K-1)/K.
///
/// With a base class b whose score is pinned to -sum_{k != b} F_k, the
/// derivatives of the per-sample loss with respect to F_k (k != b) are
///   -dL/dF_k   = -(r_b - p_b) + (r_k - p_k)
///   d2L/dF_k^2 = p_b (1 - p_b) + p_k (1 - p_k) + 2 p_b p_k
/// and the Newton step carries no extra factor.

#ifndef ABCBOOST_DERIVATIVES_HPP_
#define ABCBOOST_DERIVATIVES_HPP_

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

#include "abcboost/dataset.hpp"
#include "abcboost/loss.hpp"
#include "abcboost/matrix.hpp"

namespace abcboost {

// Newton denominators below this give a zero leaf value.
inline constexpr double kMinNewtonDenominator = 1e-10;

inline double newton_step(double gradient_sum, double hessian_sum, double factor = 1.0) {
  if (hessian_sum < kMinNewtonDenominator) return 0.0;
  return factor * gradient_sum / hessian_sum;
}

inline std::vector<double> mart_pseudo_response(const IndicatorMatrix& r, const RealMatrix& probs, int k) {
  const auto kk = static_cast<std::size_t>(k);
  std::vector<double> out(probs.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r(i, kk) - probs(i, kk);
  return out;
}

inline std::vector<double> mart_hessian(const RealMatrix& probs, int k) {
  const auto kk = static_cast<std::size_t>(k);
  std::vector<double> out(probs.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = probs(i, kk) * (1.0 - probs(i, kk));
  return out;
}

// ((K-1)/K) * sum(r - p) / sum(p (1 - p)) over the leaf members.
inline double mart_leaf_value(std::span<const double> member_residuals, std::span<const double> member_probs,
                              int num_classes) {
  assert(member_residuals.size() == member_probs.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < member_residuals.size(); ++i) {
    num += member_residuals[i];
    den += member_probs[i] * (1.0 - member_probs[i]);
  }
  const double K = static_cast<double>(num_classes);
  return newton_step(num, den, (K - 1.0) / K);
}

inline std::vector<double> abc_pseudo_response(const IndicatorMatrix& r, const RealMatrix& probs, int k, int base) {
  assert(k != base);
  const auto kk = static_cast<std::size_t>(k);
  const auto bb = static_cast<std::size_t>(base);
  std::vector<double> out(probs.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = -(r(i, bb) - probs(i, bb)) + (r(i, kk) - probs(i, kk));
  }
  return out;
}

inline std::vector<double> abc_second_derivative(const RealMatrix& probs, int k, int base) {
  assert(k != base);
  const auto kk = static_cast<std::size_t>(k);
  const auto bb = static_cast<std::size_t>(base);
  std::vector<double> out(probs.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double pb = probs(i, bb);
    const double pk = probs(i, kk);
    out[i] = pb * (1.0 - pb) + pk * (1.0 - pk) + 2.0 * pb * pk;
  }
  return out;
}

inline double abc_leaf_value(std::span<const double> member_responses, std::span<const double> member_second_derivs) {
  assert(member_responses.size() == member_second_derivs.size());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < member_responses.size(); ++i) {
    num += member_responses[i];
    den += member_second_derivs[i];
  }
  return newton_step(num, den);
}

// The class with the largest per-class training loss; lowest index on ties.
inline int select_base_class(const RealMatrix& probs, std::span<const int> labels) {
  const std::vector<double> losses = per_class_loss(probs, labels);
  std::size_t best = 0;
  for (std::size_t k = 1; k < losses.size(); ++k) {
    if (losses[k] > losses[best]) best = k;
  }
  return static_cast<int>(best);
}

}  // namespace abcboost

#endif  // ABCBOOST_DERIVATIVES_HPP_
