// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "netpoison/errors.hpp"

namespace netpoison {

enum class F1Averaging { micro, macro };

// Single-label multiclass F1. Classes are whatever values appear in either
// sequence; a class with no true and no predicted members contributes 0 to
// the macro average.
inline double f1_score(const std::vector<int>& pred,
                       const std::vector<int>& truth, F1Averaging averaging) {
  if (pred.size() != truth.size())
    throw ValidationError("prediction and truth lengths differ: " +
                          std::to_string(pred.size()) + " vs " +
                          std::to_string(truth.size()));
  if (pred.empty()) throw ValidationError("cannot score an empty label set");
  int cmax = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || truth[i] < 0)
      throw ValidationError("labels must be non-negative");
    cmax = std::max(cmax, std::max(pred[i], truth[i]));
  }
  const int classes = cmax + 1;
  std::vector<long long> tp(classes, 0), fp(classes, 0), fn(classes, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) {
      ++tp[truth[i]];
    } else {
      ++fp[pred[i]];
      ++fn[truth[i]];
    }
  }
  if (averaging == F1Averaging::micro) {
    long long stp = 0, sfp = 0, sfn = 0;
    for (int c = 0; c < classes; ++c) {
      stp += tp[c];
      sfp += fp[c];
      sfn += fn[c];
    }
    const double denom = 2.0 * stp + sfp + sfn;
    return denom == 0.0 ? 0.0 : 2.0 * stp / denom;
  }
  double acc = 0.0;
  int counted = 0;
  for (int c = 0; c < classes; ++c) {
    if (tp[c] + fp[c] + fn[c] == 0) continue;  // class never appears anywhere
    acc += 2.0 * tp[c] / (2.0 * tp[c] + fp[c] + fn[c]);
    ++counted;
  }
  return counted == 0 ? 0.0 : acc / counted;
}

// Sample Pearson correlation. A constant input has no defined correlation
// and is rejected rather than silently returning 0.
inline double pearson_r(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size())
    throw ValidationError("correlation inputs must have equal length");
  const std::size_t n = x.size();
  if (n < 2)
    throw ValidationError("correlation needs at least two observations");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ValidationError(
        "correlation undefined: an input has zero variance");
  return sxy / std::sqrt(sxx * syy);
}

// Average precision over scored pairs: mean of precision-at-rank over the
// positive entries, ranking by descending score with ties broken by
// ascending input position.
inline double average_precision(
    const std::vector<std::pair<double, bool>>& scored) {
  std::size_t positives = 0;
  for (const auto& [score, label] : scored)
    if (label) ++positives;
  if (positives == 0)
    throw ValidationError(
        "average precision undefined: no positive labels");
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scored[a].first != scored[b].first)
      return scored[a].first > scored[b].first;
    return a < b;
  });
  double acc = 0.0;
  std::size_t seen_pos = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (scored[order[rank]].second) {
      ++seen_pos;
      acc += static_cast<double>(seen_pos) / static_cast<double>(rank + 1);
    }
  }
  return acc / static_cast<double>(positives);
}

// m(t) = p_true - max over other classes; negative means misclassified.
inline double classification_margin(const Eigen::VectorXd& probs,
                                    int true_class) {
  if (probs.size() < 2)
    throw ValidationError("margin needs at least two classes");
  if (true_class < 0 || true_class >= probs.size())
    throw ValidationError("true class out of range");
  double sum = 0.0;
  for (Eigen::Index c = 0; c < probs.size(); ++c) {
    if (!(probs[c] >= -1e-9) || probs[c] > 1.0 + 1e-9)
      throw ValidationError("probabilities must lie in [0, 1]");
    sum += probs[c];
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw ValidationError("probabilities must sum to 1");
  double best_other = -1.0;
  for (Eigen::Index c = 0; c < probs.size(); ++c)
    if (c != true_class) best_other = std::max(best_other, probs[c]);
  return probs[true_class] - best_other;
}

}  // namespace netpoison
