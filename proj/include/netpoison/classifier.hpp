// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "netpoison/errors.hpp"
#include "netpoison/rng.hpp"

namespace netpoison {

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

// Seeded stratified split: each class contributes round(fraction * size)
// members to the train side, never fewer than one, so no class can be absent
// from training as long as it has any members at all.
inline SplitIndices stratified_split(const std::vector<int>& labels,
                                     double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || !(fraction < 1.0))
    throw ValidationError("train fraction must lie strictly in (0, 1)");
  if (labels.empty()) throw ValidationError("no labels to split");
  int cmax = 0;
  for (int l : labels) {
    if (l < 0) throw ValidationError("labels must be non-negative");
    cmax = std::max(cmax, l);
  }
  std::vector<std::vector<int>> members(static_cast<std::size_t>(cmax) + 1);
  for (int i = 0; i < static_cast<int>(labels.size()); ++i)
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  Rng rng(seed);
  SplitIndices out;
  for (auto& group : members) {
    if (group.empty()) continue;
    // Fisher-Yates with the project RNG so splits reproduce across platforms
    for (std::size_t t = group.size(); t > 1; --t) {
      const std::size_t pick = rng.bounded(t);
      std::swap(group[t - 1], group[pick]);
    }
    std::size_t take = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(group.size())));
    take = std::clamp<std::size_t>(take, 1, group.size());
    for (std::size_t t = 0; t < group.size(); ++t)
      (t < take ? out.train : out.test).push_back(group[t]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  if (out.test.empty())
    throw ValidationError("train fraction leaves no test samples");
  return out;
}

// Multinomial logistic regression trained by full-batch gradient descent.
struct LogisticModel {
  Eigen::MatrixXd W;      // features x classes
  Eigen::RowVectorXd b;   // 1 x classes
  int iterations = 0;
  double grad_norm = 0.0;

  int classes() const { return static_cast<int>(W.cols()); }

  // Row-wise softmax of Z W + b with max subtraction for stability.
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& z) const {
    if (z.cols() != W.rows())
      throw ValidationError("feature width does not match the model");
    Eigen::MatrixXd logits = (z * W).rowwise() + b;
    Eigen::VectorXd rowmax = logits.rowwise().maxCoeff();
    logits.colwise() -= rowmax;
    Eigen::MatrixXd p = logits.array().exp().matrix();
    Eigen::VectorXd norm = p.rowwise().sum();
    p.array().colwise() /= norm.array();
    return p;
  }

  std::vector<int> predict(const Eigen::MatrixXd& z) const {
    Eigen::MatrixXd p = predict_proba(z);
    std::vector<int> out(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      Eigen::Index best = 0;
      p.row(i).maxCoeff(&best);
      out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return out;
  }
};

// Trains on a seeded stratified split of the rows of Z. The L2 penalty
// applies to W only (not the bias). Optimization is monotone gradient
// descent with step halving, stopping at gradient norm <= tol or max_iters.
inline LogisticModel train_logreg(const Eigen::MatrixXd& z,
                                  const std::vector<int>& labels,
                                  double train_fraction, std::uint64_t seed,
                                  double l2 = 1e-2, double tol = 1e-5,
                                  int max_iters = 5000) {
  if (static_cast<Eigen::Index>(labels.size()) != z.rows())
    throw ValidationError("one label per embedding row required");
  int cmax = 0;
  for (int l : labels) {
    if (l < 0) throw ValidationError("labels must be non-negative");
    cmax = std::max(cmax, l);
  }
  const int classes = cmax + 1;
  if (classes < 2) throw ValidationError("need at least two classes");

  SplitIndices split = stratified_split(labels, train_fraction, seed);
  const int m = static_cast<int>(split.train.size());
  const Eigen::Index k = z.cols();
  Eigen::MatrixXd x(m, k);
  std::vector<int> y(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) {
    x.row(r) = z.row(split.train[static_cast<std::size_t>(r)]);
    y[static_cast<std::size_t>(r)] =
        labels[static_cast<std::size_t>(split.train[static_cast<std::size_t>(r)])];
  }

  LogisticModel model;
  Rng rng(seed ^ 0x10615701c0ff33ULL);
  model.W.resize(k, classes);
  for (Eigen::Index c = 0; c < classes; ++c)
    for (Eigen::Index r = 0; r < k; ++r) model.W(r, c) = 0.01 * rng.gaussian();
  model.b = Eigen::RowVectorXd::Zero(classes);

  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(m, classes);
  for (int r = 0; r < m; ++r) onehot(r, y[static_cast<std::size_t>(r)]) = 1.0;

  auto loss_at = [&](const Eigen::MatrixXd& w,
                     const Eigen::RowVectorXd& bias) {
    Eigen::MatrixXd logits = (x * w).rowwise() + bias;
    Eigen::VectorXd rowmax = logits.rowwise().maxCoeff();
    double acc = 0.0;
    for (int r = 0; r < m; ++r) {
      double lse = 0.0;
      for (int c = 0; c < classes; ++c)
        lse += std::exp(logits(r, c) - rowmax[r]);
      acc += rowmax[r] + std::log(lse) -
             logits(r, y[static_cast<std::size_t>(r)]);
    }
    return acc / m + 0.5 * l2 * w.squaredNorm();
  };

  double step = 1.0;
  double loss = loss_at(model.W, model.b);
  Eigen::MatrixXd gw(k, classes);
  Eigen::RowVectorXd gb(classes);
  for (int it = 1; it <= max_iters; ++it) {
    model.iterations = it;
    Eigen::MatrixXd logits = (x * model.W).rowwise() + model.b;
    Eigen::VectorXd rowmax = logits.rowwise().maxCoeff();
    logits.colwise() -= rowmax;
    Eigen::MatrixXd p = logits.array().exp().matrix();
    Eigen::VectorXd norm = p.rowwise().sum();
    p.array().colwise() /= norm.array();
    Eigen::MatrixXd diff = (p - onehot) / static_cast<double>(m);
    gw = x.transpose() * diff + l2 * model.W;
    gb = diff.colwise().sum();
    model.grad_norm = std::sqrt(gw.squaredNorm() + gb.squaredNorm());
    if (model.grad_norm <= tol) break;
    // monotone step: halve until the objective decreases
    for (;;) {
      Eigen::MatrixXd wn = model.W - step * gw;
      Eigen::RowVectorXd bn = model.b - step * gb;
      const double ln = loss_at(wn, bn);
      if (ln <= loss || step < 1e-12) {
        model.W = wn;
        model.b = bn;
        loss = ln;
        step *= 1.3;  // recover step size gradually
        break;
      }
      step *= 0.5;
    }
  }
  return model;
}

}  // namespace netpoison
