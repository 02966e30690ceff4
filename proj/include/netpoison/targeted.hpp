// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Targeted poisoning. Two entry points:
//
//  * targeted_class_attack — flips incident to one node chosen to push that
//    node across the decision boundary of classifiers trained on the
//    factorization embedding.
//  * targeted_link_attack — flips chosen to depress the average precision of
//    dot-product link prediction on a fixed set of evaluation pairs.
//
// Both score candidates with first-order spectral updates instead of
// retraining per flip. Eigenvector updates are computed by expansion in the
// clean eigenbasis: for the generalized problem A u = lambda D u with
// D-orthonormal eigenvectors, the first-order change of u_y under a flip of
// edge (i, j) is sum_z c_z u_z with
//
//   c_z = delta_w * (alpha u_z(i) + beta u_z(j)) / (lambda_y - lambda_z),
//   alpha = u_y(j) - lambda_y u_y(i),  beta = u_y(i) - lambda_y u_y(j),
//
// skipping near-degenerate gaps. This is the same first-order family as the
// pseudo-inverse update in spectrum.hpp (the two differ only in the gauge
// component along u_y, which normalization removes at first order), but it
// needs no dense per-column operator, so it scales to many columns and — for
// the classification attack, where only the target's embedding row is read —
// to one O(columns) evaluation per candidate after a per-target table.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "netpoison/attack.hpp"
#include "netpoison/classifier.hpp"
#include "netpoison/cooc.hpp"
#include "netpoison/embedding.hpp"
#include "netpoison/errors.hpp"
#include "netpoison/graph.hpp"
#include "netpoison/metrics.hpp"
#include "netpoison/spectrum.hpp"

namespace netpoison {

namespace detail {

// Eigenvalue gaps at or below this are treated as degenerate and their terms
// dropped from the expansion (the component inside a degenerate subspace is
// pure gauge at first order). Generalized eigenvalues live in [-1, 1], so an
// absolute cutoff is meaningful.
inline constexpr double kEigGapTol = 1e-8;

// Guard for updated-norm collapse; columns this close to losing their scale
// cannot be renormalized meaningfully.
inline constexpr double kNormTol = 1e-9;

inline void require_full_adjacency(const Spectrum& spec, const char* who) {
  if (spec.kind != SpectrumKind::adjacency)
    throw ValidationError(std::string(who) + " needs the adjacency spectrum");
  if (spec.values.size() != spec.vectors.rows())
    throw ValidationError(std::string(who) + " needs the full spectrum");
}

inline void require_valid_flip(const EdgeFlip& flip, Eigen::Index n) {
  if (flip.i < 0 || flip.i >= n || flip.j < 0 || flip.j >= n)
    throw ValidationError("flip endpoint out of range");
  if (flip.i == flip.j)
    throw ValidationError("flip endpoints must differ");
  if (flip.delta_w != 1 && flip.delta_w != -1)
    throw ValidationError("flip delta_w must be +1 or -1");
}

// sum_{r=1..T} lam^r by running products (matches window_polynomial).
inline double window_power_sum(double lam, int window) {
  double acc = 0.0;
  double power = 1.0;
  for (int r = 1; r <= window; ++r) {
    power *= lam;
    acc += power;
  }
  return acc;
}

// Indices of the `count` columns with the largest |window coefficient|,
// ties broken by ascending eigen index so the choice is deterministic.
inline std::vector<int> top_window_columns(const Eigen::VectorXd& coeff,
                                           int count) {
  std::vector<int> order(static_cast<std::size_t>(coeff.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ca = std::abs(coeff[a]);
    const double cb = std::abs(coeff[b]);
    if (ca != cb) return ca > cb;
    return a < b;
  });
  order.resize(static_cast<std::size_t>(count));
  return order;
}

// Expansion coefficients c of the first-order eigenvector update
// du_y = U c for one flip (see the header comment). c[y] = 0 and terms
// across near-degenerate gaps are dropped.
inline Eigen::VectorXd expansion_coefficients(const Spectrum& spec,
                                              const EdgeFlip& flip, int y) {
  const Eigen::Index n = spec.vectors.rows();
  if (y < 0 || y >= spec.values.size())
    throw ValidationError("eigen column out of range");
  const double lam = spec.values[y];
  const double ui = spec.vectors(flip.i, y);
  const double uj = spec.vectors(flip.j, y);
  const double dw = static_cast<double>(flip.delta_w);
  const double alpha = uj - lam * ui;
  const double beta = ui - lam * uj;
  Eigen::VectorXd c(n);
  for (Eigen::Index z = 0; z < n; ++z) {
    const double gap = lam - spec.values[z];
    c[z] = std::abs(gap) > kEigGapTol
               ? dw * (alpha * spec.vectors(flip.i, z) +
                       beta * spec.vectors(flip.j, z)) /
                     gap
               : 0.0;
  }
  return c;
}

inline double mean_margin(const std::vector<LogisticModel>& models,
                          const Eigen::RowVectorXd& features, int true_class) {
  Eigen::MatrixXd z(1, features.size());
  z.row(0) = features;
  double acc = 0.0;
  for (const LogisticModel& m : models)
    acc += classification_margin(m.predict_proba(z).row(0).transpose(),
                                 true_class);
  return acc / static_cast<double>(models.size());
}

}  // namespace detail

// First-order update of one generalized eigenvector after a flip, evaluated
// by eigenbasis expansion and renormalized against the flipped degrees.
// Equivalent at first order to the pseudo-inverse update but without any
// dense operator.
inline Eigen::VectorXd eigvec_update_expansion(const Spectrum& spec,
                                               const EdgeFlip& flip, int y) {
  detail::require_full_adjacency(spec, "eigenvector expansion");
  detail::require_valid_flip(flip, spec.vectors.rows());
  const Eigen::VectorXd c = detail::expansion_coefficients(spec, flip, y);
  Eigen::VectorXd v = spec.vectors.col(y) + spec.vectors * c;
  Eigen::VectorXd dprime = spec.degrees;
  dprime[flip.i] += flip.delta_w;
  dprime[flip.j] += flip.delta_w;
  const double nrm2 = v.array().square().matrix().dot(dprime);
  if (!(nrm2 > detail::kNormTol))
    throw SolverError("updated eigenvector lost its scale");
  return v / std::sqrt(nrm2);
}

// Updated surrogate features for the given eigen columns after one flip:
// each column is the expansion-updated eigenvector, renormalized against the
// flipped degrees and scaled by its updated window polynomial.
inline Eigen::MatrixXd updated_embedding_columns(
    const Spectrum& spec, const EdgeFlip& flip, const std::vector<int>& columns,
    int window) {
  detail::require_full_adjacency(spec, "embedding update");
  detail::require_valid_flip(flip, spec.vectors.rows());
  if (window < 1) throw ValidationError("window size must be at least 1");
  const Eigen::Index n = spec.vectors.rows();
  const int k = static_cast<int>(columns.size());
  const double dw = static_cast<double>(flip.delta_w);

  Eigen::MatrixXd coefs(n, k);
  for (int c = 0; c < k; ++c)
    coefs.col(c) = detail::expansion_coefficients(spec, flip, columns[c]);
  Eigen::MatrixXd du;
  detail::gemm(spec.vectors, false, coefs, false, du);

  Eigen::VectorXd dprime = spec.degrees;
  dprime[flip.i] += dw;
  dprime[flip.j] += dw;

  Eigen::MatrixXd out(n, k);
  for (int c = 0; c < k; ++c) {
    const int y = columns[c];
    const double lam = spec.values[y];
    const double ui = spec.vectors(flip.i, y);
    const double uj = spec.vectors(flip.j, y);
    const double lam_new =
        lam + dw * (2.0 * ui * uj - lam * (ui * ui + uj * uj));
    Eigen::VectorXd v = spec.vectors.col(y) + du.col(c);
    const double nrm2 = v.array().square().matrix().dot(dprime);
    if (!(nrm2 > detail::kNormTol))
      throw SolverError("updated eigenvector lost its scale");
    out.col(c) = v * (detail::window_power_sum(lam_new, window) /
                      std::sqrt(nrm2));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Targeted node classification
// ---------------------------------------------------------------------------

// Per-graph state shared by every target on the same clean graph: the
// surrogate features and the classifier ensembles trained on them and on the
// standard factorization embedding. Margins are always the arithmetic mean
// over the ensemble.
struct ClassAttackContext {
  int K = 64;                  // embedding width (clamped to n)
  int T = 5;                   // random-walk window
  double b = 5.0;              // negative-sample weight for the rebuild
  double train_fraction = 0.1; // labeled fraction per ensemble member
  std::vector<int> labels;
  std::vector<int> columns;    // eigen columns, descending |window coeff|
  Eigen::VectorXd coeff;       // clean window coefficients, per column
  Eigen::MatrixXd surrogate_z; // n x K clean surrogate features
  std::vector<LogisticModel> surrogate_ensemble;  // scores candidates
  Eigen::MatrixXd svd_z;       // n x K clean factorization embedding
  std::vector<LogisticModel> svd_ensemble;        // reference margins
  std::vector<std::uint64_t> member_seeds;
  std::uint64_t graph_fingerprint = 0;
};

inline ClassAttackContext make_class_attack_context(
    const Graph& g, const Spectrum& spec, std::vector<int> labels,
    int ensemble_size, std::uint64_t seed, int K = 64, int T = 5,
    double b = 5.0, double train_fraction = 0.1) {
  const int n = g.node_count();
  detail::require_full_adjacency(spec, "classification attack");
  if (spec.graph_fingerprint != g.fingerprint())
    throw ValidationError("spectrum does not match the graph");
  if (static_cast<int>(labels.size()) != n)
    throw ValidationError("one label per node required");
  if (ensemble_size < 1)
    throw ValidationError("ensemble needs at least one classifier");
  if (K < 1) throw ValidationError("embedding width must be positive");
  if (T < 1) throw ValidationError("window size must be at least 1");
  if (!(b > 0.0)) throw ValidationError("negative-sample weight must be positive");

  ClassAttackContext ctx;
  ctx.K = std::min(K, n);
  ctx.T = T;
  ctx.b = b;
  ctx.train_fraction = train_fraction;
  ctx.labels = std::move(labels);
  ctx.graph_fingerprint = g.fingerprint();

  const Eigen::VectorXd full_coeff =
      detail::window_polynomial(spec.values, T);
  ctx.columns = detail::top_window_columns(full_coeff, ctx.K);
  ctx.coeff.resize(ctx.K);
  ctx.surrogate_z.resize(n, ctx.K);
  for (int c = 0; c < ctx.K; ++c) {
    ctx.coeff[c] = full_coeff[ctx.columns[c]];
    ctx.surrogate_z.col(c) = spec.vectors.col(ctx.columns[c]) * ctx.coeff[c];
  }

  ctx.member_seeds.resize(static_cast<std::size_t>(ensemble_size));
  for (int e = 0; e < ensemble_size; ++e)
    ctx.member_seeds[static_cast<std::size_t>(e)] =
        seed + static_cast<std::uint64_t>(e);

  ctx.surrogate_ensemble.reserve(ctx.member_seeds.size());
  for (std::uint64_t s : ctx.member_seeds)
    ctx.surrogate_ensemble.push_back(
        train_logreg(ctx.surrogate_z, ctx.labels, train_fraction, s));

  ctx.svd_z = svd_embedding(build_cooc(g, T, b), ctx.K).Z;
  ctx.svd_ensemble.reserve(ctx.member_seeds.size());
  for (std::uint64_t s : ctx.member_seeds)
    ctx.svd_ensemble.push_back(
        train_logreg(ctx.svd_z, ctx.labels, train_fraction, s));
  return ctx;
}

struct ScoredMargin {
  EdgeFlip flip;
  double margin = 0.0;  // estimated post-flip ensemble margin of the target
};

struct MarginReport {
  int target = -1;
  int true_class = -1;
  double surrogate_margin = 0.0;  // clean margin under the scoring ensemble
  double clean_margin = 0.0;      // clean margin on the factorization embedding
  std::vector<ScoredMargin> scored;  // ascending margin, ties ascending (i, j)
  std::vector<EdgeFlip> chosen;      // the first `budget` entries
  int budget = 0;
  double post_margin = 0.0;  // margin after flips, embedding retrained
  bool misclassified = false;
};

// Chooses `budget` flips incident to `target` (default budget: degree + 3).
// Every pair (v, target) is a candidate except flips that would isolate a
// node, which the factorization model cannot represent. Candidates are
// scored by estimating the target's updated embedding row and averaging the
// classification margin over the clean-surrogate ensemble; the report's
// post-attack margin retrains the standard factorization embedding on the
// flipped graph.
inline MarginReport targeted_class_attack(const Graph& g, const Spectrum& spec,
                                          const ClassAttackContext& ctx,
                                          int target, int budget = -1) {
  const int n = g.node_count();
  detail::require_full_adjacency(spec, "classification attack");
  if (spec.graph_fingerprint != g.fingerprint())
    throw ValidationError("spectrum does not match the graph");
  if (ctx.graph_fingerprint != g.fingerprint())
    throw ValidationError("attack context does not match the graph");
  if (target < 0 || target >= n)
    throw ValidationError("target node out of range");
  if (budget < 0) budget = g.degree(target) + 3;

  const int k = static_cast<int>(ctx.columns.size());
  MarginReport report;
  report.target = target;
  report.true_class = ctx.labels[static_cast<std::size_t>(target)];
  report.budget = budget;

  // Per-target table: table(x, c) = sum_z u_z(x) u_z(target) / (lam_yc -
  // lam_z) over non-degenerate gaps. With it, the target's row update for
  // any candidate flip costs O(columns).
  Eigen::MatrixXd weights(n, k);
  for (int c = 0; c < k; ++c) {
    const int y = ctx.columns[c];
    const double lam = spec.values[y];
    for (int z = 0; z < n; ++z) {
      const double gap = lam - spec.values[z];
      weights(z, c) = std::abs(gap) > detail::kEigGapTol
                          ? spec.vectors(target, z) / gap
                          : 0.0;
    }
  }
  Eigen::MatrixXd table;
  detail::gemm(spec.vectors, false, weights, false, table);

  Eigen::RowVectorXd row(k);
  for (int v = 0; v < n; ++v) {
    if (v == target) continue;
    const EdgeFlip flip = g.flip_for(v, target);
    if (flip.delta_w == -1 && (g.degree(v) == 1 || g.degree(target) == 1))
      continue;  // would isolate a node
    const double dw = static_cast<double>(flip.delta_w);
    bool representable = true;
    for (int c = 0; c < k; ++c) {
      const int y = ctx.columns[c];
      const double lam = spec.values[y];
      const double ui = spec.vectors(flip.i, y);
      const double uj = spec.vectors(flip.j, y);
      const double ut = spec.vectors(target, y);
      const double lam_new =
          lam + dw * (2.0 * ui * uj - lam * (ui * ui + uj * uj));
      const double alpha = uj - lam * ui;
      const double beta = ui - lam * uj;
      const double du_t =
          dw * (alpha * table(flip.i, c) + beta * table(flip.j, c));
      // First-order norm of the updated column against the flipped degrees;
      // the expansion is D-orthogonal to u_y, so no cross term enters.
      const double nrm2 = 1.0 + dw * (ui * ui + uj * uj);
      if (!(nrm2 > detail::kNormTol)) {
        representable = false;
        break;
      }
      row[c] = detail::window_power_sum(lam_new, ctx.T) * (ut + du_t) /
               std::sqrt(nrm2);
    }
    if (!representable) continue;
    report.scored.push_back(
        {flip, detail::mean_margin(ctx.surrogate_ensemble, row,
                                   report.true_class)});
  }

  if (static_cast<std::size_t>(budget) > report.scored.size())
    throw CapacityError("budget " + std::to_string(budget) +
                        " exceeds the " +
                        std::to_string(report.scored.size()) +
                        " admissible candidate flips");
  std::sort(report.scored.begin(), report.scored.end(),
            [](const ScoredMargin& a, const ScoredMargin& b) {
              if (a.margin != b.margin) return a.margin < b.margin;
              return detail::flip_key(a.flip) < detail::flip_key(b.flip);
            });
  report.chosen.reserve(static_cast<std::size_t>(budget));
  for (int p = 0; p < budget; ++p)
    report.chosen.push_back(report.scored[static_cast<std::size_t>(p)].flip);

  report.surrogate_margin = detail::mean_margin(
      ctx.surrogate_ensemble, ctx.surrogate_z.row(target), report.true_class);
  report.clean_margin = detail::mean_margin(
      ctx.svd_ensemble, ctx.svd_z.row(target), report.true_class);

  if (budget == 0) {
    report.post_margin = report.clean_margin;
  } else {
    const Graph flipped = g.with_flips(report.chosen);
    const Eigen::MatrixXd z =
        svd_embedding(build_cooc(flipped, ctx.T, ctx.b), ctx.K).Z;
    double acc = 0.0;
    for (std::uint64_t s : ctx.member_seeds) {
      const LogisticModel m =
          train_logreg(z, ctx.labels, ctx.train_fraction, s);
      acc += classification_margin(
          m.predict_proba(z.row(target)).row(0).transpose(),
          report.true_class);
    }
    report.post_margin = acc / static_cast<double>(ctx.member_seeds.size());
  }
  report.misclassified = report.post_margin < 0.0;
  return report;
}

// Convenience form that builds the shared context for a single target.
inline MarginReport targeted_class_attack(
    const Graph& g, const Spectrum& spec, int target,
    const std::vector<int>& labels, int ensemble_size, std::uint64_t seed,
    int budget = -1, int K = 64, int T = 5, double b = 5.0,
    double train_fraction = 0.1) {
  const ClassAttackContext ctx = make_class_attack_context(
      g, spec, labels, ensemble_size, seed, K, T, b, train_fraction);
  return targeted_class_attack(g, spec, ctx, target, budget);
}

// ---------------------------------------------------------------------------
// Targeted link prediction
// ---------------------------------------------------------------------------

struct LinkTarget {
  int i = -1;
  int j = -1;
  bool is_edge = false;  // ground truth for the evaluation pair
};

namespace detail {

// Canonical form used everywhere below: endpoints ordered, pairs unique,
// labels consistent with the graph, at least one positive.
inline std::vector<LinkTarget> normalize_link_targets(
    const Graph& g, std::vector<LinkTarget> targets) {
  if (targets.empty())
    throw ValidationError("link attack needs at least one evaluation pair");
  const int n = g.node_count();
  std::set<std::pair<int, int>> seen;
  bool any_edge = false;
  for (LinkTarget& t : targets) {
    if (t.i < 0 || t.i >= n || t.j < 0 || t.j >= n)
      throw ValidationError("evaluation pair endpoint out of range");
    if (t.i == t.j)
      throw ValidationError("evaluation pair endpoints must differ");
    if (t.i > t.j) std::swap(t.i, t.j);
    if (!seen.insert({t.i, t.j}).second)
      throw ValidationError("duplicate evaluation pair");
    if (t.is_edge != g.has_edge(t.i, t.j))
      throw ValidationError(
          "evaluation pair label disagrees with the graph at (" +
          std::to_string(t.i) + ", " + std::to_string(t.j) + ")");
    any_edge |= t.is_edge;
  }
  if (!any_edge)
    throw ValidationError("link attack needs at least one positive pair");
  std::sort(targets.begin(), targets.end(),
            [](const LinkTarget& a, const LinkTarget& b) {
              return std::pair(a.i, a.j) < std::pair(b.i, b.j);
            });
  return targets;
}

}  // namespace detail

// Seeded evaluation pairs for link prediction: a fraction of the edges
// (drawn from the pool whose removal keeps every degree positive, so they
// can be held out of training) plus `negative_multiplier` times as many
// non-edges. Deterministic for fixed (graph, arguments).
inline std::vector<LinkTarget> sample_link_targets(
    const Graph& g, double edge_fraction, int negative_multiplier,
    std::uint64_t seed) {
  if (!(edge_fraction > 0.0 && edge_fraction < 1.0))
    throw ValidationError("edge fraction must lie in (0, 1)");
  if (negative_multiplier < 0)
    throw ValidationError("negative multiplier must be non-negative");
  const std::size_t want = static_cast<std::size_t>(
      std::llround(edge_fraction * static_cast<double>(g.edge_count())));
  if (want == 0)
    throw ValidationError("edge fraction selects no edges");

  // Holdout edges: shuffle the protected-removal pool, then accept greedily
  // while no endpoint would drop to zero remaining degree.
  CandidateSet pool = removal_candidates(g, seed);
  Rng rng(seed ^ 0x11bd1e995ULL);
  rng.shuffle(pool.flips);
  std::vector<int> degree_left(static_cast<std::size_t>(g.node_count()));
  for (int v = 0; v < g.node_count(); ++v)
    degree_left[static_cast<std::size_t>(v)] = g.degree(v);
  std::vector<LinkTarget> out;
  for (const EdgeFlip& flip : pool.flips) {
    if (out.size() >= want) break;
    if (degree_left[static_cast<std::size_t>(flip.i)] <= 1 ||
        degree_left[static_cast<std::size_t>(flip.j)] <= 1)
      continue;
    out.push_back({flip.i, flip.j, true});
    --degree_left[static_cast<std::size_t>(flip.i)];
    --degree_left[static_cast<std::size_t>(flip.j)];
  }
  if (out.size() < want)
    throw CapacityError("graph cannot spare " + std::to_string(want) +
                        " holdout edges without isolating a node");

  if (negative_multiplier > 0) {
    const std::size_t negatives = want * static_cast<std::size_t>(negative_multiplier);
    const CandidateSet non_edges =
        sample_add_candidates(g, negatives, seed ^ 0xc2b2ae35ULL);
    for (const EdgeFlip& flip : non_edges.flips)
      out.push_back({flip.i, flip.j, false});
  }
  std::sort(out.begin(), out.end(),
            [](const LinkTarget& a, const LinkTarget& b) {
              return std::pair(a.i, a.j) < std::pair(b.i, b.j);
            });
  return out;
}

// Average precision of dot-product scores over evaluation pairs, using the
// rows of z as node features. Pairs are ranked by descending score with ties
// broken by ascending pair id.
inline double pair_score_ap(const Eigen::MatrixXd& z,
                            const std::vector<LinkTarget>& targets) {
  std::vector<std::pair<double, bool>> scored;
  scored.reserve(targets.size());
  for (const LinkTarget& t : targets) {
    if (t.i < 0 || t.i >= z.rows() || t.j < 0 || t.j >= z.rows())
      throw ValidationError("evaluation pair endpoint out of range");
    scored.emplace_back(z.row(t.i).dot(z.row(t.j)), t.is_edge);
  }
  return average_precision(scored);
}

// Chooses the f candidate flips whose estimated post-flip embedding yields
// the lowest average precision on the evaluation pairs. The surrogate is
// trained on the graph with the positive evaluation pairs removed (they are
// what the defender would hold out), so the returned plan applies to that
// training graph. Candidates must not touch any evaluation pair.
inline AttackPlan targeted_link_attack(const Graph& g,
                                       const std::vector<LinkTarget>& targets,
                                       std::size_t f,
                                       const CandidateSet& candidates,
                                       int K = 64, int T = 5) {
  const int n = g.node_count();
  if (K < 1) throw ValidationError("embedding width must be positive");
  if (T < 1) throw ValidationError("window size must be at least 1");
  const std::vector<LinkTarget> pairs =
      detail::normalize_link_targets(g, targets);

  // Training graph: drop the positive evaluation pairs.
  std::vector<EdgeFlip> holdout;
  std::vector<int> degree_after(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v)
    degree_after[static_cast<std::size_t>(v)] = g.degree(v);
  for (const LinkTarget& t : pairs) {
    if (!t.is_edge) continue;
    holdout.push_back(EdgeFlip{t.i, t.j, -1});
    --degree_after[static_cast<std::size_t>(t.i)];
    --degree_after[static_cast<std::size_t>(t.j)];
  }
  for (int v = 0; v < n; ++v)
    if (degree_after[static_cast<std::size_t>(v)] <= 0)
      throw ValidationError("holding out the positive pairs would isolate node " +
                            std::to_string(v));
  const Graph train = g.with_flips(holdout);

  // Candidates must be consistent with the training graph and disjoint from
  // the evaluation pairs.
  std::set<std::pair<int, int>> protected_pairs;
  for (const LinkTarget& t : pairs) protected_pairs.insert({t.i, t.j});
  for (const EdgeFlip& flip : candidates.flips) {
    const auto key = detail::flip_key(flip);
    if (protected_pairs.count(key))
      throw ValidationError("candidate flip touches evaluation pair (" +
                            std::to_string(key.first) + ", " +
                            std::to_string(key.second) + ")");
    if (train.flip_for(flip.i, flip.j).delta_w != flip.delta_w)
      throw ValidationError("candidate flip is inconsistent with the training graph");
    if (flip.delta_w == -1 &&
        (train.degree(flip.i) == 1 || train.degree(flip.j) == 1))
      throw ValidationError("candidate flip would isolate a node");
  }

  const Spectrum spec = generalized_eigs(train);
  const Eigen::VectorXd full_coeff =
      detail::window_polynomial(spec.values, T);
  const std::vector<int> columns =
      detail::top_window_columns(full_coeff, std::min(K, n));

  std::vector<double> scores(candidates.flips.size());
  for (std::size_t idx = 0; idx < candidates.flips.size(); ++idx) {
    const Eigen::MatrixXd z =
        updated_embedding_columns(spec, candidates.flips[idx], columns, T);
    // Lower average precision is a better attack; plans rank descending.
    scores[idx] = -pair_score_ap(z, pairs);
  }

  AttackParams params;
  params.K = std::min(K, n);
  params.T = T;
  return plan_from_scores(train, f, candidates.flips, std::move(scores),
                          "link", params, candidates.provenance,
                          candidates.provenance.seed);
}

// ---------------------------------------------------------------------------
// Target specification files
// ---------------------------------------------------------------------------

// External description of a targeted run: either one node to misclassify or
// a set of labeled evaluation pairs for link prediction, plus the budget.
struct TargetSpec {
  std::string mode;               // "class" or "link"
  int target = -1;                // class mode
  std::vector<LinkTarget> pairs;  // link mode
  int budget = -1;                // class: -1 means degree + 3; link: f
};

inline nlohmann::json target_spec_to_json(const TargetSpec& spec) {
  nlohmann::json j;
  j["mode"] = spec.mode;
  j["budget"] = spec.budget;
  if (spec.mode == "class") {
    j["target"] = spec.target;
  } else {
    nlohmann::json pairs = nlohmann::json::array();
    for (const LinkTarget& t : spec.pairs)
      pairs.push_back({t.i, t.j, t.is_edge ? 1 : 0});
    j["pairs"] = std::move(pairs);
  }
  return j;
}

inline TargetSpec target_spec_from_json(const nlohmann::json& j,
                                        const std::string& where) {
  try {
    TargetSpec spec;
    spec.mode = j.at("mode").get<std::string>();
    if (spec.mode != "class" && spec.mode != "link")
      throw ValidationError("target mode must be \"class\" or \"link\"");
    spec.budget = j.value("budget", -1);
    if (spec.mode == "class") {
      spec.target = j.at("target").get<int>();
      if (spec.target < 0)
        throw ValidationError("target node must be non-negative");
    } else {
      if (spec.budget < 0)
        throw ValidationError("link mode needs an explicit budget");
      for (const nlohmann::json& row : j.at("pairs")) {
        if (!row.is_array() || row.size() != 3)
          throw ValidationError("pair rows must be [i, j, label]");
        const int label = row[2].get<int>();
        if (label != 0 && label != 1)
          throw ValidationError("pair labels must be 0 or 1");
        spec.pairs.push_back(
            {row[0].get<int>(), row[1].get<int>(), label == 1});
      }
      if (spec.pairs.empty())
        throw ValidationError("link mode needs at least one pair");
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where, 0, std::string("bad target spec: ") + e.what());
  }
}

inline void save_target_spec(const TargetSpec& spec,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw ValidationError("cannot write target spec: " + path.string());
  out << target_spec_to_json(spec).dump(2) << '\n';
  if (!out)
    throw ValidationError("failed writing target spec: " + path.string());
}

inline TargetSpec load_target_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open target spec: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return target_spec_from_json(j, path.string());
}

}  // namespace netpoison
