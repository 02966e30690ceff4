// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "netpoison/cooc.hpp"
#include "netpoison/embedding.hpp"
#include "netpoison/errors.hpp"
#include "netpoison/graph.hpp"
#include "netpoison/loss.hpp"
#include "netpoison/parallel.hpp"
#include "netpoison/rng.hpp"
#include "netpoison/spectrum.hpp"

namespace netpoison {

enum class ScorerKind : std::uint8_t { dw2 = 0, dw3 = 1, sc = 2 };

inline const char* scorer_name(ScorerKind s) {
  switch (s) {
    case ScorerKind::dw2: return "dw2";
    case ScorerKind::dw3: return "dw3";
    case ScorerKind::sc: return "sc";
  }
  throw ValidationError("unknown scorer");
}

struct AttackParams {
  int K = 64;
  int T = 5;
  double b = 5.0;
  SpectrumKind sc_kind = SpectrumKind::laplacian_rw;  // sc scorer only
  int workers = 1;
};

struct ScoredFlip {
  EdgeFlip flip;
  double score = 0.0;
};

struct AttackPlan {
  std::string strategy;
  std::vector<ScoredFlip> scored;  // descending score, ties ascending (i, j)
  std::vector<EdgeFlip> chosen;    // the first f entries of `scored`
  std::size_t f = 0;
  std::uint64_t seed = 0;
  AttackParams params;
  CandidateProvenance provenance;
  std::uint64_t graph_fingerprint = 0;
};

// Precomputed inputs a caller may share across attacks; anything missing is
// computed on the spot.
struct ScoringContext {
  const Spectrum* adjacency = nullptr;   // for the dw3 scorer
  const Spectrum* laplacian = nullptr;   // for the sc scorer
  const SymmetricSvd* mhat = nullptr;    // for the dw2 scorer
};

namespace detail {

// Canonical flip order: ascending (min endpoint, max endpoint).
inline std::pair<int, int> flip_key(const EdgeFlip& e) {
  return {std::min(e.i, e.j), std::max(e.i, e.j)};
}

inline void check_scores_finite(const std::vector<double>& scores) {
  for (double s : scores)
    if (!std::isfinite(s))
      throw SolverError("candidate score is not finite");
}

}  // namespace detail

// Rank candidates by the given scores and keep the top f. This is the shared
// greedy step: one scoring pass against the clean graph, descending scores,
// ties broken by ascending (i, j) so the result is independent of candidate
// order. The chosen set is the first f *jointly applicable* entries of the
// ranking: a removal is skipped when the picks above it already drained one
// of its endpoints to a single remaining edge, because no node may end up
// isolated. Without skips (every pool of addition or singly-safe removal
// candidates where degrees stay clear of one) this is exactly the top-f
// prefix, monotone in f.
inline AttackPlan plan_from_scores(const Graph& g, std::size_t f,
                                   const std::vector<EdgeFlip>& flips,
                                   std::vector<double> scores,
                                   std::string strategy,
                                   const AttackParams& params,
                                   const CandidateProvenance& provenance,
                                   std::uint64_t seed) {
  if (scores.size() != flips.size())
    throw ValidationError("one score per candidate flip required");
  if (flips.size() < f)
    throw CapacityError("requested " + std::to_string(f) + " flips but only " +
                        std::to_string(flips.size()) + " candidates");
  detail::check_scores_finite(scores);
  std::vector<std::size_t> order(flips.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return detail::flip_key(flips[a]) < detail::flip_key(flips[b]);
  });
  AttackPlan plan;
  plan.strategy = std::move(strategy);
  plan.f = f;
  plan.seed = seed;
  plan.params = params;
  plan.provenance = provenance;
  plan.graph_fingerprint = g.fingerprint();
  plan.scored.reserve(flips.size());
  for (std::size_t idx : order) plan.scored.push_back({flips[idx], scores[idx]});
  plan.chosen.reserve(f);
  std::vector<int> degree_left(static_cast<std::size_t>(g.node_count()));
  for (int v = 0; v < g.node_count(); ++v)
    degree_left[static_cast<std::size_t>(v)] = g.degree(v);
  for (const ScoredFlip& s : plan.scored) {
    if (plan.chosen.size() == f) break;
    const auto i = static_cast<std::size_t>(s.flip.i);
    const auto j = static_cast<std::size_t>(s.flip.j);
    if (s.flip.delta_w < 0 && (degree_left[i] <= 1 || degree_left[j] <= 1))
      continue;  // jointly inapplicable: would isolate a node
    degree_left[i] += s.flip.delta_w;
    degree_left[j] += s.flip.delta_w;
    plan.chosen.push_back(s.flip);
  }
  if (plan.chosen.size() < f)
    throw CapacityError("only " + std::to_string(plan.chosen.size()) + " of " +
                        std::to_string(f) +
                        " requested flips are jointly applicable");
  return plan;
}

namespace detail {

// Score every candidate against one fixed (graph, spectrum) context. Pure
// map, each index writes its own slot, so the parallel version is
// deterministic.
template <typename Fn>
inline std::vector<double> score_candidates(const std::vector<EdgeFlip>& flips,
                                            int workers, Fn&& score_one) {
  std::vector<double> scores(flips.size());
  parallel_for(flips.size(), workers, [&](std::size_t idx, int) {
    scores[idx] = score_one(flips[idx]);
  });
  return scores;
}

}  // namespace detail

// Greedy untargeted attack: score every candidate flip once against the
// clean graph's spectrum (no re-scoring between picks) and keep the top f.
inline AttackPlan general_attack(const Graph& g, std::size_t f,
                                 const CandidateSet& candidates,
                                 ScorerKind scorer,
                                 const AttackParams& params = {},
                                 const ScoringContext& ctx = {}) {
  if (candidates.flips.size() < f)
    throw CapacityError("requested " + std::to_string(f) + " flips but only " +
                        std::to_string(candidates.flips.size()) +
                        " candidates");
  std::vector<double> scores;
  if (scorer == ScorerKind::dw3) {
    Spectrum owned;
    const Spectrum* spec = ctx.adjacency;
    if (spec == nullptr) {
      owned = generalized_eigs(g);
      spec = &owned;
    }
    scores = detail::score_candidates(
        candidates.flips, params.workers, [&](const EdgeFlip& flip) {
          return loss_dw3_for_flip(*spec, g, flip, params.K, params.T,
                                   params.b);
        });
  } else if (scorer == ScorerKind::dw2) {
    SymmetricSvd owned;
    const SymmetricSvd* mhat = ctx.mhat;
    if (mhat == nullptr) {
      CoocFactorization fac = build_cooc(g, params.T, params.b);
      owned = sym_svd(fac.Mhat);
      mhat = &owned;
    }
    scores = detail::score_candidates(
        candidates.flips, params.workers, [&](const EdgeFlip& flip) {
          return loss_dw2_for_flip(g, *mhat, flip, params.K, params.T,
                                   params.b);
        });
  } else {
    Spectrum owned;
    const Spectrum* lap = ctx.laplacian;
    if (lap != nullptr && lap->kind != params.sc_kind)
      throw ValidationError("provided Laplacian spectrum has the wrong kind");
    if (lap == nullptr) {
      owned = laplacian_eigs(g, params.sc_kind);
      lap = &owned;
    }
    scores = detail::score_candidates(
        candidates.flips, params.workers, [&](const EdgeFlip& flip) {
          return loss_sc_for_flip(*lap, flip, params.K, params.sc_kind);
        });
  }
  return plan_from_scores(g, f, candidates.flips, std::move(scores),
                          scorer_name(scorer), params, candidates.provenance,
                          candidates.provenance.seed);
}

// Add-by-remove: add c*f randomly sampled candidate edges, then score the
// removal of each added edge on the augmented graph and drop the (c-1)*f
// whose removal leaves the loss highest (the least valuable additions).
// A kept addition is one whose removal would pull the loss down the most,
// reported with contribution score = loss(augmented) - loss(augmented - e).
inline AttackPlan add_by_remove(const Graph& g, std::size_t f, int c,
                                const CandidateSet& candidates,
                                ScorerKind scorer, std::uint64_t seed,
                                const AttackParams& params = {}) {
  if (c < 1) throw ValidationError("multiplier c must be >= 1");
  if (candidates.provenance.kind != "add")
    throw ValidationError("add_by_remove requires addition candidates");
  const std::size_t pool = static_cast<std::size_t>(c) * f;
  if (candidates.flips.size() < pool)
    throw CapacityError("add_by_remove needs " + std::to_string(pool) +
                        " candidates but only " +
                        std::to_string(candidates.flips.size()) +
                        " are available");
  // Canonical order first so the sampled pool is a function of the candidate
  // *set* and the seed, not of the order the set arrived in.
  std::vector<EdgeFlip> sampled = candidates.flips;
  std::sort(sampled.begin(), sampled.end(),
            [](const EdgeFlip& a, const EdgeFlip& b) {
              return detail::flip_key(a) < detail::flip_key(b);
            });
  Rng rng(seed);
  rng.shuffle(sampled);
  sampled.resize(pool);

  Graph aug = g.with_flips(sampled);
  std::vector<EdgeFlip> removals(pool);
  for (std::size_t p = 0; p < pool; ++p)
    removals[p] = aug.flip_for(sampled[p].i, sampled[p].j);

  double reference = 0.0;
  std::vector<double> removal_loss;
  if (scorer == ScorerKind::dw3) {
    Spectrum spec = generalized_eigs(aug);
    reference = loss_dw3_reference(spec, aug, params.K, params.T, params.b);
    removal_loss = detail::score_candidates(
        removals, params.workers, [&](const EdgeFlip& flip) {
          return loss_dw3_for_flip(spec, aug, flip, params.K, params.T,
                                   params.b);
        });
  } else if (scorer == ScorerKind::dw2) {
    CoocFactorization fac = build_cooc(aug, params.T, params.b);
    SymmetricSvd mhat = sym_svd(fac.Mhat);
    reference = loss_dw2_frozen(aug, mhat, params.K, params.T, params.b);
    removal_loss = detail::score_candidates(
        removals, params.workers, [&](const EdgeFlip& flip) {
          return loss_dw2_for_flip(aug, mhat, flip, params.K, params.T,
                                   params.b);
        });
  } else {
    Spectrum lap = laplacian_eigs(aug, params.sc_kind);
    reference = loss_sc_reference(lap, params.K, params.sc_kind);
    removal_loss = detail::score_candidates(
        removals, params.workers, [&](const EdgeFlip& flip) {
          return loss_sc_for_flip(lap, flip, params.K, params.sc_kind);
        });
  }
  std::vector<double> contribution(pool);
  for (std::size_t p = 0; p < pool; ++p)
    contribution[p] = reference - removal_loss[p];
  AttackPlan plan =
      plan_from_scores(g, f, sampled, std::move(contribution), "abr", params,
                       candidates.provenance, seed);
  return plan;
}

enum class BaselineKind : std::uint8_t { rnd = 0, deg = 1, eig = 2 };

inline const char* baseline_name(BaselineKind k) {
  switch (k) {
    case BaselineKind::rnd: return "rnd";
    case BaselineKind::deg: return "deg";
    case BaselineKind::eig: return "eig";
  }
  throw ValidationError("unknown baseline");
}

namespace detail {

// Eigenvector centrality of the graph's edges = principal eigenvector of the
// line graph's adjacency B, computed implicitly: (Bx)_e for e = (i, j) is
// S_i + S_j - 2 x_e with S_v = sum of x over edges at v. Iterating with
// (B + I) keeps the iteration convergent even when the line graph is
// bipartite; the shift does not change eigenvectors.
inline std::vector<double> line_graph_centrality(const Graph& g) {
  const auto& edges = g.edges();
  const std::size_t m = edges.size();
  if (m == 0) throw ValidationError("graph has no edges");
  std::vector<double> x(m, 1.0 / std::sqrt(static_cast<double>(m)));
  std::vector<double> s(static_cast<std::size_t>(g.node_count()));
  std::vector<double> y(m);
  for (int iter = 0; iter < 200; ++iter) {
    std::fill(s.begin(), s.end(), 0.0);
    for (std::size_t e = 0; e < m; ++e) {
      s[static_cast<std::size_t>(edges[e].first)] += x[e];
      s[static_cast<std::size_t>(edges[e].second)] += x[e];
    }
    double norm2 = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      y[e] = s[static_cast<std::size_t>(edges[e].first)] +
             s[static_cast<std::size_t>(edges[e].second)] - x[e];
      norm2 += y[e] * y[e];
    }
    const double norm = std::sqrt(norm2);
    if (!(norm > 0.0)) throw SolverError("centrality iteration collapsed");
    double change = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      y[e] /= norm;
      change = std::max(change, std::abs(y[e] - x[e]));
    }
    x.swap(y);
    if (change <= 1e-12) break;
  }
  return x;
}

}  // namespace detail

// Attack-agnostic baselines. rnd picks f uniformly from the candidates; deg
// ranks by the edge's degree centrality in the line graph (d_i + d_j - 2,
// degrees taken from the given graph for removals and additions alike); eig
// ranks removals by line-graph eigenvector centrality and rejects additions
// (the complement's line graph is far too large to decompose).
inline AttackPlan baseline_attack(const Graph& g, std::size_t f,
                                  BaselineKind kind,
                                  const CandidateSet& candidates,
                                  std::uint64_t seed = 0) {
  if (candidates.flips.size() < f)
    throw CapacityError("requested " + std::to_string(f) + " flips but only " +
                        std::to_string(candidates.flips.size()) +
                        " candidates");
  const AttackParams params{};  // baselines ignore factorization parameters
  if (kind == BaselineKind::rnd) {
    std::vector<EdgeFlip> pick = candidates.flips;
    std::sort(pick.begin(), pick.end(),
              [](const EdgeFlip& a, const EdgeFlip& b) {
                return detail::flip_key(a) < detail::flip_key(b);
              });
    Rng rng(seed);
    rng.shuffle(pick);
    // Score by shuffled position (descending) so the selection is the first
    // f applicable picks of the random order; a skipped pick spills over to
    // the next random candidate instead of failing.
    std::vector<double> position(pick.size());
    for (std::size_t p = 0; p < pick.size(); ++p)
      position[p] = static_cast<double>(pick.size() - p);
    return plan_from_scores(g, f, pick, std::move(position), "rnd", params,
                            candidates.provenance, seed);
  }
  if (kind == BaselineKind::deg) {
    std::vector<double> scores(candidates.flips.size());
    for (std::size_t idx = 0; idx < scores.size(); ++idx) {
      const EdgeFlip& e = candidates.flips[idx];
      scores[idx] = static_cast<double>(g.degree(e.i) + g.degree(e.j) - 2);
    }
    return plan_from_scores(g, f, candidates.flips, std::move(scores), "deg",
                            params, candidates.provenance, seed);
  }
  if (candidates.provenance.kind == "add")
    throw ValidationError(
        "eigencentrality baseline supports removals only; the line graph of "
        "the complement is not tractable");
  const auto& edges = g.edges();
  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(edges.size());
  const auto key = [&g](int a, int b) {
    const auto [lo, hi] = std::minmax(a, b);
    return static_cast<std::uint64_t>(lo) *
               static_cast<std::uint64_t>(g.node_count()) +
           static_cast<std::uint64_t>(hi);
  };
  for (std::size_t e = 0; e < edges.size(); ++e)
    index.emplace(key(edges[e].first, edges[e].second), e);
  std::vector<double> centrality = detail::line_graph_centrality(g);
  std::vector<double> scores(candidates.flips.size());
  for (std::size_t idx = 0; idx < scores.size(); ++idx) {
    const EdgeFlip& flip = candidates.flips[idx];
    auto it = index.find(key(flip.i, flip.j));
    if (it == index.end())
      throw ValidationError("removal candidate (" + std::to_string(flip.i) +
                            "," + std::to_string(flip.j) +
                            ") is not an existing edge");
    scores[idx] = centrality[it->second];
  }
  return plan_from_scores(g, f, candidates.flips, std::move(scores), "eig",
                          params, candidates.provenance, seed);
}

// The node set an attacker may NOT touch: a seeded random fraction p_r of all
// nodes. Realized as a prefix of one permutation so that, for a fixed seed,
// growing p_r only ever adds nodes (restricted sets are nested).
inline std::vector<int> restricted_nodes(const Graph& g, double p_r,
                                         std::uint64_t seed) {
  if (!(p_r >= 0.0 && p_r <= 1.0))
    throw ValidationError("restricted fraction must lie in [0, 1]");
  const int n = g.node_count();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);
  const auto count = static_cast<std::size_t>(std::min<long long>(
      n, std::llround(p_r * static_cast<double>(n))));
  perm.resize(count);
  std::sort(perm.begin(), perm.end());
  return perm;
}

}  // namespace netpoison
