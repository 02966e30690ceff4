// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "netpoison/errors.hpp"
#include "netpoison/graph.hpp"
#include "netpoison/rng.hpp"

namespace netpoison {

// Parameters of a degree-corrected stochastic block model with an exact edge
// count and guaranteed connectivity.
struct SyntheticSpec {
  std::string name;
  int nodes = 0;
  int edges = 0;
  int classes = 0;
  std::vector<double> class_fractions;  // must sum to ~1
  // Fraction of the non-tree edges that stay inside a class; the remainder
  // crosses class boundaries. Controls how learnable the labels are.
  double within_fraction = 0.8;
  // Pareto exponent for per-node degree propensity. Smaller = heavier hubs.
  double theta_alpha = 3.0;
  std::uint64_t seed = 1;
};

struct Dataset {
  std::string name;
  Graph graph;
  std::vector<int> labels;
};

namespace detail {

// Weighted pick: index into `prefix` (cumulative weights) via binary search.
inline int weighted_pick(const std::vector<double>& prefix, Rng& rng) {
  const double x = rng.unit() * prefix.back();
  return static_cast<int>(
      std::lower_bound(prefix.begin(), prefix.end(), x) - prefix.begin());
}

}  // namespace detail

inline Dataset generate_dcsbm(const SyntheticSpec& spec) {
  if (spec.nodes < 2 || spec.classes < 1 ||
      static_cast<int>(spec.class_fractions.size()) != spec.classes)
    throw ValidationError("malformed synthetic-graph parameters");
  if (spec.edges < spec.nodes - 1)
    throw ValidationError("edge budget below spanning-tree size");
  if (!(spec.within_fraction >= 0.0) || !(spec.within_fraction <= 1.0))
    throw ValidationError("within-class fraction must lie in [0, 1]");
  const long long cap = static_cast<long long>(spec.nodes) *
                        (spec.nodes - 1) / 2;
  if (spec.edges > cap)
    throw ValidationError("edge budget exceeds the complete graph");

  const int n = spec.nodes;
  const int classes = spec.classes;
  Rng rng(spec.seed);

  // Class sizes: floor the fractions, then hand out the remainder in class
  // order. Nodes are laid out in contiguous class blocks.
  std::vector<int> size(classes);
  int assigned = 0;
  for (int c = 0; c < classes; ++c) {
    size[c] = std::max(1, static_cast<int>(spec.class_fractions[c] * n));
    assigned += size[c];
  }
  int c_fix = 0;
  while (assigned < n) {
    ++size[c_fix % classes];
    ++assigned;
    ++c_fix;
  }
  while (assigned > n) {
    const int c = c_fix % classes;
    if (size[c] > 1) {
      --size[c];
      --assigned;
    }
    ++c_fix;
  }
  std::vector<int> start(classes + 1, 0);
  for (int c = 0; c < classes; ++c) start[c + 1] = start[c] + size[c];

  std::vector<int> labels(n);
  for (int c = 0; c < classes; ++c)
    for (int v = start[c]; v < start[c + 1]; ++v) labels[v] = c;

  // Pareto degree propensities, capped so a single node cannot demand more
  // neighbors than exist.
  std::vector<double> theta(n);
  for (int v = 0; v < n; ++v) {
    double u = rng.unit();
    while (u == 0.0) u = rng.unit();
    theta[v] = std::min(std::pow(u, -1.0 / (spec.theta_alpha - 1.0)),
                        static_cast<double>(n) / 4.0);
  }

  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(spec.edges));
  std::unordered_set<long long> seen;
  seen.reserve(static_cast<std::size_t>(spec.edges) * 2);
  auto add_edge = [&](int a, int b) {
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    const long long key = static_cast<long long>(a) * n + b;
    if (!seen.insert(key).second) return false;
    edges.emplace_back(a, b);
    return true;
  };

  // Connectivity: a propensity-weighted random attachment tree inside each
  // class, then one bridge between consecutive classes.
  for (int c = 0; c < classes; ++c) {
    std::vector<double> prefix;
    prefix.reserve(static_cast<std::size_t>(size[c]));
    prefix.push_back(theta[start[c]]);
    for (int v = start[c] + 1; v < start[c + 1]; ++v) {
      const int anchor = start[c] + detail::weighted_pick(prefix, rng);
      add_edge(v, anchor);
      prefix.push_back(prefix.back() + theta[v]);
    }
  }
  // Per-class propensity prefixes for endpoint draws below.
  std::vector<std::vector<double>> cls_prefix(classes);
  for (int c = 0; c < classes; ++c) {
    cls_prefix[c].reserve(static_cast<std::size_t>(size[c]));
    double acc = 0.0;
    for (int v = start[c]; v < start[c + 1]; ++v) {
      acc += theta[v];
      cls_prefix[c].push_back(acc);
    }
  }
  auto draw_member = [&](int c) {
    return start[c] + detail::weighted_pick(cls_prefix[c], rng);
  };
  for (int c = 0; c + 1 < classes; ++c)
    if (!add_edge(draw_member(c), draw_member(c + 1)))
      add_edge(start[c], start[c + 1]);

  // Remaining edges: biased within/cross class pairs, endpoints drawn by
  // propensity, duplicates rejected.
  std::vector<double> size_prefix(classes);
  {
    double acc = 0.0;
    for (int c = 0; c < classes; ++c) {
      acc += size[c];
      size_prefix[c] = acc;
    }
  }
  long long guard = 0;
  const long long guard_limit = 400ll * spec.edges + 100000;
  while (static_cast<int>(edges.size()) < spec.edges) {
    if (++guard > guard_limit)
      throw ValidationError("edge sampling failed to reach the target count");
    const bool within =
        classes == 1 || rng.unit() < spec.within_fraction;
    if (within) {
      const int c = detail::weighted_pick(size_prefix, rng);
      if (size[c] < 2) continue;
      add_edge(draw_member(c), draw_member(c));
    } else {
      const int a = detail::weighted_pick(size_prefix, rng);
      int b = detail::weighted_pick(size_prefix, rng);
      if (a == b) continue;
      add_edge(draw_member(a), draw_member(b));
    }
  }

  Dataset out;
  out.name = spec.name;
  out.graph = Graph::from_edges(n, std::move(edges));
  out.labels = std::move(labels);
  return out;
}

// Desk-scale stand-ins with the shapes of the three citation/blog networks
// used throughout the experiments. Class balance, degree-tail weight, and
// community strength are tuned so the downstream tasks behave like the real
// networks (clean micro-F1 in the expected band, communities attackable).
inline Dataset cora_like(std::uint64_t seed = 7001) {
  SyntheticSpec spec;
  spec.name = "cora-like";
  spec.nodes = 2810;
  spec.edges = 7981;
  spec.classes = 7;
  spec.class_fractions = {0.29, 0.15, 0.15, 0.12, 0.11, 0.10, 0.08};
  // calibrated so the clean embedding classifies at micro-F1 ~ 0.80
  spec.within_fraction = 0.65;
  spec.theta_alpha = 3.0;
  spec.seed = seed;
  return generate_dcsbm(spec);
}

inline Dataset citeseer_like(std::uint64_t seed = 7002) {
  SyntheticSpec spec;
  spec.name = "citeseer-like";
  spec.nodes = 2110;
  spec.edges = 3668;
  spec.classes = 6;
  spec.class_fractions = {0.25, 0.21, 0.20, 0.15, 0.10, 0.09};
  spec.within_fraction = 0.66;
  spec.theta_alpha = 3.2;
  spec.seed = seed;
  return generate_dcsbm(spec);
}

inline Dataset polblogs_like(std::uint64_t seed = 7003) {
  SyntheticSpec spec;
  spec.name = "polblogs-like";
  spec.nodes = 1222;
  spec.edges = 16714;
  spec.classes = 2;
  spec.class_fractions = {0.52, 0.48};
  spec.within_fraction = 0.9;
  spec.theta_alpha = 2.3;
  spec.seed = seed;
  return generate_dcsbm(spec);
}

}  // namespace netpoison
