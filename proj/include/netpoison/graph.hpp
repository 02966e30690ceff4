// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "netpoison/errors.hpp"
#include "netpoison/rng.hpp"

namespace netpoison {

// A single adjacency toggle. delta_w = +1 adds the edge (i,j), -1 removes it.
// Must satisfy delta_w = 1 - 2*A[i][j] for the graph it is applied to.
struct EdgeFlip {
  int i = 0;
  int j = 0;
  int delta_w = 0;
  friend bool operator==(const EdgeFlip&, const EdgeFlip&) = default;
};

// Undirected, unweighted graph. Immutable after construction; "mutation"
// means building a new graph via with_flips, so concurrent readers are safe.
class Graph {
 public:
  Graph() = default;

  // Strict constructor: rejects self-loops, duplicate or out-of-range edges,
  // and isolated nodes. File loading with lenient dedup lives in io.hpp.
  static Graph from_edges(int n, std::vector<std::pair<int, int>> edges) {
    if (n <= 0) throw ValidationError("graph must have at least one node");
    for (auto& [a, b] : edges) {
      if (a == b)
        throw ValidationError("self-loop at node " + std::to_string(a));
      if (a < 0 || b < 0 || a >= n || b >= n)
        throw ValidationError("edge endpoint out of range: (" +
                              std::to_string(a) + "," + std::to_string(b) +
                              ")");
      if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
      throw ValidationError("duplicate edge in input");
    Graph g;
    g.n_ = n;
    g.edges_ = std::move(edges);
    g.adj_.assign(static_cast<std::size_t>(n), {});
    for (const auto& [a, b] : g.edges_) {
      g.adj_[static_cast<std::size_t>(a)].push_back(b);
      g.adj_[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& nb : g.adj_) std::sort(nb.begin(), nb.end());
    for (int v = 0; v < n; ++v)
      if (g.adj_[static_cast<std::size_t>(v)].empty())
        throw ValidationError("isolated node " + std::to_string(v));
    return g;
  }

  int node_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  // vol(A) = sum of all adjacency entries = 2 * edge_count.
  long long volume() const { return 2ll * static_cast<long long>(edges_.size()); }

  int degree(int v) const {
    check_node(v);
    return static_cast<int>(adj_[static_cast<std::size_t>(v)].size());
  }

  int min_degree() const {
    std::size_t m = adj_.empty() ? 0 : adj_[0].size();
    for (const auto& nb : adj_) m = std::min(m, nb.size());
    return static_cast<int>(m);
  }

  const std::vector<int>& neighbors(int v) const {
    check_node(v);
    return adj_[static_cast<std::size_t>(v)];
  }

  bool has_edge(int i, int j) const {
    check_node(i);
    check_node(j);
    if (i == j) return false;
    const auto& nb = adj_[static_cast<std::size_t>(i)];
    return std::binary_search(nb.begin(), nb.end(), j);
  }

  // Sorted (min,max) endpoint pairs.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  std::vector<double> degree_vector() const {
    std::vector<double> d(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v)
      d[static_cast<std::size_t>(v)] =
          static_cast<double>(adj_[static_cast<std::size_t>(v)].size());
    return d;
  }

  // The flip that toggles (i,j) on this graph: delta_w = 1 - 2*A[i][j].
  EdgeFlip flip_for(int i, int j) const {
    check_node(i);
    check_node(j);
    if (i == j) throw ValidationError("flip endpoints must differ");
    if (i > j) std::swap(i, j);
    return EdgeFlip{i, j, has_edge(i, j) ? -1 : +1};
  }

  // Applies flips sequentially and returns the resulting graph. Each flip
  // must be consistent with the state at its turn; a removal may never
  // leave a node without edges.
  Graph with_flips(std::span<const EdgeFlip> flips) const {
    Graph g = *this;
    for (const auto& f : flips) {
      g.check_node(f.i);
      g.check_node(f.j);
      if (f.i == f.j) throw ValidationError("flip endpoints must differ");
      const bool present = g.has_edge(f.i, f.j);
      const int expected = present ? -1 : +1;
      if (f.delta_w != expected)
        throw ValidationError(
            "flip (" + std::to_string(f.i) + "," + std::to_string(f.j) +
            ") with delta_w=" + std::to_string(f.delta_w) +
            " does not match current adjacency");
      if (present) {
        if (g.degree(f.i) == 1 || g.degree(f.j) == 1)
          throw ValidationError("removing (" + std::to_string(f.i) + "," +
                                std::to_string(f.j) +
                                ") would isolate a node");
        g.erase_edge(f.i, f.j);
      } else {
        g.insert_edge(f.i, f.j);
      }
    }
    return g;
  }

  // FNV-1a over node count and the sorted edge list. Stable across runs and
  // platforms; used to key cache files and result records.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
      for (int b = 0; b < 8; ++b) {
        h ^= (v >> (8 * b)) & 0xffu;
        h *= 1099511628211ull;
      }
    };
    mix(static_cast<std::uint64_t>(n_));
    for (const auto& [a, b] : edges_) {
      mix(static_cast<std::uint64_t>(a));
      mix(static_cast<std::uint64_t>(b));
    }
    return h;
  }

 private:
  void check_node(int v) const {
    if (v < 0 || v >= n_)
      throw ValidationError("node id " + std::to_string(v) + " out of range");
  }

  void insert_edge(int a, int b) {
    if (a > b) std::swap(a, b);
    auto pos = std::lower_bound(edges_.begin(), edges_.end(),
                                std::make_pair(a, b));
    edges_.insert(pos, {a, b});
    auto& na = adj_[static_cast<std::size_t>(a)];
    na.insert(std::lower_bound(na.begin(), na.end(), b), b);
    auto& nb = adj_[static_cast<std::size_t>(b)];
    nb.insert(std::lower_bound(nb.begin(), nb.end(), a), a);
  }

  void erase_edge(int a, int b) {
    if (a > b) std::swap(a, b);
    auto pos = std::lower_bound(edges_.begin(), edges_.end(),
                                std::make_pair(a, b));
    edges_.erase(pos);
    auto& na = adj_[static_cast<std::size_t>(a)];
    na.erase(std::lower_bound(na.begin(), na.end(), b));
    auto& nb = adj_[static_cast<std::size_t>(b)];
    nb.erase(std::lower_bound(nb.begin(), nb.end(), a));
  }

  int n_ = 0;
  std::vector<std::vector<int>> adj_;
  std::vector<std::pair<int, int>> edges_;
};

inline Graph apply_flips(const Graph& g, std::span<const EdgeFlip> flips) {
  return g.with_flips(flips);
}

struct CandidateProvenance {
  std::string kind;  // "add" or "remove"
  std::uint64_t seed = 0;
  std::size_t requested = 0;  // additions only; 0 for removals
  std::vector<int> restricted;
};

// A pool of candidate flips an attack may choose from.
struct CandidateSet {
  std::vector<EdgeFlip> flips;
  CandidateProvenance provenance;
};

namespace detail {
inline std::vector<int> normalize_restricted(const Graph& g,
                                             std::vector<int> restricted) {
  for (int v : restricted)
    if (v < 0 || v >= g.node_count())
      throw ValidationError("restricted node " + std::to_string(v) +
                            " out of range");
  std::sort(restricted.begin(), restricted.end());
  restricted.erase(std::unique(restricted.begin(), restricted.end()),
                   restricted.end());
  return restricted;
}
}  // namespace detail

// Uniformly samples `count` distinct non-edges avoiding restricted nodes.
// Deterministic for a fixed (graph, count, seed, restricted) input.
inline CandidateSet sample_add_candidates(const Graph& g, std::size_t count,
                                          std::uint64_t seed,
                                          std::vector<int> restricted = {}) {
  if (count == 0) throw ValidationError("candidate count must be positive");
  restricted = detail::normalize_restricted(g, restricted);
  const int n = g.node_count();
  std::vector<char> blocked(static_cast<std::size_t>(n), 0);
  for (int v : restricted) blocked[static_cast<std::size_t>(v)] = 1;
  std::vector<int> allowed;
  allowed.reserve(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v)
    if (!blocked[static_cast<std::size_t>(v)]) allowed.push_back(v);
  const std::uint64_t m = allowed.size();
  std::uint64_t edges_within = 0;
  for (const auto& [a, b] : g.edges())
    if (!blocked[static_cast<std::size_t>(a)] &&
        !blocked[static_cast<std::size_t>(b)])
      ++edges_within;
  const std::uint64_t eligible = (m * (m - 1)) / 2 - edges_within;
  if (count > eligible)
    throw CapacityError("requested " + std::to_string(count) +
                        " addition candidates but only " +
                        std::to_string(eligible) + " eligible non-edges");

  CandidateSet out;
  out.provenance = {"add", seed, count, restricted};
  out.flips.reserve(count);
  Rng rng(seed);
  if (count * 3 >= eligible) {
    // Dense request: enumerate every eligible pair, then partial
    // Fisher-Yates for a uniform sample without replacement.
    std::vector<std::pair<int, int>> pool;
    pool.reserve(static_cast<std::size_t>(eligible));
    for (std::size_t ai = 0; ai < allowed.size(); ++ai)
      for (std::size_t bi = ai + 1; bi < allowed.size(); ++bi)
        if (!g.has_edge(allowed[ai], allowed[bi]))
          pool.emplace_back(allowed[ai], allowed[bi]);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t r =
          k + static_cast<std::size_t>(rng.bounded(pool.size() - k));
      std::swap(pool[k], pool[r]);
      out.flips.push_back(EdgeFlip{pool[k].first, pool[k].second, +1});
    }
  } else {
    // Sparse request: rejection sampling over node pairs.
    auto key = [n](int a, int b) {
      return static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(n) +
             static_cast<std::uint64_t>(b);
    };
    std::unordered_set<std::uint64_t> dedup;
    dedup.reserve(count * 2);
    while (out.flips.size() < count) {
      int a = allowed[static_cast<std::size_t>(rng.bounded(m))];
      int b = allowed[static_cast<std::size_t>(rng.bounded(m))];
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (g.has_edge(a, b)) continue;
      if (!dedup.insert(key(a, b)).second) continue;
      out.flips.push_back(EdgeFlip{a, b, +1});
    }
  }
  return out;
}

// Every edge except a protected subset: each node keeps at least one
// protected incident edge, so removing any subset of the candidates can
// never isolate a node. Degree-1 edges are always protected; on top of
// that every node protects one seeded uniform pick among its edges,
// visited in ascending node order.
inline CandidateSet removal_candidates(const Graph& g, std::uint64_t seed,
                                       std::vector<int> restricted = {}) {
  restricted = detail::normalize_restricted(g, restricted);
  const int n = g.node_count();
  std::vector<char> blocked(static_cast<std::size_t>(n), 0);
  for (int v : restricted) blocked[static_cast<std::size_t>(v)] = 1;

  auto edge_index = [&g](int a, int b) {
    if (a > b) std::swap(a, b);
    const auto& es = g.edges();
    return static_cast<std::size_t>(
        std::lower_bound(es.begin(), es.end(), std::make_pair(a, b)) -
        es.begin());
  };
  std::vector<char> protected_edge(g.edge_count(), 0);
  for (int v = 0; v < n; ++v)
    if (g.degree(v) == 1)
      protected_edge[edge_index(v, g.neighbors(v)[0])] = 1;
  Rng rng(seed);
  for (int v = 0; v < n; ++v) {
    const auto& nb = g.neighbors(v);
    const int pick = static_cast<int>(rng.bounded(nb.size()));
    protected_edge[edge_index(v, nb[static_cast<std::size_t>(pick)])] = 1;
  }

  CandidateSet out;
  out.provenance = {"remove", seed, 0, restricted};
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& [a, b] = g.edges()[e];
    if (protected_edge[e]) continue;
    if (blocked[static_cast<std::size_t>(a)] ||
        blocked[static_cast<std::size_t>(b)])
      continue;
    out.flips.push_back(EdgeFlip{a, b, -1});
  }
  return out;
}

}  // namespace netpoison
