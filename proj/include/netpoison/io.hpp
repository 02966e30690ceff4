// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "netpoison/errors.hpp"
#include "netpoison/graph.hpp"

namespace netpoison {

static_assert(std::endian::native == std::endian::little,
              "binary cache format assumes a little-endian host");

struct LoadedGraph {
  Graph graph;
  std::size_t dropped_lines = 0;  // self-loops and duplicate edges
};

// Edge-list text format: one "i j" pair per line, 0-indexed, '#' starts a
// comment. Self-loops and duplicates are dropped and counted instead of
// failing; structural problems (bad tokens, isolated nodes) still throw.
inline LoadedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open edge list: " + path);
  std::vector<std::pair<int, int>> edges;
  std::size_t dropped = 0;
  std::string line;
  std::size_t lineno = 0;
  int max_id = -1;
  std::vector<std::pair<int, int>> sorted_seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    long long a = 0, b = 0;
    if (!(ls >> a)) continue;  // blank or comment-only line
    if (!(ls >> b)) throw ParseError(path, lineno, "expected two node ids");
    std::string extra;
    if (ls >> extra) throw ParseError(path, lineno, "trailing token '" + extra + "'");
    if (a < 0 || b < 0) throw ParseError(path, lineno, "negative node id");
    if (a > INT32_MAX / 2 || b > INT32_MAX / 2)
      throw ParseError(path, lineno, "node id too large");
    if (a == b) {
      ++dropped;
      continue;
    }
    int ia = static_cast<int>(a), ib = static_cast<int>(b);
    if (ia > ib) std::swap(ia, ib);
    edges.emplace_back(ia, ib);
    max_id = std::max(max_id, ib);
  }
  if (edges.empty()) throw ValidationError("edge list is empty: " + path);
  std::sort(edges.begin(), edges.end());
  std::vector<std::pair<int, int>> unique_edges;
  unique_edges.reserve(edges.size());
  for (const auto& e : edges) {
    if (!unique_edges.empty() && unique_edges.back() == e) {
      ++dropped;
      continue;
    }
    unique_edges.push_back(e);
  }
  return LoadedGraph{Graph::from_edges(max_id + 1, std::move(unique_edges)),
                     dropped};
}

inline void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write edge list: " + path);
  for (const auto& [a, b] : g.edges()) out << a << " " << b << "\n";
}

// Label file: "node_id label" per line, '#' comments. Every node of the
// graph must be covered exactly once.
inline std::vector<int> load_labels(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open label file: " + path);
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    long long v = 0, c = 0;
    if (!(ls >> v)) continue;
    if (!(ls >> c)) throw ParseError(path, lineno, "expected 'node label'");
    std::string extra;
    if (ls >> extra) throw ParseError(path, lineno, "trailing token '" + extra + "'");
    if (v < 0 || v >= n)
      throw ParseError(path, lineno, "node id out of range");
    if (labels[static_cast<std::size_t>(v)] != -1)
      throw ParseError(path, lineno,
                       "duplicate label for node " + std::to_string(v));
    labels[static_cast<std::size_t>(v)] = static_cast<int>(c);
  }
  for (int v = 0; v < n; ++v)
    if (labels[static_cast<std::size_t>(v)] == -1)
      throw ValidationError("label file misses node " + std::to_string(v));
  return labels;
}

inline void save_labels(const std::vector<int>& labels,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write label file: " + path);
  for (std::size_t v = 0; v < labels.size(); ++v)
    out << v << " " << labels[v] << "\n";
}

}  // namespace netpoison
