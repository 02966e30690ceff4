// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "netpoison/attack.hpp"
#include "netpoison/errors.hpp"

namespace netpoison {

namespace detail {

inline const char* spectrum_kind_name(SpectrumKind k) {
  switch (k) {
    case SpectrumKind::adjacency: return "adjacency";
    case SpectrumKind::laplacian_rw: return "laplacian_rw";
    case SpectrumKind::laplacian_plain: return "laplacian_plain";
  }
  throw ValidationError("unknown spectrum kind");
}

inline SpectrumKind spectrum_kind_from_name(const std::string& name) {
  if (name == "adjacency") return SpectrumKind::adjacency;
  if (name == "laplacian_rw") return SpectrumKind::laplacian_rw;
  if (name == "laplacian_plain") return SpectrumKind::laplacian_plain;
  throw ValidationError("unknown spectrum kind: " + name);
}

}  // namespace detail

inline nlohmann::json plan_to_json(const AttackPlan& plan) {
  nlohmann::json j;
  j["strategy"] = plan.strategy;
  j["graph_fingerprint"] = plan.graph_fingerprint;
  nlohmann::json cfg;
  cfg["f"] = plan.f;
  cfg["seed"] = plan.seed;
  cfg["K"] = plan.params.K;
  cfg["T"] = plan.params.T;
  cfg["b"] = plan.params.b;
  cfg["sc_kind"] = detail::spectrum_kind_name(plan.params.sc_kind);
  cfg["candidates"] = {{"kind", plan.provenance.kind},
                       {"seed", plan.provenance.seed},
                       {"requested", plan.provenance.requested},
                       {"restricted", plan.provenance.restricted}};
  j["config"] = cfg;
  nlohmann::json flips = nlohmann::json::array();
  for (const ScoredFlip& s : plan.scored)
    flips.push_back({s.flip.i, s.flip.j, s.flip.delta_w, s.score});
  j["flips"] = std::move(flips);
  return j;
}

inline AttackPlan plan_from_json(const nlohmann::json& j,
                                 const std::string& where) {
  try {
    AttackPlan plan;
    plan.strategy = j.at("strategy").get<std::string>();
    plan.graph_fingerprint = j.at("graph_fingerprint").get<std::uint64_t>();
    const nlohmann::json& cfg = j.at("config");
    plan.f = cfg.at("f").get<std::size_t>();
    plan.seed = cfg.at("seed").get<std::uint64_t>();
    plan.params.K = cfg.at("K").get<int>();
    plan.params.T = cfg.at("T").get<int>();
    plan.params.b = cfg.at("b").get<double>();
    plan.params.sc_kind =
        detail::spectrum_kind_from_name(cfg.at("sc_kind").get<std::string>());
    const nlohmann::json& cand = cfg.at("candidates");
    plan.provenance.kind = cand.at("kind").get<std::string>();
    plan.provenance.seed = cand.at("seed").get<std::uint64_t>();
    plan.provenance.requested = cand.at("requested").get<std::size_t>();
    plan.provenance.restricted =
        cand.at("restricted").get<std::vector<int>>();
    for (const nlohmann::json& row : j.at("flips")) {
      if (!row.is_array() || row.size() != 4)
        throw ValidationError("flip rows must be [i, j, delta_w, score]");
      ScoredFlip s;
      s.flip.i = row[0].get<int>();
      s.flip.j = row[1].get<int>();
      s.flip.delta_w = row[2].get<int>();
      s.score = row[3].get<double>();
      if (s.flip.delta_w != 1 && s.flip.delta_w != -1)
        throw ValidationError("flip delta_w must be +1 or -1");
      plan.scored.push_back(s);
    }
    if (plan.scored.size() < plan.f)
      throw ValidationError("plan lists fewer flips than its budget f");
    for (std::size_t p = 0; p < plan.f; ++p)
      plan.chosen.push_back(plan.scored[p].flip);
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where, 0, std::string("bad attack plan: ") + e.what());
  }
}

inline void save_plan(const AttackPlan& plan,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write plan file: " + path.string());
  out << plan_to_json(plan).dump(2) << '\n';
  if (!out) throw ValidationError("failed writing plan file: " + path.string());
}

inline AttackPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open plan file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return plan_from_json(j, path.string());
}

}  // namespace netpoison
