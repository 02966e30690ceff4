#pragma once
// Experiment orchestration: load a dataset, plan a poisoning attack, retrain
// the embedding on the poisoned graph, and measure the downstream damage.
// Everything here is deterministic in (input files, config): identical
// configs produce identical result fingerprints, and every artifact (plan
// JSON, result record, score/margin CSVs, embeddings) is written in a stable
// format so runs can be diffed.
//
// A process-wide spectrum cache can be enabled by pointing the environment
// variable NETPOISON_CACHE_DIR at a writable directory; decompositions are
// then keyed by (spectrum kind, graph fingerprint) and reused across runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <tuple>
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
#include "netpoison/io.hpp"
#include "netpoison/metrics.hpp"
#include "netpoison/planio.hpp"
#include "netpoison/rng.hpp"
#include "netpoison/spectrum.hpp"
#include "netpoison/targeted.hpp"

namespace netpoison {

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  std::string edges_path;
  std::string labels_path;  // required for task "class", ignored otherwise
  std::string out_dir;      // empty: compute everything, persist nothing

  std::string strategy = "dw3";  // dw2 | dw3 | sc | abr | rnd | deg | eig
  std::string task = "class";    // class | link
  long flips = 0;                // signed: < 0 removes edges, > 0 adds
  std::size_t candidates = 10000;    // addition pool size (additions only)
  double restricted_fraction = 0.0;  // fraction of nodes no flip may touch
  int abr_multiplier = 2;            // abr strategy: sample multiplier c

  int K = 64;
  int T = 5;
  double b = 5.0;
  int workers = 1;
  std::uint64_t seed = 1;

  int eval_repeats = 10;        // classifier retrainings averaged per metric
  double train_fraction = 0.1;  // classifier train split
  double link_edge_fraction = 0.1;  // link task: held-out edge fraction
  int link_negative_multiplier = 3;
};

namespace detail {

constexpr std::uint64_t kHoldoutSalt = 0x9e3779b97f4a7c15ULL;

inline bool known_strategy(const std::string& s) {
  return s == "dw2" || s == "dw3" || s == "sc" || s == "abr" || s == "rnd" ||
         s == "deg" || s == "eig";
}

}  // namespace detail

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.edges_path.empty()) throw ValidationError("edges path is required");
  if (!detail::known_strategy(cfg.strategy))
    throw ValidationError("unknown strategy: " + cfg.strategy);
  if (cfg.task != "class" && cfg.task != "link")
    throw ValidationError("task must be 'class' or 'link', got " + cfg.task);
  if (cfg.task == "class" && cfg.labels_path.empty())
    throw ValidationError("classification task needs a labels path");
  if (cfg.flips == 0)
    throw ValidationError("flip budget must be non-zero (negative removes, "
                          "positive adds)");
  if (cfg.strategy == "abr" && cfg.flips < 0)
    throw ValidationError("add-by-remove only plans edge additions");
  if (cfg.abr_multiplier < 1)
    throw ValidationError("abr multiplier must be >= 1");
  if (!(cfg.restricted_fraction >= 0.0 && cfg.restricted_fraction < 1.0))
    throw ValidationError("restricted fraction must lie in [0, 1)");
  if (cfg.K < 1) throw ValidationError("embedding dimension must be >= 1");
  if (cfg.T < 1) throw ValidationError("walk window must be >= 1");
  if (cfg.b <= 0.0) throw ValidationError("negative-sample count must be > 0");
  if (cfg.workers < 1) throw ValidationError("worker count must be >= 1");
  if (cfg.eval_repeats < 1)
    throw ValidationError("evaluation repeats must be >= 1");
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    throw ValidationError("train fraction must lie in (0, 1)");
  if (!(cfg.link_edge_fraction > 0.0 && cfg.link_edge_fraction < 1.0))
    throw ValidationError("link holdout fraction must lie in (0, 1)");
  if (cfg.link_negative_multiplier < 0)
    throw ValidationError("link negative multiplier must be non-negative");
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  return nlohmann::json{{"edges_path", cfg.edges_path},
                        {"labels_path", cfg.labels_path},
                        {"out_dir", cfg.out_dir},
                        {"strategy", cfg.strategy},
                        {"task", cfg.task},
                        {"flips", cfg.flips},
                        {"candidates", cfg.candidates},
                        {"restricted_fraction", cfg.restricted_fraction},
                        {"abr_multiplier", cfg.abr_multiplier},
                        {"K", cfg.K},
                        {"T", cfg.T},
                        {"b", cfg.b},
                        {"workers", cfg.workers},
                        {"seed", cfg.seed},
                        {"eval_repeats", cfg.eval_repeats},
                        {"train_fraction", cfg.train_fraction},
                        {"link_edge_fraction", cfg.link_edge_fraction},
                        {"link_negative_multiplier",
                         cfg.link_negative_multiplier}};
}

// FNV-1a over the canonical (alphabetically keyed) JSON serialization. The
// out_dir is excluded: where results land must not change what they are.
inline std::uint64_t config_fingerprint(const ExperimentConfig& cfg) {
  nlohmann::json j = config_to_json(cfg);
  j.erase("out_dir");
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Spectrum cache

inline std::string spectrum_cache_dir() {
  const char* env = std::getenv("NETPOISON_CACHE_DIR");
  return env == nullptr ? std::string() : std::string(env);
}

namespace detail {

inline const char* spectrum_kind_slug(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::adjacency: return "adj";
    case SpectrumKind::laplacian_rw: return "lrw";
    case SpectrumKind::laplacian_plain: return "lpl";
  }
  throw ValidationError("unknown spectrum kind");
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int p = 15; p >= 0; --p) {
    s[static_cast<std::size_t>(p)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace detail

// Compute the requested spectrum, going through the NETPOISON_CACHE_DIR
// cache when the variable is set. A cache entry that fails to load or does
// not match the graph is recomputed and overwritten rather than trusted.
inline Spectrum cached_spectrum(const Graph& g, SpectrumKind kind) {
  const auto compute = [&]() {
    return kind == SpectrumKind::adjacency ? generalized_eigs(g)
                                           : laplacian_eigs(g, kind);
  };
  const std::string dir = spectrum_cache_dir();
  if (dir.empty()) return compute();
  std::filesystem::create_directories(dir);
  const std::filesystem::path path =
      std::filesystem::path(dir) /
      (std::string(detail::spectrum_kind_slug(kind)) + "_" +
       detail::hex64(g.fingerprint()) + ".spec");
  if (std::filesystem::exists(path)) {
    try {
      Spectrum spec = load_spectrum(path.string());
      if (spec.kind == kind && spec.graph_fingerprint == g.fingerprint() &&
          spec.vectors.rows() == g.node_count())
        return spec;
    } catch (const Error&) {
      // fall through to recompute
    }
  }
  Spectrum spec = compute();
  save_spectrum(spec, path.string());
  return spec;
}

inline Spectrum cached_generalized_eigs(const Graph& g) {
  return cached_spectrum(g, SpectrumKind::adjacency);
}

// ---------------------------------------------------------------------------
// Attack planning

// Build the candidate set an experiment attacks over: the degree-safe
// removal pool for a negative budget, a seeded sample of non-edges for a
// positive one, both optionally restricted to a node subset.
inline CandidateSet experiment_candidates(const Graph& g,
                                          const ExperimentConfig& cfg) {
  std::vector<int> restricted;
  if (cfg.restricted_fraction > 0.0)
    restricted = restricted_nodes(g, cfg.restricted_fraction, cfg.seed);
  if (cfg.flips < 0) return removal_candidates(g, cfg.seed, restricted);
  std::size_t want = cfg.candidates;
  if (cfg.strategy == "abr")
    want = std::max(want, static_cast<std::size_t>(cfg.abr_multiplier) *
                              static_cast<std::size_t>(cfg.flips));
  return sample_add_candidates(g, want, cfg.seed, restricted);
}

// Dispatch one strategy name to its planner. `spec` may carry a precomputed
// adjacency spectrum for the dw3 scorer; pass nullptr to compute on demand.
inline AttackPlan plan_attack(const Graph& g, const ExperimentConfig& cfg,
                              const Spectrum* spec = nullptr) {
  validate_config(cfg);
  const auto f = static_cast<std::size_t>(std::llabs(cfg.flips));
  const CandidateSet cand = experiment_candidates(g, cfg);
  AttackParams params;
  params.K = std::min<int>(cfg.K, static_cast<int>(g.node_count()));
  params.T = cfg.T;
  params.b = cfg.b;
  params.workers = cfg.workers;
  if (cfg.strategy == "dw3" || cfg.strategy == "dw2" || cfg.strategy == "sc") {
    const ScorerKind kind = cfg.strategy == "dw3"   ? ScorerKind::dw3
                            : cfg.strategy == "dw2" ? ScorerKind::dw2
                                                    : ScorerKind::sc;
    ScoringContext ctx;
    Spectrum owned;
    if (kind == ScorerKind::dw3) {
      if (spec == nullptr) {
        owned = cached_generalized_eigs(g);
        spec = &owned;
      }
      ctx.adjacency = spec;
    }
    return general_attack(g, f, cand, kind, params, ctx);
  }
  if (cfg.strategy == "abr")
    return add_by_remove(g, f, cfg.abr_multiplier, cand, ScorerKind::dw3,
                         cfg.seed, params);
  const BaselineKind kind = cfg.strategy == "rnd"   ? BaselineKind::rnd
                            : cfg.strategy == "deg" ? BaselineKind::deg
                                                    : BaselineKind::eig;
  return baseline_attack(g, f, kind, cand, cfg.seed);
}

// ---------------------------------------------------------------------------
// Downstream evaluation

struct ClassificationMetrics {
  double micro = 0.0;
  double macro = 0.0;
};

// Mean micro/macro F1 on the held-out split over `repeats` seeded classifier
// retrainings (seed + 0 .. seed + repeats - 1). The split and the classifier
// initialization both derive from the same per-repeat seed, so the metric is
// a pure function of (embedding, labels, fraction, repeats, seed).
inline ClassificationMetrics classification_metrics(
    const Eigen::MatrixXd& z, const std::vector<int>& labels,
    double train_fraction, int repeats, std::uint64_t seed) {
  if (repeats < 1) throw ValidationError("evaluation repeats must be >= 1");
  if (static_cast<Eigen::Index>(labels.size()) != z.rows())
    throw ValidationError("one label per embedding row required");
  ClassificationMetrics out;
  for (int r = 0; r < repeats; ++r) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(r);
    const LogisticModel model = train_logreg(z, labels, train_fraction, s);
    const SplitIndices split = stratified_split(labels, train_fraction, s);
    Eigen::MatrixXd zt(static_cast<Eigen::Index>(split.test.size()), z.cols());
    std::vector<int> truth(split.test.size());
    for (std::size_t t = 0; t < split.test.size(); ++t) {
      zt.row(static_cast<Eigen::Index>(t)) = z.row(split.test[t]);
      truth[t] = labels[static_cast<std::size_t>(split.test[t])];
    }
    const std::vector<int> pred = model.predict(zt);
    out.micro += f1_score(pred, truth, F1Averaging::micro);
    out.macro += f1_score(pred, truth, F1Averaging::macro);
  }
  out.micro /= repeats;
  out.macro /= repeats;
  return out;
}

// Remove the held-out positive pairs that are still present (skipping any
// whose removal would isolate a node by now), retrain the embedding on the
// rest, and score the holdout by embedding dot products. The degree guard
// only matters for poisoned graphs: on the clean graph the sampler already
// guaranteed the whole holdout is jointly removable.
inline double link_ap_for_graph(const Graph& g,
                                const std::vector<LinkTarget>& holdout, int K,
                                int T, double b) {
  std::vector<int> degree_left(static_cast<std::size_t>(g.node_count()));
  for (int v = 0; v < g.node_count(); ++v)
    degree_left[static_cast<std::size_t>(v)] = g.degree(v);
  std::vector<EdgeFlip> removals;
  for (const LinkTarget& t : holdout) {
    if (!t.is_edge || !g.has_edge(t.i, t.j)) continue;
    if (degree_left[static_cast<std::size_t>(t.i)] <= 1 ||
        degree_left[static_cast<std::size_t>(t.j)] <= 1)
      continue;
    removals.push_back({t.i, t.j, -1});
    --degree_left[static_cast<std::size_t>(t.i)];
    --degree_left[static_cast<std::size_t>(t.j)];
  }
  const Graph train = g.with_flips(removals);
  const int k = std::min<int>(K, static_cast<int>(train.node_count()));
  const EmbeddingMatrix emb = svd_embedding(build_cooc(train, T, b), k);
  return pair_score_ap(emb.Z, holdout);
}

struct EvalOptions {
  std::string task = "class";
  int eval_repeats = 10;
  double train_fraction = 0.1;
  double link_edge_fraction = 0.1;
  int link_negative_multiplier = 3;
};

struct ResultRecord {
  std::uint64_t config_fingerprint = 0;  // 0 when evaluating a foreign plan
  std::uint64_t graph_fingerprint = 0;
  std::string task;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  double clean_metric = 0.0;     // micro-F1 or AP
  double poisoned_metric = 0.0;  // same metric after retraining on the attack
  double clean_macro = 0.0;      // class task only
  double poisoned_macro = 0.0;
  std::size_t link_holdout_positives = 0;  // link task only
  double attack_seconds = 0.0;
  double eval_seconds = 0.0;
  AttackPlan plan;
};

namespace detail {

inline double seconds_since(
    std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace detail

// Retrain-and-measure for one attack plan. The poisoned metric always comes
// from an embedding retrained on the flipped graph; nothing is reused from
// the clean run. For the link task the plan may have been computed either on
// the full graph (untargeted strategies) or on the graph with the holdout
// positives already removed (the targeted link attack); the plan's stored
// fingerprint picks the branch, and anything else is rejected.
inline ResultRecord evaluate_plan(const Graph& g,
                                  const std::vector<int>& labels,
                                  const AttackPlan& plan,
                                  const EvalOptions& opt) {
  if (opt.task != "class" && opt.task != "link")
    throw ValidationError("task must be 'class' or 'link', got " + opt.task);
  ResultRecord rec;
  rec.task = opt.task;
  rec.plan = plan;
  rec.graph_fingerprint = g.fingerprint();
  rec.nodes = static_cast<std::size_t>(g.node_count());
  rec.edges = g.edge_count();
  const int K = std::min<int>(plan.params.K, static_cast<int>(g.node_count()));
  if (K < 1) throw ValidationError("plan has no embedding dimension");
  const auto t0 = std::chrono::steady_clock::now();

  if (opt.task == "class") {
    if (plan.graph_fingerprint != g.fingerprint())
      throw ValidationError("plan was computed for a different graph");
    if (static_cast<Eigen::Index>(labels.size()) != g.node_count())
      throw ValidationError("one label per node required");
    const Graph poisoned = g.with_flips(plan.chosen);
    const Eigen::MatrixXd clean_z =
        svd_embedding(build_cooc(g, plan.params.T, plan.params.b), K).Z;
    const Eigen::MatrixXd pois_z =
        svd_embedding(build_cooc(poisoned, plan.params.T, plan.params.b), K).Z;
    const ClassificationMetrics clean = classification_metrics(
        clean_z, labels, opt.train_fraction, opt.eval_repeats, plan.seed);
    const ClassificationMetrics pois = classification_metrics(
        pois_z, labels, opt.train_fraction, opt.eval_repeats, plan.seed);
    rec.clean_metric = clean.micro;
    rec.clean_macro = clean.macro;
    rec.poisoned_metric = pois.micro;
    rec.poisoned_macro = pois.macro;
  } else {
    const std::vector<LinkTarget> holdout =
        sample_link_targets(g, opt.link_edge_fraction,
                            opt.link_negative_multiplier,
                            plan.seed ^ detail::kHoldoutSalt);
    for (const LinkTarget& t : holdout)
      rec.link_holdout_positives += t.is_edge ? 1 : 0;
    std::vector<EdgeFlip> holdout_removals;
    for (const LinkTarget& t : holdout)
      if (t.is_edge) holdout_removals.push_back({t.i, t.j, -1});
    const Graph train = g.with_flips(holdout_removals);
    rec.clean_metric =
        link_ap_for_graph(train, holdout, K, plan.params.T, plan.params.b);
    Graph poisoned;
    if (plan.graph_fingerprint == g.fingerprint()) {
      poisoned = g.with_flips(plan.chosen);
    } else if (plan.graph_fingerprint == train.fingerprint()) {
      poisoned = train.with_flips(plan.chosen);
    } else {
      throw ValidationError(
          "plan matches neither the graph nor the graph with the held-out "
          "evaluation edges removed; were the holdout options or seed "
          "changed after planning?");
    }
    rec.poisoned_metric =
        link_ap_for_graph(poisoned, holdout, K, plan.params.T, plan.params.b);
  }
  rec.eval_seconds = detail::seconds_since(t0);
  return rec;
}

// ---------------------------------------------------------------------------
// Result persistence

inline nlohmann::json record_to_json(const ResultRecord& r) {
  nlohmann::json j{{"config_fingerprint", r.config_fingerprint},
                   {"graph_fingerprint", r.graph_fingerprint},
                   {"task", r.task},
                   {"nodes", r.nodes},
                   {"edges", r.edges},
                   {"clean_metric", r.clean_metric},
                   {"poisoned_metric", r.poisoned_metric},
                   {"metric_drop", r.clean_metric - r.poisoned_metric},
                   {"attack_seconds", r.attack_seconds},
                   {"eval_seconds", r.eval_seconds},
                   {"plan", plan_to_json(r.plan)}};
  if (r.task == "class") {
    j["clean_macro"] = r.clean_macro;
    j["poisoned_macro"] = r.poisoned_macro;
  } else {
    j["link_holdout_positives"] = r.link_holdout_positives;
  }
  return j;
}

inline void save_record(const ResultRecord& r,
                        const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot open for writing: " + path.string());
  os << record_to_json(r).dump(2) << '\n';
  if (!os) throw ValidationError("short write: " + path.string());
}

// One row per scored candidate, best first: rank,i,j,delta_w,score.
inline void write_scores_csv(const AttackPlan& plan,
                             const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot open for writing: " + path.string());
  os.precision(17);
  os << "rank,i,j,delta_w,score\n";
  for (std::size_t p = 0; p < plan.scored.size(); ++p) {
    const ScoredFlip& s = plan.scored[p];
    os << p << ',' << s.flip.i << ',' << s.flip.j << ',' << s.flip.delta_w
       << ',' << s.score << '\n';
  }
  if (!os) throw ValidationError("short write: " + path.string());
}

// Per-candidate surrogate margins for one attacked node:
// i,j,delta_w,margin (ascending margin, most damaging first).
inline void write_margin_report_csv(const MarginReport& report,
                                    const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot open for writing: " + path.string());
  os.precision(17);
  os << "i,j,delta_w,margin\n";
  for (const ScoredMargin& s : report.scored)
    os << s.flip.i << ',' << s.flip.j << ',' << s.flip.delta_w << ','
       << s.margin << '\n';
  if (!os) throw ValidationError("short write: " + path.string());
}

// Append one attacked node's outcome to a summary CSV whose rows feed margin
// box plots binned by floor(log2 degree). Creates the file with a header on
// first use.
inline void append_margin_summary_csv(const MarginReport& report, int degree,
                                      const std::filesystem::path& path) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream os(path, std::ios::app);
  if (!os) throw ValidationError("cannot open for append: " + path.string());
  os.precision(17);
  if (fresh)
    os << "target,degree,log2_degree_bin,budget,clean_margin,post_margin,"
          "misclassified\n";
  const int bin = degree < 1
                      ? 0
                      : static_cast<int>(std::floor(std::log2(degree)));
  os << report.target << ',' << degree << ',' << bin << ',' << report.budget
     << ',' << report.clean_margin << ',' << report.post_margin << ','
     << (report.misclassified ? 1 : 0) << '\n';
  if (!os) throw ValidationError("short write: " + path.string());
}

// ---------------------------------------------------------------------------
// End-to-end experiment

// Plan, apply, retrain, measure, and (if cfg.out_dir is set) persist:
//   record.json              the full result record including the plan
//   plan.json                the plan alone, reloadable by evaluate_plan
//   scores.csv               the candidate ranking
//   embedding_poisoned.csv   the retrained embedding, one row per node
//   embedding_poisoned.bin   the same embedding in the binary format
inline ResultRecord run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const LoadedGraph loaded = load_edge_list(cfg.edges_path);
  const Graph& g = loaded.graph;
  std::vector<int> labels;
  if (cfg.task == "class")
    labels = load_labels(cfg.labels_path, static_cast<int>(g.node_count()));

  const auto t0 = std::chrono::steady_clock::now();
  const AttackPlan plan = plan_attack(g, cfg);
  const double attack_seconds = detail::seconds_since(t0);

  EvalOptions opt;
  opt.task = cfg.task;
  opt.eval_repeats = cfg.eval_repeats;
  opt.train_fraction = cfg.train_fraction;
  opt.link_edge_fraction = cfg.link_edge_fraction;
  opt.link_negative_multiplier = cfg.link_negative_multiplier;
  ResultRecord rec = evaluate_plan(g, labels, plan, opt);
  rec.config_fingerprint = config_fingerprint(cfg);
  rec.attack_seconds = attack_seconds;

  if (!cfg.out_dir.empty()) {
    const std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    save_record(rec, dir / "record.json");
    save_plan(plan, dir / "plan.json");
    write_scores_csv(plan, dir / "scores.csv");
    const Graph poisoned = (plan.graph_fingerprint == g.fingerprint())
                               ? g.with_flips(plan.chosen)
                               : g;  // link plans on the holdout graph: skip
    if (plan.graph_fingerprint == g.fingerprint()) {
      const int K =
          std::min<int>(plan.params.K, static_cast<int>(g.node_count()));
      const EmbeddingMatrix emb = svd_embedding(
          build_cooc(poisoned, plan.params.T, plan.params.b), K);
      save_embedding_csv(emb, (dir / "embedding_poisoned.csv").string());
      save_embedding(emb, (dir / "embedding_poisoned.bin").string());
    }
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Approximation quality report

// Per-flip gap between exact post-flip eigenvalues and their first-order
// estimates, both sorted descending so values pair by rank.
struct ApproxFlipQuality {
  EdgeFlip flip;
  double mean_abs_gap = 0.0;    // mean_p |exact_p - approx_p|
  double max_abs_gap = 0.0;
  double mean_abs_exact = 0.0;  // mean_p |exact_p|
  double window_mean_abs_gap = 0.0;    // same, after the window polynomial
  double window_mean_abs_exact = 0.0;
};

struct SingularBoundRow {
  int p = 0;
  double sigma = 0.0;  // sigma_p of the walk co-occurrence factor S
  double bound = 0.0;  // |window polynomial of lambda|_(p) / d_min
};

struct ApproxQualityReport {
  int T = 5;
  std::vector<ApproxFlipQuality> flips;
  std::vector<SingularBoundRow> bounds;
  // Aggregate relative gap: sum of |exact - approx| over every (flip, p)
  // divided by the matching sum of |exact|.
  double mean_rel_gap = 0.0;
};

// Sample candidate flips (half removals where the pool allows, the rest
// additions), compare exact re-decomposition against the first-order
// eigenvalue update for each, and tabulate the singular values of the clean
// walk factor S against their spectral upper bounds.
inline ApproxQualityReport approx_quality_report(const Graph& g,
                                                 const Spectrum& spec,
                                                 std::size_t samples,
                                                 std::uint64_t seed,
                                                 int T = 5) {
  if (spec.kind != SpectrumKind::adjacency)
    throw ValidationError("approximation report needs an adjacency spectrum");
  if (spec.graph_fingerprint != g.fingerprint())
    throw ValidationError("spectrum does not belong to this graph");
  if (samples < 1) throw ValidationError("sample count must be >= 1");
  if (T < 1) throw ValidationError("walk window must be >= 1");

  CandidateSet removals = removal_candidates(g, seed);
  Rng rng(seed ^ 0x2545f4914f6cdd1dULL);
  rng.shuffle(removals.flips);
  const std::size_t rem_take = std::min(samples / 2, removals.flips.size());
  const std::size_t add_take = samples - rem_take;
  std::vector<EdgeFlip> flips(removals.flips.begin(),
                              removals.flips.begin() +
                                  static_cast<std::ptrdiff_t>(rem_take));
  if (add_take > 0) {
    const CandidateSet adds =
        sample_add_candidates(g, add_take, seed ^ 0x94d049bb133111ebULL);
    flips.insert(flips.end(), adds.flips.begin(), adds.flips.end());
  }
  std::sort(flips.begin(), flips.end(), [](const EdgeFlip& a,
                                           const EdgeFlip& b) {
    return std::tuple(std::min(a.i, a.j), std::max(a.i, a.j), a.delta_w) <
           std::tuple(std::min(b.i, b.j), std::max(b.i, b.j), b.delta_w);
  });

  ApproxQualityReport report;
  report.T = T;
  report.flips.reserve(flips.size());
  double gap_sum = 0.0;
  double exact_sum = 0.0;
  for (const EdgeFlip& flip : flips) {
    Eigen::VectorXd exact = exact_eigs_after_flip(g, spec, flip);
    Eigen::VectorXd approx = approx_eigenvalues_after_flip(spec, flip);
    std::sort(approx.data(), approx.data() + approx.size(),
              std::greater<double>());
    std::sort(exact.data(), exact.data() + exact.size(),
              std::greater<double>());
    const Eigen::VectorXd wexact = detail::window_polynomial(exact, T);
    const Eigen::VectorXd wapprox = detail::window_polynomial(approx, T);
    ApproxFlipQuality q;
    q.flip = flip;
    q.mean_abs_gap = (exact - approx).cwiseAbs().mean();
    q.max_abs_gap = (exact - approx).cwiseAbs().maxCoeff();
    q.mean_abs_exact = exact.cwiseAbs().mean();
    q.window_mean_abs_gap = (wexact - wapprox).cwiseAbs().mean();
    q.window_mean_abs_exact = wexact.cwiseAbs().mean();
    gap_sum += (exact - approx).cwiseAbs().sum();
    exact_sum += exact.cwiseAbs().sum();
    report.flips.push_back(q);
  }
  report.mean_rel_gap = exact_sum > 0.0 ? gap_sum / exact_sum : 0.0;

  // Clean-graph singular values of S against their closed-form bounds.
  const CoocFactorization fac = build_cooc(g, T, 1.0);
  const SymmetricSvd svd = sym_svd(fac.S);
  Eigen::VectorXd wabs = detail::window_polynomial(spec.values, T).cwiseAbs();
  std::sort(wabs.data(), wabs.data() + wabs.size(), std::greater<double>());
  double d_min = std::numeric_limits<double>::infinity();
  for (int v = 0; v < g.node_count(); ++v)
    d_min = std::min(d_min, static_cast<double>(g.degree(v)));
  report.bounds.reserve(static_cast<std::size_t>(svd.sigma.size()));
  for (Eigen::Index p = 0; p < svd.sigma.size(); ++p)
    report.bounds.push_back(
        {static_cast<int>(p), svd.sigma[p], wabs[p] / d_min});
  return report;
}

inline void write_approx_flips_csv(const ApproxQualityReport& report,
                                   const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot open for writing: " + path.string());
  os.precision(17);
  os << "i,j,delta_w,mean_abs_gap,max_abs_gap,mean_abs_exact,"
        "window_mean_abs_gap,window_mean_abs_exact\n";
  for (const ApproxFlipQuality& q : report.flips)
    os << q.flip.i << ',' << q.flip.j << ',' << q.flip.delta_w << ','
       << q.mean_abs_gap << ',' << q.max_abs_gap << ',' << q.mean_abs_exact
       << ',' << q.window_mean_abs_gap << ',' << q.window_mean_abs_exact
       << '\n';
  if (!os) throw ValidationError("short write: " + path.string());
}

inline void write_singular_bounds_csv(const ApproxQualityReport& report,
                                      const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot open for writing: " + path.string());
  os.precision(17);
  os << "p,sigma,bound,slack\n";
  for (const SingularBoundRow& row : report.bounds)
    os << row.p << ',' << row.sigma << ',' << row.bound << ','
       << row.bound - row.sigma << '\n';
  if (!os) throw ValidationError("short write: " + path.string());
}

}  // namespace netpoison
