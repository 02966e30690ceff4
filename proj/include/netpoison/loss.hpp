// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "netpoison/cooc.hpp"
#include "netpoison/embedding.hpp"
#include "netpoison/errors.hpp"
#include "netpoison/graph.hpp"
#include "netpoison/spectrum.hpp"

namespace netpoison {

enum class LossKind : std::uint8_t { dw1 = 0, dw2 = 1, dw3 = 2, sc = 3 };

struct LossReport {
  LossKind kind = LossKind::dw1;
  double value = 0.0;
  std::uint64_t graph_fingerprint = 0;
  int K = 0;
  int T = 0;
  double b = 0.0;
};

namespace detail {

inline void check_rank(int K, Eigen::Index n) {
  if (K < 0 || K > n)
    throw ValidationError("rank K must lie in [0, " + std::to_string(n) +
                          "], got " + std::to_string(K));
}

// Minimum degree after applying the flip, from the clean degree vector.
// Only the two endpoints change, so this is one scan with two adjustments.
inline double min_degree_after_flip(const Eigen::VectorXd& degrees,
                                    const EdgeFlip& flip) {
  const double dw = static_cast<double>(flip.delta_w);
  double dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index v = 0; v < degrees.size(); ++v) {
    double d = degrees[v];
    if (v == flip.i || v == flip.j) d += dw;
    dmin = std::min(dmin, d);
  }
  return dmin;
}

// sqrt of the sum of squares of everything beyond the K largest magnitudes.
inline double tail_norm(std::vector<double>& magnitudes, int K) {
  std::sort(magnitudes.begin(), magnitudes.end(), std::greater<double>());
  double acc = 0.0;
  for (std::size_t p = static_cast<std::size_t>(K); p < magnitudes.size(); ++p)
    acc += magnitudes[p] * magnitudes[p];
  return std::sqrt(acc);
}

}  // namespace detail

// Per-index upper bounds on the singular values of the co-occurrence sum
// S: sigma_p(S) <= |sum_{r=1..T} lambda_{pi(p)}^r| / dmin, returned sorted
// descending (pi is realized by the sort).
inline std::vector<double> sigma_upper_bounds(const Eigen::VectorXd& values,
                                              double dmin, int T) {
  if (!(dmin > 0.0)) throw ValidationError("minimum degree must be positive");
  Eigen::VectorXd coeff = detail::window_polynomial(values, T);
  std::vector<double> bounds(static_cast<std::size_t>(coeff.size()));
  for (Eigen::Index y = 0; y < coeff.size(); ++y)
    bounds[static_cast<std::size_t>(y)] = std::abs(coeff[y]) / dmin;
  std::sort(bounds.begin(), bounds.end(), std::greater<double>());
  return bounds;
}

// True factorization loss: the Frobenius mass of Mhat beyond its best
// rank-K approximation.
inline double loss_dw1(const Graph& g, int K, int T = 5, double b = 5.0) {
  detail::check_rank(K, g.node_count());
  CoocFactorization f = build_cooc(g, T, b);
  if (K == 0) return f.Mhat.norm();
  SymmetricSvd svd = sym_svd(f.Mhat);
  const Eigen::Index n = svd.sigma.size();
  double acc = 0.0;
  for (Eigen::Index p = K; p < n; ++p) acc += svd.sigma[p] * svd.sigma[p];
  return std::sqrt(acc);
}

// Frozen-eigenvector estimate evaluated on an already-flipped graph: the
// clean eigenvectors of Mhat are kept and only the matrix inside the
// quadratic forms is rebuilt. With the clean graph itself this reduces to
// loss_dw1 exactly (the zero-perturbation case).
inline double loss_dw2_frozen(const Graph& flipped,
                              const SymmetricSvd& mhat_svd, int K, int T = 5,
                              double b = 5.0) {
  const Eigen::Index n = flipped.node_count();
  detail::check_rank(K, n);
  if (mhat_svd.left.rows() != n || mhat_svd.left.cols() != n)
    throw ValidationError("decomposition size does not match the graph");
  CoocFactorization fp = build_cooc(flipped, T, b);
  // diag(U^T Mhat' U) over the tail directions; signs cancel inside the
  // quadratic form, so singular-vector sign pinning is harmless here.
  double acc = 0.0;
  for (Eigen::Index p = K; p < n; ++p) {
    const double q = mhat_svd.left.col(p).dot(fp.Mhat * mhat_svd.left.col(p));
    acc += q * q;
  }
  return std::sqrt(acc);
}

inline double loss_dw2_for_flip(const Graph& g, const SymmetricSvd& mhat_svd,
                                const EdgeFlip& flip, int K, int T = 5,
                                double b = 5.0) {
  std::vector<EdgeFlip> one{flip};
  return loss_dw2_frozen(g.with_flips(one), mhat_svd, K, T, b);
}

// Closed-form estimate with the given (possibly perturbed) generalized
// eigenvalues: prefactor * sqrt(tail of sigma~^2) where sigma~ are the
// sorted singular-value bounds.
inline double loss_dw3_from_values(const Eigen::VectorXd& values, double dmin,
                                   double volume, int K, int T, double b) {
  if (T < 1) throw ValidationError("window size T must be >= 1");
  if (!(b >= 1.0)) throw ValidationError("negative-sample count b must be >= 1");
  std::vector<double> mags = sigma_upper_bounds(values, dmin, T);
  const double tail = detail::tail_norm(mags, K);
  return volume / (static_cast<double>(T) * b) * tail;
}

// Closed-form loss estimate for one flip from the clean spectrum: eigenvalues
// move by their first-order update, the volume picks up 2*delta_w, and the
// minimum degree is adjusted at the two endpoints.
inline double loss_dw3_for_flip(const Spectrum& spec, const Graph& g,
                                const EdgeFlip& flip, int K, int T = 5,
                                double b = 5.0) {
  const Eigen::Index n = g.node_count();
  detail::check_rank(K, n);
  if (spec.kind != SpectrumKind::adjacency)
    throw ValidationError("flip scoring requires the adjacency spectrum");
  if (spec.graph_fingerprint != g.fingerprint())
    throw ValidationError("spectrum does not belong to this graph");
  if (spec.values.size() != n)
    throw ValidationError("flip scoring requires the full spectrum");
  const double dmin_after = detail::min_degree_after_flip(spec.degrees, flip);
  if (dmin_after <= 0.0)
    throw ValidationError("flip (" + std::to_string(flip.i) + "," +
                          std::to_string(flip.j) + ") would isolate a node");
  Eigen::VectorXd lam = approx_eigenvalues_after_flip(spec, flip);
  const double vol_after = static_cast<double>(g.volume()) + 2.0 * flip.delta_w;
  return loss_dw3_from_values(lam, dmin_after, vol_after, K, T, b);
}

// The same estimator with nothing flipped: the loss value the per-flip
// contributions are measured against.
inline double loss_dw3_reference(const Spectrum& spec, const Graph& g, int K,
                                 int T = 5, double b = 5.0) {
  detail::check_rank(K, g.node_count());
  if (spec.kind != SpectrumKind::adjacency)
    throw ValidationError("reference loss requires the adjacency spectrum");
  if (spec.graph_fingerprint != g.fingerprint())
    throw ValidationError("spectrum does not belong to this graph");
  const double dmin = spec.degrees.minCoeff();
  return loss_dw3_from_values(spec.values, dmin, g.volume(), K, T, b);
}

// Spectral-clustering loss estimate: sum of the K smallest Laplacian
// eigenvalues after the first-order update, re-sorted.
inline double loss_sc_for_flip(const Spectrum& lap_spec, const EdgeFlip& flip,
                               int K, SpectrumKind kind) {
  if (kind == SpectrumKind::adjacency || lap_spec.kind != kind)
    throw ValidationError("spectral loss requires a matching Laplacian kind");
  const Eigen::Index n = lap_spec.vectors.rows();
  if (K < 1 || K > n) throw ValidationError("rank K must lie in [1, n]");
  Eigen::VectorXd lam = approx_laplacian_eigs_after_flip(lap_spec, flip, kind);
  std::sort(lam.data(), lam.data() + lam.size());
  return lam.head(K).sum();
}

// Unflipped counterpart of loss_sc_for_flip.
inline double loss_sc_reference(const Spectrum& lap_spec, int K,
                                SpectrumKind kind) {
  if (kind == SpectrumKind::adjacency || lap_spec.kind != kind)
    throw ValidationError("spectral loss requires a matching Laplacian kind");
  const Eigen::Index n = lap_spec.values.size();
  if (K < 1 || K > n) throw ValidationError("rank K must lie in [1, n]");
  Eigen::VectorXd lam = lap_spec.values;
  std::sort(lam.data(), lam.data() + lam.size());
  return lam.head(K).sum();
}

}  // namespace netpoison
