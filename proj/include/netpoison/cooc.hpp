// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "netpoison/detail/lapack.hpp"
#include "netpoison/errors.hpp"
#include "netpoison/graph.hpp"
#include "netpoison/spectrum.hpp"

namespace netpoison {

// Random-walk co-occurrence factorization target. For window size T and b
// negative samples the implicit factorization target is
//   M = vol(A) / (T * b) * S   with   S = (sum_{r=1..T} P^r) D^{-1},
//   Mhat = log(max(M, 1)) elementwise,
// where P = D^{-1} A is the walk transition matrix. S is symmetric because
// each P^r D^{-1} term is.
struct CoocFactorization {
  int T = 5;
  double b = 5.0;
  double volume = 0.0;
  std::uint64_t graph_fingerprint = 0;
  Eigen::MatrixXd S;
  Eigen::MatrixXd M;
  Eigen::MatrixXd Mhat;
};

namespace detail {

// coeff[y] = sum_{r=1..T} values[y]^r, evaluated by running products so no
// pow() rounding enters the window polynomial.
inline Eigen::VectorXd window_polynomial(const Eigen::VectorXd& values,
                                         int window) {
  Eigen::VectorXd coeff(values.size());
  for (Eigen::Index y = 0; y < values.size(); ++y) {
    double acc = 0.0;
    double power = 1.0;
    for (int r = 1; r <= window; ++r) {
      power *= values[y];
      acc += power;
    }
    coeff[y] = acc;
  }
  return coeff;
}

}  // namespace detail

inline CoocFactorization build_cooc(const Graph& g, int T = 5, double b = 5.0) {
  if (T < 1) throw ValidationError("window size must be at least 1");
  if (b < 1.0)
    throw ValidationError("negative-sample count must be at least 1");
  const int n = g.node_count();
  Eigen::VectorXd invd(n);
  for (int v = 0; v < n; ++v) invd[v] = 1.0 / static_cast<double>(g.degree(v));

  CoocFactorization f;
  f.T = T;
  f.b = b;
  f.volume = static_cast<double>(g.volume());
  f.graph_fingerprint = g.fingerprint();

  // x holds P^r D^{-1}; each power is applied column by column through the
  // adjacency lists, so the cost per power is O(n^2 + E n) without ever
  // materializing P.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  x.diagonal() = invd;
  f.S = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd col(n);
  for (int r = 1; r <= T; ++r) {
    for (int c = 0; c < n; ++c) {
      col = x.col(c);
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j : g.neighbors(i)) acc += col[j];
        x(i, c) = invd[i] * acc;
      }
    }
    f.S += x;
  }

  const double scale = f.volume / (static_cast<double>(T) * b);
  f.M = scale * f.S;
  f.Mhat.resize(n, n);
  for (int c = 0; c < n; ++c)
    for (int i = 0; i < n; ++i) {
      const double m = f.M(i, c);
      f.Mhat(i, c) = m > 1.0 ? std::log(m) : 0.0;
    }
  return f;
}

// S can be rebuilt from the generalized adjacency spectrum alone:
//   S = U (sum_{r=1..T} Lambda^r) U^T
// with U the D-orthonormal eigenvectors. This is the identity that lets
// flip scoring work on the spectrum instead of re-walking the graph.
inline Eigen::MatrixXd reconstruct_S_from_spectrum(const Spectrum& spec,
                                                   int T) {
  if (spec.kind != SpectrumKind::adjacency)
    throw ValidationError("reconstruction requires the adjacency spectrum");
  if (T < 1) throw ValidationError("window size must be at least 1");
  const Eigen::Index n = spec.vectors.rows();
  if (spec.values.size() != n)
    throw ValidationError("reconstruction requires the full spectrum");
  Eigen::VectorXd coeff = detail::window_polynomial(spec.values, T);
  Eigen::MatrixXd uc = spec.vectors * coeff.asDiagonal();
  Eigen::MatrixXd s;
  detail::gemm(uc, false, spec.vectors, true, s);
  return s;
}

}  // namespace netpoison
