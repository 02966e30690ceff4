// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "netpoison/detail/lapack.hpp"
#include "netpoison/errors.hpp"
#include "netpoison/graph.hpp"

namespace netpoison {

enum class SpectrumKind : std::uint8_t {
  adjacency = 0,        // A u = lambda D u, values sorted descending
  laplacian_rw = 1,     // (D - A) u = lambda D u, ascending (= L_sym spectrum)
  laplacian_plain = 2,  // (D - A) u = lambda u, ascending
};

// Eigenpairs of one of the three pencils above. For the generalized kinds
// the vectors are D-orthonormal (U^T D U = I); for laplacian_plain they are
// Euclidean-orthonormal.
struct Spectrum {
  SpectrumKind kind = SpectrumKind::adjacency;
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // column y pairs with values[y]
  Eigen::VectorXd degrees;
  std::uint64_t graph_fingerprint = 0;

  int size() const { return static_cast<int>(values.size()); }
};

namespace detail {

inline Eigen::MatrixXd adjacency_normalized(const Graph& g) {
  const int n = g.node_count();
  Eigen::VectorXd s(n);
  for (int v = 0; v < n; ++v) s[v] = 1.0 / std::sqrt(double(g.degree(v)));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [p, q] : g.edges()) {
    const double w = s[p] * s[q];
    a(p, q) = w;
    a(q, p) = w;
  }
  return a;
}

// Descending order with ties kept in the solver's ascending output order.
inline std::vector<int> descending_order(const Eigen::VectorXd& w) {
  std::vector<int> idx(static_cast<std::size_t>(w.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&w](int a, int b) { return w[a] > w[b]; });
  return idx;
}

}  // namespace detail

// Full spectrum of A u = lambda D u via the symmetric reduction
// A_norm = D^{-1/2} A D^{-1/2}, u = D^{-1/2} w. Descending by eigenvalue.
inline Spectrum generalized_eigs(const Graph& g) {
  const int n = g.node_count();
  Eigen::MatrixXd a = detail::adjacency_normalized(g);
  Eigen::VectorXd w;
  detail::sym_eig_inplace(a, w, true);
  for (int y = 0; y < n; ++y)
    if (w[y] < -1.0 - 1e-8 || w[y] > 1.0 + 1e-8)
      throw SolverError("random-walk eigenvalue out of [-1,1]: " +
                        std::to_string(w[y]));
  Spectrum s;
  s.kind = SpectrumKind::adjacency;
  s.degrees = Eigen::Map<const Eigen::VectorXd>(g.degree_vector().data(), n);
  s.graph_fingerprint = g.fingerprint();
  const auto order = detail::descending_order(w);
  s.values.resize(n);
  s.vectors.resize(n, n);
  Eigen::VectorXd dinvsqrt = s.degrees.array().rsqrt();
  for (int y = 0; y < n; ++y) {
    s.values[y] = w[order[static_cast<std::size_t>(y)]];
    s.vectors.col(y) =
        dinvsqrt.array() * a.col(order[static_cast<std::size_t>(y)]).array();
  }
  return s;
}

// Laplacian spectra, ascending. laplacian_rw solves (D-A)u = lambda D u via
// L_sym = I - A_norm (same eigenvalues, u = D^{-1/2} w); laplacian_plain is
// the standard symmetric problem for L = D - A.
inline Spectrum laplacian_eigs(const Graph& g, SpectrumKind kind) {
  if (kind == SpectrumKind::adjacency)
    throw ValidationError("laplacian_eigs requires a laplacian kind");
  const int n = g.node_count();
  Eigen::MatrixXd m;
  if (kind == SpectrumKind::laplacian_rw) {
    m = -detail::adjacency_normalized(g);
    m.diagonal().array() += 1.0;
  } else {
    m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [p, q] : g.edges()) {
      m(p, q) = -1.0;
      m(q, p) = -1.0;
      m(p, p) += 1.0;
      m(q, q) += 1.0;
    }
  }
  Eigen::VectorXd w;
  detail::sym_eig_inplace(m, w, true);
  Spectrum s;
  s.kind = kind;
  s.degrees = Eigen::Map<const Eigen::VectorXd>(g.degree_vector().data(), n);
  s.graph_fingerprint = g.fingerprint();
  s.values = w;
  if (kind == SpectrumKind::laplacian_rw) {
    Eigen::VectorXd dinvsqrt = s.degrees.array().rsqrt();
    s.vectors = dinvsqrt.asDiagonal() * m;
  } else {
    s.vectors = std::move(m);
  }
  return s;
}

// First-order eigenvalue updates for one flip. These are evaluations of the
// exact quadratic forms u^T (dA - lambda dD) u resp. u^T (dL - lambda dD) u,
// so they are identities in u; the approximation is freezing u.
inline Eigen::VectorXd approx_eigenvalues_after_flip(const Spectrum& spec,
                                                     const EdgeFlip& flip) {
  if (spec.kind != SpectrumKind::adjacency)
    throw ValidationError(
        "approx_eigenvalues_after_flip needs an adjacency spectrum");
  const double dw = flip.delta_w;
  Eigen::VectorXd out(spec.size());
  for (int y = 0; y < spec.size(); ++y) {
    const double ui = spec.vectors(flip.i, y);
    const double uj = spec.vectors(flip.j, y);
    const double lam = spec.values[y];
    out[y] = lam + dw * (2.0 * ui * uj - lam * (ui * ui + uj * uj));
  }
  return out;
}

inline Eigen::VectorXd approx_laplacian_eigs_after_flip(const Spectrum& spec,
                                                        const EdgeFlip& flip,
                                                        SpectrumKind kind) {
  if (kind == SpectrumKind::adjacency || spec.kind != kind)
    throw ValidationError("laplacian update: spectrum kind mismatch");
  const double dw = flip.delta_w;
  Eigen::VectorXd out(spec.size());
  for (int y = 0; y < spec.size(); ++y) {
    const double ui = spec.vectors(flip.i, y);
    const double uj = spec.vectors(flip.j, y);
    const double lam = spec.values[y];
    const double diff = ui - uj;
    if (kind == SpectrumKind::laplacian_rw)
      out[y] = lam + dw * (diff * diff - lam * (ui * ui + uj * uj));
    else
      out[y] = lam + dw * diff * diff;
  }
  return out;
}

// A flip's first-order effect, bundled.
struct EigUpdate {
  EdgeFlip flip;
  Eigen::VectorXd delta_lambdas;
  std::map<int, Eigen::VectorXd> delta_vectors;  // filled on request
};

inline EigUpdate eig_update(const Spectrum& spec, const EdgeFlip& flip) {
  EigUpdate u;
  u.flip = flip;
  u.delta_lambdas = approx_eigenvalues_after_flip(spec, flip) - spec.values;
  for (int y = 0; y < u.delta_lambdas.size(); ++y)
    if (!std::isfinite(u.delta_lambdas[y]))
      throw SolverError("non-finite eigenvalue update");
  return u;
}

// ---------------------------------------------------------------------------
// Exact spectrum after one flip.
//
// A'_norm - A_norm is nonzero only in rows/columns {i, j}: row i is rescaled
// by s'_i/s_i, row j by s'_j/s_j, and the (i,j) entry toggles. That matrix
// has rank <= 4, so the flipped spectrum equals the spectrum of
// Lambda + sum_m rho_m z_m z_m^T in the clean eigenbasis, which is solved
// exactly by chaining rank-one secular updates (LAPACK dlaed4 per root, with
// deflation and the stable Gu/Eisenstat vector recovery). Cost is a few n^2
// passes instead of a fresh O(n^3) decomposition. A trace/Frobenius sanity
// check guards the fast path; on failure the dense solver takes over.
// ---------------------------------------------------------------------------

namespace detail {

// Solve the ns >= 1 secular systems diag(dd) + rho zz zz^T (rho > 0, dd
// strictly ascending, zz components nonzero). Outputs ascending roots and,
// for each root k, the normalized eigenvector of the small system in
// vecs.col(k). dlaed4 handles ns >= 3; smaller systems use closed forms
// because dlaed4's delta output changes meaning at N <= 2.
inline void secular_solve(const Eigen::VectorXd& dd, const Eigen::VectorXd& zz,
                          double rho, Eigen::VectorXd& roots,
                          Eigen::MatrixXd& vecs) {
  const int ns = static_cast<int>(dd.size());
  roots.resize(ns);
  vecs.resize(ns, ns);
  if (ns == 1) {
    roots[0] = dd[0] + rho * zz[0] * zz[0];
    vecs(0, 0) = 1.0;
    return;
  }
  if (ns == 2) {
    const double a = dd[0] + rho * zz[0] * zz[0];
    const double c = dd[1] + rho * zz[1] * zz[1];
    const double b = rho * zz[0] * zz[1];
    const double mean = 0.5 * (a + c);
    const double disc = std::hypot(0.5 * (a - c), b);
    roots[0] = mean - disc;
    roots[1] = mean + disc;
    // eigenvector for the root farther from a, then its perpendicular
    Eigen::Vector2d v;
    if (std::abs(roots[1] - a) > std::abs(roots[0] - a))
      v = Eigen::Vector2d(b, roots[1] - a).normalized();
    else {
      v = Eigen::Vector2d(b, roots[0] - a).normalized();
      v = Eigen::Vector2d(-v[1], v[0]);  // now pairs with roots[1]
    }
    vecs.col(1) = v;
    vecs.col(0) = Eigen::Vector2d(-v[1], v[0]);
    return;
  }
  Eigen::MatrixXd deltas(ns, ns);  // row k: dd[t] - roots[k], high accuracy
  Eigen::VectorXd ddc = dd, zzc = zz;
  for (int k = 0; k < ns; ++k) {
    int info = 0;
    const int kf = k + 1;
    double lam = 0;
    Eigen::VectorXd drow(ns);
    dlaed4_(&ns, &kf, ddc.data(), zzc.data(), drow.data(), &rho, &lam, &info);
    if (info != 0)
      throw SolverError("secular equation solver failed (dlaed4 info=" +
                        std::to_string(info) + ")");
    deltas.row(k) = drow;
    roots[k] = lam;
  }
  // Gu/Eisenstat: rebuild z against the solved roots so the eigenvectors
  // derived from the delta tables are numerically orthogonal.
  Eigen::VectorXd zhat(ns);
  for (int t = 0; t < ns; ++t) {
    double prod = -deltas(t, t);
    for (int k = 0; k < t; ++k) prod *= -deltas(k, t) / (dd[k] - dd[t]);
    for (int k = t + 1; k < ns; ++k) prod *= -deltas(k, t) / (dd[k] - dd[t]);
    prod = std::max(prod, 0.0);
    zhat[t] = std::copysign(std::sqrt(prod), zz[t]);
  }
  for (int k = 0; k < ns; ++k) {
    for (int t = 0; t < ns; ++t) vecs(t, k) = zhat[t] / deltas(k, t);
    vecs.col(k).normalize();
  }
}

// Eigenvalues of diag(d) + rho z z^T, and the congruent transform of the
// columns of `carry` into the new eigenbasis. d must be ascending.
inline void rank_one_update(Eigen::VectorXd& d, Eigen::VectorXd z, double rho,
                            Eigen::MatrixXd& carry) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return;
  const double znorm2 = z.squaredNorm();
  if (znorm2 <= 0 || rho == 0.0) return;
  rho *= znorm2;
  z /= std::sqrt(znorm2);

  // Reflect so the secular solver always sees a positive rho.
  const bool reflected = rho < 0;
  if (reflected) {
    rho = -rho;
    d = (-d.reverse()).eval();
    z = z.reverse().eval();
    carry = carry.colwise().reverse().eval();
  }

  const double eps = std::numeric_limits<double>::epsilon();
  const double scale =
      std::max({std::abs(d[0]), std::abs(d[n - 1]), std::abs(rho)});
  const double tol = 8.0 * eps * std::max(scale, 1e-300);

  // Deflation pass 1: negligible z components keep their eigenpair as-is.
  std::vector<int> live;
  std::vector<int> dead;
  live.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    if (std::abs(rho * z[t]) <= tol)
      dead.push_back(t);
    else
      live.push_back(t);
  }

  // Deflation pass 2: (nearly) equal diagonal entries are merged by a Givens
  // rotation zeroing one z component; the dropped off-diagonal term is
  // |c*s*(d_u - d_t)| <= tol. Also forces a merge whenever the gap itself is
  // tiny, which keeps the secular diagonal strictly increasing.
  std::vector<int> live2;
  live2.reserve(live.size());
  if (!live.empty()) {
    int t = live[0];
    for (std::size_t a = 1; a < live.size(); ++a) {
      const int u = live[a];
      const double tau = std::hypot(z[t], z[u]);
      const double c = z[u] / tau;
      const double s = z[t] / tau;
      const double gap = d[u] - d[t];
      if (std::abs(gap * c * s) <= tol || gap <= 2.0 * tol) {
        const double dt = d[t], du = d[u];
        d[t] = dt * c * c + du * s * s;
        d[u] = dt * s * s + du * c * c;
        z[u] = tau;
        z[t] = 0.0;
        if (carry.cols() > 0) {
          const Eigen::VectorXd rt = carry.row(t);
          const Eigen::VectorXd ru = carry.row(u);
          carry.row(t) = c * rt - s * ru;
          carry.row(u) = s * rt + c * ru;
        }
        dead.push_back(t);
      } else {
        live2.push_back(t);
      }
      t = u;
    }
    live2.push_back(t);
  }

  const int ns = static_cast<int>(live2.size());
  const Eigen::Index rc = carry.cols();
  Eigen::VectorXd newvals(n);
  Eigen::MatrixXd newcarry(rc > 0 ? n : 0, rc);
  std::vector<std::pair<double, int>> merged;  // (value, slot)
  merged.reserve(static_cast<std::size_t>(n));

  if (ns > 0) {
    Eigen::VectorXd dd(ns), zz(ns);
    for (int t = 0; t < ns; ++t) {
      dd[t] = d[live2[static_cast<std::size_t>(t)]];
      zz[t] = z[live2[static_cast<std::size_t>(t)]];
    }
    Eigen::VectorXd roots;
    Eigen::MatrixXd vecs;
    secular_solve(dd, zz, rho, roots, vecs);
    for (int k = 0; k < ns; ++k) {
      if (rc > 0) {
        newcarry.row(k).setZero();
        for (int t = 0; t < ns; ++t)
          newcarry.row(k) +=
              vecs(t, k) * carry.row(live2[static_cast<std::size_t>(t)]);
      }
      newvals[k] = roots[k];
      merged.emplace_back(roots[k], k);
    }
  }
  for (std::size_t m = 0; m < dead.size(); ++m) {
    const int slot = ns + static_cast<int>(m);
    const int t = dead[m];
    newvals[slot] = d[t];
    if (rc > 0) newcarry.row(slot) = carry.row(t);
    merged.emplace_back(d[t], slot);
  }

  std::stable_sort(
      merged.begin(), merged.end(),
      [](const auto& x, const auto& y) { return x.first < y.first; });
  Eigen::VectorXd dsorted(n);
  Eigen::MatrixXd csorted(rc > 0 ? n : 0, rc);
  for (int t = 0; t < n; ++t) {
    dsorted[t] = merged[static_cast<std::size_t>(t)].first;
    if (rc > 0)
      csorted.row(t) = newcarry.row(merged[static_cast<std::size_t>(t)].second);
  }
  d = std::move(dsorted);
  if (rc > 0) carry = std::move(csorted);

  if (reflected) {
    d = (-d.reverse()).eval();
    carry = carry.colwise().reverse().eval();
  }
}

}  // namespace detail

// Exact eigenvalues of the flipped graph's A'_norm, descending, computed
// incrementally from the clean spectrum. Falls back to a dense
// re-decomposition if the incremental result fails its invariants.
inline Eigen::VectorXd exact_eigs_after_flip(const Graph& g,
                                             const Spectrum& spec,
                                             const EdgeFlip& flip) {
  if (spec.kind != SpectrumKind::adjacency)
    throw ValidationError("exact_eigs_after_flip needs an adjacency spectrum");
  const int n = g.node_count();
  if (spec.size() != n)
    throw ValidationError("exact update requires the full spectrum");
  const int i = std::min(flip.i, flip.j);
  const int j = std::max(flip.i, flip.j);
  const double dw = flip.delta_w;
  const double aij = g.has_edge(i, j) ? 1.0 : 0.0;
  if (dw != 1.0 - 2.0 * aij)
    throw ValidationError("flip does not match adjacency");
  const double di = g.degree(i), dj = g.degree(j);
  if (di + dw < 1.0 || dj + dw < 1.0)
    throw ValidationError("flip would isolate a node");

  const double si = 1.0 / std::sqrt(di), sj = 1.0 / std::sqrt(dj);
  const double spi = 1.0 / std::sqrt(di + dw), spj = 1.0 / std::sqrt(dj + dw);

  // Columns i and j of E = A'_norm - A_norm.
  Eigen::VectorXd ci = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd cj = Eigen::VectorXd::Zero(n);
  for (int b : g.neighbors(i)) {
    if (b == j) continue;
    ci[b] = (spi - si) / std::sqrt(double(g.degree(b)));
  }
  for (int b : g.neighbors(j)) {
    if (b == i) continue;
    cj[b] = (spj - sj) / std::sqrt(double(g.degree(b)));
  }
  const double eij = (aij + dw) * spi * spj - aij * si * sj;
  ci[j] = eij;
  cj[i] = eij;

  // E = e_i c_i^T + c_i e_i^T + e_j c_j^T + c_j e_j^T - eij (e_i e_j^T + ...)
  // expressed as B M4 B^T with B = [e_i, e_j, c_i, c_j].
  Eigen::Matrix4d m4 = Eigen::Matrix4d::Zero();
  m4(0, 1) = m4(1, 0) = -eij;
  m4(0, 2) = m4(2, 0) = 1.0;
  m4(1, 3) = m4(3, 1) = 1.0;

  // G = W^T B in the orthonormal basis W = D^{1/2} U of the clean A_norm.
  Eigen::VectorXd sqrtd = spec.degrees.array().sqrt();
  Eigen::MatrixXd gmat(n, 4);
  for (int y = 0; y < n; ++y) {
    gmat(y, 0) = sqrtd[i] * spec.vectors(i, y);
    gmat(y, 1) = sqrtd[j] * spec.vectors(j, y);
  }
  gmat.col(2).setZero();
  gmat.col(3).setZero();
  auto accumulate_col = [&](const Eigen::VectorXd& c, int col, int self,
                            int other) {
    for (int b : g.neighbors(self)) {
      if (b == other) continue;
      gmat.col(col) += (c[b] * sqrtd[b]) * spec.vectors.row(b).transpose();
    }
    gmat.col(col) +=
        (c[other] * sqrtd[other]) * spec.vectors.row(other).transpose();
  };
  accumulate_col(ci, 2, i, j);
  accumulate_col(cj, 3, j, i);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es4(m4);
  const Eigen::Vector4d theta = es4.eigenvalues();
  Eigen::MatrixXd f = gmat * es4.eigenvectors();

  // Ascending clean eigenvalues; spec stores descending. Each rank-one term
  // theta_m f_m f_m^T is folded in while the remaining f columns are carried
  // through the basis changes (all orthogonal, so their norms survive).
  Eigen::VectorXd d = spec.values.reverse();
  Eigen::MatrixXd carry = f.colwise().reverse();
  const double eps = std::numeric_limits<double>::epsilon();
  bool ok = true;
  try {
    for (int m = 0; m < 4 && ok; ++m) {
      Eigen::VectorXd z = carry.col(m);
      if (std::abs(theta[m]) * z.squaredNorm() <= 16.0 * eps) continue;
      Eigen::MatrixXd rest = carry.rightCols(3 - m);
      detail::rank_one_update(d, z, theta[m], rest);
      carry.rightCols(3 - m) = rest;
    }
  } catch (const SolverError&) {
    ok = false;
  }

  // Invariant audit: trace and Frobenius norm of A'_norm are cheap exact
  // quantities; mismatch sends us to the dense fallback.
  if (ok) {
    double fro2 = 0;
    for (const auto& [p, q] : g.edges()) {
      if ((p == i && q == j)) continue;
      double sp = (p == i) ? spi : (p == j) ? spj : 1.0 / std::sqrt(double(g.degree(p)));
      double sq = (q == i) ? spi : (q == j) ? spj : 1.0 / std::sqrt(double(g.degree(q)));
      fro2 += 2.0 * sp * sp * sq * sq;
    }
    if (aij + dw > 0.5) fro2 += 2.0 * (spi * spj) * (spi * spj);
    const double tr = d.sum();
    const double fro2_est = d.squaredNorm();
    const double tol = 1e-7 * std::max(1.0, fro2);
    if (std::abs(tr) > 1e-7 * n || std::abs(fro2_est - fro2) > tol) ok = false;
  }

  if (!ok) {
    Graph flipped = g.with_flips(std::span(&flip, 1));
    Eigen::MatrixXd a = detail::adjacency_normalized(flipped);
    Eigen::VectorXd w;
    detail::sym_eig_inplace(a, w, false);
    return w.reverse();
  }
  return d.reverse();
}

// ---------------------------------------------------------------------------
// First-order eigenvector updates. Differentiating A u = lambda D u gives
//   (A - lambda D) du = -dw (alpha e_i + beta e_j) + dlambda (d .* u)
// with alpha = u_j - lambda u_i, beta = u_i - lambda u_j. The left side is
// singular, so du is resolved with the Moore-Penrose pseudo-inverse of
// (A - lambda_y D); those operators are dense n x n and get cached.
// ---------------------------------------------------------------------------

struct PinvCache {
  std::vector<int> indices;          // eigenvalue indices with cached operators
  std::vector<Eigen::MatrixXd> ops;  // pinv(A - lambda_y D), same order
  std::uint64_t graph_fingerprint = 0;

  const Eigen::MatrixXd& op_for(int y) const {
    for (std::size_t k = 0; k < indices.size(); ++k)
      if (indices[k] == y) return ops[k];
    throw ValidationError("eigen index " + std::to_string(y) +
                          " not in pseudo-inverse cache");
  }
};

inline PinvCache build_pinv_cache(const Graph& g, const Spectrum& spec,
                                  const std::vector<int>& indices,
                                  std::uint64_t budget_bytes = 3ull << 30) {
  if (spec.kind != SpectrumKind::adjacency)
    throw ValidationError("pseudo-inverse cache needs an adjacency spectrum");
  if (spec.graph_fingerprint != g.fingerprint())
    throw ValidationError("spectrum does not belong to this graph");
  const int n = g.node_count();
  const std::uint64_t need = static_cast<std::uint64_t>(indices.size()) *
                             static_cast<std::uint64_t>(n) *
                             static_cast<std::uint64_t>(n) * 8ull;
  if (need > budget_bytes)
    throw ResourceError("pseudo-inverse cache over budget", need);
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [p, q] : g.edges()) {
    adj(p, q) = 1.0;
    adj(q, p) = 1.0;
  }
  PinvCache cache;
  cache.indices = indices;
  cache.graph_fingerprint = g.fingerprint();
  cache.ops.reserve(indices.size());
  for (int y : indices) {
    if (y < 0 || y >= spec.size())
      throw ValidationError("eigen index out of range");
    Eigen::MatrixXd b = adj;
    b.diagonal() -= spec.values[y] * spec.degrees;
    Eigen::VectorXd w;
    detail::sym_eig_inplace(b, w, true);
    // (A - lambda_y D) is exactly singular along u_y; treat everything below
    // 1e-8 of the top magnitude as that null space.
    const double wmax = w.cwiseAbs().maxCoeff();
    const double cut = 1e-8 * std::max(wmax, 1e-300);
    Eigen::VectorXd winv(n);
    for (int t = 0; t < n; ++t)
      winv[t] = std::abs(w[t]) <= cut ? 0.0 : 1.0 / w[t];
    Eigen::MatrixXd scaled = b * winv.asDiagonal();
    Eigen::MatrixXd pinv(n, n);
    detail::gemm(scaled, false, b, true, pinv, 1.0, 0.0);
    cache.ops.push_back(std::move(pinv));
  }
  return cache;
}

// Updated eigenvector u_y + du_y for one flip, normalized against the
// flipped degree matrix. dlambda is the first-order eigenvalue shift.
inline Eigen::VectorXd approx_eigenvector_after_flip(const Spectrum& spec,
                                                     const PinvCache& cache,
                                                     const EdgeFlip& flip,
                                                     int y) {
  if (spec.kind != SpectrumKind::adjacency)
    throw ValidationError("eigenvector update needs an adjacency spectrum");
  if (spec.graph_fingerprint != cache.graph_fingerprint)
    throw ValidationError("pseudo-inverse cache belongs to a different graph");
  const Eigen::MatrixXd& pinv = cache.op_for(y);
  const double lam = spec.values[y];
  const double dw = flip.delta_w;
  const double ui = spec.vectors(flip.i, y);
  const double uj = spec.vectors(flip.j, y);
  const double dlam =
      dw * (2.0 * ui * uj - lam * (ui * ui + uj * uj));
  const double alpha = uj - lam * ui;
  const double beta = ui - lam * uj;
  Eigen::VectorXd du = -dw * (alpha * pinv.col(flip.i) + beta * pinv.col(flip.j));
  Eigen::VectorXd dweighted =
      spec.degrees.array() * spec.vectors.col(y).array();
  du.noalias() += dlam * (pinv * dweighted);
  Eigen::VectorXd v = spec.vectors.col(y) + du;
  Eigen::VectorXd dprime = spec.degrees;
  dprime[flip.i] += dw;
  dprime[flip.j] += dw;
  const double norm2 = (v.array().square() * dprime.array()).sum();
  if (norm2 <= 0) throw SolverError("degenerate updated eigenvector");
  return v / std::sqrt(norm2);
}

// ---------------------------------------------------------------------------
// On-disk spectrum cache. Little-endian layout:
//   "NPSC" | u32 version | u64 graph fingerprint | u8 kind |
//   u64 n | u64 count | f64 values[count] | f64 vectors (n rows x count
//   cols, row-major) | f64 degrees[n]
// ---------------------------------------------------------------------------

namespace detail {
static_assert(std::numeric_limits<double>::is_iec559,
              "IEEE-754 doubles required");

template <class T>
void put_raw(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void get_raw(std::ifstream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace detail

inline void save_spectrum(const Spectrum& spec, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot open for writing: " + path);
  os.write("NPSC", 4);
  detail::put_raw(os, std::uint32_t{1});
  detail::put_raw(os, spec.graph_fingerprint);
  detail::put_raw(os, static_cast<std::uint8_t>(spec.kind));
  const std::uint64_t n = static_cast<std::uint64_t>(spec.vectors.rows());
  const std::uint64_t count = static_cast<std::uint64_t>(spec.values.size());
  detail::put_raw(os, n);
  detail::put_raw(os, count);
  os.write(reinterpret_cast<const char*>(spec.values.data()),
           static_cast<std::streamsize>(count * sizeof(double)));
  for (std::uint64_t r = 0; r < n; ++r) {
    Eigen::VectorXd row = spec.vectors.row(static_cast<Eigen::Index>(r));
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(count * sizeof(double)));
  }
  os.write(reinterpret_cast<const char*>(spec.degrees.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
  if (!os) throw ValidationError("short write: " + path);
}

inline Spectrum load_spectrum(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open spectrum cache: " + path);
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "NPSC")
    throw ParseError(path, 0, "bad spectrum cache magic");
  std::uint32_t version = 0;
  detail::get_raw(is, version);
  if (version != 1)
    throw ParseError(path, 0,
                     "unsupported spectrum cache version " +
                         std::to_string(version));
  Spectrum spec;
  std::uint8_t kind = 0;
  detail::get_raw(is, spec.graph_fingerprint);
  detail::get_raw(is, kind);
  if (kind > 2) throw ParseError(path, 0, "bad spectrum kind");
  spec.kind = static_cast<SpectrumKind>(kind);
  std::uint64_t n = 0, count = 0;
  detail::get_raw(is, n);
  detail::get_raw(is, count);
  if (!is || n == 0 || count == 0 || count > n || n > (1u << 24))
    throw ParseError(path, 0, "bad spectrum cache dimensions");
  spec.values.resize(static_cast<Eigen::Index>(count));
  is.read(reinterpret_cast<char*>(spec.values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  spec.vectors.resize(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(count));
  Eigen::VectorXd row(static_cast<Eigen::Index>(count));
  for (std::uint64_t r = 0; r < n; ++r) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    spec.vectors.row(static_cast<Eigen::Index>(r)) = row;
  }
  spec.degrees.resize(static_cast<Eigen::Index>(n));
  is.read(reinterpret_cast<char*>(spec.degrees.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw ParseError(path, 0, "truncated spectrum cache");
  return spec;
}

inline std::string spectrum_cache_name(std::uint64_t fingerprint,
                                       SpectrumKind kind) {
  static const char* names[] = {"adj", "lrw", "lpl"};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fingerprint));
  return std::string("spectrum-") + buf + "-" +
         names[static_cast<int>(kind)] + ".bin";
}

}  // namespace netpoison
