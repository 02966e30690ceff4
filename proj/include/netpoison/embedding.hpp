// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "netpoison/cooc.hpp"
#include "netpoison/errors.hpp"
#include "netpoison/graph.hpp"
#include "netpoison/spectrum.hpp"

namespace netpoison {

enum class EmbeddingKind : std::uint8_t { svd = 0, surrogate = 1, spectral = 2 };

// Node embedding matrix, one row per node.
//   svd:       Z = U_K Sigma_K^{1/2} from the SVD of Mhat, columns ordered by
//              descending singular value.
//   surrogate: Z = U diag(sum_{r=1..T} lambda^r), full width, built straight
//              from the generalized adjacency spectrum without any SVD.
//   spectral:  the K eigenvectors of the smallest Laplacian eigenvalues.
struct EmbeddingMatrix {
  EmbeddingKind kind = EmbeddingKind::svd;
  Eigen::MatrixXd Z;
  // svd kind: every singular value of Mhat, descending (used by the rank-K
  // residual identity). Empty for the other kinds.
  Eigen::VectorXd sigma;
  std::uint64_t graph_fingerprint = 0;
};

struct SymmetricSvd {
  Eigen::MatrixXd left;
  Eigen::VectorXd sigma;  // descending
  Eigen::MatrixXd right;
};

namespace detail {

// Flips the column so its largest-magnitude entry is positive (first such
// entry wins on exact ties). Returns the applied sign.
inline double pin_column_sign(Eigen::Ref<Eigen::VectorXd> col) {
  Eigen::Index imax = 0;
  col.cwiseAbs().maxCoeff(&imax);
  if (col[imax] < 0) {
    col = -col;
    return -1.0;
  }
  return 1.0;
}

}  // namespace detail

// SVD of a symmetric matrix through one eigendecomposition: sigma = |lambda|
// sorted descending, left = sign(lambda) * q, right = q, then each left
// column's sign is pinned (largest-magnitude entry positive) for
// reproducibility, with the matching compensation on the right column.
inline SymmetricSvd sym_svd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw ValidationError("matrix must be square");
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd a = m;
  Eigen::VectorXd w;
  detail::sym_eig_inplace(a, w, true);
  Eigen::VectorXd aw = w.cwiseAbs();
  std::vector<int> order = detail::descending_order(aw);
  SymmetricSvd out;
  out.left.resize(n, n);
  out.right.resize(n, n);
  out.sigma.resize(n);
  for (Eigen::Index p = 0; p < n; ++p) {
    const int src = order[static_cast<std::size_t>(p)];
    out.sigma[p] = aw[src];
    const double lsign = w[src] < 0 ? -1.0 : 1.0;
    out.left.col(p) = lsign * a.col(src);
    const double flip = detail::pin_column_sign(out.left.col(p));
    out.right.col(p) = flip * a.col(src);
  }
  return out;
}

inline EmbeddingMatrix svd_embedding(const CoocFactorization& f, int K) {
  const Eigen::Index n = f.Mhat.rows();
  if (K < 1 || K > n)
    throw ValidationError("embedding dimension must lie in [1, " +
                          std::to_string(n) + "], got " + std::to_string(K));
  SymmetricSvd svd = sym_svd(f.Mhat);
  EmbeddingMatrix e;
  e.kind = EmbeddingKind::svd;
  e.graph_fingerprint = f.graph_fingerprint;
  e.sigma = svd.sigma;
  e.Z = svd.left.leftCols(K) * svd.sigma.head(K).cwiseSqrt().asDiagonal();
  return e;
}

// Surrogate embedding built directly from the generalized adjacency spectrum;
// column y is u_y * (sum_{r=1..T} lambda_y^r). No SVD is involved, which is
// what makes per-flip re-embedding cheap.
inline EmbeddingMatrix surrogate_embedding(const Spectrum& spec, int T) {
  if (spec.kind != SpectrumKind::adjacency)
    throw ValidationError("surrogate embedding requires the adjacency spectrum");
  if (T < 1) throw ValidationError("window size must be at least 1");
  if (spec.values.size() != spec.vectors.rows())
    throw ValidationError("surrogate embedding requires the full spectrum");
  EmbeddingMatrix e;
  e.kind = EmbeddingKind::surrogate;
  e.graph_fingerprint = spec.graph_fingerprint;
  e.Z = spec.vectors *
        detail::window_polynomial(spec.values, T).asDiagonal();
  return e;
}

// K eigenvectors of the smallest Laplacian eigenvalues, with pinned column
// signs. kind selects the Laplacian; the adjacency kind is rejected by
// laplacian_eigs.
inline EmbeddingMatrix spectral_embedding(const Graph& g, int K,
                                          SpectrumKind kind) {
  if (K < 1 || K > g.node_count())
    throw ValidationError("embedding dimension must lie in [1, n]");
  Spectrum lap = laplacian_eigs(g, kind);
  EmbeddingMatrix e;
  e.kind = EmbeddingKind::spectral;
  e.graph_fingerprint = lap.graph_fingerprint;
  e.Z = lap.vectors.leftCols(K);
  for (Eigen::Index c = 0; c < e.Z.cols(); ++c)
    detail::pin_column_sign(e.Z.col(c));
  return e;
}

// ---------------------------------------------------------------------------
// Exports. CSV: header "node_id,z_0,...,z_{K-1}", one row per node.
// Binary mirrors the spectrum cache layout:
//   "NPEB" | u32 version | u64 graph fingerprint | u8 kind |
//   u64 n | u64 K | f64 Z (row-major) | u64 sigma count | f64 sigma[]
// ---------------------------------------------------------------------------

inline void save_embedding_csv(const EmbeddingMatrix& e,
                               const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ValidationError("cannot open for writing: " + path);
  os << "node_id";
  for (Eigen::Index k = 0; k < e.Z.cols(); ++k) os << ",z_" << k;
  os << "\n";
  os.precision(17);
  for (Eigen::Index i = 0; i < e.Z.rows(); ++i) {
    os << i;
    for (Eigen::Index k = 0; k < e.Z.cols(); ++k) os << ',' << e.Z(i, k);
    os << "\n";
  }
  if (!os) throw ValidationError("short write: " + path);
}

inline void save_embedding(const EmbeddingMatrix& e, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ValidationError("cannot open for writing: " + path);
  os.write("NPEB", 4);
  detail::put_raw(os, std::uint32_t{1});
  detail::put_raw(os, e.graph_fingerprint);
  detail::put_raw(os, static_cast<std::uint8_t>(e.kind));
  const std::uint64_t n = static_cast<std::uint64_t>(e.Z.rows());
  const std::uint64_t k = static_cast<std::uint64_t>(e.Z.cols());
  detail::put_raw(os, n);
  detail::put_raw(os, k);
  for (std::uint64_t r = 0; r < n; ++r) {
    Eigen::VectorXd row = e.Z.row(static_cast<Eigen::Index>(r));
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(k * sizeof(double)));
  }
  const std::uint64_t sc = static_cast<std::uint64_t>(e.sigma.size());
  detail::put_raw(os, sc);
  os.write(reinterpret_cast<const char*>(e.sigma.data()),
           static_cast<std::streamsize>(sc * sizeof(double)));
  if (!os) throw ValidationError("short write: " + path);
}

inline EmbeddingMatrix load_embedding(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open embedding file: " + path);
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "NPEB")
    throw ParseError(path, 0, "bad embedding magic");
  std::uint32_t version = 0;
  detail::get_raw(is, version);
  if (version != 1)
    throw ParseError(path, 0,
                     "unsupported embedding version " +
                         std::to_string(version));
  EmbeddingMatrix e;
  std::uint8_t kind = 0;
  detail::get_raw(is, e.graph_fingerprint);
  detail::get_raw(is, kind);
  if (kind > 2) throw ParseError(path, 0, "bad embedding kind");
  e.kind = static_cast<EmbeddingKind>(kind);
  std::uint64_t n = 0, k = 0;
  detail::get_raw(is, n);
  detail::get_raw(is, k);
  if (!is || n == 0 || k == 0 || k > n || n > (1u << 24))
    throw ParseError(path, 0, "bad embedding dimensions");
  e.Z.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  Eigen::VectorXd row(static_cast<Eigen::Index>(k));
  for (std::uint64_t r = 0; r < n; ++r) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(k * sizeof(double)));
    e.Z.row(static_cast<Eigen::Index>(r)) = row;
  }
  std::uint64_t sc = 0;
  detail::get_raw(is, sc);
  if (!is || sc > n) throw ParseError(path, 0, "bad sigma count");
  e.sigma.resize(static_cast<Eigen::Index>(sc));
  if (sc > 0)
    is.read(reinterpret_cast<char*>(e.sigma.data()),
            static_cast<std::streamsize>(sc * sizeof(double)));
  if (!is) throw ParseError(path, 0, "truncated embedding file");
  return e;
}

}  // namespace netpoison
