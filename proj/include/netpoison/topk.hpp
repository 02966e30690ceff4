// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "netpoison/detail/lapack.hpp"
#include "netpoison/errors.hpp"
#include "netpoison/rng.hpp"
#include "netpoison/spectrum.hpp"

namespace netpoison {

// Leading eigenpairs of a symmetric matrix ranked by |eigenvalue| — exactly
// the singular pairs when the matrix is symmetric. `values` are signed and
// sorted by descending magnitude.
struct TopEigs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  int sweeps = 0;
  bool fallback = false;  // true when the dense solver finished the job
};

// Operator form: the matrix enters only through `multiply` (Y = M X) and,
// for the rare dense fallback, `materialize` (returns M itself). This is
// what lets one-edge variants of a large matrix be solved without ever
// assembling them.
//
// The engine is a block Krylov expansion: each sweep appends one multiplied
// block to the basis and Rayleigh-Ritz runs over everything accumulated so
// far. Unlike plain subspace iteration, convergence is not throttled by the
// eigenvalue ratio at the block boundary, which matters for matrices whose
// spectrum tails off in a tight cluster.
template <typename Multiply, typename Materialize>
inline TopEigs top_abs_eigs_op(Eigen::Index n, int k, Multiply&& multiply,
                               Materialize&& materialize,
                               const Eigen::MatrixXd* warm = nullptr,
                               double rel_tol = 1e-7, int max_sweeps = 12,
                               std::uint64_t seed = 0x5eed) {
  if (k < 1 || k > n)
    throw ValidationError("eigenpair count must lie in [1, n]");

  TopEigs out;
  const Eigen::Index kb = std::min<Eigen::Index>(n, k + 8);

  auto dense_solve = [&]() {
    Eigen::MatrixXd a = materialize();
    Eigen::VectorXd w;
    detail::sym_eig_inplace(a, w, true);
    Eigen::VectorXd aw = w.cwiseAbs();
    std::vector<int> order = detail::descending_order(aw);
    out.values.resize(k);
    out.vectors.resize(n, k);
    for (int p = 0; p < k; ++p) {
      out.values[p] = w[order[static_cast<std::size_t>(p)]];
      out.vectors.col(p) = a.col(order[static_cast<std::size_t>(p)]);
    }
    out.fallback = true;
  };

  // A half-sized block buys nothing over the dense solver.
  if (2 * kb >= n) {
    dense_solve();
    return out;
  }

  const Eigen::Index max_dim =
      std::min<Eigen::Index>(n, kb * static_cast<Eigen::Index>(max_sweeps));
  Eigen::MatrixXd w_basis(n, max_dim);  // orthonormal Krylov basis
  Eigen::MatrixXd y_basis(n, max_dim);  // M applied to each basis column
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(max_dim, max_dim);

  Rng rng(seed);
  auto fill_random = [&](Eigen::Ref<Eigen::MatrixXd> block) {
    for (Eigen::Index c = 0; c < block.cols(); ++c)
      for (Eigen::Index r = 0; r < block.rows(); ++r)
        block(r, c) = rng.gaussian();
  };

  // Orthonormalizes `block` against the first `dim` basis columns and
  // itself; rank-deficient directions are refreshed from the RNG. Returns
  // the number of columns that survived.
  auto append_block = [&](Eigen::MatrixXd& block, Eigen::Index dim) {
    const double tiny = 1e-12;
    for (int pass = 0; pass < 2; ++pass) {
      if (dim > 0) {
        Eigen::MatrixXd coef;
        detail::gemm(w_basis.leftCols(dim), true, block, false, coef);
        block.noalias() -= w_basis.leftCols(dim) * coef;
      }
      for (Eigen::Index c = 0; c < block.cols(); ++c) {
        for (Eigen::Index prev = 0; prev < c; ++prev)
          block.col(c) -=
              block.col(prev).dot(block.col(c)) * block.col(prev);
        double norm = block.col(c).norm();
        if (norm <= tiny) {
          fill_random(block.col(c));
          if (dim > 0) {
            Eigen::VectorXd coef =
                w_basis.leftCols(dim).transpose() * block.col(c);
            block.col(c).noalias() -= w_basis.leftCols(dim) * coef;
          }
          for (Eigen::Index prev = 0; prev < c; ++prev)
            block.col(c) -=
                block.col(prev).dot(block.col(c)) * block.col(prev);
          norm = block.col(c).norm();
          if (norm <= tiny) return c;  // space exhausted
        }
        block.col(c) /= norm;
      }
    }
    return block.cols();
  };

  Eigen::MatrixXd block(n, kb);
  Eigen::Index filled = 0;
  if (warm && warm->rows() == n) {
    filled = std::min<Eigen::Index>(warm->cols(), kb);
    block.leftCols(filled) = warm->leftCols(filled);
  }
  if (filled < kb) fill_random(block.rightCols(kb - filled));

  Eigen::Index dim = 0;
  Eigen::MatrixXd ritz, mritz, v;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    out.sweeps = sweep;
    Eigen::Index width = std::min<Eigen::Index>(block.cols(), max_dim - dim);
    if (width <= 0) break;
    if (width < block.cols())
      block.conservativeResize(Eigen::NoChange, width);
    width = append_block(block, dim);
    if (width <= 0) break;
    auto wnew = w_basis.middleCols(dim, width);
    wnew = block.leftCols(width);
    auto ynew = y_basis.middleCols(dim, width);
    {
      Eigen::MatrixXd yb;
      multiply(block.leftCols(width).eval(), yb);
      ynew = yb;
    }
    // Grow the projected matrix: new block column and its mirror.
    Eigen::MatrixXd hcol;
    detail::gemm(w_basis.leftCols(dim + width), true,
                 y_basis.middleCols(dim, width), false, hcol);
    h.block(0, dim, dim + width, width) = hcol;
    h.block(dim, 0, width, dim) =
        hcol.topRows(dim).transpose();
    // Exact symmetry of the diagonal block.
    h.block(dim, dim, width, width) =
        (0.5 * (hcol.bottomRows(width) + hcol.bottomRows(width).transpose()))
            .eval();
    dim += width;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        h.topLeftCorner(dim, dim));
    if (es.info() != Eigen::Success) break;
    Eigen::VectorXd theta = es.eigenvalues();
    Eigen::VectorXd atheta = theta.cwiseAbs();
    std::vector<int> order = detail::descending_order(atheta);
    const int avail = static_cast<int>(std::min<Eigen::Index>(k, dim));
    v.resize(dim, avail);
    for (int p = 0; p < avail; ++p)
      v.col(p) = es.eigenvectors().col(order[static_cast<std::size_t>(p)]);
    detail::gemm(w_basis.leftCols(dim), false, v, false, ritz);
    detail::gemm(y_basis.leftCols(dim), false, v, false, mritz);
    const double scale =
        std::max(atheta[order[0]], std::numeric_limits<double>::min());
    bool converged = (avail == k) || (dim == n);
    for (int p = 0; p < avail && converged; ++p)
      if ((mritz.col(p) - theta[order[static_cast<std::size_t>(p)]] *
                              ritz.col(p)).norm() > rel_tol * scale)
        converged = false;
    if (converged || dim == n) {
      out.values.resize(avail);
      for (int p = 0; p < avail; ++p)
        out.values[p] = theta[order[static_cast<std::size_t>(p)]];
      out.vectors = ritz;
      if (converged && avail == k) return out;
      break;  // basis spans everything yet residuals failed: go dense
    }
    // Next block: the residual directions of the current Ritz pairs, padded
    // with fresh multiplied directions when k < kb.
    block.resize(n, std::min<Eigen::Index>(kb, max_dim - dim));
    if (block.cols() <= 0) break;
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      if (c < avail) {
        block.col(c) =
            mritz.col(c) - theta[order[static_cast<std::size_t>(c)]] *
                               ritz.col(c);
      } else {
        block.col(c) = y_basis.col(dim - block.cols() + c);
      }
    }
  }

  dense_solve();
  return out;
}

// Leading |eigenvalue| pairs of a dense symmetric matrix. A warm basis
// (e.g. the same matrix before a small perturbation) usually converges in a
// sweep or two, which is what makes scoring thousands of one-edge variants
// affordable. Falls back to a full dense decomposition if the expansion has
// not met `rel_tol` within `max_sweeps` blocks, so the result is always
// usable.
inline TopEigs top_abs_eigs(const Eigen::MatrixXd& m, int k,
                            const Eigen::MatrixXd* warm = nullptr,
                            double rel_tol = 1e-7, int max_sweeps = 12,
                            std::uint64_t seed = 0x5eed) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) throw ValidationError("matrix must be square");
  return top_abs_eigs_op(
      n, k,
      [&m](const Eigen::MatrixXd& x, Eigen::MatrixXd& y) {
        detail::gemm(m, false, x, false, y);
      },
      [&m]() { return m; }, warm, rel_tol, max_sweeps, seed);
}

}  // namespace netpoison
