// Copyright (c) 2026 the netpoison authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "netpoison/errors.hpp"

// Direct Fortran bindings. Everything here works on column-major storage,
// which matches Eigen's default, so no transposition copies are needed.
extern "C" {
void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a,
             const int* lda, double* w, double* work, const int* lwork,
             int* iwork, const int* liwork, int* info);
void dlaed4_(const int* n, const int* i, const double* d, const double* z,
             double* delta, const double* rho, double* dlam, int* info);
void dgemm_(const char* transa, const char* transb, const int* m, const int* n,
            const int* k, const double* alpha, const double* a, const int* lda,
            const double* b, const int* ldb, const double* beta, double* c,
            const int* ldc);
void openblas_set_num_threads(int) __attribute__((weak));
}

namespace netpoison::detail {

inline void set_blas_threads(int n) {
  if (openblas_set_num_threads) openblas_set_num_threads(n);
}

// Full eigendecomposition of a symmetric matrix, eigenvalues ascending.
// Destroys `a` when vectors are requested (they replace its contents).
inline void sym_eig_inplace(Eigen::MatrixXd& a, Eigen::VectorXd& w,
                            bool vectors) {
  const int n = static_cast<int>(a.rows());
  w.resize(n);
  if (n == 0) return;
  const char jobz = vectors ? 'V' : 'N';
  const char uplo = 'L';
  int info = 0;
  int lwork = -1, liwork = -1;
  double wkopt = 0;
  int iwkopt = 0;
  dsyevd_(&jobz, &uplo, &n, a.data(), &n, w.data(), &wkopt, &lwork, &iwkopt,
          &liwork, &info);
  if (info != 0) throw SolverError("dsyevd workspace query failed");
  lwork = static_cast<int>(wkopt);
  liwork = iwkopt;
  std::vector<double> work(static_cast<std::size_t>(lwork));
  std::vector<int> iwork(static_cast<std::size_t>(liwork));
  dsyevd_(&jobz, &uplo, &n, a.data(), &n, w.data(), work.data(), &lwork,
          iwork.data(), &liwork, &info);
  if (info != 0)
    throw SolverError("dsyevd failed with info=" + std::to_string(info));
}

// C = A * B or variants, through BLAS. Shapes are taken from the arguments.
inline void gemm(const Eigen::MatrixXd& a, bool ta, const Eigen::MatrixXd& b,
                 bool tb, Eigen::MatrixXd& c, double alpha = 1.0,
                 double beta = 0.0) {
  const int m = static_cast<int>(ta ? a.cols() : a.rows());
  const int k = static_cast<int>(ta ? a.rows() : a.cols());
  const int n = static_cast<int>(tb ? b.rows() : b.cols());
  const int lda = static_cast<int>(a.rows());
  const int ldb = static_cast<int>(b.rows());
  if (c.rows() != m || c.cols() != n) c.resize(m, n);
  const char transa = ta ? 'T' : 'N';
  const char transb = tb ? 'T' : 'N';
  const int ldc = m;
  dgemm_(&transa, &transb, &m, &n, &k, &alpha, a.data(), &lda, b.data(), &ldb,
         &beta, c.data(), &ldc);
}

}  // namespace netpoison::detail
