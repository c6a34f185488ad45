// Copyright 2026 The specrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "specrec/sparse.hpp"

namespace specrec {

struct SolverConfig {
  // Ritz residual bound, relative to the largest Ritz value of the operator.
  double tol = 1e-8;
  // Budget of operator applications; 0 selects 10 * f + 100.
  std::size_t max_iter = 0;
  std::uint64_t seed = 0;
};

struct ConvergenceReport {
  bool converged = false;
  std::size_t iterations = 0;  // operator applications
  std::size_t restarts = 0;
  // max_j ||G y_j - theta_j y_j|| / theta_max over the returned pairs.
  double max_residual = 0.0;
  std::size_t numerical_rank = 0;
  bool gram_on_items = true;
};

// Provenance written into the binary header of a factorization.
struct FactorsMeta {
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  double tol = 0.0;
};

// Leading singular triplets of a (normalised) interaction matrix:
// R q_j = sigma_j p_j, sigma descending. Columns with sigma_j == 0 have a zero
// p column; q stays orthonormal.
struct SpectralFactors {
  DenseMatrix p_tilde;  // U x f
  DenseMatrix q_tilde;  // I x f
  std::vector<double> sigma;
  FactorsMeta meta;

  std::size_t dim() const { return sigma.size(); }
  std::size_t n_users() const { return static_cast<std::size_t>(p_tilde.rows()); }
  std::size_t n_items() const { return static_cast<std::size_t>(q_tilde.rows()); }

  // First f triplets. Used to reuse one factorization across nested sizes.
  SpectralFactors leading(std::size_t f) const;
};

struct TruncatedSvd {
  SpectralFactors factors;
  ConvergenceReport report;
};

struct EigResult {
  DenseMatrix vectors;  // n x f, orthonormal columns
  std::vector<double> values;  // descending
};

// y = A x for a symmetric operator of dimension n.
using SymmetricOperator =
    std::function<void(std::span<const double> x, std::span<double> y)>;

struct LanczosResult {
  std::vector<double> values;  // descending
  Eigen::MatrixXd vectors;     // n x f
  ConvergenceReport report;
};

// Largest f eigenpairs of a symmetric positive semidefinite operator by
// thick-restart Lanczos with full reorthogonalization. A breakdown (invariant
// subspace) continues from a fresh random vector orthogonal to the basis, and
// every convergence is confirmed by one such probe so repeated eigenvalues are
// not missed.
LanczosResult lanczos_largest(const SymmetricOperator& op, std::size_t n,
                              std::size_t f, const SolverConfig& config);

// Top-f singular triplets of r via Lanczos on the Gram operator of the smaller
// side, then a Rayleigh-Ritz SVD on the recovered subspace. Non-convergence
// is reported, not thrown.
TruncatedSvd truncated_svd(const InteractionMatrix& r, std::size_t f,
                           const SolverConfig& config = {});

// Full thin SVD of a small dense matrix (Jacobi). Test oracle.
SpectralFactors dense_svd_oracle(const DenseMatrix& m);

// Eigenvectors (1/sqrt 2)[p_j; q_j] of the bipartite adjacency
// [[0, R], [R^T, 0]] with eigenvalues +sigma_j. The mirrored family
// (1/sqrt 2)[p_j; -q_j] has eigenvalues -sigma_j and is not built. A
// sigma_j == 0 column yields [0; q_j], a null vector.
EigResult adjacency_eigs_from_svd(const SpectralFactors& factors);

// Full spectrum of a dense symmetric matrix, descending.
EigResult dense_symmetric_eig(const DenseMatrix& a);

// Flips each column so its entry of largest magnitude is positive; the same
// flip is applied to the paired columns of `partner` when given.
void apply_sign_convention(DenseMatrix& vectors, DenseMatrix* partner = nullptr);

}  // namespace specrec
