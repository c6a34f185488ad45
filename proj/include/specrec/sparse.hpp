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
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace specrec {

using Index = std::uint32_t;

// Row-major dense block used for embeddings, signals and eigenvector blocks.
using DenseMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Triplet {
  Index row;
  Index col;
  double value;
};

// Sparse nonnegative U x I matrix in compressed row form. A transposed
// (compressed column) copy is built on construction so products with the
// transpose can also run row-parallel. Immutable after construction.
class InteractionMatrix {
 public:
  InteractionMatrix() : row_ptr_(1, 0), col_ptr_(1, 0) {}

  // Validates the CSR arrays: row_ptr nondecreasing with row_ptr[0] == 0,
  // column indices in range and strictly increasing inside each row,
  // values strictly positive and finite.
  InteractionMatrix(std::size_t n_users, std::size_t n_items,
                    std::vector<std::size_t> row_ptr,
                    std::vector<Index> col_idx, std::vector<double> values);

  // Entries may come in any order; duplicate (row, col) pairs are rejected.
  static InteractionMatrix from_triplets(std::size_t n_users,
                                         std::size_t n_items,
                                         std::vector<Triplet> triplets);

  // Nonzero entries of `dense` become stored values; negatives are rejected.
  static InteractionMatrix from_dense(const DenseMatrix& dense);

  std::size_t n_users() const { return n_users_; }
  std::size_t n_items() const { return n_items_; }
  std::size_t nnz() const { return col_idx_.size(); }

  std::span<const Index> row_items(Index u) const {
    return {col_idx_.data() + row_ptr_[u], row_ptr_[u + 1] - row_ptr_[u]};
  }
  std::span<const double> row_values(Index u) const {
    return {values_.data() + row_ptr_[u], row_ptr_[u + 1] - row_ptr_[u]};
  }
  std::span<const Index> col_users(Index i) const {
    return {row_idx_.data() + col_ptr_[i], col_ptr_[i + 1] - col_ptr_[i]};
  }
  std::span<const double> col_values(Index i) const {
    return {col_values_.data() + col_ptr_[i], col_ptr_[i + 1] - col_ptr_[i]};
  }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<Index>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  bool contains(Index u, Index i) const;

  // Same sparsity pattern, new values (aligned with values()).
  InteractionMatrix with_values(std::vector<double> values) const;

  DenseMatrix to_dense() const;

  friend bool operator==(const InteractionMatrix& a,
                         const InteractionMatrix& b) {
    return a.n_users_ == b.n_users_ && a.n_items_ == b.n_items_ &&
           a.row_ptr_ == b.row_ptr_ && a.col_idx_ == b.col_idx_ &&
           a.values_ == b.values_;
  }

 private:
  void build_columns();

  std::size_t n_users_ = 0;
  std::size_t n_items_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<Index> col_idx_;
  std::vector<double> values_;
  std::vector<std::size_t> col_ptr_;
  std::vector<Index> row_idx_;
  std::vector<double> col_values_;
};

struct DegreeVectors {
  std::vector<double> user_degrees;
  std::vector<double> item_degrees;
};

DegreeVectors degrees(const InteractionMatrix& r);

// D_U^{-alpha} R D_I^{-beta}. A zero degree maps to a zero scale factor.
InteractionMatrix normalize_interactions(const InteractionMatrix& r,
                                         double alpha, double beta);

// d^{exponent} with the convention that a zero degree gives 0 for every
// exponent, including 0.
double degree_power(double degree, double exponent);

enum class Transpose { kNo, kYes };

// R * X (U x f from I x f) or R^T * X (I x f from U x f). Each output row is
// accumulated serially in storage order, so results do not depend on the
// thread count.
DenseMatrix spmm(const InteractionMatrix& r, const DenseMatrix& x,
                 Transpose transpose = Transpose::kNo);

// Vector form of spmm; y is overwritten.
void spmv(const InteractionMatrix& r, std::span<const double> x,
          std::span<double> y, Transpose transpose = Transpose::kNo);

// FNV-1a hash over dimensions, pattern and value bits.
std::uint64_t fingerprint(const InteractionMatrix& r);

// Sets the OpenMP thread count used by the library kernels (0 keeps the
// runtime default).
void set_num_threads(int threads);

}  // namespace specrec
