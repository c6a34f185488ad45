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

#include "specrec/sparse.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include <omp.h>

#include "specrec/error.hpp"

namespace specrec {

InteractionMatrix::InteractionMatrix(std::size_t n_users, std::size_t n_items,
                                     std::vector<std::size_t> row_ptr,
                                     std::vector<Index> col_idx,
                                     std::vector<double> values)
    : n_users_(n_users),
      n_items_(n_items),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != n_users_ + 1 || row_ptr_.front() != 0) {
    throw DimensionError("row_ptr must have n_users + 1 entries starting at 0");
  }
  if (row_ptr_.back() != col_idx_.size() || col_idx_.size() != values_.size()) {
    throw DimensionError("row_ptr, col_idx and values disagree on nnz");
  }
  for (std::size_t u = 0; u < n_users_; ++u) {
    if (row_ptr_[u + 1] < row_ptr_[u]) {
      throw Error("row_ptr must be nondecreasing");
    }
    for (std::size_t k = row_ptr_[u]; k < row_ptr_[u + 1]; ++k) {
      if (col_idx_[k] >= n_items_) {
        throw Error("column index out of range in row " + std::to_string(u));
      }
      if (k > row_ptr_[u] && col_idx_[k] <= col_idx_[k - 1]) {
        throw Error("column indices must be strictly increasing in row " +
                    std::to_string(u));
      }
      if (!(values_[k] > 0.0) || !std::isfinite(values_[k])) {
        throw Error("stored values must be positive and finite");
      }
    }
  }
  build_columns();
}

InteractionMatrix InteractionMatrix::from_triplets(std::size_t n_users,
                                                   std::size_t n_items,
                                                   std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  std::vector<std::size_t> row_ptr(n_users + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (t.row >= n_users || t.col >= n_items) {
      throw DimensionError("triplet outside the matrix shape");
    }
    if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      throw Error("duplicate entry (" + std::to_string(t.row) + ", " +
                  std::to_string(t.col) + ")");
    }
    ++row_ptr[t.row + 1];
    col_idx.push_back(t.col);
    values.push_back(t.value);
  }
  std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
  return InteractionMatrix(n_users, n_items, std::move(row_ptr),
                           std::move(col_idx), std::move(values));
}

InteractionMatrix InteractionMatrix::from_dense(const DenseMatrix& dense) {
  std::vector<Triplet> triplets;
  for (Eigen::Index u = 0; u < dense.rows(); ++u) {
    for (Eigen::Index i = 0; i < dense.cols(); ++i) {
      const double v = dense(u, i);
      if (v < 0.0) throw Error("interaction weights must be nonnegative");
      if (v != 0.0) {
        triplets.push_back({static_cast<Index>(u), static_cast<Index>(i), v});
      }
    }
  }
  return from_triplets(static_cast<std::size_t>(dense.rows()),
                       static_cast<std::size_t>(dense.cols()),
                       std::move(triplets));
}

void InteractionMatrix::build_columns() {
  col_ptr_.assign(n_items_ + 1, 0);
  for (Index i : col_idx_) ++col_ptr_[i + 1];
  std::partial_sum(col_ptr_.begin(), col_ptr_.end(), col_ptr_.begin());
  row_idx_.resize(col_idx_.size());
  col_values_.resize(col_idx_.size());
  std::vector<std::size_t> cursor(col_ptr_.begin(), col_ptr_.end() - 1);
  // Rows are visited in order, so users inside each column stay sorted.
  for (std::size_t u = 0; u < n_users_; ++u) {
    for (std::size_t k = row_ptr_[u]; k < row_ptr_[u + 1]; ++k) {
      const std::size_t dst = cursor[col_idx_[k]]++;
      row_idx_[dst] = static_cast<Index>(u);
      col_values_[dst] = values_[k];
    }
  }
}

bool InteractionMatrix::contains(Index u, Index i) const {
  const auto items = row_items(u);
  return std::binary_search(items.begin(), items.end(), i);
}

InteractionMatrix InteractionMatrix::with_values(std::vector<double> values) const {
  return InteractionMatrix(n_users_, n_items_, row_ptr_, col_idx_,
                           std::move(values));
}

DenseMatrix InteractionMatrix::to_dense() const {
  DenseMatrix dense = DenseMatrix::Zero(static_cast<Eigen::Index>(n_users_),
                                        static_cast<Eigen::Index>(n_items_));
  for (std::size_t u = 0; u < n_users_; ++u) {
    for (std::size_t k = row_ptr_[u]; k < row_ptr_[u + 1]; ++k) {
      dense(static_cast<Eigen::Index>(u), col_idx_[k]) = values_[k];
    }
  }
  return dense;
}

DegreeVectors degrees(const InteractionMatrix& r) {
  DegreeVectors d;
  d.user_degrees.assign(r.n_users(), 0.0);
  d.item_degrees.assign(r.n_items(), 0.0);
  for (Index u = 0; u < r.n_users(); ++u) {
    const auto items = r.row_items(u);
    const auto vals = r.row_values(u);
    for (std::size_t k = 0; k < items.size(); ++k) {
      d.user_degrees[u] += vals[k];
      d.item_degrees[items[k]] += vals[k];
    }
  }
  return d;
}

double degree_power(double degree, double exponent) {
  if (degree <= 0.0) return 0.0;
  return std::pow(degree, exponent);
}

InteractionMatrix normalize_interactions(const InteractionMatrix& r,
                                         double alpha, double beta) {
  const DegreeVectors d = degrees(r);
  std::vector<double> user_scale(r.n_users());
  std::vector<double> item_scale(r.n_items());
  for (std::size_t u = 0; u < r.n_users(); ++u) {
    user_scale[u] = degree_power(d.user_degrees[u], -alpha);
  }
  for (std::size_t i = 0; i < r.n_items(); ++i) {
    item_scale[i] = degree_power(d.item_degrees[i], -beta);
  }
  std::vector<double> values(r.nnz());
  for (Index u = 0; u < r.n_users(); ++u) {
    const auto items = r.row_items(u);
    const auto vals = r.row_values(u);
    const std::size_t base = r.row_ptr()[u];
    for (std::size_t k = 0; k < items.size(); ++k) {
      // Stored entries imply both degrees are positive.
      values[base + k] = vals[k] * user_scale[u] * item_scale[items[k]];
    }
  }
  return r.with_values(std::move(values));
}

DenseMatrix spmm(const InteractionMatrix& r, const DenseMatrix& x,
                 Transpose transpose) {
  const bool t = transpose == Transpose::kYes;
  const std::size_t inner = t ? r.n_users() : r.n_items();
  const std::size_t outer = t ? r.n_items() : r.n_users();
  if (static_cast<std::size_t>(x.rows()) != inner) {
    throw DimensionError("spmm: operand has " + std::to_string(x.rows()) +
                         " rows, expected " + std::to_string(inner));
  }
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(outer), x.cols());
  const auto n_out = static_cast<std::int64_t>(outer);
#pragma omp parallel for schedule(static)
  for (std::int64_t row = 0; row < n_out; ++row) {
    const auto idx = static_cast<Index>(row);
    const auto cols = t ? r.col_users(idx) : r.row_items(idx);
    const auto vals = t ? r.col_values(idx) : r.row_values(idx);
    auto dst = out.row(row);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      dst.noalias() += vals[k] * x.row(cols[k]);
    }
  }
  return out;
}

void spmv(const InteractionMatrix& r, std::span<const double> x,
          std::span<double> y, Transpose transpose) {
  const bool t = transpose == Transpose::kYes;
  const std::size_t inner = t ? r.n_users() : r.n_items();
  const std::size_t outer = t ? r.n_items() : r.n_users();
  if (x.size() != inner || y.size() != outer) {
    throw DimensionError("spmv: vector lengths do not match the matrix");
  }
  const auto n_out = static_cast<std::int64_t>(outer);
#pragma omp parallel for schedule(static)
  for (std::int64_t row = 0; row < n_out; ++row) {
    const auto idx = static_cast<Index>(row);
    const auto cols = t ? r.col_users(idx) : r.row_items(idx);
    const auto vals = t ? r.col_values(idx) : r.row_values(idx);
    double acc = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) acc += vals[k] * x[cols[k]];
    y[static_cast<std::size_t>(row)] = acc;
  }
}

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_u64(std::uint64_t& h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffU;
    h *= kFnvPrime;
  }
}

}  // namespace

std::uint64_t fingerprint(const InteractionMatrix& r) {
  std::uint64_t h = kFnvOffset;
  fnv_u64(h, r.n_users());
  fnv_u64(h, r.n_items());
  for (std::size_t p : r.row_ptr()) fnv_u64(h, p);
  for (Index c : r.col_idx()) fnv_u64(h, c);
  for (double v : r.values()) fnv_u64(h, std::bit_cast<std::uint64_t>(v));
  return h;
}

void set_num_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace specrec
