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

#include "specrec/conv_lab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "specrec/error.hpp"

namespace specrec {
namespace {

constexpr std::size_t kDenseLimit = 2000;

void check_rows(const BipartiteGraph& g, const DenseMatrix& x) {
  if (static_cast<std::size_t>(x.rows()) != g.n_nodes())
    throw DimensionError("signal must have one row per graph node");
}

double top_energy(const DenseMatrix& top, const DenseMatrix& x) {
  const double total = x.squaredNorm();
  if (total == 0.0) return 0.0;
  return (top.transpose() * x).squaredNorm() / total;
}

}  // namespace

BipartiteGraph::BipartiteGraph(InteractionMatrix r)
    : r_(std::move(r)), r_norm_(normalize_interactions(r_, 0.5, 0.5)) {}

DenseMatrix BipartiteGraph::apply(const DenseMatrix& x) const {
  const auto nu = static_cast<Eigen::Index>(n_users());
  const auto ni = static_cast<Eigen::Index>(n_items());
  if (static_cast<std::size_t>(x.rows()) != n_nodes())
    throw DimensionError("signal must have one row per graph node");
  DenseMatrix out(x.rows(), x.cols());
  out.topRows(nu) = spmm(r_norm_, x.bottomRows(ni), Transpose::kNo);
  out.bottomRows(ni) = spmm(r_norm_, x.topRows(nu), Transpose::kYes);
  return out;
}

DenseMatrix BipartiteGraph::dense_operator() const {
  if (n_nodes() > kDenseLimit)
    throw GuardError("dense operator limited to " + std::to_string(kDenseLimit) + " nodes");
  const auto nu = static_cast<Eigen::Index>(n_users());
  const auto n = static_cast<Eigen::Index>(n_nodes());
  DenseMatrix s = DenseMatrix::Zero(n, n);
  for (Index u = 0; u < n_users(); ++u) {
    const auto items = r_norm_.row_items(u);
    const auto vals = r_norm_.row_values(u);
    for (std::size_t k = 0; k < items.size(); ++k) {
      s(u, nu + items[k]) = vals[k];
      s(nu + items[k], u) = vals[k];
    }
  }
  return s;
}

LayerWeights LayerWeights::uniform(std::size_t k) {
  return {std::vector<double>(k + 1, 1.0 / static_cast<double>(k + 1))};
}

DenseMatrix propagate(const BipartiteGraph& g, const DenseMatrix& x0,
                      const LayerWeights& weights) {
  check_rows(g, x0);
  if (weights.alphas.empty()) throw std::invalid_argument("propagate: no layer weights");
  DenseMatrix layer = x0;
  DenseMatrix out = weights.alphas[0] * x0;
  for (std::size_t i = 1; i < weights.alphas.size(); ++i) {
    layer = g.apply(layer);
    out += weights.alphas[i] * layer;
  }
  return out;
}

double filter_response(double lambda, std::size_t k) {
  if (!(lambda >= -1.0 && lambda <= 1.0))
    throw std::domain_error("filter_response: lambda must lie in [-1, 1]");
  const double n = static_cast<double>(k + 1);
  if (lambda == 1.0 || k == 0) return 1.0;
  const double gap = 1.0 - lambda;
  if (gap < 1e-6) {
    double sum = 0.0;
    for (std::size_t i = 0; i <= k; ++i) sum = sum * lambda + 1.0;
    return sum / n;
  }
  if (lambda > 0.0) {
    // 1 - lambda^(k+1) without cancellation.
    return -std::expm1(n * std::log1p(-gap)) / (gap * n);
  }
  return (1.0 - std::pow(lambda, n)) / (gap * n);
}

EigResult graph_spectrum(const BipartiteGraph& g) {
  return dense_symmetric_eig(g.dense_operator());
}

DenseMatrix apply_spectral_filter(const EigResult& spectrum, const DenseMatrix& x,
                                  std::size_t k) {
  if (spectrum.vectors.rows() != x.rows())
    throw DimensionError("signal must have one row per graph node");
  DenseMatrix coeffs = spectrum.vectors.transpose() * x;
  for (std::size_t j = 0; j < spectrum.values.size(); ++j) {
    // Rounding can push the extreme eigenvalues a hair past +-1.
    const double lambda = std::clamp(spectrum.values[j], -1.0, 1.0);
    coeffs.row(static_cast<Eigen::Index>(j)) *= filter_response(lambda, k);
  }
  return spectrum.vectors * coeffs;
}

DenseMatrix apply_spectral_filter(const BipartiteGraph& g, const DenseMatrix& x,
                                  std::size_t k) {
  check_rows(g, x);
  return apply_spectral_filter(graph_spectrum(g), x, k);
}

EnergyProfile spectral_energy_profile(const BipartiteGraph& g, const EigResult& spectrum,
                                      const DenseMatrix& x, double top_fraction,
                                      std::size_t k) {
  check_rows(g, x);
  if (!(top_fraction > 0.0 && top_fraction <= 1.0))
    throw std::invalid_argument("top_fraction must lie in (0, 1]");
  const std::size_t n = g.n_nodes();
  EnergyProfile out;
  out.n_top = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(n) - 1e-9)), 1, n);
  const DenseMatrix top = spectrum.vectors.leftCols(static_cast<Eigen::Index>(out.n_top));
  out.before = top_energy(top, x);
  out.after = top_energy(top, propagate(g, x, LayerWeights::uniform(k)));
  return out;
}

EnergyProfile spectral_energy_profile(const BipartiteGraph& g, const DenseMatrix& x,
                                      double top_fraction, std::size_t k) {
  return spectral_energy_profile(g, graph_spectrum(g), x, top_fraction, k);
}

}  // namespace specrec
