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
#include <vector>

#include "specrec/sparse.hpp"
#include "specrec/spectral.hpp"

namespace specrec {

// User-item graph with propagation matrix S = D^-1/2 A D^-1/2, where
// A = [[0, R], [R^T, 0]]. Nodes 0..U-1 are users, U..U+I-1 items. S is
// applied through the normalised interaction matrix and never assembled
// except by dense_operator().
class BipartiteGraph {
 public:
  explicit BipartiteGraph(InteractionMatrix r);

  std::size_t n_users() const { return r_.n_users(); }
  std::size_t n_items() const { return r_.n_items(); }
  std::size_t n_nodes() const { return r_.n_users() + r_.n_items(); }

  const InteractionMatrix& interactions() const { return r_; }
  const InteractionMatrix& normalized() const { return r_norm_; }

  // S X for X with n_nodes() rows.
  DenseMatrix apply(const DenseMatrix& x) const;

  // Dense S; n_nodes() <= 2000.
  DenseMatrix dense_operator() const;

 private:
  InteractionMatrix r_;
  InteractionMatrix r_norm_;
};

struct LayerWeights {
  std::vector<double> alphas;  // alpha_0 .. alpha_k

  // alpha_i = 1 / (k + 1).
  static LayerWeights uniform(std::size_t k);
  std::size_t k() const { return alphas.empty() ? 0 : alphas.size() - 1; }
};

// sum_i alpha_i S^i X0 by repeated application of S.
DenseMatrix propagate(const BipartiteGraph& g, const DenseMatrix& x0,
                      const LayerWeights& weights);

// Gain of uniform k-layer propagation at eigenvalue lambda:
// (1 - lambda^(k+1)) / ((k + 1)(1 - lambda)), and 1 at lambda = 1.
// Throws std::domain_error outside [-1, 1].
double filter_response(double lambda, std::size_t k);

// Full eigendecomposition of S (dense; n_nodes() <= 2000).
EigResult graph_spectrum(const BipartiteGraph& g);

// U diag(g(lambda)) U^T x, the Fourier-domain form of uniform propagation.
DenseMatrix apply_spectral_filter(const BipartiteGraph& g, const DenseMatrix& x,
                                  std::size_t k);
DenseMatrix apply_spectral_filter(const EigResult& spectrum, const DenseMatrix& x,
                                  std::size_t k);

struct EnergyProfile {
  double before = 0.0;
  double after = 0.0;
  std::size_t n_top = 0;  // eigenvectors spanning the top subspace
};

// Share of ||x||^2 inside the span of the ceil(top_fraction * n) leading
// eigenvectors of S, before and after uniform k-layer propagation.
EnergyProfile spectral_energy_profile(const BipartiteGraph& g, const DenseMatrix& x,
                                      double top_fraction, std::size_t k);
EnergyProfile spectral_energy_profile(const BipartiteGraph& g, const EigResult& spectrum,
                                      const DenseMatrix& x, double top_fraction,
                                      std::size_t k);

}  // namespace specrec
