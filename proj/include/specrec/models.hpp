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
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specrec/sparse.hpp"
#include "specrec/spectral.hpp"

namespace specrec {

// Identifies the matrix a model was fitted on.
struct TrainingStamp {
  std::size_t nnz = 0;
  std::uint64_t fingerprint = 0;

  static TrainingStamp of(const InteractionMatrix& r);
  bool matches(const InteractionMatrix& r) const;
  friend bool operator==(const TrainingStamp&, const TrainingStamp&) = default;
};

using Hyperparameters = std::vector<std::pair<std::string, double>>;

class Recommender {
 public:
  virtual ~Recommender() = default;

  virtual std::string tag() const = 0;
  virtual Hyperparameters hyperparameters() const = 0;
  virtual std::size_t n_users() const = 0;
  virtual std::size_t n_items() const = 0;
  // True when the user had no training interactions.
  virtual bool is_cold(Index user) const = 0;

  // Writes one score per item into out (length n_items). Throws
  // ColdUserError for cold users. Safe to call concurrently.
  virtual void score_user(Index user, std::span<double> out) const = 0;

  std::vector<double> predict_scores(Index user) const;
  std::vector<double> predict_scores(Index user,
                                     std::span<const Index> candidates) const;
  // All users; rows of cold users are zero.
  DenseMatrix score_matrix() const;

  const TrainingStamp& stamp() const { return stamp_; }

 protected:
  TrainingStamp stamp_;
};

// score(u, i) = d_u^alpha * <p_u, sigma .* q_i> * d_i^beta_tilde on the
// factors of D_U^-alpha R D_I^-beta. Items with zero training degree score 0.
class PsgeModel final : public Recommender {
 public:
  PsgeModel(SpectralFactors factors, double alpha, double beta,
            DegreeVectors degrees, TrainingStamp stamp);

  std::string tag() const override { return "psge"; }
  Hyperparameters hyperparameters() const override;
  std::size_t n_users() const override { return factors_.n_users(); }
  std::size_t n_items() const override { return factors_.n_items(); }
  bool is_cold(Index user) const override;
  void score_user(Index user, std::span<double> out) const override;

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double beta_tilde() const { return beta_tilde_; }
  // Prediction-time item exponent; no refit needed.
  void set_beta_tilde(double beta_tilde);

  const SpectralFactors& factors() const { return factors_; }
  const DegreeVectors& degrees() const { return degrees_; }

  // Same model restricted to the leading f factors.
  PsgeModel truncated(std::size_t f) const;

 private:
  SpectralFactors factors_;
  double alpha_;
  double beta_;
  double beta_tilde_;
  DegreeVectors degrees_;
  DenseMatrix q_sigma_;               // q_tilde * diag(sigma)
  std::vector<double> item_weight_;   // d_i^beta_tilde, 0 for cold items
};

// R Q Q^T with Q the leading right singular vectors of the raw matrix.
class PureSvdModel final : public Recommender {
 public:
  PureSvdModel(DenseMatrix rq, DenseMatrix q, std::vector<double> user_degrees,
               TrainingStamp stamp);

  std::string tag() const override { return "puresvd"; }
  Hyperparameters hyperparameters() const override;
  std::size_t n_users() const override { return static_cast<std::size_t>(rq_.rows()); }
  std::size_t n_items() const override { return static_cast<std::size_t>(q_.rows()); }
  bool is_cold(Index user) const override;
  void score_user(Index user, std::span<double> out) const override;

  std::size_t dim() const { return static_cast<std::size_t>(q_.cols()); }
  const DenseMatrix& q() const { return q_; }
  const DenseMatrix& rq() const { return rq_; }
  const std::vector<double>& user_degrees() const { return user_degrees_; }
  PureSvdModel truncated(std::size_t f) const;

 private:
  DenseMatrix rq_;  // U x f
  DenseMatrix q_;   // I x f
  std::vector<double> user_degrees_;
};

// Closed-form item-item model: B = -P / diag(P), diag(B) = 0,
// P = (R^T R + lambda I)^-1; scores r_u B.
class EaseModel final : public Recommender {
 public:
  EaseModel(DenseMatrix b, double lambda_reg, InteractionMatrix train);

  std::string tag() const override { return "ease"; }
  Hyperparameters hyperparameters() const override;
  std::size_t n_users() const override { return train_.n_users(); }
  std::size_t n_items() const override { return train_.n_items(); }
  bool is_cold(Index user) const override;
  void score_user(Index user, std::span<double> out) const override;

  const DenseMatrix& b() const { return b_; }
  double lambda_reg() const { return lambda_reg_; }
  const InteractionMatrix& train() const { return train_; }

 private:
  DenseMatrix b_;
  double lambda_reg_;
  InteractionMatrix train_;
};

inline constexpr std::size_t kEaseMaxItems = 20000;

struct FitInfo {
  ConvergenceReport report;
  double seconds = 0.0;
};

PsgeModel fit_psge(const InteractionMatrix& r_train, double alpha, double beta,
                   std::size_t f, const SolverConfig& config = {},
                   FitInfo* info = nullptr);
// PSGE with alpha = beta = beta_tilde = 0.5.
PsgeModel fit_sgmc(const InteractionMatrix& r_train, std::size_t f,
                   const SolverConfig& config = {}, FitInfo* info = nullptr);
PureSvdModel fit_pure_svd(const InteractionMatrix& r_train, std::size_t f,
                          const SolverConfig& config = {}, FitInfo* info = nullptr);
EaseModel fit_ease(const InteractionMatrix& r_train, double lambda_reg);

// Tr(X^T A X diag(w)) for a dense symmetric A; w defaults to all ones.
double quadratic_form_trace(const DenseMatrix& a, const DenseMatrix& x,
                            std::span<const double> weights = {});

// Same trace for the bipartite adjacency [[0, R], [R^T, 0]] of a (normalised)
// interaction matrix, without assembling it: 2 sum_{(u,i)} r_ui sum_j w_j
// x_uj x_{U+i,j}. X has U + I rows.
double quadratic_form_trace(const InteractionMatrix& r, const DenseMatrix& x,
                            std::span<const double> weights = {});

struct RayleighRitz {
  DenseMatrix vectors;  // n x f
  double value = 0.0;
};

// Orthonormal X maximising Tr(X^T A X diag(w)). Weights must be nonnegative;
// the largest weight is paired with the largest eigenvalue. Value is
// sum_i lambda_i w_(i).
RayleighRitz rayleigh_ritz_optimum(const DenseMatrix& a, std::size_t f,
                                   std::span<const double> weights = {});

// Bipartite form via truncated_svd; the top eigenvalues are the sigma_j.
RayleighRitz rayleigh_ritz_optimum(const InteractionMatrix& r, std::size_t f,
                                   const SolverConfig& config = {},
                                   std::span<const double> weights = {});

// Model file: "SPECMODL" | u8 version | u8 type (1 psge, 2 puresvd, 3 ease)
// | u64 n | n x (string key, f64 value) | u64 train nnz | u64 train
// fingerprint | type payload. The psge payload embeds a factors block.
void save_model(const Recommender& model, const std::filesystem::path& path);
std::unique_ptr<Recommender> load_model(const std::filesystem::path& path);

}  // namespace specrec
