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

#include "specrec/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <spdlog/spdlog.h>

#include "specrec/error.hpp"
#include "specrec/serialize.hpp"

namespace specrec {
namespace {

constexpr std::string_view kModelMagic = "SPECMODL";
constexpr std::uint8_t kModelVersion = 1;
enum ModelType : std::uint8_t { kPsge = 1, kPureSvd = 2, kEase = 3 };

void check_user(const Recommender& m, Index user) {
  if (user >= m.n_users()) throw std::out_of_range("user id out of range");
}

void check_out(const Recommender& m, std::span<double> out) {
  if (out.size() != m.n_items()) throw DimensionError("score buffer has wrong length");
}

void write_vector(BinaryWriter& w, const std::vector<double>& v) {
  w.u64(v.size());
  w.f64_block(v.data(), v.size());
}

std::vector<double> read_vector(BinaryReader& r, std::uint64_t limit) {
  const std::uint64_t n = r.u64();
  if (n > limit) throw Error("implausible vector length in model file");
  std::vector<double> v(n);
  r.f64_block(v.data(), n);
  return v;
}

void write_dense(BinaryWriter& w, const DenseMatrix& m) {
  w.u64(static_cast<std::uint64_t>(m.rows()));
  w.u64(static_cast<std::uint64_t>(m.cols()));
  w.f64_block(m.data(), m.size());
}

DenseMatrix read_dense(BinaryReader& r) {
  const std::uint64_t rows = r.u64();
  const std::uint64_t cols = r.u64();
  if (rows > (1ULL << 32) || cols > (1ULL << 32) || rows * cols > (1ULL << 34))
    throw Error("implausible matrix shape in model file");
  DenseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  r.f64_block(m.data(), m.size());
  return m;
}

void check_weights(std::span<const double> weights, std::size_t f) {
  if (!weights.empty() && weights.size() != f)
    throw DimensionError("weights length must equal the number of columns");
}

double weight_at(std::span<const double> weights, std::size_t j) {
  return weights.empty() ? 1.0 : weights[j];
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

TrainingStamp TrainingStamp::of(const InteractionMatrix& r) {
  return {r.nnz(), specrec::fingerprint(r)};
}

bool TrainingStamp::matches(const InteractionMatrix& r) const {
  return nnz == r.nnz() && fingerprint == specrec::fingerprint(r);
}

std::vector<double> Recommender::predict_scores(Index user) const {
  std::vector<double> out(n_items());
  score_user(user, out);
  return out;
}

std::vector<double> Recommender::predict_scores(Index user,
                                                std::span<const Index> candidates) const {
  const std::vector<double> all = predict_scores(user);
  std::vector<double> out;
  out.reserve(candidates.size());
  for (Index i : candidates) out.push_back(all.at(i));
  return out;
}

DenseMatrix Recommender::score_matrix() const {
  DenseMatrix out = DenseMatrix::Zero(static_cast<Eigen::Index>(n_users()),
                                      static_cast<Eigen::Index>(n_items()));
  for (Index u = 0; u < n_users(); ++u) {
    if (is_cold(u)) continue;
    score_user(u, {out.row(u).data(), n_items()});
  }
  return out;
}

// ---------------------------------------------------------------- PSGE

PsgeModel::PsgeModel(SpectralFactors factors, double alpha, double beta,
                     DegreeVectors degrees, TrainingStamp stamp)
    : factors_(std::move(factors)),
      alpha_(alpha),
      beta_(beta),
      beta_tilde_(beta),
      degrees_(std::move(degrees)) {
  if (degrees_.user_degrees.size() != factors_.n_users() ||
      degrees_.item_degrees.size() != factors_.n_items())
    throw DimensionError("degree vectors disagree with factor shapes");
  stamp_ = stamp;
  q_sigma_ = factors_.q_tilde;
  for (std::size_t j = 0; j < factors_.dim(); ++j)
    q_sigma_.col(static_cast<Eigen::Index>(j)) *= factors_.sigma[j];
  set_beta_tilde(beta);
}

Hyperparameters PsgeModel::hyperparameters() const {
  return {{"alpha", alpha_},
          {"beta", beta_},
          {"beta_tilde", beta_tilde_},
          {"f", static_cast<double>(factors_.dim())}};
}

bool PsgeModel::is_cold(Index user) const {
  return degrees_.user_degrees.at(user) <= 0.0;
}

void PsgeModel::set_beta_tilde(double beta_tilde) {
  if (!std::isfinite(beta_tilde)) throw std::invalid_argument("beta_tilde must be finite");
  if (beta_tilde < 0.0 || beta_tilde > 1.0)
    spdlog::warn("beta_tilde={} is outside [0, 1]", beta_tilde);
  beta_tilde_ = beta_tilde;
  item_weight_.resize(factors_.n_items());
  for (std::size_t i = 0; i < item_weight_.size(); ++i)
    item_weight_[i] = degree_power(degrees_.item_degrees[i], beta_tilde);
}

void PsgeModel::score_user(Index user, std::span<double> out) const {
  check_user(*this, user);
  check_out(*this, out);
  if (is_cold(user)) throw ColdUserError(user);
  const double scale = degree_power(degrees_.user_degrees[user], alpha_);
  const auto f = static_cast<Eigen::Index>(factors_.dim());
  const double* p = factors_.p_tilde.row(user).data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (item_weight_[i] == 0.0) {
      out[i] = 0.0;
      continue;
    }
    const double* q = q_sigma_.row(static_cast<Eigen::Index>(i)).data();
    double dot = 0.0;
    for (Eigen::Index j = 0; j < f; ++j) dot += p[j] * q[j];
    out[i] = scale * dot * item_weight_[i];
  }
}

PsgeModel PsgeModel::truncated(std::size_t f) const {
  PsgeModel m(factors_.leading(f), alpha_, beta_, degrees_, stamp_);
  m.set_beta_tilde(beta_tilde_);
  return m;
}

PsgeModel fit_psge(const InteractionMatrix& r_train, double alpha, double beta,
                   std::size_t f, const SolverConfig& config, FitInfo* info) {
  if (r_train.nnz() == 0) throw std::invalid_argument("fit_psge: empty training matrix");
  if (!std::isfinite(alpha) || !std::isfinite(beta))
    throw std::invalid_argument("fit_psge: alpha and beta must be finite");
  if (alpha < 0 || alpha > 1 || beta < 0 || beta > 1)
    spdlog::warn("fit_psge: alpha={} beta={} outside [0, 1]", alpha, beta);
  const auto t0 = std::chrono::steady_clock::now();
  TruncatedSvd svd = truncated_svd(normalize_interactions(r_train, alpha, beta), f, config);
  if (!svd.report.converged)
    spdlog::warn("fit_psge: solver stopped before convergence (residual {:.3e})",
                 svd.report.max_residual);
  svd.factors.meta.alpha = alpha;
  svd.factors.meta.beta = beta;
  if (info) {
    info->report = svd.report;
    info->seconds = seconds_since(t0);
  }
  return PsgeModel(std::move(svd.factors), alpha, beta, degrees(r_train),
                   TrainingStamp::of(r_train));
}

PsgeModel fit_sgmc(const InteractionMatrix& r_train, std::size_t f,
                   const SolverConfig& config, FitInfo* info) {
  return fit_psge(r_train, 0.5, 0.5, f, config, info);
}

// ---------------------------------------------------------------- PureSVD

PureSvdModel::PureSvdModel(DenseMatrix rq, DenseMatrix q,
                           std::vector<double> user_degrees, TrainingStamp stamp)
    : rq_(std::move(rq)), q_(std::move(q)), user_degrees_(std::move(user_degrees)) {
  if (rq_.cols() != q_.cols() ||
      user_degrees_.size() != static_cast<std::size_t>(rq_.rows()))
    throw DimensionError("PureSvdModel: inconsistent shapes");
  stamp_ = stamp;
}

Hyperparameters PureSvdModel::hyperparameters() const {
  return {{"f", static_cast<double>(dim())}};
}

bool PureSvdModel::is_cold(Index user) const { return user_degrees_.at(user) <= 0.0; }

void PureSvdModel::score_user(Index user, std::span<double> out) const {
  check_user(*this, user);
  check_out(*this, out);
  if (is_cold(user)) throw ColdUserError(user);
  const double* p = rq_.row(user).data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* q = q_.row(static_cast<Eigen::Index>(i)).data();
    double dot = 0.0;
    for (Eigen::Index j = 0; j < q_.cols(); ++j) dot += p[j] * q[j];
    out[i] = dot;
  }
}

PureSvdModel PureSvdModel::truncated(std::size_t f) const {
  if (f > dim()) throw std::invalid_argument("truncated: f exceeds model rank");
  const auto k = static_cast<Eigen::Index>(f);
  return PureSvdModel(rq_.leftCols(k), q_.leftCols(k), user_degrees_, stamp_);
}

PureSvdModel fit_pure_svd(const InteractionMatrix& r_train, std::size_t f,
                          const SolverConfig& config, FitInfo* info) {
  if (r_train.nnz() == 0)
    throw std::invalid_argument("fit_pure_svd: empty training matrix");
  const auto t0 = std::chrono::steady_clock::now();
  TruncatedSvd svd = truncated_svd(r_train, f, config);
  if (!svd.report.converged)
    spdlog::warn("fit_pure_svd: solver stopped before convergence (residual {:.3e})",
                 svd.report.max_residual);
  DenseMatrix rq = spmm(r_train, svd.factors.q_tilde);
  if (info) {
    info->report = svd.report;
    info->seconds = seconds_since(t0);
  }
  return PureSvdModel(std::move(rq), std::move(svd.factors.q_tilde),
                      degrees(r_train).user_degrees, TrainingStamp::of(r_train));
}

// ---------------------------------------------------------------- EASE

EaseModel::EaseModel(DenseMatrix b, double lambda_reg, InteractionMatrix train)
    : b_(std::move(b)), lambda_reg_(lambda_reg), train_(std::move(train)) {
  if (static_cast<std::size_t>(b_.rows()) != train_.n_items() || b_.rows() != b_.cols())
    throw DimensionError("EaseModel: B must be I x I");
  stamp_ = TrainingStamp::of(train_);
}

Hyperparameters EaseModel::hyperparameters() const { return {{"lambda", lambda_reg_}}; }

bool EaseModel::is_cold(Index user) const { return train_.row_items(user).empty(); }

void EaseModel::score_user(Index user, std::span<double> out) const {
  check_user(*this, user);
  check_out(*this, out);
  if (is_cold(user)) throw ColdUserError(user);
  std::fill(out.begin(), out.end(), 0.0);
  const auto items = train_.row_items(user);
  const auto vals = train_.row_values(user);
  for (std::size_t k = 0; k < items.size(); ++k) {
    const double* row = b_.row(items[k]).data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += vals[k] * row[i];
  }
}

EaseModel fit_ease(const InteractionMatrix& r_train, double lambda_reg) {
  const std::size_t n = r_train.n_items();
  if (n > kEaseMaxItems)
    throw GuardError("fit_ease: " + std::to_string(n) + " items exceed the dense limit of " +
                     std::to_string(kEaseMaxItems));
  if (!(lambda_reg > 0.0) || !std::isfinite(lambda_reg))
    throw std::invalid_argument("fit_ease: lambda_reg must be positive");
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(ni, ni);
  for (Index u = 0; u < r_train.n_users(); ++u) {
    const auto items = r_train.row_items(u);
    const auto vals = r_train.row_values(u);
    for (std::size_t a = 0; a < items.size(); ++a)
      for (std::size_t b = 0; b < items.size(); ++b)
        g(items[a], items[b]) += vals[a] * vals[b];
  }
  g.diagonal().array() += lambda_reg;
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success)
    throw Error("fit_ease: Gram matrix is not positive definite; raise lambda_reg");
  const Eigen::MatrixXd p = llt.solve(Eigen::MatrixXd::Identity(ni, ni));
  DenseMatrix b(ni, ni);
  for (Eigen::Index i = 0; i < ni; ++i)
    for (Eigen::Index j = 0; j < ni; ++j) b(i, j) = i == j ? 0.0 : -p(i, j) / p(j, j);
  return EaseModel(std::move(b), lambda_reg, r_train);
}

// ---------------------------------------------------------------- traces

double quadratic_form_trace(const DenseMatrix& a, const DenseMatrix& x,
                            std::span<const double> weights) {
  if (a.rows() != a.cols() || a.cols() != x.rows())
    throw DimensionError("quadratic_form_trace: A and X do not conform");
  check_weights(weights, static_cast<std::size_t>(x.cols()));
  const DenseMatrix ax = a * x;
  double total = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    total += weight_at(weights, static_cast<std::size_t>(j)) * x.col(j).dot(ax.col(j));
  return total;
}

double quadratic_form_trace(const InteractionMatrix& r, const DenseMatrix& x,
                            std::span<const double> weights) {
  const std::size_t n_u = r.n_users();
  if (static_cast<std::size_t>(x.rows()) != n_u + r.n_items())
    throw DimensionError("quadratic_form_trace: X must have U + I rows");
  const auto f = static_cast<std::size_t>(x.cols());
  check_weights(weights, f);
  double total = 0.0;
  for (Index u = 0; u < n_u; ++u) {
    const auto items = r.row_items(u);
    const auto vals = r.row_values(u);
    for (std::size_t k = 0; k < items.size(); ++k) {
      const auto xi = static_cast<Eigen::Index>(n_u + items[k]);
      double dot = 0.0;
      for (std::size_t j = 0; j < f; ++j) {
        const auto c = static_cast<Eigen::Index>(j);
        dot += weight_at(weights, j) * x(u, c) * x(xi, c);
      }
      total += vals[k] * dot;
    }
  }
  return 2.0 * total;
}

namespace {

// Columns ordered so that the largest weight meets column 0.
std::vector<std::size_t> weight_order(std::span<const double> weights, std::size_t f) {
  std::vector<std::size_t> order(f);
  std::iota(order.begin(), order.end(), 0);
  if (!weights.empty()) {
    for (double w : weights)
      if (!(w >= 0.0)) throw std::invalid_argument("rayleigh_ritz_optimum: negative weight");
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
  }
  return order;
}

RayleighRitz assemble(const DenseMatrix& top, const std::vector<double>& values,
                      std::span<const double> weights, std::size_t f) {
  check_weights(weights, f);
  const auto order = weight_order(weights, f);
  RayleighRitz out;
  out.vectors.resize(top.rows(), static_cast<Eigen::Index>(f));
  for (std::size_t rank = 0; rank < f; ++rank) {
    const std::size_t col = order[rank];
    out.vectors.col(static_cast<Eigen::Index>(col)) = top.col(static_cast<Eigen::Index>(rank));
    out.value += values[rank] * weight_at(weights, col);
  }
  return out;
}

}  // namespace

RayleighRitz rayleigh_ritz_optimum(const DenseMatrix& a, std::size_t f,
                                   std::span<const double> weights) {
  if (f == 0 || f > static_cast<std::size_t>(a.rows()))
    throw std::invalid_argument("rayleigh_ritz_optimum: need 1 <= f <= n");
  const EigResult eig = dense_symmetric_eig(a);
  return assemble(eig.vectors.leftCols(static_cast<Eigen::Index>(f)), eig.values, weights, f);
}

RayleighRitz rayleigh_ritz_optimum(const InteractionMatrix& r, std::size_t f,
                                   const SolverConfig& config,
                                   std::span<const double> weights) {
  const TruncatedSvd svd = truncated_svd(r, f, config);
  const EigResult eig = adjacency_eigs_from_svd(svd.factors);
  return assemble(eig.vectors, eig.values, weights, f);
}

// ---------------------------------------------------------------- files

void save_model(const Recommender& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  BinaryWriter w(out);
  w.bytes(kModelMagic);
  w.u8(kModelVersion);
  std::uint8_t type;
  if (dynamic_cast<const PsgeModel*>(&model)) {
    type = kPsge;
  } else if (dynamic_cast<const PureSvdModel*>(&model)) {
    type = kPureSvd;
  } else if (dynamic_cast<const EaseModel*>(&model)) {
    type = kEase;
  } else {
    throw Error("save_model: unsupported model type " + model.tag());
  }
  w.u8(type);
  const Hyperparameters hp = model.hyperparameters();
  w.u64(hp.size());
  for (const auto& [key, value] : hp) {
    w.string(key);
    w.f64(value);
  }
  w.u64(model.stamp().nnz);
  w.u64(model.stamp().fingerprint);

  if (const auto* m = dynamic_cast<const PsgeModel*>(&model)) {
    write_vector(w, m->degrees().user_degrees);
    write_vector(w, m->degrees().item_degrees);
    write_factors(w, m->factors());
  } else if (const auto* m = dynamic_cast<const PureSvdModel*>(&model)) {
    write_vector(w, m->user_degrees());
    write_dense(w, m->rq());
    write_dense(w, m->q());
  } else if (const auto* m = dynamic_cast<const EaseModel*>(&model)) {
    const InteractionMatrix& t = m->train();
    write_dense(w, m->b());
    w.u64(t.n_users());
    w.u64(t.n_items());
    w.u64(t.nnz());
    for (std::size_t p : t.row_ptr()) w.u64(p);
    for (Index i : t.col_idx()) w.u64(i);
    w.f64_block(t.values().data(), t.nnz());
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::unique_ptr<Recommender> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  BinaryReader r(in);
  if (r.bytes(kModelMagic.size()) != kModelMagic) throw Error("not a model file");
  if (r.u8() != kModelVersion) throw Error("unsupported model file version");
  const std::uint8_t type = r.u8();
  const std::uint64_t n_hp = r.u64();
  if (n_hp > 64) throw Error("implausible hyperparameter count");
  Hyperparameters hp;
  for (std::uint64_t k = 0; k < n_hp; ++k) {
    std::string key = r.string();
    hp.emplace_back(std::move(key), r.f64());
  }
  auto get = [&hp](const std::string& key) {
    for (const auto& [k, v] : hp)
      if (k == key) return v;
    throw Error("model file lacks hyperparameter '" + key + "'");
  };
  TrainingStamp stamp;
  stamp.nnz = r.u64();
  stamp.fingerprint = r.u64();
  constexpr std::uint64_t kLimit = 1ULL << 32;

  switch (type) {
    case kPsge: {
      DegreeVectors deg;
      deg.user_degrees = read_vector(r, kLimit);
      deg.item_degrees = read_vector(r, kLimit);
      SpectralFactors factors = read_factors(r);
      auto m = std::make_unique<PsgeModel>(std::move(factors), get("alpha"), get("beta"),
                                           std::move(deg), stamp);
      m->set_beta_tilde(get("beta_tilde"));
      return m;
    }
    case kPureSvd: {
      std::vector<double> deg = read_vector(r, kLimit);
      DenseMatrix rq = read_dense(r);
      DenseMatrix q = read_dense(r);
      return std::make_unique<PureSvdModel>(std::move(rq), std::move(q), std::move(deg),
                                            stamp);
    }
    case kEase: {
      DenseMatrix b = read_dense(r);
      const std::uint64_t n_users = r.u64();
      const std::uint64_t n_items = r.u64();
      const std::uint64_t nnz = r.u64();
      if (n_users > kLimit || n_items > kLimit || nnz > (1ULL << 34))
        throw Error("implausible training matrix header");
      std::vector<std::size_t> row_ptr(n_users + 1);
      for (auto& p : row_ptr) p = r.u64();
      std::vector<Index> col_idx(nnz);
      for (auto& i : col_idx) i = static_cast<Index>(r.u64());
      std::vector<double> values(nnz);
      r.f64_block(values.data(), nnz);
      InteractionMatrix train(n_users, n_items, std::move(row_ptr), std::move(col_idx),
                              std::move(values));
      auto m = std::make_unique<EaseModel>(std::move(b), get("lambda"), std::move(train));
      if (!(m->stamp() == stamp)) throw Error("EASE model file is inconsistent");
      return m;
    }
    default:
      throw Error("unknown model type " + std::to_string(type));
  }
}

}  // namespace specrec
