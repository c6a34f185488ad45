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

#include "specrec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include <spdlog/spdlog.h>

#include "specrec/error.hpp"

namespace specrec {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kBreakdown = 1e-10;
constexpr std::size_t kDenseSvdLimit = 500;
constexpr std::size_t kDenseEigLimit = 2000;

class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [-1, 1) from the top 53 bits; independent of the standard
  // library's distribution implementations.
  double next() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-52 - 1.0;
  }
  VectorXd vector(std::size_t n) {
    VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = next();
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

// Random unit vector orthogonal to the first m columns of basis.
VectorXd random_orthogonal(const MatrixXd& basis, Eigen::Index m,
                           UniformSource& rng) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    VectorXd z = rng.vector(static_cast<std::size_t>(basis.rows()));
    const double initial = z.norm();
    for (int pass = 0; pass < 2 && m > 0; ++pass) {
      const VectorXd c = basis.leftCols(m).transpose() * z;
      z.noalias() -= basis.leftCols(m) * c;
    }
    const double norm = z.norm();
    if (norm > 1e-6 * initial) return z / norm;
  }
  throw Error("lanczos: could not extend the basis with a random vector");
}

}  // namespace

void apply_sign_convention(DenseMatrix& vectors, DenseMatrix* partner) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (vectors.rows() > 0 && vectors(arg, j) < 0.0) {
      vectors.col(j) *= -1.0;
      if (partner != nullptr) partner->col(j) *= -1.0;
    }
  }
}

SpectralFactors SpectralFactors::leading(std::size_t f) const {
  if (f > dim()) throw std::invalid_argument("leading: f exceeds factor count");
  SpectralFactors out;
  const auto cols = static_cast<Eigen::Index>(f);
  out.p_tilde = p_tilde.leftCols(cols);
  out.q_tilde = q_tilde.leftCols(cols);
  out.sigma.assign(sigma.begin(), sigma.begin() + static_cast<std::ptrdiff_t>(f));
  out.meta = meta;
  return out;
}

LanczosResult lanczos_largest(const SymmetricOperator& op, std::size_t n,
                              std::size_t f, const SolverConfig& config) {
  if (f == 0 || f > n) {
    throw std::invalid_argument("lanczos: need 1 <= f <= n (f=" +
                                std::to_string(f) + ", n=" + std::to_string(n) +
                                ")");
  }
  if (!(config.tol > 0.0)) throw std::invalid_argument("lanczos: tol must be > 0");

  const std::size_t budget = std::max(
      config.max_iter == 0 ? 10 * f + 100 : config.max_iter, std::min(n, f + 1));
  const auto dim = static_cast<Eigen::Index>(n);
  const auto nev = static_cast<Eigen::Index>(f);
  const auto capacity = static_cast<Eigen::Index>(std::min(n, 2 * f + 64));
  const auto keep = std::min<Eigen::Index>(capacity - 1, nev + (capacity - nev) / 2);
  const auto stride = static_cast<Eigen::Index>(std::max<std::size_t>(10, f));
  const auto probe_len = static_cast<Eigen::Index>(std::max<std::size_t>(10, f / 2));

  UniformSource rng(config.seed);
  MatrixXd basis(dim, capacity);
  MatrixXd image(dim, capacity);  // operator applied to each basis column
  MatrixXd proj = MatrixXd::Zero(capacity, capacity);
  VectorXd w(dim);

  LanczosResult result;
  ConvergenceReport& report = result.report;

  VectorXd theta;
  MatrixXd ritz;       // m x m eigenvectors of proj, descending
  VectorXd residuals;  // explicit, top f
  std::optional<VectorXd> probe_reference;

  auto rayleigh_ritz = [&](Eigen::Index m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(proj.topLeftCorner(m, m));
    theta = eig.eigenvalues().reverse();
    ritz = eig.eigenvectors().rowwise().reverse();
    const auto k = std::min(nev, m);
    const MatrixXd y = basis.leftCols(m) * ritz.leftCols(k);
    MatrixXd r = image.leftCols(m) * ritz.leftCols(k);
    r -= y * theta.head(k).asDiagonal();
    residuals = r.colwise().norm().transpose();
  };

  VectorXd v = rng.vector(n);
  v.normalize();
  Eigen::Index m = 0;
  Eigen::Index next_check = nev;
  double scale = 0.0;
  bool finished = false;

  while (!finished) {
    basis.col(m) = v;
    op(std::span<const double>(v.data(), n),
       std::span<double>(image.col(m).data(), n));
    ++report.iterations;

    VectorXd h = basis.leftCols(m + 1).transpose() * image.col(m);
    w = image.col(m) - basis.leftCols(m + 1) * h;
    const VectorXd h2 = basis.leftCols(m + 1).transpose() * w;
    w.noalias() -= basis.leftCols(m + 1) * h2;
    h += h2;
    proj.col(m).head(m + 1) = h;
    proj.row(m).head(m + 1) = h.transpose();
    ++m;
    const double beta = w.norm();
    scale = std::max(scale, std::sqrt(h.squaredNorm() + beta * beta));

    if (m == dim) {
      rayleigh_ritz(m);
      report.converged = true;
      break;
    }

    const bool at_capacity = m == capacity;
    const bool out_of_budget = report.iterations >= budget;
    bool probe = false;
    bool restarted = false;

    if (m >= nev && (m >= next_check || at_capacity || out_of_budget)) {
      rayleigh_ritz(m);
      const double threshold = config.tol * std::max(theta(0), 0.0);
      const bool converged = residuals.maxCoeff() <= threshold;
      if (converged) {
        if (probe_reference &&
            (theta.head(nev) - *probe_reference).cwiseAbs().maxCoeff() <= threshold) {
          report.converged = true;
          break;
        }
        probe_reference = theta.head(nev);
        probe = true;
        next_check = m + probe_len;
      } else {
        probe_reference.reset();
        next_check = m + stride;
      }
      if (out_of_budget) {
        report.converged = converged;
        break;
      }
      if (at_capacity) {
        // Thick restart: compress onto the leading Ritz vectors.
        const MatrixXd kept = basis.leftCols(m) * ritz.leftCols(keep);
        const MatrixXd kept_image = image.leftCols(m) * ritz.leftCols(keep);
        basis.leftCols(keep) = kept;
        image.leftCols(keep) = kept_image;
        proj.setZero();
        proj.topLeftCorner(keep, keep) = theta.head(keep).asDiagonal();
        ++report.restarts;
        restarted = true;

        if (!probe) {
          // Continue from the residual of the leading unconverged pair; in
          // the pure Krylov case every residual is parallel to w.
          Eigen::Index j = 0;
          for (; j < nev; ++j) {
            if (residuals(j) > threshold) break;
          }
          if (j == nev) j = 0;
          VectorXd r = kept_image.col(j) - theta(j) * kept.col(j);
          for (int pass = 0; pass < 2; ++pass) {
            const VectorXd c = basis.leftCols(keep).transpose() * r;
            r.noalias() -= basis.leftCols(keep) * c;
          }
          const double rn = r.norm();
          v = rn > kBreakdown * scale ? VectorXd(r / rn)
                                      : random_orthogonal(basis, keep, rng);
        }
        m = keep;
        next_check = std::max(next_check - (capacity - keep), m + 1);
      }
    } else if (out_of_budget) {
      rayleigh_ritz(m);
      break;
    }

    if (probe) {
      v = random_orthogonal(basis, m, rng);
    } else if (!restarted) {
      v = beta > kBreakdown * scale ? VectorXd(w / beta)
                                    : random_orthogonal(basis, m, rng);
    }
  }

  const auto k = std::min(nev, m);
  result.values.assign(theta.data(), theta.data() + k);
  result.vectors = basis.leftCols(m) * ritz.leftCols(k);
  const double top = std::max(theta(0), std::numeric_limits<double>::min());
  report.max_residual = residuals.head(k).maxCoeff() / top;
  if (!report.converged) {
    spdlog::warn("lanczos: not converged after {} operator applications "
                 "(relative residual {:.3e}, tol {:.1e})",
                 report.iterations, report.max_residual, config.tol);
  }
  return result;
}

TruncatedSvd truncated_svd(const InteractionMatrix& r, std::size_t f,
                           const SolverConfig& config) {
  const std::size_t n_users = r.n_users();
  const std::size_t n_items = r.n_items();
  if (f == 0 || f > std::min(n_users, n_items)) {
    throw std::invalid_argument("truncated_svd: need 1 <= f <= min(U, I)");
  }
  const bool items_side = n_items <= n_users;
  const std::size_t n = items_side ? n_items : n_users;
  const std::size_t other = items_side ? n_users : n_items;
  const Transpose first = items_side ? Transpose::kNo : Transpose::kYes;
  const Transpose second = items_side ? Transpose::kYes : Transpose::kNo;

  std::vector<double> scratch(other);
  const SymmetricOperator gram = [&](std::span<const double> x, std::span<double> y) {
    spmv(r, x, scratch, first);
    spmv(r, scratch, y, second);
  };
  LanczosResult lanczos = lanczos_largest(gram, n, f, config);

  // Rayleigh-Ritz SVD of r restricted to the Lanczos subspace: B = r Y
  // (or r^T Y), B = Q_b U_s S V_s^T.
  const DenseMatrix y = lanczos.vectors;
  const DenseMatrix b = spmm(r, y, first);
  const auto cols = static_cast<Eigen::Index>(f);
  Eigen::HouseholderQR<MatrixXd> qr{MatrixXd(b)};
  const MatrixXd q_thin = qr.householderQ() * MatrixXd::Identity(
                                                  static_cast<Eigen::Index>(other), cols);
  const MatrixXd upper = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  Eigen::BDCSVD<MatrixXd> small(upper, Eigen::ComputeFullU | Eigen::ComputeFullV);

  DenseMatrix solved_side = y * small.matrixV();
  DenseMatrix other_side = q_thin * small.matrixU();
  const VectorXd s = small.singularValues();

  TruncatedSvd out;
  out.factors.sigma.assign(s.data(), s.data() + s.size());
  const double rank_tol = s.size() > 0 ? s(0) * static_cast<double>(std::max(n_users, n_items)) *
                                             std::numeric_limits<double>::epsilon()
                                       : 0.0;
  std::size_t rank = 0;
  for (std::size_t j = 0; j < f; ++j) {
    if (out.factors.sigma[j] > rank_tol) {
      ++rank;
    } else {
      out.factors.sigma[j] = 0.0;
    }
  }

  DenseMatrix& p = items_side ? other_side : solved_side;
  DenseMatrix& q = items_side ? solved_side : other_side;
  if (rank < f) {
    p.rightCols(static_cast<Eigen::Index>(f - rank)).setZero();
    if (!items_side) {
      // Null-space columns of q: complete q's nonzero-sigma columns to an
      // orthonormal set. They lie in null(r) because every direction with a
      // nonzero singular value has been found.
      UniformSource rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
      MatrixXd qc = q;
      for (std::size_t j = rank; j < f; ++j) {
        qc.col(static_cast<Eigen::Index>(j)) =
            random_orthogonal(qc, static_cast<Eigen::Index>(j), rng);
      }
      q = qc;
    }
  }
  apply_sign_convention(q, &p);

  out.factors.p_tilde = std::move(p);
  out.factors.q_tilde = std::move(q);
  out.factors.meta.seed = config.seed;
  out.factors.meta.tol = config.tol;
  out.report = lanczos.report;
  out.report.gram_on_items = items_side;
  out.report.numerical_rank = rank;
  return out;
}

SpectralFactors dense_svd_oracle(const DenseMatrix& m) {
  if (static_cast<std::size_t>(std::min(m.rows(), m.cols())) > kDenseSvdLimit) {
    throw GuardError("dense_svd_oracle: min(rows, cols) exceeds 500");
  }
  const MatrixXd a = m;
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SpectralFactors out;
  out.p_tilde = svd.matrixU();
  out.q_tilde = svd.matrixV();
  const VectorXd s = svd.singularValues();
  out.sigma.assign(s.data(), s.data() + s.size());
  apply_sign_convention(out.q_tilde, &out.p_tilde);
  return out;
}

EigResult adjacency_eigs_from_svd(const SpectralFactors& factors) {
  const auto n_users = factors.p_tilde.rows();
  const auto n_items = factors.q_tilde.rows();
  const auto f = static_cast<Eigen::Index>(factors.dim());
  EigResult out;
  out.vectors = DenseMatrix::Zero(n_users + n_items, f);
  out.values = factors.sigma;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < f; ++j) {
    if (factors.sigma[static_cast<std::size_t>(j)] > 0.0) {
      out.vectors.col(j).head(n_users) = inv_sqrt2 * factors.p_tilde.col(j);
      out.vectors.col(j).tail(n_items) = inv_sqrt2 * factors.q_tilde.col(j);
    } else {
      out.vectors.col(j).tail(n_items) = factors.q_tilde.col(j);
    }
  }
  return out;
}

EigResult dense_symmetric_eig(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("dense_symmetric_eig: matrix not square");
  if (static_cast<std::size_t>(a.rows()) > kDenseEigLimit) {
    throw GuardError("dense_symmetric_eig: dimension exceeds 2000");
  }
  const double asym = a.rows() > 0 ? (a - a.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > 1e-10) {
    throw std::invalid_argument("dense_symmetric_eig: matrix is not symmetric (max |a - a^T| = " +
                                std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig{MatrixXd(a)};
  EigResult out;
  const VectorXd values = eig.eigenvalues().reverse();
  out.values.assign(values.data(), values.data() + values.size());
  out.vectors = eig.eigenvectors().rowwise().reverse();
  apply_sign_convention(out.vectors);
  return out;
}

}  // namespace specrec
