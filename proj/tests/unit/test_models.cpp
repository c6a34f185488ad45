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

#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "specrec/error.hpp"
#include "specrec/models.hpp"
#include "test_support.hpp"

using namespace specrec;
using specrec::testing::max_abs_diff;
using specrec::testing::Rng;

namespace {

// Distinct singular values after any (0.3, 0.7) normalisation.
InteractionMatrix toy3() {
  DenseMatrix d(3, 3);
  d << 1, 1, 1,  //
      1, 0, 0,   //
      0, 1, 0;
  return InteractionMatrix::from_dense(d);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("specrec_models_" + name);
}

}  // namespace

TEST_CASE("psge with zero exponents is the rank-f SVD reconstruction") {
  Rng rng(41);
  const auto r = specrec::testing::random_connected_sparse(rng, 30, 20, 0.2);
  const auto m = fit_psge(r, 0.0, 0.0, 5);
  CHECK(max_abs_diff(m.score_matrix(), specrec::testing::dense_rank_f(r.to_dense(), 5)) < 1e-10);
}

TEST_CASE("psge on a toy matrix matches the dense pipeline") {
  const auto r = toy3();
  for (std::size_t f : {1, 2, 3}) {
    const auto m = fit_psge(r, 0.3, 0.7, f);
    const DenseMatrix want = specrec::testing::dense_psge_scores(r.to_dense(), 0.3, 0.7, 0.7, f);
    CHECK(max_abs_diff(m.score_matrix(), want) < 1e-10);
  }
}

TEST_CASE("psge scores equal the dense formula with decoupled beta_tilde") {
  Rng rng(42);
  const auto r = specrec::testing::random_sparse(rng, 40, 25, 0.15);
  auto m = fit_psge(r, 0.4, 0.2, 6, {1e-12, 0, 1});
  m.set_beta_tilde(0.9);
  const DenseMatrix want = specrec::testing::dense_psge_scores(r.to_dense(), 0.4, 0.2, 0.9, 6);
  const DenseMatrix got = m.score_matrix();
  for (Index u = 0; u < r.n_users(); ++u) {
    if (m.is_cold(u)) continue;
    CHECK(max_abs_diff(got.row(u), want.row(u)) < 1e-10);
  }
}

TEST_CASE("beta_tilde = 0 ranks like the bare factor product") {
  Rng rng(43);
  const auto r = specrec::testing::random_connected_sparse(rng, 25, 30, 0.15);
  auto m = fit_psge(r, 0.5, 0.5, 6);
  m.set_beta_tilde(0.0);
  const auto& fac = m.factors();
  Eigen::VectorXd sig = Eigen::Map<const Eigen::VectorXd>(fac.sigma.data(), 6);
  const DenseMatrix bare = fac.p_tilde * sig.asDiagonal() * fac.q_tilde.transpose();
  const DenseMatrix got = m.score_matrix();
  for (Eigen::Index u = 0; u < got.rows(); ++u)
    CHECK(specrec::testing::argsort_desc(got.row(u).data(), 30) ==
          specrec::testing::argsort_desc(bare.row(u).data(), 30));
}

TEST_CASE("rescaling sigma or dropping the user factor keeps every ranking") {
  Rng rng(44);
  const auto r = specrec::testing::random_connected_sparse(rng, 30, 25, 0.2);
  const auto m = fit_psge(r, 0.7, 0.4, 5);
  auto fac = m.factors();
  for (double& s : fac.sigma) s *= 3.7;
  const PsgeModel scaled(fac, 0.7, 0.4, m.degrees(), m.stamp());
  const PsgeModel no_user(m.factors(), 0.0, 0.4, m.degrees(), m.stamp());
  // alpha = 0 drops d_u^alpha but keeps the same factors and item weights.
  const PsgeModel& base = m;
  for (Index u = 0; u < 30; ++u) {
    const auto a = base.predict_scores(u);
    CHECK(specrec::testing::argsort_desc(a.data(), 25) ==
          specrec::testing::argsort_desc(scaled.predict_scores(u).data(), 25));
    CHECK(specrec::testing::argsort_desc(a.data(), 25) ==
          specrec::testing::argsort_desc(no_user.predict_scores(u).data(), 25));
  }
}

TEST_CASE("cold items score zero and cold users raise") {
  const auto r = InteractionMatrix::from_triplets(
      4, 4, {{0, 0, 1}, {0, 1, 1}, {1, 1, 1}, {2, 0, 1}, {2, 1, 1}});
  auto m = fit_psge(r, 0.5, 0.5, 2);
  for (double bt : {0.0, 0.5, 1.0}) {
    m.set_beta_tilde(bt);
    const auto s = m.predict_scores(0);
    CHECK(s[2] == 0.0);
    CHECK(s[3] == 0.0);
  }
  CHECK(m.is_cold(3));
  CHECK_THROWS_AS(m.predict_scores(3), ColdUserError);
  CHECK_THROWS_AS(m.predict_scores(4), std::out_of_range);
}

TEST_CASE("candidate subsets") {
  const auto m = fit_psge(toy3(), 0.5, 0.5, 2);
  const auto all = m.predict_scores(1);
  const std::vector<Index> cand = {2, 0};
  const auto sub = m.predict_scores(1, cand);
  CHECK(sub == std::vector<double>{all[2], all[0]});
}

TEST_CASE("property: scores are finite for all warm users") {
  Rng rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = specrec::testing::random_sparse(rng, rng.between(5, 60), rng.between(5, 60),
                                                   rng.uniform(0.03, 0.3));
    if (r.nnz() == 0) continue;
    const std::size_t f = rng.between(1, std::min(r.n_users(), r.n_items()));
    const auto m = fit_psge(r, rng.uniform(), rng.uniform(), f);
    const DenseMatrix s = m.score_matrix();
    CHECK(s.allFinite());
  }
}

TEST_CASE("sgmc alias and the similarity-form scorer") {
  Rng rng(46);
  const auto r = specrec::testing::random_connected_sparse(rng, 40, 30, 0.15);
  const auto sg = fit_sgmc(r, 8);
  CHECK(sg.alpha() == 0.5);
  CHECK(sg.beta() == 0.5);
  CHECK(sg.beta_tilde() == 0.5);
  const DenseMatrix alt = specrec::testing::sgmc_form_scores(r.to_dense(), sg.factors().q_tilde);
  CHECK(max_abs_diff(sg.score_matrix(), alt) < 1e-10);
}

TEST_CASE("pure svd with orthogonal rows reproduces R at full rank") {
  const auto r = InteractionMatrix::from_triplets(3, 4, {{0, 0, 1}, {0, 1, 1}, {1, 2, 1}, {2, 3, 1}});
  const auto m = fit_pure_svd(r, 3);
  CHECK(max_abs_diff(m.score_matrix(), r.to_dense()) < 1e-12);
}

TEST_CASE("pure svd matches the dense R Q Q^T") {
  Rng rng(47);
  const auto r = specrec::testing::random_connected_sparse(rng, 35, 20, 0.2);
  const auto m = fit_pure_svd(r, 6);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(r.to_dense()), Eigen::ComputeThinV);
  const Eigen::MatrixXd q = svd.matrixV().leftCols(6);
  const DenseMatrix want = r.to_dense() * q * q.transpose();
  CHECK(max_abs_diff(m.score_matrix(), want) < 1e-10);
}

TEST_CASE("pure svd rank-1 projector beats random projectors") {
  DenseMatrix d(3, 3);
  d << 1, 1, 0,  //
      1, 0, 0,   //
      0, 1, 0;
  const auto r = InteractionMatrix::from_dense(d);
  const auto m = fit_pure_svd(r, 1);
  const double best = (d - m.score_matrix()).norm();
  Rng rng(48);
  for (int k = 0; k < 2000; ++k) {
    const DenseMatrix q = specrec::testing::random_orthonormal(rng, 3, 1);
    CHECK(best <= (d - d * q * q.transpose()).norm() + 1e-12);
  }
}

TEST_CASE("pure svd coincides with psge(0,0)") {
  Rng rng(49);
  const auto r = specrec::testing::random_connected_sparse(rng, 20, 15, 0.25);
  const auto a = fit_pure_svd(r, 4).score_matrix();
  const auto b = fit_psge(r, 0, 0, 4).score_matrix();
  // R Q = P S for the leading right singular vectors, so R Q Q^T = P S Q^T.
  CHECK(max_abs_diff(a, b) < 1e-10);
}

TEST_CASE("ease on two items by hand") {
  // Users: {0,1}, {0}, {1}, {0,1}. G = [[3,2],[2,3]].
  const auto r = InteractionMatrix::from_triplets(
      4, 2, {{0, 0, 1}, {0, 1, 1}, {1, 0, 1}, {2, 1, 1}, {3, 0, 1}, {3, 1, 1}});
  const double lambda = 1.0;
  // P = inv([[4,2],[2,4]]) = [[4,-2],[-2,4]] / 12; B01 = -P01/P11 = 0.5.
  const auto m = fit_ease(r, lambda);
  CHECK(m.b()(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m.b()(1, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m.b()(0, 0) == 0.0);
  CHECK(m.b()(1, 1) == 0.0);
  CHECK(m.predict_scores(1) == std::vector<double>{0.0, 0.5});
}

TEST_CASE("ease limits and guards") {
  Rng rng(50);
  const auto r = specrec::testing::random_connected_sparse(rng, 30, 20, 0.2);
  const auto m = fit_ease(r, 1e12);
  CHECK(m.b().cwiseAbs().maxCoeff() < 1e-9);
  const auto n = fit_ease(r, 10.0);
  for (Eigen::Index i = 0; i < 20; ++i) CHECK(n.b()(i, i) == 0.0);
  CHECK_THROWS(fit_ease(r, 0.0));
  const auto huge = InteractionMatrix::from_triplets(1, kEaseMaxItems + 1, {{0, 0, 1}});
  CHECK_THROWS_AS(fit_ease(huge, 1.0), GuardError);
}

TEST_CASE("trace of the stacked adjacency eigenvectors is the sigma sum") {
  Rng rng(51);
  const auto r = normalize_interactions(
      specrec::testing::random_connected_sparse(rng, 25, 18, 0.2), 0.5, 0.5);
  const auto fac = truncated_svd(r, 5).factors;
  const EigResult eig = adjacency_eigs_from_svd(fac);
  double sum = 0;
  for (double s : fac.sigma) sum += s;
  CHECK(quadratic_form_trace(r, eig.vectors) == doctest::Approx(sum).epsilon(1e-12));
  CHECK(quadratic_form_trace(r, DenseMatrix::Zero(43, 3)) == 0.0);
}

TEST_CASE("sparse trace equals the edge sum and the dense trace") {
  Rng rng(52);
  const auto r = specrec::testing::random_sparse(rng, 15, 12, 0.3, false);
  const DenseMatrix x = specrec::testing::random_dense(rng, 27, 4);
  const std::vector<double> w = {1.5, 0.2, 3.0, 1.0};
  double brute = 0;
  for (Index u = 0; u < 15; ++u)
    for (Index i = 0; i < 12; ++i) {
      const double v = r.to_dense()(u, i);
      for (int j = 0; j < 4; ++j) brute += 2 * v * w[j] * x(u, j) * x(15 + i, j);
    }
  CHECK(quadratic_form_trace(r, x, w) == doctest::Approx(brute).epsilon(1e-12));
  DenseMatrix a = DenseMatrix::Zero(27, 27);
  a.topRightCorner(15, 12) = r.to_dense();
  a.bottomLeftCorner(12, 15) = r.to_dense().transpose();
  CHECK(quadratic_form_trace(a, x, w) == doctest::Approx(brute).epsilon(1e-12));
  CHECK_THROWS_AS(quadratic_form_trace(r, DenseMatrix::Zero(26, 2)), DimensionError);
}

TEST_CASE("rayleigh-ritz on a diagonal matrix") {
  DenseMatrix a = DenseMatrix::Zero(3, 3);
  a.diagonal() << 3, 1, 0;
  const auto rr = rayleigh_ritz_optimum(a, 2);
  CHECK(rr.value == doctest::Approx(4));
  CHECK(std::abs(rr.vectors(0, 0)) == doctest::Approx(1));
  CHECK(std::abs(rr.vectors(1, 1)) == doctest::Approx(1));
  DenseMatrix b = DenseMatrix::Zero(2, 2);
  b.diagonal() << 3, 1;
  const std::vector<double> w = {2, 1};
  CHECK(rayleigh_ritz_optimum(b, 2, w).value == doctest::Approx(7));
  // Unordered weights pair largest with largest.
  const std::vector<double> w2 = {1, 2};
  const auto rr2 = rayleigh_ritz_optimum(b, 2, w2);
  CHECK(rr2.value == doctest::Approx(7));
  CHECK(quadratic_form_trace(b, rr2.vectors, w2) == doctest::Approx(7));
  const std::vector<double> neg = {1, -1};
  CHECK_THROWS(rayleigh_ritz_optimum(b, 2, neg));
}

TEST_CASE("property: no random orthonormal X beats the rayleigh-ritz optimum") {
  Rng rng(53);
  const DenseMatrix a = specrec::testing::random_symmetric(rng, 20);
  const auto rr = rayleigh_ritz_optimum(a, 4);
  CHECK(quadratic_form_trace(a, rr.vectors) == doctest::Approx(rr.value).epsilon(1e-12));
  for (int k = 0; k < 1000; ++k)
    CHECK(quadratic_form_trace(a, specrec::testing::random_orthonormal(rng, 20, 4)) <= rr.value);
}

TEST_CASE("bipartite rayleigh-ritz uses the singular values") {
  Rng rng(54);
  const auto r = specrec::testing::random_connected_sparse(rng, 20, 16, 0.2);
  const auto rr = rayleigh_ritz_optimum(r, 3);
  const auto fac = truncated_svd(r, 3).factors;
  CHECK(rr.value == doctest::Approx(fac.sigma[0] + fac.sigma[1] + fac.sigma[2]).epsilon(1e-10));
  CHECK(quadratic_form_trace(r, rr.vectors) == doctest::Approx(rr.value).epsilon(1e-10));
}

TEST_CASE("models survive a save/load round trip") {
  Rng rng(55);
  const auto r = specrec::testing::random_connected_sparse(rng, 30, 20, 0.2);
  auto psge = fit_psge(r, 0.3, 0.6, 5);
  psge.set_beta_tilde(0.8);
  const auto pure = fit_pure_svd(r, 4);
  const auto ease = fit_ease(r, 5.0);
  const std::vector<const Recommender*> models = {&psge, &pure, &ease};
  for (const Recommender* m : models) {
    const auto path = temp_file(m->tag() + ".bin");
    save_model(*m, path);
    const auto back = load_model(path);
    CHECK(back->tag() == m->tag());
    CHECK(back->hyperparameters() == m->hyperparameters());
    CHECK(back->stamp() == m->stamp());
    CHECK(back->score_matrix() == m->score_matrix());
    std::filesystem::remove(path);
  }
  CHECK(psge.stamp().matches(r));
  CHECK_THROWS(load_model(temp_file("missing.bin")));
}

TEST_CASE("changing beta_tilde leaves the factors alone") {
  auto m = fit_psge(toy3(), 0.5, 0.5, 2);
  const auto q = m.factors().q_tilde;
  m.set_beta_tilde(0.1);
  CHECK(m.factors().q_tilde == q);
  CHECK(m.beta() == 0.5);
  CHECK(m.hyperparameters()[2].second == 0.1);
}
