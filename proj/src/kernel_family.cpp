// Copyright 2026 The subdpp Authors.
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

#include "subdpp/kernel_family.hpp"

#include <cmath>
#include <limits>

#include "subdpp/errors.hpp"
#include "subdpp/linalg.hpp"

namespace subdpp {

MatrixXd LowRankL::dense_a() const {
  MatrixXd A = U * theta.asDiagonal() * U.transpose();
  A.diagonal().array() += gamma;
  return A;
}

void LowRankL::validate() const {
  require(U.rows() == ground.dimension(), ErrorKind::kDimensionMismatch,
          "U must have V rows for the ground set's embedding dimension");
  require(theta.size() == U.cols(), ErrorKind::kDimensionMismatch,
          "theta length must equal the rank r");
  require(std::isfinite(alpha) && alpha >= 0.0, ErrorKind::kInvalidArgument,
          "alpha must be finite and nonnegative");
  require(std::isfinite(gamma) && gamma >= 0.0, ErrorKind::kInvalidArgument,
          "gamma must be finite and nonnegative");
  require(theta.allFinite() && (theta.array() >= 0.0).all(), ErrorKind::kInvalidArgument,
          "theta must be finite and nonnegative");
  require(U.allFinite(), ErrorKind::kInvalidArgument, "U must be finite");
  require(alpha == 0.0 || ground.is_finite(), ErrorKind::kInvalidArgument,
          "alpha must be 0 on an infinite ground set");
}

namespace {

// N log(alpha + 1); zero whenever alpha is zero, even for infinite N.
double item_term(const GroundSet& ground, double alpha) {
  if (alpha == 0.0) return 0.0;
  const double value = std::exp(ground.log_cardinality()) * std::log1p(alpha);
  require(std::isfinite(value), ErrorKind::kDegenerateParameter,
          "N log(alpha + 1) overflows; use alpha = 0 on this ground set");
  return value;
}

bool has_invertible_a(const LowRankL& L) {
  return L.gamma > 0.0 && (L.theta.array() > 0.0).all();
}

double log_det_woodbury_chain(const LowRankL& L, const SecondMoment& sigma) {
  require(has_invertible_a(L), ErrorKind::kDegenerateParameter,
          "the A^-1 reduction needs gamma > 0 and theta > 0");
  require((sigma.nu.array() > 0.0).all(), ErrorKind::kDegenerateParameter,
          "the A^-1 reduction needs nu > 0");
  const double rho = 1.0 / (1.0 + L.alpha);
  const double gamma = L.gamma;
  const Index V = L.dimension();
  const ArrayXd nu = sigma.nu.array();
  const ArrayXd denom = 1.0 + nu * rho * gamma;
  const MatrixXd& U = L.U;
  const MatrixXd gram = U.transpose() * U;

  // log det A = log det(Diag(1/theta) + U^T U / gamma) + sum log theta + V log gamma.
  MatrixXd inner_a = gram / gamma;
  inner_a.diagonal() += L.theta.cwiseInverse();
  const double log_det_a = log_det_spd(inner_a, ErrorKind::kSingularMatrix) +
                           L.theta.array().log().sum() + V * std::log(gamma);

  // log det(A^-1 + rho Diag(nu)), Woodbury on A^-1 and two r x r reductions.
  const VectorXd shrink = (nu * gamma * rho / denom).matrix();
  MatrixXd reduced = U.transpose() * shrink.asDiagonal() * U;
  reduced.diagonal() += gamma * L.theta.cwiseInverse();
  MatrixXd base = gram;
  base.diagonal() += gamma * L.theta.cwiseInverse();
  const double log_det_nu = log_det_spd(reduced, ErrorKind::kSingularMatrix) -
                            log_det_spd(base, ErrorKind::kSingularMatrix) +
                            (1.0 / gamma + rho * nu).log().sum();

  // Determinant lemma on the rank-one mu mu^T, with the inner inverse from
  // Woodbury on Diag(1/nu) + rho A.
  const ArrayXd mu = sigma.mu.array();
  const VectorXd w = (nu / denom).matrix();
  const VectorXd wm = (w.array() * mu / nu).matrix();
  MatrixXd small = U.transpose() * w.asDiagonal() * U;
  small.diagonal() += (rho * L.theta.array()).inverse().matrix();
  const VectorXd b = U.transpose() * wm;
  double q = (mu.square() * rho * gamma / denom).sum();
  if (L.rank() > 0) q += b.dot(solve_spd(small, b, ErrorKind::kSingularMatrix).col(0));
  const double log_det_mu = std::log1p(q);

  return item_term(L.ground, L.alpha) + log_det_a + log_det_nu + log_det_mu;
}

}  // namespace

NormalizerBasis::NormalizerBasis(const GroundSet& ground, double alpha, double gamma,
                                 const MatrixXd& U) {
  require(U.rows() == ground.dimension(), ErrorKind::kDimensionMismatch,
          "U must have V rows");
  require(alpha == 0.0 || ground.is_finite(), ErrorKind::kInvalidArgument,
          "alpha must be 0 on an infinite ground set");
  const SecondMoment sigma = second_moment(ground);
  rho_ = 1.0 / (1.0 + alpha);
  item_term_ = item_term(ground, alpha);

  // G = Diag(g) + s mu mu^T with g = 1 + rho gamma nu, s = rho gamma.
  const double s = rho_ * gamma;
  const VectorXd g = (1.0 + s * sigma.nu.array()).matrix();
  const VectorXd g_inv_mu = sigma.mu.cwiseQuotient(g);
  const double lemma = 1.0 + s * sigma.mu.dot(g_inv_mu);
  log_det_g_ = g.array().log().sum() + std::log(lemma);

  MatrixXd g_inv_u = g.cwiseInverse().asDiagonal() * U;
  g_inv_u.noalias() -= (s / lemma) * g_inv_mu * (g_inv_mu.transpose() * U);
  y_ = sigma.apply(g_inv_u);
  c_ = U.transpose() * y_;
  c_ = 0.5 * (c_ + c_.transpose());
}

double NormalizerBasis::log_det(const VectorXd& theta) const {
  require(theta.size() == c_.rows(), ErrorKind::kDimensionMismatch,
          "theta length must equal the rank r");
  const VectorXd root = theta.cwiseMax(0.0).cwiseSqrt();
  MatrixXd k = rho_ * root.asDiagonal() * c_ * root.asDiagonal();
  k.diagonal().array() += 1.0;
  return item_term_ + log_det_g_ + log_det_spd(k, ErrorKind::kSingularMatrix);
}

double NormalizerBasis::log_det_with_gradient(const VectorXd& theta, MatrixXd* coeff_u,
                                              VectorXd* grad_theta) const {
  require(theta.size() == c_.rows(), ErrorKind::kDimensionMismatch,
          "theta length must equal the rank r");
  const Index r = theta.size();
  const VectorXd root = theta.cwiseMax(0.0).cwiseSqrt();
  MatrixXd k = rho_ * root.asDiagonal() * c_ * root.asDiagonal();
  k.diagonal().array() += 1.0;
  Eigen::LLT<MatrixXd> llt(k);
  require(llt.info() == Eigen::Success, ErrorKind::kSingularMatrix,
          "normalizer factorization failed");
  const double log_det_k = 2.0 * llt.matrixLLT().diagonal().array().log().sum();

  MatrixXd t = llt.solve(MatrixXd(root.asDiagonal()));
  t = root.asDiagonal() * t;
  MatrixXd reduction = MatrixXd::Identity(r, r) - rho_ * t * c_;
  if (coeff_u != nullptr) *coeff_u = rho_ * reduction * theta.asDiagonal();
  if (grad_theta != nullptr) *grad_theta = rho_ * (c_ * reduction).diagonal();
  return item_term_ + log_det_g_ + log_det_k;
}

double log_det_l_plus_i(const LowRankL& L, LogDetRoute route) {
  L.validate();
  if (route == LogDetRoute::kAuto) {
    route = has_invertible_a(L) ? LogDetRoute::kWoodburyChain : LogDetRoute::kDeterminantLemma;
  }
  if (route == LogDetRoute::kWoodburyChain) {
    return log_det_woodbury_chain(L, second_moment(L.ground));
  }
  return NormalizerBasis(L.ground, L.alpha, L.gamma, L.U).log_det(L.theta);
}

LowRankK k_from_l(const LowRankL& L) {
  L.validate();
  const SecondMoment sigma = second_moment(L.ground);
  const double rho = 1.0 / (1.0 + L.alpha);
  const MatrixXd A = L.dense_a();
  // H = I + rho A Sigma; B = rho^2 H^-1 A.
  MatrixXd h = rho * sigma.apply(A).transpose();
  h.diagonal().array() += 1.0;
  Eigen::PartialPivLU<MatrixXd> lu(h);
  require(lu.rcond() > 1e-14, ErrorKind::kSingularMatrix, "I + rho A Sigma is singular");
  MatrixXd B = rho * rho * lu.solve(A);
  B = 0.5 * (B + B.transpose());
  return LowRankK{L.alpha * rho, std::move(B), L.ground};
}

DenseL l_from_k(const LowRankK& K) {
  require(K.B.rows() == K.ground.dimension() && K.B.cols() == K.ground.dimension(),
          ErrorKind::kDimensionMismatch, "B must be V x V");
  require(std::isfinite(K.sigma) && K.sigma >= 0.0 && K.sigma < 1.0,
          ErrorKind::kNotStrictlyValid, "sigma must lie in [0, 1)");
  const SecondMoment sigma = second_moment(K.ground);
  const double tau = 1.0 / (1.0 - K.sigma);

  MatrixXd gap = -tau * sigma.apply_factor_transpose(sigma.apply_factor(K.B).transpose());
  gap = 0.5 * (gap + gap.transpose());
  gap.diagonal().array() += 1.0;
  Eigen::LLT<MatrixXd> check(gap);
  require(check.info() == Eigen::Success, ErrorKind::kNotStrictlyValid,
          "K is not strictly below I on the embedded subspace");

  // A = tau^2 (I - tau B Sigma)^-1 B.
  MatrixXd h = -tau * sigma.apply(K.B).transpose();
  h.diagonal().array() += 1.0;
  Eigen::PartialPivLU<MatrixXd> lu(h);
  require(lu.rcond() > 1e-14, ErrorKind::kNotStrictlyValid, "I - tau B Sigma is singular");
  MatrixXd A = tau * tau * lu.solve(K.B);
  A = 0.5 * (A + A.transpose());
  return DenseL{K.sigma * tau, std::move(A)};
}

ValidityReport check_validity(const LowRankK& K, double tolerance_scale) {
  ValidityReport report;
  report.sigma_in_range = std::isfinite(K.sigma) && K.sigma >= 0.0 && K.sigma <= 1.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig_b(K.B, Eigen::EigenvaluesOnly);
  const VectorXd& values = eig_b.eigenvalues();
  const double norm = values.size() > 0 ? values.cwiseAbs().maxCoeff() : 0.0;
  report.tolerance = tolerance_scale * (1.0 + norm);
  report.min_eigenvalue_b = values.size() > 0 ? values.minCoeff() : 0.0;
  report.b_positive = report.min_eigenvalue_b >= -report.tolerance;

  const SecondMoment sigma = second_moment(K.ground);
  MatrixXd scaled = sigma.apply_factor_transpose(sigma.apply_factor(K.B).transpose());
  scaled = 0.5 * (scaled + scaled.transpose());
  MatrixXd gap = -scaled;
  gap.diagonal().array() += 1.0 - K.sigma;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig_gap(gap, Eigen::EigenvaluesOnly);
  report.min_eigenvalue_gap =
      eig_gap.eigenvalues().size() > 0 ? eig_gap.eigenvalues().minCoeff() : 1.0 - K.sigma;
  report.below_bound = report.min_eigenvalue_gap >= -report.tolerance;
  return report;
}

double expected_cardinality(const LowRankL& L) {
  const LowRankK K = k_from_l(L);
  const double diagonal_part =
      L.alpha == 0.0 ? 0.0 : K.sigma * std::exp(L.ground.log_cardinality());
  return diagonal_part + second_moment(L.ground).trace_product(K.B);
}

MatrixXd k_submatrix(const LowRankK& K, const ObservationSet& X) {
  const MatrixXd features = embed(K.ground, X);
  require(K.B.rows() == features.cols(), ErrorKind::kDimensionMismatch, "B must be V x V");
  const VectorXd root_p = (0.5 * log_base_measure(K.ground, X).array()).exp().matrix();
  MatrixXd sub = root_p.asDiagonal() * (features * K.B * features.transpose()) *
                 root_p.asDiagonal();
  sub.diagonal().array() += K.sigma;
  return sub;
}

double pair_inclusion_prob(const LowRankK& K, const ObservationSet& pair) {
  require(pair.size() == 2, ErrorKind::kInvalidArgument, "pair must hold two distinct elements");
  const MatrixXd k = k_submatrix(K, pair);
  return k(0, 0) * k(1, 1) - k(0, 1) * k(1, 0);
}

}  // namespace subdpp
