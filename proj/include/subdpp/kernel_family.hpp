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

#ifndef SUBDPP_KERNEL_FAMILY_HPP_
#define SUBDPP_KERNEL_FAMILY_HPP_

#include <Eigen/Dense>

#include "subdpp/ground_set.hpp"

namespace subdpp {

/// L-representation L(x,y) = alpha 1{x=y} + p(x)^1/2 phi(x)^T A phi(y) p(y)^1/2
/// with A = gamma I + U Diag(theta) U^T.
struct LowRankL {
  double alpha = 0.0;
  double gamma = 0.0;
  MatrixXd U;      // V x r
  VectorXd theta;  // r
  GroundSet ground = GroundSet::items(1);

  Index dimension() const { return U.rows(); }
  Index rank() const { return U.cols(); }

  /// Dense A (V x V). Only for small V and for the K-side conversions.
  MatrixXd dense_a() const;

  /// Throws on shape mismatches, negative parameters, or alpha > 0 on an
  /// infinite ground set.
  void validate() const;
};

/// K-representation K(x,y) = sigma 1{x=y} + p(x)^1/2 phi(x)^T B phi(y) p(y)^1/2.
struct LowRankK {
  double sigma = 0.0;
  MatrixXd B;  // V x V, symmetric
  GroundSet ground = GroundSet::items(1);
};

/// Dense pair (alpha, A) produced by the K -> L conversion.
struct DenseL {
  double alpha = 0.0;
  MatrixXd A;
};

/// sigma = alpha/(alpha+1), B = rho^2 A (I + rho Sigma A)^-1 with
/// rho = 1/(alpha+1); never inverts A, so singular A is fine.
LowRankK k_from_l(const LowRankL& L);

/// alpha = sigma/(1-sigma), A = tau^2 B (I - tau Sigma B)^-1 with
/// tau = 1/(1-sigma). Throws kNotStrictlyValid unless
/// B < (1-sigma) Sigma^-1 strictly.
DenseL l_from_k(const LowRankK& K);

/// Default scale of the validity tolerance tol = scale * (1 + ||B||).
inline constexpr double kValidityToleranceScale = 1e-10;

struct ValidityReport {
  bool sigma_in_range = false;   // sigma in [0,1]
  bool b_positive = false;       // B >= 0
  bool below_bound = false;      // Sigma^1/2 B Sigma^1/2 <= (1-sigma) I
  double min_eigenvalue_b = 0.0;
  double min_eigenvalue_gap = 0.0;
  double tolerance = 0.0;

  bool valid() const { return sigma_in_range && b_positive && below_bound; }
};

ValidityReport check_validity(const LowRankK& K,
                              double tolerance_scale = kValidityToleranceScale);

enum class LogDetRoute {
  kAuto,              // Woodbury chain when A is invertible, else determinant lemma
  kWoodburyChain,     // A^-1 based reduction; needs gamma > 0 and theta > 0
  kDeterminantLemma,  // det(I + rho Sigma^1/2 A Sigma^1/2) form, A may be singular
};

/// log det(L + I) in O(V r^2).
double log_det_l_plus_i(const LowRankL& L, LogDetRoute route = LogDetRoute::kAuto);

/// E|X| = tr K = sigma N + tr(B Sigma).
double expected_cardinality(const LowRankL& L);

/// K restricted to the elements of X (|X| x |X|), with the p-factors applied.
MatrixXd k_submatrix(const LowRankK& K, const ObservationSet& X);

/// P({x, y} subset of the sample) = K_xx K_yy - K_xy^2 for a two-element X.
double pair_inclusion_prob(const LowRankK& K, const ObservationSet& pair);

/// Pieces of log det(I + rho A Sigma) that depend on U but not on theta.
///
/// With G = I + rho gamma Sigma, S = Sigma G^-1, Y = S U and C = U^T Y:
///   log det(I + rho A Sigma) = log det G + log det(I + rho Th^1/2 C Th^1/2),
/// and the gradient of that log-determinant with respect to A is
/// W = rho Sigma (I + rho A Sigma)^-1, with W U = rho Y (I - rho T C) where
/// T = Th^1/2 (I + rho Th^1/2 C Th^1/2)^-1 Th^1/2. Every theta shares Y and C,
/// so per-observation normalizers cost O(r^3) once U is fixed.
class NormalizerBasis {
 public:
  NormalizerBasis(const GroundSet& ground, double alpha, double gamma, const MatrixXd& U);

  /// log det(L + I), including the N log(alpha + 1) term.
  double log_det(const VectorXd& theta) const;

  /// Same value; fills coeff_u (r x r) with d/dU = 2 Y coeff_u and grad_theta
  /// with d/dtheta.
  double log_det_with_gradient(const VectorXd& theta, MatrixXd* coeff_u,
                               VectorXd* grad_theta) const;

  const MatrixXd& y() const { return y_; }
  const MatrixXd& c() const { return c_; }
  double rho() const { return rho_; }

 private:
  double rho_ = 1.0;
  double item_term_ = 0.0;  // N log(alpha + 1)
  double log_det_g_ = 0.0;
  MatrixXd y_;
  MatrixXd c_;
};

}  // namespace subdpp

#endif  // SUBDPP_KERNEL_FAMILY_HPP_
