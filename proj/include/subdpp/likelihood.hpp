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

#ifndef SUBDPP_LIKELIHOOD_HPP_
#define SUBDPP_LIKELIHOOD_HPP_

#include <Eigen/Dense>

#include <vector>

#include "subdpp/fourier.hpp"
#include "subdpp/ground_set.hpp"
#include "subdpp/kernel_family.hpp"

namespace subdpp {

struct PenaltyConfig {
  double weight = 0.01;     // lambda
  double smoothing = 1e-8;  // epsilon in sqrt(||u||^2 + eps^2) - eps
};

/// L restricted to an observation, kept in log-scaled form:
/// L_X = Diag(p)^1/2 (core + alpha Diag(1/p)) Diag(p)^1/2.
struct LSubmatrix {
  MatrixXd core;  // phi(x_i)^T A phi(x_j)
  VectorXd log_p;
  double alpha = 0.0;

  /// core + alpha Diag(1/p).
  MatrixXd scaled_core() const;
  /// L_X with the p-factors applied. Underflows for tiny p.
  MatrixXd dense() const;
  /// log det L_X = sum log p + log det(scaled_core); throws
  /// kSingularObservation on a non-positive pivot.
  double log_det() const;
};

LSubmatrix l_submatrix(const LowRankL& L, const ObservationSet& X);

/// log det L_X - log det(L + I).
double log_likelihood(const LowRankL& L, const ObservationSet& X);

enum class ThetaMode { kShared, kPerObservation };

/// (U, theta) with a single theta in shared mode and one per observation
/// otherwise. Gradients use the same layout.
struct FactorParams {
  MatrixXd U;
  std::vector<VectorXd> thetas;
};

/// sum_k (sqrt(||u_k||^2 + eps^2) - eps), zero when U = 0.
double smoothed_group_norm(const MatrixXd& U, double smoothing);

/// F = -(1/M) sum_i l(X_i | L(U, theta_i)) + lambda (sum_i ||theta_i||_1 / M + ||U||_{1,2}^2)
/// with the epsilon-smoothed group norm; in shared mode the theta penalty is
/// ||theta||_1. Per-observation features are computed once at construction.
class CorpusObjective {
 public:
  CorpusObjective(GroundSet ground, double alpha, double gamma, const Corpus& corpus,
                  PenaltyConfig penalty, ThetaMode mode);

  const GroundSet& ground() const { return ground_; }
  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  ThetaMode mode() const { return mode_; }
  const PenaltyConfig& penalty() const { return penalty_; }
  Index num_observations() const { return static_cast<Index>(obs_.size()); }
  Index dimension() const { return ground_.dimension(); }
  Index num_thetas() const { return mode_ == ThetaMode::kShared ? 1 : num_observations(); }

  double value(const FactorParams& params) const;
  double value_and_gradient(const FactorParams& params, FactorParams* grad) const;

  /// Mini-batch value -(1/|D|) sum_{i in D} l(X_i) + lambda ||U||_{1,2}^2 and
  /// its gradient with respect to U only.
  double batch_value_and_gradient_u(const FactorParams& params, const std::vector<Index>& batch,
                                    MatrixXd* grad_u) const;

  /// l(X_i | L(U, theta)).
  double observation_log_likelihood(const MatrixXd& U, const VectorXd& theta, Index i) const;

  /// Objective restricted to theta blocks while U stays fixed. Precomputes
  /// phi(X_i) U and the normalizer basis once.
  class FixedU {
   public:
    /// Shared mode: the full objective F as a function of the shared theta.
    double shared_value(const VectorXd& theta, VectorXd* grad) const;
    /// Per-observation mode: the terms of F that depend on theta_i,
    /// -(1/M) l(X_i) + lambda ||theta_i||_1 / M.
    double block_value(Index i, const VectorXd& theta, VectorXd* grad) const;

   private:
    friend class CorpusObjective;
    FixedU(const CorpusObjective& owner, const MatrixXd& U);

    const CorpusObjective* owner_;
    NormalizerBasis normalizer_;
    std::vector<MatrixXd> projected_;  // phi(X_i) U
    double u_penalty_ = 0.0;
  };

  FixedU fix_u(const MatrixXd& U) const;

 private:
  struct Observation {
    MatrixXd features;  // |X| x V
    MatrixXd gram;      // features features^T
    VectorXd inv_p;     // 1/p(x_j), only used when alpha > 0
    double log_p_sum = 0.0;
  };

  // log det L_X and optionally its gradients with respect to theta and the
  // projected features P = phi(X) U (returned as M^-1 P).
  double observation_log_det(const Observation& obs, const MatrixXd& projected,
                             const VectorXd& theta, VectorXd* grad_theta,
                             MatrixXd* solved) const;
  void check(const FactorParams& params) const;

  GroundSet ground_;
  double alpha_;
  double gamma_;
  PenaltyConfig penalty_;
  ThetaMode mode_;
  std::vector<Observation> obs_;
};

/// Stand-alone wrappers mirroring the objective for one-off evaluation.
double corpus_objective(const CorpusObjective& objective, const FactorParams& params);
FactorParams grad_objective(const CorpusObjective& objective, const FactorParams& params);

/// Stationary model on [0,1]^m with diagonal A = Diag(a), alpha = 0 and
/// Sigma = I: l(X) = log det(phi(X) Diag(a) phi(X)^T) - sum_k log(1 + a_k).
double spectrum_log_likelihood(const FourierSpectrum& spec, const ObservationSet& X);

/// F(a) = -(1/M) sum_i l(X_i | a) + lambda ||a||_1 for the diagonal model.
class SpectrumObjective {
 public:
  SpectrumObjective(int m, int d, const Corpus& corpus, PenaltyConfig penalty);

  Index dimension() const { return dimension_; }
  double value_and_gradient(const VectorXd& a, VectorXd* grad) const;

 private:
  int m_;
  int d_;
  Index dimension_;
  PenaltyConfig penalty_;
  std::vector<MatrixXd> features_;
};

/// Diagonal spectrum as a factored L (U = I, theta = a, gamma = 0). Only
/// sensible for small V.
LowRankL spectrum_as_low_rank(const FourierSpectrum& spec);

}  // namespace subdpp

#endif  // SUBDPP_LIKELIHOOD_HPP_
