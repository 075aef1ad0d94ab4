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

#include "subdpp/likelihood.hpp"

#include <cmath>
#include <utility>

#include "subdpp/errors.hpp"
#include "subdpp/linalg.hpp"

namespace subdpp {

MatrixXd LSubmatrix::scaled_core() const {
  MatrixXd m = core;
  if (alpha != 0.0) m.diagonal() += alpha * (-log_p.array()).exp().matrix();
  return m;
}

MatrixXd LSubmatrix::dense() const {
  const VectorXd root_p = (0.5 * log_p.array()).exp().matrix();
  MatrixXd m = root_p.asDiagonal() * core * root_p.asDiagonal();
  m.diagonal().array() += alpha;
  return m;
}

double LSubmatrix::log_det() const {
  return log_p.sum() + log_det_spd(scaled_core(), ErrorKind::kSingularObservation);
}

LSubmatrix l_submatrix(const LowRankL& L, const ObservationSet& X) {
  L.validate();
  const MatrixXd features = embed(L.ground, X);
  const MatrixXd projected = features * L.U;
  LSubmatrix sub;
  sub.core = L.gamma * (features * features.transpose());
  sub.core.noalias() += projected * L.theta.asDiagonal() * projected.transpose();
  sub.log_p = log_base_measure(L.ground, X);
  sub.alpha = L.alpha;
  return sub;
}

double log_likelihood(const LowRankL& L, const ObservationSet& X) {
  return l_submatrix(L, X).log_det() - log_det_l_plus_i(L);
}

double smoothed_group_norm(const MatrixXd& U, double smoothing) {
  double total = 0.0;
  for (Index k = 0; k < U.cols(); ++k) {
    total += std::sqrt(U.col(k).squaredNorm() + smoothing * smoothing) - smoothing;
  }
  return total;
}

namespace {

// lambda * g(U)^2 and, optionally, its gradient.
double u_penalty(const MatrixXd& U, const PenaltyConfig& penalty, MatrixXd* grad) {
  const double eps = penalty.smoothing;
  double g = 0.0;
  VectorXd norms(U.cols());
  for (Index k = 0; k < U.cols(); ++k) {
    norms(k) = std::sqrt(U.col(k).squaredNorm() + eps * eps);
    g += norms(k) - eps;
  }
  if (grad != nullptr) {
    *grad = MatrixXd::Zero(U.rows(), U.cols());
    if (penalty.weight != 0.0) {
      for (Index k = 0; k < U.cols(); ++k) {
        if (norms(k) > 0.0) grad->col(k) = (2.0 * penalty.weight * g / norms(k)) * U.col(k);
      }
    }
  }
  return penalty.weight * g * g;
}

}  // namespace

CorpusObjective::CorpusObjective(GroundSet ground, double alpha, double gamma,
                                 const Corpus& corpus, PenaltyConfig penalty, ThetaMode mode)
    : ground_(std::move(ground)),
      alpha_(alpha),
      gamma_(gamma),
      penalty_(penalty),
      mode_(mode) {
  require(!corpus.empty(), ErrorKind::kInvalidArgument, "corpus must be nonempty");
  require(std::isfinite(alpha) && alpha >= 0.0, ErrorKind::kInvalidArgument,
          "alpha must be nonnegative");
  require(std::isfinite(gamma) && gamma >= 0.0, ErrorKind::kInvalidArgument,
          "gamma must be nonnegative");
  require(alpha == 0.0 || ground_.is_finite(), ErrorKind::kInvalidArgument,
          "alpha must be 0 on an infinite ground set");
  require(penalty.weight >= 0.0, ErrorKind::kInvalidArgument, "penalty weight must be >= 0");
  require(penalty.smoothing > 0.0, ErrorKind::kInvalidArgument,
          "penalty smoothing must be positive");
  obs_.reserve(corpus.size());
  for (const ObservationSet& x : corpus) {
    Observation o;
    o.features = embed(ground_, x);
    o.gram = o.features * o.features.transpose();
    const VectorXd log_p = log_base_measure(ground_, x);
    o.log_p_sum = log_p.sum();
    if (alpha_ > 0.0) {
      o.inv_p = (-log_p.array()).exp().matrix();
      require(o.inv_p.allFinite(), ErrorKind::kDegenerateParameter,
              "alpha / p(x) overflows; use alpha = 0 for this ground set");
    }
    obs_.push_back(std::move(o));
  }
}

void CorpusObjective::check(const FactorParams& params) const {
  require(params.U.rows() == dimension(), ErrorKind::kDimensionMismatch, "U must have V rows");
  require(static_cast<Index>(params.thetas.size()) == num_thetas(),
          ErrorKind::kDimensionMismatch, "wrong number of theta vectors for the mode");
  for (const VectorXd& t : params.thetas) {
    require(t.size() == params.U.cols(), ErrorKind::kDimensionMismatch,
            "theta length must equal the rank r");
    require((t.array() >= 0.0).all(), ErrorKind::kInvalidArgument, "theta must be nonnegative");
  }
}

double CorpusObjective::observation_log_det(const Observation& obs, const MatrixXd& projected,
                                            const VectorXd& theta, VectorXd* grad_theta,
                                            MatrixXd* solved) const {
  const Index n = obs.features.rows();
  if (n == 0) {
    if (grad_theta != nullptr) *grad_theta = VectorXd::Zero(theta.size());
    if (solved != nullptr) *solved = MatrixXd::Zero(0, theta.size());
    return 0.0;
  }
  MatrixXd m = gamma_ * obs.gram;
  m.noalias() += projected * theta.asDiagonal() * projected.transpose();
  if (alpha_ > 0.0) m.diagonal() += alpha_ * obs.inv_p;
  Eigen::LLT<MatrixXd> llt(m);
  require(llt.info() == Eigen::Success, ErrorKind::kSingularObservation,
          "L_X has a non-positive pivot");
  const double value = obs.log_p_sum + 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  require(std::isfinite(value), ErrorKind::kSingularObservation, "log det L_X is not finite");
  if (grad_theta != nullptr || solved != nullptr) {
    MatrixXd z = llt.solve(projected);
    if (grad_theta != nullptr) {
      *grad_theta = projected.cwiseProduct(z).colwise().sum().transpose();
    }
    if (solved != nullptr) *solved = std::move(z);
  }
  return value;
}

double CorpusObjective::value(const FactorParams& params) const {
  return value_and_gradient(params, nullptr);
}

double CorpusObjective::value_and_gradient(const FactorParams& params, FactorParams* grad) const {
  check(params);
  const MatrixXd& U = params.U;
  const Index r = U.cols();
  const Index count = num_observations();
  const double w = 1.0 / static_cast<double>(count);
  const bool shared = mode_ == ThetaMode::kShared;

  MatrixXd grad_penalty;
  double total = u_penalty(U, penalty_, grad != nullptr ? &grad_penalty : nullptr);
  if (grad != nullptr) {
    grad->U = grad_penalty;
    grad->thetas.assign(params.thetas.size(), VectorXd::Zero(r));
  }

  // Data terms, accumulated in index order.
  double data = 0.0;
  VectorXd grad_theta;
  MatrixXd solved;
  for (Index i = 0; i < count; ++i) {
    const Observation& obs = obs_[static_cast<std::size_t>(i)];
    const std::size_t t = shared ? 0 : static_cast<std::size_t>(i);
    const VectorXd& theta = params.thetas[t];
    const MatrixXd projected = obs.features * U;
    data += observation_log_det(obs, projected, theta,
                                grad != nullptr ? &grad_theta : nullptr,
                                grad != nullptr ? &solved : nullptr);
    if (grad != nullptr && obs.features.rows() > 0) {
      grad->U.noalias() -= (2.0 * w) * obs.features.transpose() * (solved * theta.asDiagonal());
      grad->thetas[t] -= w * grad_theta;
    }
  }
  total -= w * data;

  // Normalizers log det(L + I).
  const NormalizerBasis basis(ground_, alpha_, gamma_, U);
  MatrixXd coeff;
  VectorXd grad_norm;
  if (shared) {
    total += basis.log_det_with_gradient(params.thetas[0], grad != nullptr ? &coeff : nullptr,
                                         grad != nullptr ? &grad_norm : nullptr);
    if (grad != nullptr) {
      grad->U.noalias() += 2.0 * basis.y() * coeff;
      grad->thetas[0] += grad_norm;
    }
  } else {
    MatrixXd coeff_sum = MatrixXd::Zero(r, r);
    for (Index i = 0; i < count; ++i) {
      const std::size_t t = static_cast<std::size_t>(i);
      total += w * basis.log_det_with_gradient(params.thetas[t],
                                               grad != nullptr ? &coeff : nullptr,
                                               grad != nullptr ? &grad_norm : nullptr);
      if (grad != nullptr) {
        coeff_sum += w * coeff;
        grad->thetas[t] += w * grad_norm;
      }
    }
    if (grad != nullptr) grad->U.noalias() += 2.0 * basis.y() * coeff_sum;
  }

  // l1 penalty on theta (theta >= 0, so ||theta||_1 = sum theta).
  const double theta_scale = shared ? 1.0 : w;
  for (std::size_t t = 0; t < params.thetas.size(); ++t) {
    total += penalty_.weight * theta_scale * params.thetas[t].sum();
    if (grad != nullptr) grad->thetas[t].array() += penalty_.weight * theta_scale;
  }
  return total;
}

double CorpusObjective::batch_value_and_gradient_u(const FactorParams& params,
                                                   const std::vector<Index>& batch,
                                                   MatrixXd* grad_u) const {
  check(params);
  require(!batch.empty(), ErrorKind::kInvalidArgument, "batch must be nonempty");
  const MatrixXd& U = params.U;
  const double w = 1.0 / static_cast<double>(batch.size());
  const bool shared = mode_ == ThetaMode::kShared;
  double total = u_penalty(U, penalty_, grad_u);
  const NormalizerBasis basis(ground_, alpha_, gamma_, U);
  MatrixXd coeff_sum = MatrixXd::Zero(U.cols(), U.cols());
  MatrixXd coeff;
  MatrixXd solved;
  for (Index i : batch) {
    require(i >= 0 && i < num_observations(), ErrorKind::kOutOfDomain,
            "batch index out of range");
    const Observation& obs = obs_[static_cast<std::size_t>(i)];
    const VectorXd& theta = params.thetas[shared ? 0 : static_cast<std::size_t>(i)];
    const double ld = observation_log_det(obs, obs.features * U, theta, nullptr,
                                          grad_u != nullptr ? &solved : nullptr);
    const double norm =
        basis.log_det_with_gradient(theta, grad_u != nullptr ? &coeff : nullptr, nullptr);
    total -= w * (ld - norm);
    if (grad_u != nullptr) {
      if (obs.features.rows() > 0) {
        grad_u->noalias() -= (2.0 * w) * obs.features.transpose() * (solved * theta.asDiagonal());
      }
      coeff_sum += w * coeff;
    }
  }
  if (grad_u != nullptr) grad_u->noalias() += 2.0 * basis.y() * coeff_sum;
  return total;
}

double CorpusObjective::observation_log_likelihood(const MatrixXd& U, const VectorXd& theta,
                                                   Index i) const {
  require(i >= 0 && i < num_observations(), ErrorKind::kOutOfDomain,
          "observation index out of range");
  const Observation& obs = obs_[static_cast<std::size_t>(i)];
  const double ld = observation_log_det(obs, obs.features * U, theta, nullptr, nullptr);
  return ld - NormalizerBasis(ground_, alpha_, gamma_, U).log_det(theta);
}

CorpusObjective::FixedU::FixedU(const CorpusObjective& owner, const MatrixXd& U)
    : owner_(&owner), normalizer_(owner.ground_, owner.alpha_, owner.gamma_, U) {
  require(U.rows() == owner.dimension(), ErrorKind::kDimensionMismatch, "U must have V rows");
  projected_.reserve(owner.obs_.size());
  for (const Observation& obs : owner.obs_) projected_.push_back(obs.features * U);
  u_penalty_ = u_penalty(U, owner.penalty_, nullptr);
}

CorpusObjective::FixedU CorpusObjective::fix_u(const MatrixXd& U) const {
  return FixedU(*this, U);
}

double CorpusObjective::FixedU::shared_value(const VectorXd& theta, VectorXd* grad) const {
  const CorpusObjective& o = *owner_;
  require(o.mode_ == ThetaMode::kShared, ErrorKind::kInvalidArgument,
          "shared_value needs the shared-theta mode");
  const double w = 1.0 / static_cast<double>(o.num_observations());
  double data = 0.0;
  VectorXd g_obs;
  VectorXd g_data = VectorXd::Zero(theta.size());
  for (std::size_t i = 0; i < o.obs_.size(); ++i) {
    data += o.observation_log_det(o.obs_[i], projected_[i], theta,
                                  grad != nullptr ? &g_obs : nullptr, nullptr);
    if (grad != nullptr) g_data += g_obs;
  }
  VectorXd g_norm;
  const double norm = normalizer_.log_det_with_gradient(theta, nullptr,
                                                        grad != nullptr ? &g_norm : nullptr);
  if (grad != nullptr) {
    *grad = -w * g_data + g_norm;
    grad->array() += o.penalty_.weight;
  }
  return -w * data + norm + o.penalty_.weight * theta.sum() + u_penalty_;
}

double CorpusObjective::FixedU::block_value(Index i, const VectorXd& theta, VectorXd* grad) const {
  const CorpusObjective& o = *owner_;
  require(i >= 0 && i < o.num_observations(), ErrorKind::kOutOfDomain,
          "observation index out of range");
  const double w = 1.0 / static_cast<double>(o.num_observations());
  const std::size_t k = static_cast<std::size_t>(i);
  VectorXd g_obs;
  VectorXd g_norm;
  const double data = o.observation_log_det(o.obs_[k], projected_[k], theta,
                                            grad != nullptr ? &g_obs : nullptr, nullptr);
  const double norm = normalizer_.log_det_with_gradient(theta, nullptr,
                                                        grad != nullptr ? &g_norm : nullptr);
  if (grad != nullptr) {
    *grad = w * (g_norm - g_obs);
    grad->array() += w * o.penalty_.weight;
  }
  return w * (norm - data) + w * o.penalty_.weight * theta.sum();
}

double corpus_objective(const CorpusObjective& objective, const FactorParams& params) {
  return objective.value(params);
}

FactorParams grad_objective(const CorpusObjective& objective, const FactorParams& params) {
  FactorParams grad;
  objective.value_and_gradient(params, &grad);
  return grad;
}

double spectrum_log_likelihood(const FourierSpectrum& spec, const ObservationSet& X) {
  require(spec.a.size() == fourier_dimension(spec.m, spec.d), ErrorKind::kDimensionMismatch,
          "spectrum length differs from (2d+1)^m");
  require((spec.a.array() >= 0.0).all(), ErrorKind::kInvalidArgument,
          "spectrum must be nonnegative");
  const GroundSet ground = GroundSet::continuous_fourier(spec.m, spec.d);
  const MatrixXd features = embed(ground, X);
  const MatrixXd m = features * spec.a.asDiagonal() * features.transpose();
  return log_det_spd(m, ErrorKind::kSingularObservation) - spec.a.array().log1p().sum();
}

SpectrumObjective::SpectrumObjective(int m, int d, const Corpus& corpus, PenaltyConfig penalty)
    : m_(m), d_(d), dimension_(fourier_dimension(m, d)), penalty_(penalty) {
  require(!corpus.empty(), ErrorKind::kInvalidArgument, "corpus must be nonempty");
  const GroundSet ground = GroundSet::continuous_fourier(m, d);
  features_.reserve(corpus.size());
  for (const ObservationSet& x : corpus) features_.push_back(embed(ground, x));
}

double SpectrumObjective::value_and_gradient(const VectorXd& a, VectorXd* grad) const {
  require(a.size() == dimension_, ErrorKind::kDimensionMismatch,
          "spectrum length differs from (2d+1)^m");
  require((a.array() >= 0.0).all(), ErrorKind::kInvalidArgument, "spectrum must be nonnegative");
  const double w = 1.0 / static_cast<double>(features_.size());
  double data = 0.0;
  VectorXd g_data = VectorXd::Zero(dimension_);
  for (const MatrixXd& f : features_) {
    if (f.rows() == 0) continue;
    const MatrixXd m = f * a.asDiagonal() * f.transpose();
    Eigen::LLT<MatrixXd> llt(m);
    require(llt.info() == Eigen::Success, ErrorKind::kSingularObservation,
            "L_X has a non-positive pivot");
    data += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    if (grad != nullptr) g_data += f.cwiseProduct(llt.solve(f)).colwise().sum().transpose();
  }
  require(std::isfinite(data), ErrorKind::kSingularObservation, "log det L_X is not finite");
  if (grad != nullptr) {
    *grad = -w * g_data;
    grad->array() += (1.0 + a.array()).inverse() + penalty_.weight;
  }
  return -w * data + a.array().log1p().sum() + penalty_.weight * a.sum();
}

LowRankL spectrum_as_low_rank(const FourierSpectrum& spec) {
  LowRankL L;
  L.ground = GroundSet::continuous_fourier(spec.m, spec.d);
  L.alpha = 0.0;
  L.gamma = 0.0;
  L.U = MatrixXd::Identity(spec.a.size(), spec.a.size());
  L.theta = spec.a;
  return L;
}

}  // namespace subdpp
