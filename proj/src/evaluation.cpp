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

#include "subdpp/evaluation.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "subdpp/errors.hpp"
#include "subdpp/likelihood.hpp"
#include "subdpp/rng.hpp"

namespace subdpp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

MatrixXd gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd z(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) z(i, j) = normal(rng);
  }
  return z;
}

// log det L_X, or -inf when L_X is singular.
double observation_term(const LowRankL& L, const ObservationSet& X) {
  try {
    return l_submatrix(L, X).log_det();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kSingularObservation) throw;
    return kNegInf;
  }
}

}  // namespace

SubspaceDistance subspace_distance(const MatrixXd& U, const MatrixXd& U_star) {
  require(U.rows() == U_star.rows(), ErrorKind::kDimensionMismatch,
          "U and U* must have the same number of rows");
  const double denom = U_star.norm();
  require(denom > 0.0, ErrorKind::kDegenerateParameter, "U* must be nonzero");
  SubspaceDistance out;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(U);
  qr.setThreshold(1e-10);
  const Index rank = qr.rank();
  out.rank_deficient = rank < U.cols();
  MatrixXd residual = U_star;
  if (rank > 0) {
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(U.rows(), rank);
    residual -= q * (q.transpose() * U_star);
  }
  out.value = residual.norm() / denom;
  return out;
}

ChanceLevel chance_level(Index V, Index r, int trials, std::uint64_t seed,
                         const MatrixXd* U_star) {
  require(r >= 0 && r <= V && V >= 1, ErrorKind::kInvalidArgument, "need 0 <= r <= V");
  require(trials >= 0, ErrorKind::kInvalidArgument, "trials must be nonnegative");
  ChanceLevel out;
  out.analytic = 1.0 - static_cast<double>(r) / static_cast<double>(V);
  out.trials = trials;
  if (trials == 0) return out;
  Rng rng = make_rng(seed, 0xC0u);
  const MatrixXd target = U_star != nullptr ? *U_star : gaussian(V, 1, rng);
  double s1 = 0.0, s2 = 0.0, q1 = 0.0, q2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double d = r == 0 ? 1.0 : subspace_distance(gaussian(V, r, rng), target).value;
    s1 += d;
    s2 += d * d;
    q1 += d * d;
    q2 += d * d * d * d;
  }
  const double n = trials;
  out.mean = s1 / n;
  out.mean_squared = q1 / n;
  if (trials > 1) {
    out.mean_stderr = std::sqrt(std::max(0.0, (s2 / n - out.mean * out.mean) / (n - 1.0)));
    out.mean_squared_stderr = std::sqrt(
        std::max(0.0, (q2 / n - out.mean_squared * out.mean_squared) / (n - 1.0)));
  }
  return out;
}

double mean_log_likelihood(const LowRankL& L, const Corpus& corpus) {
  require(!corpus.empty(), ErrorKind::kInvalidArgument, "corpus must be nonempty");
  const double norm = log_det_l_plus_i(L);
  double total = 0.0;
  for (const auto& X : corpus) total += observation_term(L, X) - norm;
  return total / static_cast<double>(corpus.size());
}

double mean_log_likelihood(const LowRankL& L, const std::vector<VectorXd>& thetas,
                           const Corpus& corpus) {
  require(!corpus.empty(), ErrorKind::kInvalidArgument, "corpus must be nonempty");
  require(thetas.size() == corpus.size(), ErrorKind::kDimensionMismatch,
          "need one theta per observation");
  const NormalizerBasis basis(L.ground, L.alpha, L.gamma, L.U);
  LowRankL Li = L;
  double total = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Li.theta = thetas[i];
    total += observation_term(Li, corpus[i]) - basis.log_det(thetas[i]);
  }
  return total / static_cast<double>(corpus.size());
}

double mean_log_likelihood(const FourierSpectrum& spec, const Corpus& corpus) {
  require(!corpus.empty(), ErrorKind::kInvalidArgument, "corpus must be nonempty");
  double total = 0.0;
  for (const auto& X : corpus) {
    try {
      total += spectrum_log_likelihood(spec, X);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kSingularObservation) throw;
      return kNegInf;
    }
  }
  return total / static_cast<double>(corpus.size());
}

double loglik_gap(const LowRankL& fitted, const LowRankL& truth, const Corpus& test) {
  return mean_log_likelihood(truth, test) - mean_log_likelihood(fitted, test);
}

DiagonalBaseline best_diagonal_baseline(const Corpus& train, double size) {
  require(!train.empty(), ErrorKind::kInvalidArgument, "corpus must be nonempty");
  require(size > 0.0 && std::isfinite(size), ErrorKind::kInvalidArgument,
          "baseline needs a finite positive size");
  double k = 0.0;
  for (const auto& X : train) k += static_cast<double>(X.size());
  k /= static_cast<double>(train.size());
  DiagonalBaseline out;
  out.size = size;
  if (k == 0.0) {
    out.boundary = true;
    return out;
  }
  require(k < size, ErrorKind::kDegenerateParameter, "mean set size must be below N");
  out.closed_form = k / (size - k);
  // Mean log-likelihood in t = log eta; concave, so golden section converges.
  const auto f = [&](double t) { return k * t - size * std::log1p(std::exp(t)); };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = std::log(out.closed_form) - 20.0;
  double hi = std::log(out.closed_form) + 20.0;
  double a = hi - phi * (hi - lo);
  double b = lo + phi * (hi - lo);
  double fa = f(a), fb = f(b);
  while (hi - lo > 1e-12 * std::max(1.0, std::abs(lo))) {
    if (fa > fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - phi * (hi - lo);
      fa = f(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + phi * (hi - lo);
      fb = f(b);
    }
  }
  out.eta = std::exp(0.5 * (lo + hi));
  return out;
}

DiagonalBaseline best_diagonal_baseline(const Corpus& train, const GroundSet& ground) {
  double size = 0.0;
  switch (ground.kind()) {
    case GroundKind::kItems:
    case GroundKind::kHypercube:
      size = std::exp(ground.log_cardinality());
      break;
    case GroundKind::kContinuousFourier:
      size = static_cast<double>(ground.dimension());
      break;
    case GroundKind::kIntegers:
      fail(ErrorKind::kInvalidArgument, "no diagonal baseline on the integer lattice");
  }
  return best_diagonal_baseline(train, size);
}

LowRankL diagonal_model(const GroundSet& ground, double eta) {
  require(eta >= 0.0 && std::isfinite(eta), ErrorKind::kInvalidArgument,
          "eta must be finite and nonnegative");
  LowRankL L;
  // Item-space identity where items are enumerable, feature-space otherwise.
  const bool items = ground.kind() == GroundKind::kItems || ground.kind() == GroundKind::kHypercube;
  L.alpha = items ? eta : 0.0;
  L.gamma = items ? 0.0 : eta;
  L.U = MatrixXd::Zero(ground.dimension(), 1);
  L.theta = VectorXd::Zero(1);
  L.ground = ground;
  return L;
}

}  // namespace subdpp
