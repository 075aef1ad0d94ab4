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

#ifndef SUBDPP_EVALUATION_HPP_
#define SUBDPP_EVALUATION_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "subdpp/fourier.hpp"
#include "subdpp/ground_set.hpp"
#include "subdpp/kernel_family.hpp"

namespace subdpp {

struct MetricRecord {
  std::string metric;
  double value = 0.0;
  Index r = 0;
  Index V = 0;
  std::uint64_t seed = 0;
  std::string dataset;
  int iteration = 0;
};

struct SubspaceDistance {
  double value = 0.0;
  bool rank_deficient = false;  // U lacked full column rank; a pseudo-inverse was used
};

/// ||P_U U* - U*||_F / ||U*||_F, where P_U projects onto col(U).
SubspaceDistance subspace_distance(const MatrixXd& U, const MatrixXd& U_star);

struct ChanceLevel {
  double analytic = 0.0;  // 1 - r/V
  double mean = 0.0;      // Monte-Carlo mean of D(Z, U*)
  double mean_stderr = 0.0;
  double mean_squared = 0.0;  // Monte-Carlo mean of D(Z, U*)^2
  double mean_squared_stderr = 0.0;
  int trials = 0;
};

/// Distance of U* from a Gaussian random r-dimensional subspace Z. U*
/// defaults to a single Gaussian column.
ChanceLevel chance_level(Index V, Index r, int trials, std::uint64_t seed,
                         const MatrixXd* U_star = nullptr);

/// Mean of l(X_i) over the corpus; -inf if some L_X is singular.
double mean_log_likelihood(const LowRankL& L, const Corpus& corpus);
/// Same with one theta per observation.
double mean_log_likelihood(const LowRankL& L, const std::vector<VectorXd>& thetas,
                           const Corpus& corpus);
double mean_log_likelihood(const FourierSpectrum& spec, const Corpus& corpus);

/// Mean test log-likelihood of the true model minus that of the fitted one.
double loglik_gap(const LowRankL& fitted, const LowRankL& truth, const Corpus& test);

struct DiagonalBaseline {
  double eta = 0.0;          // golden-section maximizer
  double closed_form = 0.0;  // mean|X| / (N - mean|X|)
  double size = 0.0;         // N used by the baseline
  bool boundary = false;     // all observations empty, so eta -> 0
};

/// eta maximizing sum_i |X_i| log eta - M N log(1 + eta), found by golden
/// section on log eta. N is the item count (Items, hypercube) or the feature
/// dimension (continuous cube, where the baseline is A = eta I).
DiagonalBaseline best_diagonal_baseline(const Corpus& train, double size);
DiagonalBaseline best_diagonal_baseline(const Corpus& train, const GroundSet& ground);

/// The eta I baseline as a factored model: alpha = eta on Items and the
/// hypercube, A = eta I (gamma = eta) on the continuous cube.
LowRankL diagonal_model(const GroundSet& ground, double eta);

}  // namespace subdpp

#endif  // SUBDPP_EVALUATION_HPP_
