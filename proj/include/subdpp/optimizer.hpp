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

#ifndef SUBDPP_OPTIMIZER_HPP_
#define SUBDPP_OPTIMIZER_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "subdpp/fourier.hpp"
#include "subdpp/kernel_family.hpp"
#include "subdpp/likelihood.hpp"

namespace subdpp {

/// Value and (optionally) gradient at x. Throwing a numerical subdpp::Error
/// or returning a non-finite value marks x as infeasible.
using DifferentiableFn = std::function<double(const VectorXd& x, VectorXd* grad)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 100;
  double c1 = 1e-4;
  double c2 = 0.9;
  double grad_tol = 1e-6;
  int max_line_search = 30;
};

enum class Termination { kGradientTolerance, kIterationLimit, kLineSearchFailed };

std::string to_string(Termination t);

struct LbfgsResult {
  VectorXd x;
  double value = 0.0;
  VectorXd gradient;
  std::vector<double> trace;  // f(x0) followed by one value per accepted step
  int iterations = 0;
  int evaluations = 0;
  Termination termination = Termination::kIterationLimit;
};

/// Limited-memory BFGS (two-loop recursion) with a strong-Wolfe line search.
/// A failed line search is soft: the best iterate so far is returned with
/// kLineSearchFailed.
LbfgsResult lbfgs_minimize(const DifferentiableFn& f, const VectorXd& x0,
                           const LbfgsOptions& options = {});

struct OptimizerConfig {
  int memory = 10;
  int max_outer = 10;
  int inner_iters = 100;
  double c1 = 1e-4;
  double c2 = 0.9;
  double grad_tol = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
  LbfgsOptions lbfgs() const;
};

struct FitSettings {
  Index rank = 1;
  double alpha = 0.0;
  double gamma = 0.0;
  PenaltyConfig penalty;
  ThetaMode mode = ThetaMode::kShared;
};

struct TraceEntry {
  int round = 0;
  std::string block;  // "init", "U", "theta", "a", "sgd"
  int iteration = 0;
  double objective = 0.0;
};

struct FitReport {
  std::vector<TraceEntry> trace;
  MatrixXd U;
  std::vector<VectorXd> thetas;
  VectorXd spectrum;  // diagonal fits only
  std::vector<double> round_seconds;
  std::string termination;
  double final_objective = 0.0;

  /// Model with theta_i (shared mode: the single theta).
  LowRankL model(const GroundSet& ground, double alpha, double gamma, Index i = 0) const;
};

/// Random (U, theta) start: U ~ N(0, 1/V) entrywise, theta = 1.
FactorParams initial_params(Index V, Index r, Index num_thetas, std::uint64_t seed);

/// Alternating minimization of F: per round, L-BFGS over U with theta fixed,
/// then L-BFGS over theta (shared) or over each theta_i in turn. theta is
/// optimized as exp(eta) so it stays positive without projection.
FitReport fit(const Corpus& corpus, const GroundSet& ground, const FitSettings& settings,
              const OptimizerConfig& config, const FactorParams* init = nullptr);

/// Same schedule on an already-built objective.
FitReport fit(const CorpusObjective& objective, Index rank, const OptimizerConfig& config,
              const FactorParams* init = nullptr);

/// Diagonal stationary model on [0,1]^m fitted in log(a).
FitReport fit_spectrum(const Corpus& corpus, int m, int d, const PenaltyConfig& penalty,
                       const OptimizerConfig& config, const VectorXd& init_a);

struct SpectrumBudget {
  int inner_iters = 0;
  std::vector<int> budgets;
  std::vector<double> validation;  // mean held-out log-likelihood per budget
};

/// K-fold choice of the L-BFGS iteration budget for fit_spectrum. Folds are
/// contiguous blocks; each fold's fit starts from the flat spectrum that best
/// fits its training part. Ties go to the smaller budget. config.max_outer is
/// forced to 1 so a budget is exactly one L-BFGS run.
SpectrumBudget select_spectrum_budget(const Corpus& corpus, int m, int d,
                                      const PenaltyConfig& penalty, const OptimizerConfig& config,
                                      const std::vector<int>& budgets, int folds);

/// Flat spectrum a = k / (V - k), k the mean set size, which maximizes the
/// likelihood among multiples of the identity.
VectorXd flat_spectrum(const Corpus& corpus, int m, int d);

/// Unbiased mini-batch gradient of F with respect to U:
/// -(1/|D|) sum_{i in D} grad_U l(X_i) + lambda grad_U R.
MatrixXd batch_gradient_u(const CorpusObjective& objective, const FactorParams& params,
                          const std::vector<Index>& batch);

struct SgdOptions {
  Index batch = 1;
  int epochs = 1;
  std::function<double(int step)> step_size = [](int) { return 1e-3; };
  std::uint64_t seed = 0;
};

/// Mini-batch SGD on U with theta held fixed. The trace holds the full
/// objective after every epoch.
FitReport sgd_minimize(const CorpusObjective& objective, const FactorParams& init,
                       const SgdOptions& options);

}  // namespace subdpp

#endif  // SUBDPP_OPTIMIZER_HPP_
