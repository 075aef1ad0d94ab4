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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "subdpp/errors.hpp"
#include "subdpp/evaluation.hpp"
#include "subdpp/optimizer.hpp"
#include "subdpp/sampling.hpp"

using namespace subdpp;

namespace {

Corpus item_corpus(Index V, int M, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> item(0, V - 1);
  Corpus corpus;
  for (int i = 0; i < M; ++i) {
    std::vector<Index> x;
    const int size = 1 + i % 3;
    while (static_cast<int>(x.size()) < size) {
      const Index v = item(rng);
      if (std::find(x.begin(), x.end(), v) == x.end()) x.push_back(v);
    }
    corpus.push_back(ObservationSet::of_items(x));
  }
  return corpus;
}

}  // namespace

TEST_CASE("quadratic converges in a few iterations") {
  const DifferentiableFn f = [](const VectorXd& x, VectorXd* g) {
    if (g != nullptr) *g = 2.0 * x;
    return x.squaredNorm();
  };
  const LbfgsResult r = lbfgs_minimize(f, Eigen::Vector2d(3.0, 4.0));
  CHECK(r.termination == Termination::kGradientTolerance);
  CHECK(r.iterations <= 3);
  CHECK(r.x.norm() < 1e-6);
  CHECK(r.trace.front() == doctest::Approx(25.0));
}

TEST_CASE("Rosenbrock from the classic start") {
  const DifferentiableFn f = [](const VectorXd& x, VectorXd* g) {
    const double a = 1.0 - x(0);
    const double b = x(1) - x(0) * x(0);
    if (g != nullptr) {
      g->resize(2);
      (*g)(0) = -2.0 * a - 400.0 * x(0) * b;
      (*g)(1) = 200.0 * b;
    }
    return a * a + 100.0 * b * b;
  };
  LbfgsOptions options;
  options.max_iterations = 200;
  const LbfgsResult r = lbfgs_minimize(f, Eigen::Vector2d(-1.2, 1.0), options);
  CHECK(r.termination == Termination::kGradientTolerance);
  CHECK(std::abs(r.x(0) - 1.0) < 1e-5);
  CHECK(std::abs(r.x(1) - 1.0) < 1e-5);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
}

TEST_CASE("line search treats numerical failures as infinite") {
  // Barrier: -log(x) + x, undefined for x <= 0. A huge first step lands there.
  const DifferentiableFn f = [](const VectorXd& x, VectorXd* g) {
    if (x(0) <= 0.0) fail(ErrorKind::kSingularMatrix, "outside domain");
    if (g != nullptr) *g = VectorXd::Constant(1, -1.0 / x(0) + 1.0);
    return -std::log(x(0)) + x(0);
  };
  const LbfgsResult r = lbfgs_minimize(f, VectorXd::Constant(1, 1e-3));
  CHECK(std::abs(r.x(0) - 1.0) < 1e-5);
}

TEST_CASE("non-finite start is rejected") {
  const DifferentiableFn f = [](const VectorXd&, VectorXd* g) {
    if (g != nullptr) *g = VectorXd::Zero(1);
    return std::nan("");
  };
  CHECK_THROWS_AS(lbfgs_minimize(f, VectorXd::Zero(1)), Error);
}

TEST_CASE("zero inner iterations leave the start unchanged") {
  const Corpus corpus = item_corpus(8, 20, 1);
  OptimizerConfig config;
  config.inner_iters = 0;
  config.max_outer = 3;
  FitSettings settings;
  settings.rank = 2;
  settings.gamma = 0.1;
  const FactorParams init = initial_params(8, 2, 1, 7);
  const FitReport r = fit(corpus, GroundSet::items(8), settings, config, &init);
  CHECK(r.U == init.U);
  CHECK(r.thetas[0] == init.thetas[0]);
}

TEST_CASE("block coordinate descent is monotone and deterministic") {
  const Corpus corpus = item_corpus(10, 40, 2);
  FitSettings settings;
  settings.rank = 3;
  settings.gamma = 0.05;
  OptimizerConfig config;
  config.max_outer = 4;
  config.inner_iters = 20;
  config.seed = 11;
  const FitReport a = fit(corpus, GroundSet::items(10), settings, config);
  const FitReport b = fit(corpus, GroundSet::items(10), settings, config);
  REQUIRE(a.trace.size() >= 2);
  CHECK(a.trace.front().block == "init");
  for (std::size_t i = 1; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].objective <= a.trace[i - 1].objective + 1e-12 * (1 + std::abs(a.trace[i - 1].objective)));
  }
  CHECK(a.trace.back().objective < a.trace.front().objective);
  CHECK(a.U == b.U);
  CHECK(a.final_objective == b.final_objective);
  const CorpusObjective f(GroundSet::items(10), 0.0, 0.05, corpus, settings.penalty, ThetaMode::kShared);
  CHECK(f.value({a.U, a.thetas}) == doctest::Approx(a.final_objective));
}

TEST_CASE("per-observation mode with one observation reproduces shared mode") {
  const Corpus corpus = item_corpus(6, 1, 3);
  FitSettings settings;
  settings.rank = 2;
  settings.gamma = 0.1;
  OptimizerConfig config;
  config.max_outer = 3;
  config.inner_iters = 15;
  const FitReport shared = fit(corpus, GroundSet::items(6), settings, config);
  settings.mode = ThetaMode::kPerObservation;
  const FitReport per = fit(corpus, GroundSet::items(6), settings, config);
  REQUIRE(shared.trace.size() == per.trace.size());
  for (std::size_t i = 0; i < shared.trace.size(); ++i) {
    CHECK(shared.trace[i].block == per.trace[i].block);
    CHECK(shared.trace[i].objective == doctest::Approx(per.trace[i].objective).epsilon(1e-9));
  }
}

TEST_CASE("per-observation fit assigns one theta per observation") {
  const Corpus corpus = item_corpus(6, 5, 4);
  FitSettings settings;
  settings.rank = 2;
  settings.gamma = 0.1;
  settings.mode = ThetaMode::kPerObservation;
  OptimizerConfig config;
  config.max_outer = 2;
  config.inner_iters = 10;
  const FitReport r = fit(corpus, GroundSet::items(6), settings, config);
  CHECK(r.thetas.size() == 5);
  for (const auto& t : r.thetas) CHECK(t.minCoeff() >= 0.0);
  CHECK(r.model(GroundSet::items(6), 0.0, 0.1, 4).theta == r.thetas[4]);
}

TEST_CASE("initial parameters") {
  const FactorParams p = initial_params(50, 4, 3, 9);
  CHECK(p.U.rows() == 50);
  CHECK(p.U.cols() == 4);
  CHECK(p.thetas.size() == 3);
  CHECK(p.thetas[1].isOnes());
  CHECK(p.U == initial_params(50, 4, 3, 9).U);
  CHECK(p.U != initial_params(50, 4, 3, 10).U);
}

TEST_CASE("configuration validation") {
  OptimizerConfig c;
  c.c1 = 0.95;
  CHECK_THROWS_AS(c.validate(), Error);
  c = OptimizerConfig{};
  c.memory = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = OptimizerConfig{};
  c.inner_iters = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_NOTHROW(OptimizerConfig{}.validate());
}

TEST_CASE("diagonal spectrum fit decreases the objective") {
  Corpus corpus;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    MatrixXd rows(2, 1);
    rows << u(rng), u(rng);
    corpus.push_back(ObservationSet::of_rows(rows));
  }
  OptimizerConfig config;
  config.inner_iters = 50;
  const FitReport r = fit_spectrum(corpus, 1, 2, PenaltyConfig{}, config, VectorXd::Ones(5));
  REQUIRE(r.spectrum.size() == 5);
  CHECK(r.spectrum.minCoeff() > 0.0);
  CHECK(r.trace.back().objective < r.trace.front().objective);
  const SpectrumObjective f(1, 2, corpus, PenaltyConfig{});
  CHECK(f.value_and_gradient(r.spectrum, nullptr) == doctest::Approx(r.final_objective));
}

namespace {

Corpus uniform_pairs(int count, std::uint64_t seed) {
  Corpus corpus;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < count; ++i) {
    MatrixXd rows(2, 1);
    rows << u(rng), u(rng);
    corpus.push_back(ObservationSet::of_rows(rows));
  }
  return corpus;
}

}  // namespace

TEST_CASE("flat spectrum matches the best multiple of the identity") {
  const Corpus corpus = uniform_pairs(12, 3);
  const VectorXd a = flat_spectrum(corpus, 1, 2);
  REQUIRE(a.size() == 5);
  CHECK(a(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(a.maxCoeff() == a.minCoeff());
  CHECK(best_diagonal_baseline(corpus, GroundSet::continuous_fourier(1, 2)).eta ==
        doctest::Approx(a(0)).epsilon(1e-9));
  CHECK_THROWS_AS(flat_spectrum(Corpus{}, 1, 2), Error);
}

TEST_CASE("cross-validated spectrum budget") {
  const Corpus corpus = uniform_pairs(20, 9);
  OptimizerConfig config;
  const std::vector<int> budgets = {0, 3, 30};
  const SpectrumBudget pick =
      select_spectrum_budget(corpus, 1, 2, PenaltyConfig{}, config, budgets, 4);
  REQUIRE(pick.validation.size() == 3);
  CHECK(pick.budgets == budgets);

  // Recompute the budget-3 score fold by fold.
  double expected = 0.0;
  for (int f = 0; f < 4; ++f) {
    Corpus train(corpus.begin(), corpus.begin() + 5 * f);
    train.insert(train.end(), corpus.begin() + 5 * (f + 1), corpus.end());
    const Corpus held(corpus.begin() + 5 * f, corpus.begin() + 5 * (f + 1));
    OptimizerConfig c;
    c.max_outer = 1;
    c.inner_iters = 3;
    const FitReport r = fit_spectrum(train, 1, 2, PenaltyConfig{}, c, flat_spectrum(train, 1, 2));
    expected += mean_log_likelihood(FourierSpectrum{1, 2, r.spectrum}, held) / 4.0;
  }
  CHECK(pick.validation[1] == doctest::Approx(expected).epsilon(1e-10));

  const auto best = std::max_element(pick.validation.begin(), pick.validation.end());
  CHECK(pick.inner_iters == budgets[static_cast<std::size_t>(best - pick.validation.begin())]);

  // Equal budgets tie, and the tie goes to the first (smaller) one.
  const SpectrumBudget tie = select_spectrum_budget(corpus, 1, 2, PenaltyConfig{}, config, {4, 4}, 2);
  CHECK(tie.validation[0] == tie.validation[1]);
  CHECK(tie.inner_iters == 4);

  CHECK_THROWS_AS(select_spectrum_budget(corpus, 1, 2, PenaltyConfig{}, config, {}, 4), Error);
  CHECK_THROWS_AS(select_spectrum_budget(corpus, 1, 2, PenaltyConfig{}, config, {1}, 1), Error);
  CHECK_THROWS_AS(select_spectrum_budget(corpus, 1, 2, PenaltyConfig{}, config, {-1}, 4), Error);
}

TEST_CASE("stochastic gradient descent records one value per epoch") {
  const Corpus corpus = item_corpus(8, 16, 6);
  const CorpusObjective f(GroundSet::items(8), 0.0, 0.1, corpus, PenaltyConfig{}, ThetaMode::kShared);
  const FactorParams init = initial_params(8, 2, 1, 1);
  SgdOptions options;
  options.batch = 4;
  options.epochs = 5;
  options.step_size = [](int) { return 0.05; };
  const FitReport a = sgd_minimize(f, init, options);
  const FitReport b = sgd_minimize(f, init, options);
  CHECK(a.termination == "epoch_limit");
  CHECK(a.trace.size() == 6);
  CHECK(a.U == b.U);
  CHECK(a.trace.back().objective < a.trace.front().objective);
  CHECK(a.thetas[0] == init.thetas[0]);
}

TEST_CASE("batch gradient matches the objective gradient over the full corpus") {
  const Corpus corpus = item_corpus(5, 6, 7);
  const CorpusObjective f(GroundSet::items(5), 0.0, 0.1, corpus, PenaltyConfig{}, ThetaMode::kShared);
  const FactorParams p = initial_params(5, 2, 1, 3);
  FactorParams g;
  f.value_and_gradient(p, &g);
  const MatrixXd b = batch_gradient_u(f, p, {0, 1, 2, 3, 4, 5});
  CHECK((b - g.U).norm() < 1e-10 * (1 + g.U.norm()));
}

TEST_CASE("starting at the generating model stays at or below its objective") {
  Rng rng = make_rng(12);
  const GroundSet g = GroundSet::items(12);
  const LowRankL truth = random_low_rank(g, 3, 1e-3, 0.0, 0.2, 1.0, rng);
  const Corpus corpus = sample_corpus(truth, 200, rng);
  FitSettings settings;
  settings.rank = 3;
  settings.alpha = truth.alpha;
  const FactorParams init{truth.U, {truth.theta}};
  const CorpusObjective f(g, truth.alpha, 0.0, corpus, settings.penalty, ThetaMode::kShared);
  OptimizerConfig config;
  config.max_outer = 1;
  const FitReport r = fit(corpus, g, settings, config, &init);
  CHECK(r.final_objective <= f.value(init) + 1e-6);
}

TEST_CASE("stochastic gradient identities") {
  const Corpus corpus = item_corpus(6, 8, 13);
  const CorpusObjective f(GroundSet::items(6), 0.0, 0.1, corpus, PenaltyConfig{}, ThetaMode::kShared);
  const FactorParams init = initial_params(6, 2, 1, 4);
  SgdOptions options;
  options.epochs = 2;
  options.step_size = [](int) { return 0.0; };
  CHECK(sgd_minimize(f, init, options).U == init.U);

  options.batch = 8;
  options.epochs = 1;
  options.step_size = [](int) { return 1e-4; };
  FactorParams grad;
  f.value_and_gradient(init, &grad);
  const FitReport one = sgd_minimize(f, init, options);
  CHECK((one.U - (init.U - 1e-4 * grad.U)).cwiseAbs().maxCoeff() < 1e-14);

  // Averaging size-one batch gradients recovers the full gradient.
  MatrixXd mean = MatrixXd::Zero(6, 2);
  for (Index i = 0; i < 8; ++i) mean += batch_gradient_u(f, init, {i}) / 8.0;
  CHECK((mean - grad.U).norm() < 1e-10 * (1 + grad.U.norm()));
}
