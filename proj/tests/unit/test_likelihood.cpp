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
#include "subdpp/fourier.hpp"
#include "subdpp/likelihood.hpp"
#include "support/dense_oracle.hpp"

using namespace subdpp;

namespace {

std::mt19937_64& rng() {
  static std::mt19937_64 engine(2024);
  return engine;
}

MatrixXd gaussian(Index rows, Index cols, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  return MatrixXd::NullaryExpr(rows, cols, [&] { return n(rng()); });
}

VectorXd uniform(Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return VectorXd::NullaryExpr(n, [&] { return u(rng()); });
}

// Random subset of enumeration indices, returned as an observation.
ObservationSet random_observation(const GroundSet& g, const oracle::Enumerated& e, Index max_size) {
  const Index N = e.features.rows();
  std::uniform_int_distribution<Index> size_dist(0, max_size);
  std::vector<Index> idx(static_cast<std::size_t>(N));
  for (Index i = 0; i < N; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng());
  idx.resize(static_cast<std::size_t>(size_dist(rng())));
  if (g.kind() == GroundKind::kItems) return ObservationSet::of_items(idx);
  MatrixXd rows(static_cast<Index>(idx.size()), e.points.cols());
  for (std::size_t j = 0; j < idx.size(); ++j) rows.row(static_cast<Index>(j)) = e.points.row(idx[j]);
  return ObservationSet::of_rows(rows);
}

double relative_error(const MatrixXd& a, const MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

// Central differences of the objective over U and every theta block.
FactorParams numeric_gradient(const CorpusObjective& f, const FactorParams& p, double h) {
  FactorParams g = p;
  for (Index i = 0; i < p.U.size(); ++i) {
    FactorParams a = p, b = p;
    a.U.data()[i] += h;
    b.U.data()[i] -= h;
    g.U.data()[i] = (f.value(a) - f.value(b)) / (2 * h);
  }
  for (std::size_t t = 0; t < p.thetas.size(); ++t) {
    for (Index k = 0; k < p.thetas[t].size(); ++k) {
      FactorParams a = p, b = p;
      a.thetas[t](k) += h;
      b.thetas[t](k) -= h;
      g.thetas[t](k) = (f.value(a) - f.value(b)) / (2 * h);
    }
  }
  return g;
}

}  // namespace

TEST_CASE("two-item worked example") {
  LowRankL L;
  L.ground = GroundSet::items(2);
  L.U = MatrixXd::Identity(2, 2);
  L.theta = Eigen::Vector2d(2.0, 1.0);
  CHECK(log_likelihood(L, ObservationSet::of_items({0})) == doctest::Approx(std::log(1.0 / 3.0)));
  CHECK(log_likelihood(L, ObservationSet::of_items({0, 1})) ==
        doctest::Approx(std::log(2.0) - std::log(6.0)));
  CHECK(log_likelihood(L, ObservationSet::of_items({})) == doctest::Approx(-std::log(6.0)));
}

TEST_CASE("likelihood matches enumeration and normalizes") {
  struct Case {
    GroundSet g;
    double alpha;
    double gamma;
  };
  const std::vector<Case> cases = {
      {GroundSet::items(5), 0.0, 0.5},
      {GroundSet::items(5), 0.1, 0.0},
      {GroundSet::hypercube(uniform(4, 0.2, 0.8)), 0.0, 0.3},
      {GroundSet::hypercube(uniform(4, 0.2, 0.8)), 0.05, 0.3},
  };
  for (const auto& c : cases) {
    LowRankL L;
    L.ground = c.g;
    L.alpha = c.alpha;
    L.gamma = c.gamma;
    L.U = gaussian(c.g.dimension(), 2, 1.0);
    L.theta = uniform(2, 0.5, 2.0);
    const auto e = oracle::enumerate(c.g);
    const MatrixXd dense = oracle::dense_l(L, e);
    for (int t = 0; t < 10; ++t) {
      const ObservationSet X = random_observation(c.g, e, 2);
      const double brute = oracle::log_likelihood(dense, oracle::indices_of(e, X));
      CHECK(std::abs(log_likelihood(L, X) - brute) < 1e-9 * (1 + std::abs(brute)));
    }
    // Sum over all subsets of a small ground set.
    const Index N = e.features.rows();
    if (N <= 16) {
      double total = 0.0;
      for (Index mask = 0; mask < (Index{1} << N); ++mask) {
        std::vector<Index> idx;
        for (Index i = 0; i < N; ++i) {
          if ((mask >> i) & 1) idx.push_back(i);
        }
        ObservationSet X;
        if (c.g.kind() == GroundKind::kItems) {
          X = ObservationSet::of_items(idx);
        } else {
          MatrixXd rows(static_cast<Index>(idx.size()), e.points.cols());
          for (std::size_t j = 0; j < idx.size(); ++j) rows.row(static_cast<Index>(j)) = e.points.row(idx[j]);
          X = ObservationSet::of_rows(rows);
        }
        try {
          total += std::exp(log_likelihood(L, X));
        } catch (const Error& err) {
          CHECK(err.kind() == ErrorKind::kSingularObservation);
        }
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("Fourier density likelihood on the exact grid") {
  const int d = 1;
  const GroundSet g = GroundSet::continuous_fourier(2, d);
  LowRankL L;
  L.ground = g;
  L.gamma = 0.2;
  L.U = gaussian(g.dimension(), 3, 1.0);
  L.theta = uniform(3, 0.5, 2.0);
  const auto e = oracle::enumerate(g);
  const MatrixXd dense = oracle::dense_l(L, e);
  const double logN = std::log(static_cast<double>(e.features.rows()));
  for (int t = 0; t < 10; ++t) {
    const ObservationSet X = random_observation(g, e, 4);
    const double grid = oracle::log_likelihood(dense, oracle::indices_of(e, X));
    CHECK(std::abs(log_likelihood(L, X) - static_cast<double>(X.size()) * logN - grid) < 1e-8);
  }
  const FourierSpectrum spec{2, d, uniform(9, 0.1, 3.0)};
  const LowRankL as_low_rank = spectrum_as_low_rank(spec);
  const MatrixXd dense_spec = oracle::dense_l(as_low_rank, e);
  for (int t = 0; t < 10; ++t) {
    const ObservationSet X = random_observation(g, e, 4);
    const double grid = oracle::log_likelihood(dense_spec, oracle::indices_of(e, X));
    CHECK(std::abs(spectrum_log_likelihood(spec, X) - static_cast<double>(X.size()) * logN - grid) <
          1e-8);
  }
}

TEST_CASE("singular observations throw") {
  LowRankL L;
  L.ground = GroundSet::items(3);
  L.U = MatrixXd::Ones(3, 1);
  L.theta = VectorXd::Ones(1);
  try {
    log_likelihood(L, ObservationSet::of_items({0, 1}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSingularObservation);
  }
}

TEST_CASE("submatrix scaling avoids underflow") {
  LowRankL L;
  L.ground = GroundSet::hypercube(200, 0.5);
  L.U = gaussian(200, 3, 0.1);
  L.theta = VectorXd::Ones(3);
  MatrixXd rows = MatrixXd::Zero(2, 200);
  rows(0, 0) = 1;
  rows(1, 1) = 1;
  const LSubmatrix sub = l_submatrix(L, ObservationSet::of_rows(rows));
  CHECK(std::isfinite(sub.log_det()));
  CHECK(sub.log_p(0) == doctest::Approx(200 * std::log(0.5)));
}

TEST_CASE("objective value equals the oracle formula") {
  const GroundSet g = GroundSet::hypercube(uniform(4, 0.2, 0.8));
  const auto e = oracle::enumerate(g);
  Corpus corpus;
  for (int i = 0; i < 6; ++i) corpus.push_back(random_observation(g, e, 3));
  const PenaltyConfig penalty{0.05, 1e-8};
  const MatrixXd U = gaussian(4, 2, 1.0);
  for (ThetaMode mode : {ThetaMode::kShared, ThetaMode::kPerObservation}) {
    const CorpusObjective f(g, 0.01, 0.3, corpus, penalty, mode);
    FactorParams p{U, {}};
    for (Index t = 0; t < f.num_thetas(); ++t) p.thetas.push_back(uniform(2, 0.2, 1.5));
    double expected = 0.0;
    double theta_sum = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      LowRankL L;
      L.ground = g;
      L.alpha = 0.01;
      L.gamma = 0.3;
      L.U = U;
      L.theta = p.thetas[mode == ThetaMode::kShared ? 0 : i];
      expected -= oracle::log_likelihood(oracle::dense_l(L, e), oracle::indices_of(e, corpus[i])) /
                  static_cast<double>(corpus.size());
    }
    for (const auto& th : p.thetas) theta_sum += th.sum();
    if (mode == ThetaMode::kPerObservation) theta_sum /= static_cast<double>(corpus.size());
    const double eps = penalty.smoothing;
    double group = 0.0;
    for (Index k = 0; k < 2; ++k) group += std::sqrt(U.col(k).squaredNorm() + eps * eps) - eps;
    expected += penalty.weight * group * group + penalty.weight * theta_sum;
    CHECK(std::abs(f.value(p) - expected) < 1e-9 * (1 + std::abs(expected)));
  }
}

TEST_CASE("objective gradients match central differences") {
  struct Case {
    GroundSet g;
    double alpha;
    double gamma;
    ThetaMode mode;
  };
  const std::vector<Case> cases = {
      {GroundSet::items(6), 0.0, 0.0, ThetaMode::kShared},
      {GroundSet::items(6), 0.1, 0.2, ThetaMode::kPerObservation},
      {GroundSet::hypercube(uniform(5, 0.2, 0.8)), 0.0, 0.2, ThetaMode::kShared},
      {GroundSet::hypercube(uniform(5, 0.2, 0.8)), 1e-3, 0.0, ThetaMode::kPerObservation},
      {GroundSet::continuous_fourier(1, 2), 0.0, 0.1, ThetaMode::kShared},
  };
  for (const auto& c : cases) {
    const auto e = oracle::enumerate(c.g);
    Corpus corpus;
    for (int i = 0; i < 5; ++i) corpus.push_back(random_observation(c.g, e, 3));
    const CorpusObjective f(c.g, c.alpha, c.gamma, corpus, PenaltyConfig{0.02, 1e-8}, c.mode);
    FactorParams p{gaussian(c.g.dimension(), 3, 0.7), {}};
    for (Index t = 0; t < f.num_thetas(); ++t) p.thetas.push_back(uniform(3, 0.3, 1.5));
    FactorParams grad;
    f.value_and_gradient(p, &grad);
    const FactorParams fd = numeric_gradient(f, p, 1e-6);
    CHECK(relative_error(grad.U, fd.U) < 1e-6);
    for (std::size_t t = 0; t < p.thetas.size(); ++t) {
      CHECK(relative_error(grad.thetas[t], fd.thetas[t]) < 1e-6);
    }
  }
}

TEST_CASE("fixed-U blocks agree with the full objective") {
  const GroundSet g = GroundSet::items(5);
  const auto e = oracle::enumerate(g);
  Corpus corpus;
  for (int i = 0; i < 4; ++i) corpus.push_back(random_observation(g, e, 3));
  const MatrixXd U = gaussian(5, 2, 1.0);

  const CorpusObjective shared(g, 0.0, 0.1, corpus, PenaltyConfig{}, ThetaMode::kShared);
  const VectorXd theta = uniform(2, 0.3, 1.0);
  VectorXd grad;
  const auto fixed = shared.fix_u(U);
  CHECK(fixed.shared_value(theta, &grad) == doctest::Approx(shared.value({U, {theta}})));
  FactorParams full;
  shared.value_and_gradient({U, {theta}}, &full);
  CHECK(relative_error(grad, full.thetas[0]) < 1e-12);

  const CorpusObjective per(g, 0.0, 0.1, corpus, PenaltyConfig{}, ThetaMode::kPerObservation);
  FactorParams p{U, {}};
  for (int i = 0; i < 4; ++i) p.thetas.push_back(uniform(2, 0.3, 1.0));
  const auto fixed_per = per.fix_u(U);
  const double base = per.value(p);
  const VectorXd moved = uniform(2, 0.3, 1.0);
  FactorParams q = p;
  q.thetas[2] = moved;
  const double delta = fixed_per.block_value(2, moved, nullptr) - fixed_per.block_value(2, p.thetas[2], nullptr);
  CHECK(per.value(q) - base == doctest::Approx(delta));
}

TEST_CASE("mini-batch gradient over the full corpus equals the U gradient") {
  const GroundSet g = GroundSet::items(6);
  const auto e = oracle::enumerate(g);
  Corpus corpus;
  for (int i = 0; i < 5; ++i) corpus.push_back(random_observation(g, e, 3));
  const CorpusObjective f(g, 0.0, 0.1, corpus, PenaltyConfig{0.01, 1e-8}, ThetaMode::kShared);
  const FactorParams p{gaussian(6, 2, 1.0), {uniform(2, 0.3, 1.0)}};
  FactorParams full;
  const double v = f.value_and_gradient(p, &full);
  MatrixXd grad_u;
  const double b = f.batch_value_and_gradient_u(p, {0, 1, 2, 3, 4}, &grad_u);
  CHECK(b + p.thetas[0].sum() * 0.01 == doctest::Approx(v));
  CHECK(relative_error(grad_u, full.U) < 1e-10);
}

TEST_CASE("spectrum objective gradient") {
  const GroundSet g = GroundSet::continuous_fourier(1, 2);
  const auto e = oracle::enumerate(g, 11);
  Corpus corpus;
  for (int i = 0; i < 4; ++i) corpus.push_back(random_observation(g, e, 3));
  const SpectrumObjective f(1, 2, corpus, PenaltyConfig{0.01, 1e-8});
  const VectorXd a = uniform(5, 0.5, 2.0);
  VectorXd grad;
  f.value_and_gradient(a, &grad);
  VectorXd fd(5);
  for (Index k = 0; k < 5; ++k) {
    VectorXd p = a, m = a;
    p(k) += 1e-6;
    m(k) -= 1e-6;
    fd(k) = (f.value_and_gradient(p, nullptr) - f.value_and_gradient(m, nullptr)) / 2e-6;
  }
  CHECK(relative_error(grad, fd) < 1e-6);
}

TEST_CASE("smoothed group norm") {
  MatrixXd U(2, 2);
  U << 3, 0, 4, 0;
  CHECK(smoothed_group_norm(U, 1e-8) == doctest::Approx(5.0));
  CHECK(smoothed_group_norm(MatrixXd::Zero(3, 2), 1e-8) == 0.0);
}
