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

#include <cmath>
#include <random>

#include "doctest.h"
#include "subdpp/errors.hpp"
#include "subdpp/evaluation.hpp"
#include "subdpp/likelihood.hpp"
#include "support/dense_oracle.hpp"

using namespace subdpp;

TEST_CASE("subspace distance of spanned and orthogonal targets") {
  MatrixXd U(3, 1), in(3, 1), out(3, 1);
  U << 1, 1, 0;
  in << 2, 2, 0;
  out << 0, 0, 5;
  CHECK(subspace_distance(U, in).value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(subspace_distance(U, out).value == doctest::Approx(1.0));
  MatrixXd half(3, 1);
  half << 1, 0, 0;
  // Residual of e1 against span(1,1,0) has norm 1/sqrt(2).
  CHECK(subspace_distance(U, half).value == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("subspace distance is invariant to the basis of U") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  const MatrixXd U = MatrixXd::NullaryExpr(8, 3, [&] { return n(rng); });
  const MatrixXd target = MatrixXd::NullaryExpr(8, 2, [&] { return n(rng); });
  const MatrixXd mix = MatrixXd::NullaryExpr(3, 3, [&] { return n(rng); });
  CHECK(subspace_distance(U, target).value == doctest::Approx(subspace_distance(U * mix, target).value));
  // Oracle: explicit projector through the pseudo-inverse.
  const MatrixXd P = U * (U.transpose() * U).inverse() * U.transpose();
  const double expected = (target - P * target).norm() / target.norm();
  CHECK(subspace_distance(U, target).value == doctest::Approx(expected));
}

TEST_CASE("rank-deficient U is flagged") {
  MatrixXd U(3, 2);
  U << 1, 2, 1, 2, 0, 0;
  const SubspaceDistance d = subspace_distance(U, MatrixXd::Identity(3, 1));
  CHECK(d.rank_deficient);
  CHECK(d.value == doctest::Approx(std::sqrt(0.5)));
  CHECK(subspace_distance(MatrixXd::Zero(3, 1), MatrixXd::Identity(3, 1)).value == doctest::Approx(1.0));
  CHECK_THROWS_AS(subspace_distance(U, MatrixXd::Zero(3, 1)), Error);
}

TEST_CASE("chance level Monte Carlo agrees with the analytic mean square") {
  const ChanceLevel c = chance_level(20, 5, 4000, 3);
  CHECK(c.analytic == doctest::Approx(0.75));
  CHECK(std::abs(c.mean_squared - c.analytic) < 4 * c.mean_squared_stderr);
  CHECK(c.mean <= std::sqrt(c.mean_squared) + 1e-12);
  const ChanceLevel again = chance_level(20, 5, 4000, 3);
  CHECK(again.mean == c.mean);
  CHECK(chance_level(5, 5, 10, 1).mean == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("mean log-likelihood matches enumeration") {
  LowRankL L;
  L.ground = GroundSet::items(4);
  L.U = MatrixXd::Identity(4, 2);
  L.theta = Eigen::Vector2d(1.0, 2.0);
  L.gamma = 0.5;
  const Corpus corpus = {ObservationSet::of_items({0}), ObservationSet::of_items({1, 2}),
                         ObservationSet::of_items({})};
  const MatrixXd dense = oracle::dense_l(L, oracle::enumerate(L.ground));
  double expected = 0.0;
  for (const auto& X : corpus) expected += oracle::log_likelihood(dense, X.items());
  CHECK(mean_log_likelihood(L, corpus) == doctest::Approx(expected / 3));
  CHECK(loglik_gap(L, L, corpus) == 0.0);

  std::vector<VectorXd> thetas = {L.theta, Eigen::Vector2d(0.5, 0.5), L.theta};
  LowRankL other = L;
  other.theta = thetas[1];
  const double mixed = (oracle::log_likelihood(dense, {0}) +
                        oracle::log_likelihood(oracle::dense_l(other, oracle::enumerate(L.ground)), {1, 2}) +
                        oracle::log_likelihood(dense, {})) / 3;
  CHECK(mean_log_likelihood(L, thetas, corpus) == doctest::Approx(mixed));
}

TEST_CASE("singular held-out observations give negative infinity") {
  LowRankL L;
  L.ground = GroundSet::items(3);
  L.U = MatrixXd::Ones(3, 1);
  L.theta = VectorXd::Ones(1);
  CHECK(std::isinf(mean_log_likelihood(L, {ObservationSet::of_items({0, 1})})));
}

TEST_CASE("diagonal baseline closed form") {
  Corpus corpus = {ObservationSet::of_items({0}), ObservationSet::of_items({1, 2, 3}),
                   ObservationSet::of_items({4, 5})};
  const DiagonalBaseline b = best_diagonal_baseline(corpus, 10.0);
  CHECK(b.closed_form == doctest::Approx(2.0 / 8.0));
  CHECK(b.eta == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(!b.boundary);
  const DiagonalBaseline g = best_diagonal_baseline(corpus, GroundSet::items(10));
  CHECK(g.eta == doctest::Approx(b.eta));
  CHECK(best_diagonal_baseline({ObservationSet::of_items({})}, 5.0).boundary);
}

TEST_CASE("diagonal baseline maximizes the diagonal model likelihood") {
  const GroundSet g = GroundSet::items(6);
  Corpus corpus = {ObservationSet::of_items({0, 1}), ObservationSet::of_items({2}),
                   ObservationSet::of_items({3, 4, 5})};
  const DiagonalBaseline b = best_diagonal_baseline(corpus, g);
  const double at = mean_log_likelihood(diagonal_model(g, b.eta), corpus);
  CHECK(at > mean_log_likelihood(diagonal_model(g, b.eta * 1.1), corpus));
  CHECK(at > mean_log_likelihood(diagonal_model(g, b.eta * 0.9), corpus));
  const LowRankL f = diagonal_model(GroundSet::continuous_fourier(1, 1), 0.3);
  CHECK(f.gamma == 0.3);
  CHECK(f.alpha == 0.0);
}
