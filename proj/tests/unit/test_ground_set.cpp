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

#include "doctest.h"
#include "subdpp/errors.hpp"
#include "subdpp/ground_set.hpp"
#include "support/dense_oracle.hpp"

using namespace subdpp;

TEST_CASE("second moment of orthonormal embeddings is the identity") {
  for (const auto& g : {GroundSet::items(4), GroundSet::continuous_fourier(1, 1)}) {
    const SecondMoment s = second_moment(g);
    CHECK(s.nu.isOnes());
    CHECK(s.mu.isZero());
  }
}

TEST_CASE("hypercube second moment matches the worked example") {
  const SecondMoment s = second_moment(GroundSet::hypercube(Eigen::Vector2d(0.5, 0.5)));
  Eigen::Matrix2d expected;
  expected << 0.5, 0.25, 0.25, 0.5;
  CHECK((s.dense() - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("integer second moment matches the worked example") {
  const SecondMoment s = second_moment(GroundSet::integers(Eigen::Vector2d(1.0, 2.0)));
  Eigen::Matrix2d expected;
  expected << 2, 2, 2, 6;
  CHECK((s.dense() - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("hypercube second moment equals enumeration") {
  VectorXd pi(5);
  pi << 0.1, 0.3, 0.5, 0.7, 0.95;
  const GroundSet g = GroundSet::hypercube(pi);
  const MatrixXd brute = oracle::second_moment(oracle::enumerate(g));
  CHECK((second_moment(g).dense() - brute).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("factor products reproduce Sigma without densifying") {
  VectorXd pi(4);
  pi << 0.2, 0.4, 0.6, 0.8;
  const SecondMoment s = second_moment(GroundSet::hypercube(pi));
  const MatrixXd I = MatrixXd::Identity(4, 4);
  const MatrixXd C = s.apply_factor(I);
  CHECK((C * C.transpose() - s.dense()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((s.apply_factor_transpose(I) - C.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  const MatrixXd X = MatrixXd::Random(4, 3);
  CHECK((s.apply(X) - s.dense() * X).cwiseAbs().maxCoeff() < 1e-14);
  const MatrixXd B = X * X.transpose();
  CHECK(std::abs(s.trace_product(B) - (B * s.dense()).trace()) < 1e-13);
}

TEST_CASE("embeddings") {
  SUBCASE("fourier at zero") {
    const ObservationSet X = ObservationSet::of_rows(MatrixXd::Zero(1, 1));
    const MatrixXd f = embed(GroundSet::continuous_fourier(1, 1), X);
    CHECK(f(0, 0) == doctest::Approx(1.0));
    CHECK(f(0, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(std::abs(f(0, 2)) < 1e-15);
  }
  SUBCASE("item index is a unit vector") {
    const MatrixXd f = embed(GroundSet::items(3), ObservationSet::of_items({2}));
    CHECK(f.row(0) == Eigen::RowVector3d(0, 0, 1));
  }
  SUBCASE("hypercube embeds as itself") {
    MatrixXd x(1, 4);
    x << 1, 0, 1, 0;
    CHECK(embed(GroundSet::hypercube(4, 0.5), ObservationSet::of_rows(x)) == x);
  }
}

TEST_CASE("base measure in log space") {
  MatrixXd x(1, 3);
  x << 1, 1, 0;
  const VectorXd lp = log_base_measure(GroundSet::hypercube(3, 0.5), ObservationSet::of_rows(x));
  CHECK(lp(0) == doctest::Approx(3.0 * std::log(0.5)));
  MatrixXd c(1, 2);
  c << 2, 0;
  const VectorXd lq =
      log_base_measure(GroundSet::integers(Eigen::Vector2d(1.0, 3.0)), ObservationSet::of_rows(c));
  // Poisson(1) at 2 and Poisson(3) at 0.
  CHECK(lq(0) == doctest::Approx(std::log(std::exp(-1.0) / 2.0) - 3.0));
}

TEST_CASE("observation validation") {
  const GroundSet items = GroundSet::items(3);
  CHECK_NOTHROW(validate_observation(items, ObservationSet::of_items({0, 2})));
  CHECK_THROWS_AS(validate_observation(items, ObservationSet::of_items({0, 0})), Error);
  CHECK_THROWS_AS(validate_observation(items, ObservationSet::of_items({3})), Error);
  MatrixXd bad(1, 2);
  bad << 1, 2;
  try {
    validate_observation(GroundSet::hypercube(2, 0.5), ObservationSet::of_rows(bad));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kOutOfDomain);
  }
  try {
    validate_observation(GroundSet::hypercube(3, 0.5), ObservationSet::of_rows(MatrixXd::Zero(1, 2)));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDimensionMismatch);
  }
}

TEST_CASE("ground set invariants") {
  CHECK_THROWS_AS(GroundSet::hypercube(2, 1.0), Error);
  CHECK_THROWS_AS(GroundSet::integers(Eigen::Vector2d(1.0, 0.0)), Error);
  CHECK(GroundSet::continuous_fourier(2, 3).dimension() == 49);
  CHECK(GroundSet::hypercube(10, 0.5).log_cardinality() == doctest::Approx(10 * std::log(2.0)));
  CHECK(!GroundSet::integers(Eigen::Vector2d(1.0, 1.0)).is_finite());
}
