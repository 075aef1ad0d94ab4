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

#include "subdpp/ground_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "subdpp/errors.hpp"
#include "subdpp/fourier.hpp"

namespace subdpp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

GroundSet GroundSet::items(Index V) {
  require(V >= 1, ErrorKind::kInvalidArgument, "items ground set needs V >= 1");
  return GroundSet(Items{V});
}

GroundSet GroundSet::hypercube(VectorXd pi) {
  require(pi.size() >= 1, ErrorKind::kInvalidArgument, "hypercube needs V >= 1");
  require(((pi.array() > 0.0) && (pi.array() < 1.0)).all(), ErrorKind::kInvalidArgument,
          "hypercube Bernoulli parameters must lie strictly inside (0,1)");
  return GroundSet(Hypercube{std::move(pi)});
}

GroundSet GroundSet::hypercube(Index V, double pi) {
  require(V >= 1, ErrorKind::kInvalidArgument, "hypercube needs V >= 1");
  return hypercube(VectorXd::Constant(V, pi));
}

GroundSet GroundSet::integers(VectorXd lambda) {
  require(lambda.size() >= 1, ErrorKind::kInvalidArgument, "integer lattice needs V >= 1");
  require((lambda.array() > 0.0).all() && lambda.allFinite(), ErrorKind::kInvalidArgument,
          "Poisson rates must be positive");
  return GroundSet(Integers{std::move(lambda)});
}

GroundSet GroundSet::continuous_fourier(int m, int d) {
  fourier_dimension(m, d);  // validates
  return GroundSet(ContinuousFourier{m, d});
}

GroundKind GroundSet::kind() const {
  return std::visit(Overloaded{
                        [](const Items&) { return GroundKind::kItems; },
                        [](const Hypercube&) { return GroundKind::kHypercube; },
                        [](const Integers&) { return GroundKind::kIntegers; },
                        [](const ContinuousFourier&) { return GroundKind::kContinuousFourier; },
                    },
                    variant_);
}

Index GroundSet::dimension() const {
  return std::visit(Overloaded{
                        [](const Items& g) { return g.V; },
                        [](const Hypercube& g) { return g.pi.size(); },
                        [](const Integers& g) { return g.lambda.size(); },
                        [](const ContinuousFourier& g) { return fourier_dimension(g.m, g.d); },
                    },
                    variant_);
}

double GroundSet::log_cardinality() const {
  return std::visit(
      Overloaded{
          [](const Items& g) { return std::log(static_cast<double>(g.V)); },
          [](const Hypercube& g) { return static_cast<double>(g.pi.size()) * std::numbers::ln2; },
          [](const Integers&) { return std::numeric_limits<double>::infinity(); },
          [](const ContinuousFourier&) { return std::numeric_limits<double>::infinity(); },
      },
      variant_);
}

bool GroundSet::is_finite() const { return std::isfinite(log_cardinality()); }

std::string GroundSet::name() const {
  switch (kind()) {
    case GroundKind::kItems: return "items";
    case GroundKind::kHypercube: return "hypercube";
    case GroundKind::kIntegers: return "integers";
    case GroundKind::kContinuousFourier: return "continuous_fourier";
  }
  return "unknown";
}

MatrixXd SecondMoment::apply(const MatrixXd& X) const {
  require(X.rows() == nu.size(), ErrorKind::kDimensionMismatch, "Sigma product size mismatch");
  MatrixXd out = nu.asDiagonal() * X;
  out.noalias() += mu * (mu.transpose() * X);
  return out;
}

namespace {

// Coefficient c with (I + c m m^T)^2 = I + m m^T.
double root_coefficient(double m_norm2) {
  if (m_norm2 == 0.0) return 0.0;
  return 1.0 / (std::sqrt(1.0 + m_norm2) + 1.0);
}

}  // namespace

MatrixXd SecondMoment::apply_factor(const MatrixXd& X) const {
  require(X.rows() == nu.size(), ErrorKind::kDimensionMismatch, "Sigma factor size mismatch");
  require((nu.array() > 0.0).all(), ErrorKind::kDegenerateParameter,
          "Sigma factor needs a positive diagonal");
  const VectorXd m = mu.cwiseQuotient(nu.cwiseSqrt());
  const double c = root_coefficient(m.squaredNorm());
  MatrixXd inner = X;
  inner.noalias() += c * m * (m.transpose() * X);
  return nu.cwiseSqrt().asDiagonal() * inner;
}

MatrixXd SecondMoment::apply_factor_transpose(const MatrixXd& X) const {
  require(X.rows() == nu.size(), ErrorKind::kDimensionMismatch, "Sigma factor size mismatch");
  require((nu.array() > 0.0).all(), ErrorKind::kDegenerateParameter,
          "Sigma factor needs a positive diagonal");
  const VectorXd m = mu.cwiseQuotient(nu.cwiseSqrt());
  const double c = root_coefficient(m.squaredNorm());
  MatrixXd scaled = nu.cwiseSqrt().asDiagonal() * X;
  scaled.noalias() += c * m * (m.transpose() * scaled);
  return scaled;
}

double SecondMoment::trace_product(const MatrixXd& B) const {
  require(B.rows() == nu.size() && B.cols() == nu.size(), ErrorKind::kDimensionMismatch,
          "trace product size mismatch");
  return nu.dot(B.diagonal()) + mu.dot(B * mu);
}

MatrixXd SecondMoment::dense() const {
  MatrixXd sigma = mu * mu.transpose();
  sigma.diagonal() += nu;
  return sigma;
}

SecondMoment second_moment(const GroundSet& ground) {
  const Index V = ground.dimension();
  return std::visit(
      Overloaded{
          [V](const Items&) { return SecondMoment{VectorXd::Ones(V), VectorXd::Zero(V)}; },
          [](const Hypercube& g) {
            return SecondMoment{(g.pi.array() * (1.0 - g.pi.array())).matrix(), g.pi};
          },
          [](const Integers& g) { return SecondMoment{g.lambda, g.lambda}; },
          [V](const ContinuousFourier&) {
            return SecondMoment{VectorXd::Ones(V), VectorXd::Zero(V)};
          },
      },
      ground.variant());
}

ObservationSet ObservationSet::of_items(std::vector<Index> items) {
  ObservationSet obs;
  obs.holds_items_ = true;
  obs.items_ = std::move(items);
  return obs;
}

ObservationSet ObservationSet::of_rows(MatrixXd rows) {
  ObservationSet obs;
  obs.holds_items_ = false;
  obs.rows_ = std::move(rows);
  return obs;
}

Index ObservationSet::size() const {
  return holds_items_ ? static_cast<Index>(items_.size()) : rows_.rows();
}

ObservationSet ObservationSet::select(const std::vector<Index>& positions) const {
  for (Index p : positions) {
    require(p >= 0 && p < size(), ErrorKind::kOutOfDomain, "selection position out of range");
  }
  if (holds_items_) {
    std::vector<Index> picked;
    picked.reserve(positions.size());
    for (Index p : positions) picked.push_back(items_[static_cast<std::size_t>(p)]);
    return of_items(std::move(picked));
  }
  MatrixXd picked(static_cast<Index>(positions.size()), rows_.cols());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    picked.row(static_cast<Index>(i)) = rows_.row(positions[i]);
  }
  return of_rows(std::move(picked));
}

void validate_observation(const GroundSet& ground, const ObservationSet& obs) {
  if (ground.kind() == GroundKind::kItems) {
    require(obs.holds_items(), ErrorKind::kDimensionMismatch,
            "items ground set expects item indices");
    const Index V = ground.dimension();
    std::set<Index> seen;
    for (Index i : obs.items()) {
      require(i >= 0 && i < V, ErrorKind::kOutOfDomain, "item index outside [0, V)");
      require(seen.insert(i).second, ErrorKind::kInvalidArgument,
              "observation elements must be distinct");
    }
    return;
  }
  require(!obs.holds_items(), ErrorKind::kDimensionMismatch,
          "this ground set expects one element per row");
  const MatrixXd& rows = obs.rows();
  std::visit(Overloaded{
                 [](const Items&) {},
                 [&rows](const Hypercube& g) {
                   require(rows.cols() == g.pi.size() || rows.rows() == 0,
                           ErrorKind::kDimensionMismatch, "binary vector length differs from V");
                   require(((rows.array() == 0.0) || (rows.array() == 1.0)).all(),
                           ErrorKind::kOutOfDomain, "hypercube elements must be 0/1 vectors");
                 },
                 [&rows](const Integers& g) {
                   require(rows.cols() == g.lambda.size() || rows.rows() == 0,
                           ErrorKind::kDimensionMismatch, "count vector length differs from V");
                   require(((rows.array() >= 0.0) && (rows.array() == rows.array().round())).all(),
                           ErrorKind::kOutOfDomain, "lattice elements must be nonnegative integers");
                 },
                 [&rows](const ContinuousFourier& g) {
                   require(rows.cols() == g.m || rows.rows() == 0, ErrorKind::kDimensionMismatch,
                           "point dimension differs from m");
                   require(rows.allFinite() && (rows.array() >= 0.0).all() &&
                               (rows.array() <= 1.0).all(),
                           ErrorKind::kOutOfDomain, "points must lie in [0,1]^m");
                 },
             },
             ground.variant());
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index j = i + 1; j < rows.rows(); ++j) {
      require(rows.row(i) != rows.row(j), ErrorKind::kInvalidArgument,
              "observation elements must be distinct");
    }
  }
}

MatrixXd embed(const GroundSet& ground, const ObservationSet& obs) {
  validate_observation(ground, obs);
  const Index V = ground.dimension();
  const Index n = obs.size();
  return std::visit(Overloaded{
                        [&](const Items&) {
                          MatrixXd f = MatrixXd::Zero(n, V);
                          for (Index j = 0; j < n; ++j) {
                            f(j, obs.items()[static_cast<std::size_t>(j)]) = 1.0;
                          }
                          return f;
                        },
                        [&](const Hypercube&) { return MatrixXd(obs.rows()); },
                        [&](const Integers&) { return MatrixXd(obs.rows()); },
                        [&](const ContinuousFourier& g) {
                          return fourier_feature_rows(g.m, g.d, obs.rows());
                        },
                    },
                    ground.variant());
}

VectorXd log_base_measure(const GroundSet& ground, const ObservationSet& obs) {
  validate_observation(ground, obs);
  const Index n = obs.size();
  return std::visit(
      Overloaded{
          [n](const Items&) { return VectorXd(VectorXd::Zero(n)); },
          [&](const Hypercube& g) {
            const VectorXd log_on = g.pi.array().log();
            const VectorXd log_off = (1.0 - g.pi.array()).log();
            VectorXd out = obs.rows() * (log_on - log_off);
            out.array() += log_off.sum();
            return out;
          },
          [&](const Integers& g) {
            const MatrixXd& x = obs.rows();
            VectorXd out(n);
            for (Index j = 0; j < n; ++j) {
              double s = -g.lambda.sum();
              for (Index i = 0; i < x.cols(); ++i) {
                s += x(j, i) * std::log(g.lambda(i)) - std::lgamma(x(j, i) + 1.0);
              }
              out(j) = s;
            }
            return out;
          },
          [n](const ContinuousFourier&) { return VectorXd(VectorXd::Zero(n)); },
      },
      ground.variant());
}

}  // namespace subdpp
