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

#ifndef SUBDPP_GROUND_SET_HPP_
#define SUBDPP_GROUND_SET_HPP_

#include <Eigen/Dense>

#include <string>
#include <variant>
#include <vector>

namespace subdpp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Finite catalog {0, ..., V-1} with the standard embedding (Phi = I).
/// The base measure is absorbed into U, so every p(x) is 1.
struct Items {
  Index V = 0;
};

/// Binary vectors {0,1}^V, phi(x) = x, independent Bernoulli(pi_i) base measure.
struct Hypercube {
  VectorXd pi;
};

/// Count vectors N^V, phi(x) = x, independent Poisson(lambda_i) base measure.
struct Integers {
  VectorXd lambda;
};

/// Points of [0,1]^m with the truncated Fourier basis of (2d+1) functions per
/// coordinate and the uniform base measure.
struct ContinuousFourier {
  int m = 1;
  int d = 0;
};

enum class GroundKind { kItems, kHypercube, kIntegers, kContinuousFourier };

class GroundSet {
 public:
  using Variant = std::variant<Items, Hypercube, Integers, ContinuousFourier>;

  static GroundSet items(Index V);
  static GroundSet hypercube(VectorXd pi);
  static GroundSet hypercube(Index V, double pi);
  static GroundSet integers(VectorXd lambda);
  static GroundSet continuous_fourier(int m, int d);

  GroundKind kind() const;
  const Variant& variant() const { return variant_; }

  /// Embedding dimension V.
  Index dimension() const;

  /// log |X|; +inf for the integer lattice and the continuous cube.
  double log_cardinality() const;
  bool is_finite() const;

  std::string name() const;

 private:
  explicit GroundSet(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

/// Sigma = Diag(nu) + mu mu^T, kept in factored form. Products with Sigma
/// cost O(V) per column.
struct SecondMoment {
  VectorXd nu;
  VectorXd mu;

  Index dimension() const { return nu.size(); }

  /// Sigma * X.
  MatrixXd apply(const MatrixXd& X) const;

  /// C * X for the symmetric-root factor C = Diag(sqrt(nu)) (I + c m m^T)
  /// with m = mu / sqrt(nu), so that C C^T = Sigma. Requires nu > 0.
  MatrixXd apply_factor(const MatrixXd& X) const;
  /// C^T * X.
  MatrixXd apply_factor_transpose(const MatrixXd& X) const;

  /// tr(B Sigma) for a dense symmetric B.
  double trace_product(const MatrixXd& B) const;

  MatrixXd dense() const;
};

SecondMoment second_moment(const GroundSet& ground);

/// One observed subset. Items are stored as 0-based indices; every other
/// ground set stores one element per row (binary vectors, counts, or points).
class ObservationSet {
 public:
  ObservationSet() = default;
  static ObservationSet of_items(std::vector<Index> items);
  static ObservationSet of_rows(MatrixXd rows);

  Index size() const;
  bool empty() const { return size() == 0; }
  bool holds_items() const { return holds_items_; }
  const std::vector<Index>& items() const { return items_; }
  const MatrixXd& rows() const { return rows_; }

  /// Subset of this observation picked by position.
  ObservationSet select(const std::vector<Index>& positions) const;

 private:
  bool holds_items_ = false;
  std::vector<Index> items_;
  MatrixXd rows_;
};

using Corpus = std::vector<ObservationSet>;

/// Checks element dimensions, domain membership, and distinctness.
void validate_observation(const GroundSet& ground, const ObservationSet& obs);

/// Feature matrix with one row phi(x_j)^T per element, size |X| x V.
MatrixXd embed(const GroundSet& ground, const ObservationSet& obs);

/// log p(x_j) for every element. Zero for Items and for the continuous cube
/// (uniform density).
VectorXd log_base_measure(const GroundSet& ground, const ObservationSet& obs);

}  // namespace subdpp

#endif  // SUBDPP_GROUND_SET_HPP_
