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

#ifndef SUBDPP_SAMPLING_HPP_
#define SUBDPP_SAMPLING_HPP_

#include <Eigen/Dense>

#include <vector>

#include "subdpp/fourier.hpp"
#include "subdpp/ground_set.hpp"
#include "subdpp/kernel_family.hpp"
#include "subdpp/rng.hpp"

namespace subdpp {

inline constexpr Index kDefaultDenseCap = 4096;

/// Explicitly enumerated DPP, stored by its spectrum. The eigenvectors in
/// `basis` carry `eigenvalues`; the orthogonal complement of span(basis) in
/// R^N is one eigenspace with eigenvalue `complement_eigenvalue`.
struct DenseDPP {
  GroundSet ground = GroundSet::items(1);
  MatrixXd points;  // one row per item (empty for Items)
  MatrixXd basis;   // N x k, orthonormal columns
  VectorXd eigenvalues;
  double complement_eigenvalue = 0.0;

  Index size() const { return basis.rows(); }
  /// Marginal kernel K = L (L + I)^-1, N x N.
  MatrixXd marginal_kernel() const;
  /// Dense L, N x N.
  MatrixXd kernel() const;
  /// Sampled item indices as an observation of `ground`.
  ObservationSet observation(const std::vector<Index>& items) const;
};

/// Rows of the enumerated ground set: all of {0,1}^V for the hypercube
/// (item i has bit j equal to (i >> j) & 1), the lexicographic grid of side
/// `grid_side` for the continuous cube. Items give an empty matrix.
/// grid_side = 0 selects 2d+1, for which the grid's second moment is I.
MatrixXd enumerate_ground(const GroundSet& ground, Index cap = kDefaultDenseCap,
                          int grid_side = 0);

/// Number of enumerated items, checked against `cap`.
Index enumerated_size(const GroundSet& ground, Index cap = kDefaultDenseCap, int grid_side = 0);

/// Dense L on the enumerated ground set:
/// L(x, y) = alpha [x = y] + sqrt(p(x)) phi(x)^T A phi(y) sqrt(p(y)).
/// Grid points carry mass p = 1/N.
MatrixXd dense_l(const LowRankL& L, Index cap = kDefaultDenseCap, int grid_side = 0);

/// Spectrum of the enumerated L via a thin QR of the weighted features, so
/// the cost is O(N V^2) rather than O(N^3).
DenseDPP build_dense(const LowRankL& L, Index cap = kDefaultDenseCap, int grid_side = 0);

/// Full eigendecomposition of an explicit PSD matrix over Items {0..N-1}.
/// Eigenvalues in [-1e-10 scale, 0) are clamped to 0; larger negatives throw.
DenseDPP build_dense(const MatrixXd& L, Index cap = kDefaultDenseCap);

/// Exact draw by the spectral method: each eigenvector enters with
/// probability lambda/(1+lambda), then items are drawn one at a time from
/// the squared row norms of the selected basis, which is deflated after
/// each draw. Returned indices are sorted.
std::vector<Index> sample_dpp(const DenseDPP& dpp, Rng& rng);

/// n i.i.d. uniform points of [0,1)^m, one per row.
MatrixXd sample_uniform_iid(Index n, int m, Rng& rng);

/// Enumerated ground set with its weighted features factored once, so that
/// models differing only in A cost one V x V eigendecomposition each.
class SpectralFactory {
 public:
  SpectralFactory(const GroundSet& ground, double alpha, Index cap = kDefaultDenseCap,
                  int grid_side = 0);
  DenseDPP build(const MatrixXd& A) const;
  Index size() const { return q_.rows(); }

 private:
  GroundSet ground_;
  double alpha_;
  MatrixXd points_;
  MatrixXd q_;
  MatrixXd r_;
};

/// Random factored model: U entries N(0, 1), theta_k uniform on
/// [theta_low, theta_high].
LowRankL random_low_rank(const GroundSet& ground, Index r, double alpha, double gamma,
                         double theta_low, double theta_high, Rng& rng);

/// M exact draws from one model.
Corpus sample_corpus(const LowRankL& L, Index M, Rng& rng, Index cap = kDefaultDenseCap,
                     int grid_side = 0);

/// One draw per theta in `thetas`, all sharing (alpha, gamma, U).
Corpus sample_corpus(const LowRankL& L, const std::vector<VectorXd>& thetas, Rng& rng,
                     Index cap = kDefaultDenseCap, int grid_side = 0);

/// M draws from the diagonal stationary model on the grid of side 2d+1.
Corpus sample_corpus(const FourierSpectrum& spec, Index M, Rng& rng,
                     Index cap = kDefaultDenseCap);

}  // namespace subdpp

#endif  // SUBDPP_SAMPLING_HPP_
