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

#ifndef SUBDPP_FOURIER_HPP_
#define SUBDPP_FOURIER_HPP_

#include <Eigen/Dense>

#include <vector>

namespace subdpp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Frequency layout. Per coordinate the basis has 2d+1 functions indexed
// 0..2d: index 0 is the constant 1, index 2k-1 is sqrt(2) cos(2 pi k x) and
// index 2k is sqrt(2) sin(2 pi k x), for k = 1..d. The m-dimensional basis is
// the tensor product, flattened lexicographically with the first coordinate
// most significant: (i_1, ..., i_m) -> ((i_1 * n) + i_2) * n + ... with
// n = 2d+1.

/// Stationary L-kernel L(x, y) = phi(x)^T Diag(a) phi(y) on [0,1]^m.
struct FourierSpectrum {
  int m = 1;
  int d = 0;
  VectorXd a;

  Index dimension() const { return a.size(); }
};

/// (2d+1)^m, rejecting sizes that overflow.
Index fourier_dimension(int m, int d);

/// Flat index of a multi-index under the layout above.
Index fourier_flat_index(int d, const std::vector<int>& multi_index);

/// One-dimensional basis psi(z) of size 2d+1.
VectorXd fourier_basis_1d(int d, double z);

/// Tensor-product features phi(x); x must lie in [0,1]^m.
VectorXd fourier_features(int m, int d, const Eigen::Ref<const VectorXd>& x);

/// Features for every row of `points` (n x m), result n x (2d+1)^m.
MatrixXd fourier_feature_rows(int m, int d, const MatrixXd& points);

/// phi(x)^T Diag(a) phi(y).
double stationary_kernel_eval(const FourierSpectrum& spec,
                              const Eigen::Ref<const VectorXd>& x,
                              const Eigen::Ref<const VectorXd>& y);

/// Ground-truth spectrum on [0,1]^2 with a_(i,j) = C_i C_j a~_i a~_j,
/// C_0 = a~_0 = 1, C_i = 1/sqrt(2), a~_i = i^-beta. grid_side must be odd and
/// sets d = (grid_side - 1) / 2.
FourierSpectrum synth_spectrum(int grid_side, double beta);

/// Regular grid {0, 1/n, ..., (n-1)/n}^m, one point per row, in the same
/// lexicographic order as the basis layout.
MatrixXd grid_points(int m, int side);

/// Diagonal of B for the diagonal L-spectrum a when Sigma = I and alpha = 0:
/// b = a / (1 + a).
VectorXd k_spectrum_from_l(const VectorXd& a);

struct KernelGridValue {
  double x = 0.0;
  double y = 0.0;
  double k = 0.0;
};

/// K(x, q) = phi(x)^T Diag(b) phi(q) on the resolution x resolution grid of
/// [0,1)^2, row-major in (x, y). b is the K-spectrum (see k_spectrum_from_l).
std::vector<KernelGridValue> export_kernel_grid(int d, const VectorXd& b,
                                                const Eigen::Vector2d& q,
                                                int resolution);

}  // namespace subdpp

#endif  // SUBDPP_FOURIER_HPP_
