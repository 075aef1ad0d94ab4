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

#include "subdpp/fourier.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "subdpp/errors.hpp"

namespace subdpp {

Index fourier_dimension(int m, int d) {
  require(m >= 1, ErrorKind::kInvalidArgument, "fourier dimension m must be >= 1");
  require(d >= 0, ErrorKind::kInvalidArgument, "fourier cutoff d must be >= 0");
  const Index side = 2 * static_cast<Index>(d) + 1;
  Index v = 1;
  for (int i = 0; i < m; ++i) {
    require(v <= std::numeric_limits<Index>::max() / side,
            ErrorKind::kInvalidArgument, "fourier embedding dimension overflows");
    v *= side;
  }
  return v;
}

Index fourier_flat_index(int d, const std::vector<int>& multi_index) {
  const Index side = 2 * static_cast<Index>(d) + 1;
  Index flat = 0;
  for (int i : multi_index) {
    require(i >= 0 && i < side, ErrorKind::kOutOfDomain, "frequency index out of range");
    flat = flat * side + i;
  }
  return flat;
}

VectorXd fourier_basis_1d(int d, double z) {
  VectorXd psi(2 * d + 1);
  psi(0) = 1.0;
  for (int k = 1; k <= d; ++k) {
    const double angle = 2.0 * std::numbers::pi * k * z;
    psi(2 * k - 1) = std::numbers::sqrt2 * std::cos(angle);
    psi(2 * k) = std::numbers::sqrt2 * std::sin(angle);
  }
  return psi;
}

VectorXd fourier_features(int m, int d, const Eigen::Ref<const VectorXd>& x) {
  require(x.size() == m, ErrorKind::kDimensionMismatch, "point dimension differs from m");
  for (Index i = 0; i < m; ++i) {
    require(std::isfinite(x(i)) && x(i) >= 0.0 && x(i) <= 1.0, ErrorKind::kOutOfDomain,
            "point outside [0,1]^m");
  }
  const Index side = 2 * static_cast<Index>(d) + 1;
  VectorXd phi = VectorXd::Ones(1);
  for (Index c = 0; c < m; ++c) {
    const VectorXd psi = fourier_basis_1d(d, x(c));
    VectorXd next(phi.size() * side);
    for (Index i = 0; i < phi.size(); ++i) {
      next.segment(i * side, side) = phi(i) * psi;
    }
    phi = std::move(next);
  }
  return phi;
}

MatrixXd fourier_feature_rows(int m, int d, const MatrixXd& points) {
  require(points.cols() == m, ErrorKind::kDimensionMismatch, "points must have m columns");
  MatrixXd features(points.rows(), fourier_dimension(m, d));
  for (Index i = 0; i < points.rows(); ++i) {
    features.row(i) = fourier_features(m, d, points.row(i).transpose()).transpose();
  }
  return features;
}

double stationary_kernel_eval(const FourierSpectrum& spec,
                              const Eigen::Ref<const VectorXd>& x,
                              const Eigen::Ref<const VectorXd>& y) {
  require(spec.a.size() == fourier_dimension(spec.m, spec.d),
          ErrorKind::kDimensionMismatch, "spectrum length differs from (2d+1)^m");
  const VectorXd fx = fourier_features(spec.m, spec.d, x);
  const VectorXd fy = fourier_features(spec.m, spec.d, y);
  return fx.dot(spec.a.cwiseProduct(fy));
}

FourierSpectrum synth_spectrum(int grid_side, double beta) {
  require(grid_side >= 1 && grid_side % 2 == 1, ErrorKind::kInvalidArgument,
          "grid side must be odd");
  require(beta > 0.0, ErrorKind::kInvalidArgument, "decay beta must be positive");
  VectorXd weight(grid_side);
  weight(0) = 1.0;
  for (int i = 1; i < grid_side; ++i) {
    weight(i) = std::pow(static_cast<double>(i), -beta) / std::numbers::sqrt2;
  }
  FourierSpectrum spec;
  spec.m = 2;
  spec.d = (grid_side - 1) / 2;
  spec.a.resize(static_cast<Index>(grid_side) * grid_side);
  for (int i = 0; i < grid_side; ++i) {
    for (int j = 0; j < grid_side; ++j) {
      spec.a(static_cast<Index>(i) * grid_side + j) = weight(i) * weight(j);
    }
  }
  return spec;
}

MatrixXd grid_points(int m, int side) {
  require(m >= 1 && side >= 1, ErrorKind::kInvalidArgument, "grid needs m >= 1, side >= 1");
  Index n = 1;
  for (int i = 0; i < m; ++i) n *= side;
  MatrixXd points(n, m);
  for (Index row = 0; row < n; ++row) {
    Index rest = row;
    for (int c = m - 1; c >= 0; --c) {
      points(row, c) = static_cast<double>(rest % side) / side;
      rest /= side;
    }
  }
  return points;
}

VectorXd k_spectrum_from_l(const VectorXd& a) {
  require((a.array() >= 0.0).all(), ErrorKind::kInvalidArgument, "spectrum must be nonnegative");
  return (a.array() / (1.0 + a.array())).matrix();
}

std::vector<KernelGridValue> export_kernel_grid(int d, const VectorXd& b,
                                                const Eigen::Vector2d& q,
                                                int resolution) {
  require(b.size() == fourier_dimension(2, d), ErrorKind::kDimensionMismatch,
          "K-spectrum length differs from (2d+1)^2");
  require(resolution >= 1, ErrorKind::kInvalidArgument, "resolution must be >= 1");
  const VectorXd weighted_q = b.cwiseProduct(fourier_features(2, d, q));
  std::vector<KernelGridValue> out;
  out.reserve(static_cast<std::size_t>(resolution) * resolution);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      const Eigen::Vector2d x(static_cast<double>(i) / resolution,
                              static_cast<double>(j) / resolution);
      out.push_back({x(0), x(1), fourier_features(2, d, x).dot(weighted_q)});
    }
  }
  return out;
}

}  // namespace subdpp
