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

// Brute-force reference computations for tests. Everything here enumerates
// the ground set and works with explicit N x N matrices, so it shares no code
// path with the factored library routines.
#ifndef SUBDPP_TESTS_SUPPORT_DENSE_ORACLE_HPP_
#define SUBDPP_TESTS_SUPPORT_DENSE_ORACLE_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "subdpp/kernel_family.hpp"

namespace subdpp::oracle {

// One enumerated item: its raw coordinates, features and base-measure mass.
struct Enumerated {
  MatrixXd points;    // N x dim (empty for items)
  MatrixXd features;  // N x V
  VectorXd mass;      // N
};

inline VectorXd fourier_1d(double x, int d) {
  VectorXd out(2 * d + 1);
  out(0) = 1.0;
  for (int k = 1; k <= d; ++k) {
    out(2 * k - 1) = std::sqrt(2.0) * std::cos(2.0 * M_PI * k * x);
    out(2 * k) = std::sqrt(2.0) * std::sin(2.0 * M_PI * k * x);
  }
  return out;
}

// Tensor product with the first coordinate most significant.
inline VectorXd fourier_nd(const VectorXd& x, int d) {
  VectorXd out = VectorXd::Ones(1);
  for (Index c = 0; c < x.size(); ++c) {
    const VectorXd f = fourier_1d(x(c), d);
    VectorXd next(out.size() * f.size());
    for (Index i = 0; i < out.size(); ++i) {
      for (Index j = 0; j < f.size(); ++j) next(i * f.size() + j) = out(i) * f(j);
    }
    out = next;
  }
  return out;
}

// Items: identity features, unit mass. Hypercube: all 2^V bit vectors with
// item i holding bit j = (i >> j) & 1. Fourier: lexicographic grid of the
// given side with mass 1/N.
inline Enumerated enumerate(const GroundSet& g, int grid_side = 0) {
  Enumerated e;
  if (g.kind() == GroundKind::kItems) {
    const Index V = g.dimension();
    e.features = MatrixXd::Identity(V, V);
    e.mass = VectorXd::Ones(V);
  } else if (g.kind() == GroundKind::kHypercube) {
    const VectorXd pi = std::get<Hypercube>(g.variant()).pi;
    const Index V = pi.size();
    const Index N = Index{1} << V;
    e.points.resize(N, V);
    e.mass.resize(N);
    for (Index i = 0; i < N; ++i) {
      double p = 1.0;
      for (Index j = 0; j < V; ++j) {
        const bool bit = ((i >> j) & 1) != 0;
        e.points(i, j) = bit ? 1.0 : 0.0;
        p *= bit ? pi(j) : 1.0 - pi(j);
      }
      e.mass(i) = p;
    }
    e.features = e.points;
  } else if (g.kind() == GroundKind::kContinuousFourier) {
    const auto cf = std::get<ContinuousFourier>(g.variant());
    const int side = grid_side == 0 ? 2 * cf.d + 1 : grid_side;
    Index N = 1;
    for (int c = 0; c < cf.m; ++c) N *= side;
    e.points.resize(N, cf.m);
    for (Index i = 0; i < N; ++i) {
      Index rest = i;
      for (int c = cf.m - 1; c >= 0; --c) {
        e.points(i, c) = static_cast<double>(rest % side) / side;
        rest /= side;
      }
    }
    e.features.resize(N, g.dimension());
    for (Index i = 0; i < N; ++i) e.features.row(i) = fourier_nd(e.points.row(i).transpose(), cf.d);
    e.mass = VectorXd::Constant(N, 1.0 / static_cast<double>(N));
  } else {
    throw std::invalid_argument("oracle cannot enumerate this ground set");
  }
  return e;
}

inline MatrixXd dense_a(const LowRankL& L) {
  MatrixXd A = L.gamma * MatrixXd::Identity(L.U.rows(), L.U.rows());
  for (Index k = 0; k < L.U.cols(); ++k) A += L.theta(k) * L.U.col(k) * L.U.col(k).transpose();
  return A;
}

// L(x, y) = alpha [x = y] + sqrt(p(x) p(y)) phi(x)^T A phi(y), entry by entry.
inline MatrixXd dense_l(const LowRankL& L, const Enumerated& e) {
  const MatrixXd fa = e.features * dense_a(L);
  const Index N = e.features.rows();
  MatrixXd out(N, N);
  for (Index i = 0; i < N; ++i) {
    for (Index j = 0; j < N; ++j) {
      out(i, j) = std::sqrt(e.mass(i) * e.mass(j)) * fa.row(i).dot(e.features.row(j));
    }
    out(i, i) += L.alpha;
  }
  return out;
}

inline double log_det(const MatrixXd& m) {
  Eigen::PartialPivLU<MatrixXd> lu(m);
  double s = 0.0;
  for (Index i = 0; i < m.rows(); ++i) s += std::log(std::abs(lu.matrixLU()(i, i)));
  return s;
}

inline double log_det_l_plus_i(const MatrixXd& dense) {
  Eigen::LLT<MatrixXd> llt(dense + MatrixXd::Identity(dense.rows(), dense.cols()));
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

inline MatrixXd marginal_kernel(const MatrixXd& dense) {
  const MatrixXd I = MatrixXd::Identity(dense.rows(), dense.cols());
  return I - (dense + I).inverse();
}

// Row of `e` equal to `x` (exact match).
inline Index find_item(const Enumerated& e, const VectorXd& x) {
  for (Index i = 0; i < e.points.rows(); ++i) {
    if ((e.points.row(i).transpose() - x).cwiseAbs().maxCoeff() < 1e-12) return i;
  }
  throw std::invalid_argument("point not in the enumeration");
}

inline std::vector<Index> indices_of(const Enumerated& e, const ObservationSet& X) {
  if (X.holds_items()) return X.items();
  std::vector<Index> idx;
  for (Index r = 0; r < X.rows().rows(); ++r) idx.push_back(find_item(e, X.rows().row(r).transpose()));
  return idx;
}

inline MatrixXd principal(const MatrixXd& m, const std::vector<Index>& idx) {
  const auto n = static_cast<Index>(idx.size());
  MatrixXd out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) out(i, j) = m(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return out;
}

// log P(X) under the enumerated DPP.
inline double log_likelihood(const MatrixXd& dense, const std::vector<Index>& idx) {
  return log_det(principal(dense, idx)) - log_det_l_plus_i(dense);
}

// Brute-force Sigma = sum_x p(x) phi(x) phi(x)^T.
inline MatrixXd second_moment(const Enumerated& e) {
  return e.features.transpose() * e.mass.asDiagonal() * e.features;
}

}  // namespace subdpp::oracle

#endif  // SUBDPP_TESTS_SUPPORT_DENSE_ORACLE_HPP_
