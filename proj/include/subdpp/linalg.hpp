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

#ifndef SUBDPP_LINALG_HPP_
#define SUBDPP_LINALG_HPP_

// Small dense helpers shared by the numerical modules.

#include <Eigen/Dense>

#include <cmath>

#include "subdpp/errors.hpp"

namespace subdpp {

using Eigen::ArrayXd;

/// log det of a symmetric positive definite matrix via Cholesky. Throws
/// `kind` on a non-positive pivot instead of returning NaN.
inline double log_det_spd(const Eigen::MatrixXd& m, ErrorKind kind) {
  if (m.rows() == 0) return 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) fail(kind, "matrix is not positive definite");
  const double value = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  if (!std::isfinite(value)) fail(kind, "log-determinant is not finite");
  return value;
}

template <class Rhs>
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& m, const Rhs& rhs, ErrorKind kind) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) fail(kind, "matrix is not positive definite");
  return llt.solve(rhs);
}

}  // namespace subdpp

#endif  // SUBDPP_LINALG_HPP_
