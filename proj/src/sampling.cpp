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

#include "subdpp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "subdpp/errors.hpp"

namespace subdpp {

namespace {

constexpr int kReorthonormalizeEvery = 16;

int resolve_side(const ContinuousFourier& c, int grid_side) {
  const int side = grid_side == 0 ? 2 * c.d + 1 : grid_side;
  require(side >= 1, ErrorKind::kInvalidArgument, "grid side must be positive");
  return side;
}

MatrixXd orthonormal_columns(const MatrixXd& m) {
  Eigen::HouseholderQR<MatrixXd> qr(m);
  return qr.householderQ() * MatrixXd::Identity(m.rows(), m.cols());
}

// Weighted features sqrt(p(x)) phi(x)^T, one row per enumerated item.
MatrixXd weighted_features(const GroundSet& g, const MatrixXd& points, Index n) {
  if (g.kind() == GroundKind::kItems) return MatrixXd::Identity(n, n);
  const ObservationSet all = ObservationSet::of_rows(points);
  MatrixXd psi = embed(g, all);
  VectorXd scale;
  if (g.kind() == GroundKind::kContinuousFourier) {
    scale = VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  } else {
    scale = (0.5 * log_base_measure(g, all).array()).exp().matrix();
  }
  return scale.asDiagonal() * psi;
}

void clamp_spectrum(VectorXd& eig) {
  const double scale = 1.0 + (eig.size() > 0 ? eig.cwiseAbs().maxCoeff() : 0.0);
  for (Index i = 0; i < eig.size(); ++i) {
    if (eig(i) < 0.0) {
      if (eig(i) < -1e-10 * scale) {
        fail(ErrorKind::kDegenerateParameter, "kernel has a negative eigenvalue");
      }
      eig(i) = 0.0;
    }
  }
}

}  // namespace

Index enumerated_size(const GroundSet& ground, Index cap, int grid_side) {
  require(cap >= 1, ErrorKind::kInvalidArgument, "cap must be positive");
  return std::visit(
      [&](const auto& g) -> Index {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Items>) {
          if (g.V > cap) fail(ErrorKind::kGroundSetTooLarge, "item catalog exceeds the cap");
          return g.V;
        } else if constexpr (std::is_same_v<T, Hypercube>) {
          const Index V = g.pi.size();
          if (V >= 62 || (Index{1} << V) > cap) {
            fail(ErrorKind::kGroundSetTooLarge, "2^V exceeds the cap");
          }
          return Index{1} << V;
        } else if constexpr (std::is_same_v<T, Integers>) {
          fail(ErrorKind::kGroundSetTooLarge, "the integer lattice cannot be enumerated");
        } else {
          const int side = resolve_side(g, grid_side);
          double n = 1.0;
          for (int k = 0; k < g.m; ++k) n *= side;
          if (n > static_cast<double>(cap)) {
            fail(ErrorKind::kGroundSetTooLarge, "grid exceeds the cap");
          }
          return static_cast<Index>(n);
        }
      },
      ground.variant());
}

MatrixXd enumerate_ground(const GroundSet& ground, Index cap, int grid_side) {
  const Index n = enumerated_size(ground, cap, grid_side);
  return std::visit(
      [&](const auto& g) -> MatrixXd {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Hypercube>) {
          const Index V = g.pi.size();
          MatrixXd rows(n, V);
          for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < V; ++j) rows(i, j) = static_cast<double>((i >> j) & 1);
          }
          return rows;
        } else if constexpr (std::is_same_v<T, ContinuousFourier>) {
          return grid_points(g.m, resolve_side(g, grid_side));
        } else {
          return MatrixXd();
        }
      },
      ground.variant());
}

MatrixXd dense_l(const LowRankL& L, Index cap, int grid_side) {
  L.validate();
  const Index n = enumerated_size(L.ground, cap, grid_side);
  const MatrixXd psi = weighted_features(L.ground, enumerate_ground(L.ground, cap, grid_side), n);
  MatrixXd out = psi * L.dense_a() * psi.transpose();
  out.diagonal().array() += L.alpha;
  return out;
}

SpectralFactory::SpectralFactory(const GroundSet& ground, double alpha, Index cap, int grid_side)
    : ground_(ground), alpha_(alpha) {
  require(std::isfinite(alpha) && alpha >= 0.0, ErrorKind::kInvalidArgument,
          "alpha must be finite and nonnegative");
  const Index n = enumerated_size(ground, cap, grid_side);
  points_ = enumerate_ground(ground, cap, grid_side);
  const MatrixXd psi = weighted_features(ground, points_, n);
  const Index k = std::min(n, psi.cols());
  Eigen::HouseholderQR<MatrixXd> qr(psi);
  q_ = qr.householderQ() * MatrixXd::Identity(n, k);
  r_ = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
}

DenseDPP SpectralFactory::build(const MatrixXd& A) const {
  require(A.rows() == r_.cols() && A.cols() == r_.cols(), ErrorKind::kDimensionMismatch,
          "A does not match the embedding dimension");
  // L = alpha I + Q (R A R^T) Q^T.
  const MatrixXd core = r_ * A * r_.transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (core + core.transpose()));
  require(eig.info() == Eigen::Success, ErrorKind::kSingularMatrix,
          "eigendecomposition failed");
  VectorXd values = eig.eigenvalues();
  clamp_spectrum(values);
  DenseDPP dpp;
  dpp.ground = ground_;
  dpp.points = points_;
  dpp.basis = q_ * eig.eigenvectors();
  dpp.eigenvalues = values.array() + alpha_;
  dpp.complement_eigenvalue = alpha_;
  return dpp;
}

DenseDPP build_dense(const LowRankL& L, Index cap, int grid_side) {
  L.validate();
  return SpectralFactory(L.ground, L.alpha, cap, grid_side).build(L.dense_a());
}

DenseDPP build_dense(const MatrixXd& L, Index cap) {
  require(L.rows() == L.cols(), ErrorKind::kDimensionMismatch, "L must be square");
  require(L.rows() <= cap, ErrorKind::kGroundSetTooLarge, "matrix exceeds the cap");
  require(L.allFinite(), ErrorKind::kOutOfDomain, "L must be finite");
  DenseDPP dpp;
  dpp.ground = GroundSet::items(L.rows());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (L + L.transpose()));
  require(eig.info() == Eigen::Success, ErrorKind::kSingularMatrix,
          "eigendecomposition failed");
  dpp.eigenvalues = eig.eigenvalues();
  clamp_spectrum(dpp.eigenvalues);
  dpp.basis = eig.eigenvectors();
  return dpp;
}

MatrixXd DenseDPP::marginal_kernel() const {
  const VectorXd w = eigenvalues.array() / (1.0 + eigenvalues.array());
  MatrixXd k = basis * w.asDiagonal() * basis.transpose();
  if (complement_eigenvalue != 0.0 && basis.cols() < size()) {
    const double c = complement_eigenvalue / (1.0 + complement_eigenvalue);
    MatrixXd proj = -basis * basis.transpose();
    proj.diagonal().array() += 1.0;
    k += c * proj;
  }
  return k;
}

MatrixXd DenseDPP::kernel() const {
  MatrixXd l = basis * eigenvalues.asDiagonal() * basis.transpose();
  if (complement_eigenvalue != 0.0 && basis.cols() < size()) {
    MatrixXd proj = -basis * basis.transpose();
    proj.diagonal().array() += 1.0;
    l += complement_eigenvalue * proj;
  }
  return l;
}

ObservationSet DenseDPP::observation(const std::vector<Index>& items) const {
  if (ground.kind() == GroundKind::kItems) return ObservationSet::of_items(items);
  MatrixXd rows(static_cast<Index>(items.size()), points.cols());
  for (std::size_t j = 0; j < items.size(); ++j) {
    require(items[j] >= 0 && items[j] < points.rows(), ErrorKind::kOutOfDomain,
            "item index out of range");
    rows.row(static_cast<Index>(j)) = points.row(items[j]);
  }
  return ObservationSet::of_rows(std::move(rows));
}

std::vector<Index> sample_dpp(const DenseDPP& dpp, Rng& rng) {
  const Index n = dpp.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Index> chosen;
  for (Index j = 0; j < dpp.eigenvalues.size(); ++j) {
    const double lam = dpp.eigenvalues(j);
    if (lam > 0.0 && unit(rng) < lam / (1.0 + lam)) chosen.push_back(j);
  }
  Index extra = 0;
  const Index complement_dim = n - dpp.basis.cols();
  if (dpp.complement_eigenvalue > 0.0 && complement_dim > 0) {
    const double c = dpp.complement_eigenvalue / (1.0 + dpp.complement_eigenvalue);
    extra = std::binomial_distribution<Index>(complement_dim, c)(rng);
  }
  const Index k = static_cast<Index>(chosen.size()) + extra;
  std::vector<Index> out;
  if (k == 0) return out;

  MatrixXd v(n, k);
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    v.col(static_cast<Index>(j)) = dpp.basis.col(chosen[j]);
  }
  if (extra > 0) {
    // Any orthonormal basis of a degenerate eigenspace is a valid eigenbasis,
    // so a Haar-random one can stand in for the missing complement vectors.
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd g(n, extra);
    for (Index j = 0; j < extra; ++j) {
      for (Index i = 0; i < n; ++i) g(i, j) = normal(rng);
    }
    g -= dpp.basis * (dpp.basis.transpose() * g);
    g -= dpp.basis * (dpp.basis.transpose() * g);
    v.rightCols(extra) = orthonormal_columns(g);
  }

  out.reserve(static_cast<std::size_t>(k));
  VectorXd weights(n);
  for (Index step = 0; v.cols() > 0; ++step) {
    weights = v.rowwise().squaredNorm();
    for (Index idx : out) weights(idx) = 0.0;
    const double total = weights.sum();
    double u = unit(rng) * total;
    Index pick = n - 1;
    for (Index i = 0; i < n; ++i) {
      u -= weights(i);
      if (u < 0.0 && weights(i) > 0.0) {
        pick = i;
        break;
      }
    }
    while (weights(pick) <= 0.0 && pick > 0) --pick;
    out.push_back(pick);
    if (v.cols() == 1) break;
    // Reflect the basis so that only its first column touches e_pick, then
    // drop that column: the rest spans the part of span(v) orthogonal to e_pick.
    VectorXd row = v.row(pick).transpose();
    double tau = 0.0;
    double beta = 0.0;
    VectorXd essential(row.size() - 1);
    row.makeHouseholder(essential, tau, beta);
    Eigen::VectorXd work(n);
    v.applyHouseholderOnTheRight(essential, tau, work.data());
    v = v.rightCols(v.cols() - 1).eval();
    if ((step + 1) % kReorthonormalizeEvery == 0) v = orthonormal_columns(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

MatrixXd sample_uniform_iid(Index n, int m, Rng& rng) {
  require(n >= 0 && m >= 1, ErrorKind::kInvalidArgument, "need n >= 0 and m >= 1");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MatrixXd pts(n, m);
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) pts(i, j) = unit(rng);
  }
  return pts;
}

LowRankL random_low_rank(const GroundSet& ground, Index r, double alpha, double gamma,
                         double theta_low, double theta_high, Rng& rng) {
  require(r >= 1, ErrorKind::kInvalidArgument, "rank must be positive");
  require(0.0 <= theta_low && theta_low <= theta_high, ErrorKind::kInvalidArgument,
          "need 0 <= theta_low <= theta_high");
  LowRankL L;
  L.ground = ground;
  L.alpha = alpha;
  L.gamma = gamma;
  const Index V = ground.dimension();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(theta_low, theta_high);
  L.U.resize(V, r);
  for (Index j = 0; j < r; ++j) {
    for (Index i = 0; i < V; ++i) L.U(i, j) = normal(rng);
  }
  L.theta.resize(r);
  for (Index k = 0; k < r; ++k) L.theta(k) = unit(rng);
  L.validate();
  return L;
}

Corpus sample_corpus(const LowRankL& L, Index M, Rng& rng, Index cap, int grid_side) {
  require(M >= 0, ErrorKind::kInvalidArgument, "M must be nonnegative");
  const DenseDPP dpp = build_dense(L, cap, grid_side);
  Corpus out;
  out.reserve(static_cast<std::size_t>(M));
  for (Index i = 0; i < M; ++i) out.push_back(dpp.observation(sample_dpp(dpp, rng)));
  return out;
}

Corpus sample_corpus(const LowRankL& L, const std::vector<VectorXd>& thetas, Rng& rng, Index cap,
                     int grid_side) {
  L.validate();
  const SpectralFactory factory(L.ground, L.alpha, cap, grid_side);
  LowRankL Li = L;
  Corpus out;
  out.reserve(thetas.size());
  for (const auto& theta : thetas) {
    Li.theta = theta;
    Li.validate();
    const DenseDPP dpp = factory.build(Li.dense_a());
    out.push_back(dpp.observation(sample_dpp(dpp, rng)));
  }
  return out;
}

Corpus sample_corpus(const FourierSpectrum& spec, Index M, Rng& rng, Index cap) {
  require(M >= 0, ErrorKind::kInvalidArgument, "M must be nonnegative");
  require((spec.a.array() >= 0.0).all(), ErrorKind::kOutOfDomain, "spectrum must be nonnegative");
  const SpectralFactory factory(GroundSet::continuous_fourier(spec.m, spec.d), 0.0, cap);
  const DenseDPP dpp = factory.build(spec.a.asDiagonal().toDenseMatrix());
  Corpus out;
  out.reserve(static_cast<std::size_t>(M));
  for (Index i = 0; i < M; ++i) out.push_back(dpp.observation(sample_dpp(dpp, rng)));
  return out;
}

}  // namespace subdpp
