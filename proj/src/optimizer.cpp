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

#include "subdpp/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>

#include "subdpp/errors.hpp"
#include "subdpp/rng.hpp"

namespace subdpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Probe {
  double step = 0.0;
  double value = kInf;
  double slope = 0.0;
  VectorXd x;
  VectorXd grad;
  bool finite = false;
};

class LineSearch {
 public:
  LineSearch(const DifferentiableFn& f, const LbfgsOptions& opts, const VectorXd& x,
             const VectorXd& dir, double f0, double slope0)
      : f_(f), opts_(opts), x_(x), dir_(dir), f0_(f0), slope0_(slope0) {}

  int evaluations() const { return used_; }

  // Returns the accepted probe and whether the strong Wolfe conditions hold.
  std::pair<Probe, bool> run(double step0, const VectorXd& g0) {
    Probe prev{0.0, f0_, slope0_, x_, g0, true};
    double step = step0;
    while (used_ < opts_.max_line_search) {
      Probe cur = probe(step);
      if (!cur.finite || cur.value > f0_ + opts_.c1 * step * slope0_ ||
          (prev.step > 0.0 && cur.value >= prev.value)) {
        return zoom(prev, cur);
      }
      if (std::abs(cur.slope) <= -opts_.c2 * slope0_) return {cur, true};
      if (cur.slope >= 0.0) return zoom(cur, prev);
      prev = std::move(cur);
      step *= 2.0;
    }
    return {prev, false};
  }

 private:
  Probe probe(double step) {
    ++used_;
    Probe p;
    p.step = step;
    p.x = x_ + step * dir_;
    try {
      p.value = f_(p.x, &p.grad);
    } catch (const Error& e) {
      if (!is_numerical(e.kind())) throw;
      p.value = kInf;
    }
    p.finite = std::isfinite(p.value) && p.grad.size() == x_.size() && p.grad.allFinite();
    if (!p.finite) {
      p.value = kInf;
    } else {
      p.slope = p.grad.dot(dir_);
    }
    return p;
  }

  static double interpolate(const Probe& lo, const Probe& hi) {
    const double a = std::min(lo.step, hi.step);
    const double b = std::max(lo.step, hi.step);
    const double mid = 0.5 * (a + b);
    if (!hi.finite || !lo.finite) return mid;
    const double d1 =
        lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (lo.step - hi.step);
    const double disc = d1 * d1 - lo.slope * hi.slope;
    if (!(disc >= 0.0)) return mid;
    const double d2 = std::copysign(std::sqrt(disc), hi.step - lo.step);
    const double t = hi.step - (hi.step - lo.step) * (hi.slope + d2 - d1) /
                                   (hi.slope - lo.slope + 2.0 * d2);
    const double margin = 0.1 * (b - a);
    if (!std::isfinite(t) || t < a + margin || t > b - margin) return mid;
    return t;
  }

  std::pair<Probe, bool> zoom(Probe lo, Probe hi) {
    while (used_ < opts_.max_line_search) {
      const double trial = interpolate(lo, hi);
      if (!(std::abs(hi.step - lo.step) > 1e-16 * std::max(1.0, lo.step))) break;
      Probe cur = probe(trial);
      if (!cur.finite || cur.value > f0_ + opts_.c1 * trial * slope0_ ||
          cur.value >= lo.value) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.slope) <= -opts_.c2 * slope0_) return {cur, true};
        if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    return {lo, false};
  }

  const DifferentiableFn& f_;
  const LbfgsOptions& opts_;
  const VectorXd& x_;
  const VectorXd& dir_;
  double f0_;
  double slope0_;
  int used_ = 0;
};

struct Pair {
  VectorXd s;
  VectorXd y;
  double rho;
};

VectorXd two_loop(const std::deque<Pair>& pairs, const VectorXd& g) {
  VectorXd q = g;
  std::vector<double> alphas(pairs.size());
  for (std::size_t i = pairs.size(); i-- > 0;) {
    alphas[i] = pairs[i].rho * pairs[i].s.dot(q);
    q -= alphas[i] * pairs[i].y;
  }
  if (!pairs.empty()) {
    const Pair& last = pairs.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double beta = pairs[i].rho * pairs[i].y.dot(q);
    q += (alphas[i] - beta) * pairs[i].s;
  }
  return -q;
}

VectorXd flatten(const MatrixXd& m) { return Eigen::Map<const VectorXd>(m.data(), m.size()); }

MatrixXd unflatten(const VectorXd& v, Index rows, Index cols) {
  return Eigen::Map<const MatrixXd>(v.data(), rows, cols);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void append_trace(FitReport& report, int round, const char* block, const LbfgsResult& res) {
  for (std::size_t k = 1; k < res.trace.size(); ++k) {
    report.trace.push_back({round, block, static_cast<int>(k), res.trace[k]});
  }
}

VectorXd log_positive(const VectorXd& v) {
  return v.array().max(std::numeric_limits<double>::min()).log().matrix();
}

}  // namespace

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kGradientTolerance: return "gradient_tolerance";
    case Termination::kIterationLimit: return "iteration_limit";
    case Termination::kLineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

LbfgsResult lbfgs_minimize(const DifferentiableFn& f, const VectorXd& x0,
                           const LbfgsOptions& options) {
  require(options.memory >= 1 && options.max_iterations >= 0 && options.max_line_search >= 1,
          ErrorKind::kInvalidArgument, "invalid L-BFGS options");
  require(options.c1 > 0.0 && options.c1 < options.c2 && options.c2 < 1.0,
          ErrorKind::kInvalidArgument, "line search requires 0 < c1 < c2 < 1");
  LbfgsResult res;
  res.x = x0;
  res.value = f(res.x, &res.gradient);
  res.evaluations = 1;
  if (!std::isfinite(res.value) || !res.gradient.allFinite()) {
    fail(ErrorKind::kDegenerateParameter, "objective is not finite at the starting point");
  }
  res.trace.push_back(res.value);
  std::deque<Pair> pairs;
  res.termination = Termination::kIterationLimit;
  while (true) {
    if (res.gradient.norm() < options.grad_tol) {
      res.termination = Termination::kGradientTolerance;
      break;
    }
    if (res.iterations >= options.max_iterations) break;
    VectorXd dir = two_loop(pairs, res.gradient);
    double slope = res.gradient.dot(dir);
    if (!(slope < 0.0)) {
      pairs.clear();
      dir = -res.gradient;
      slope = -res.gradient.squaredNorm();
    }
    const double step0 = pairs.empty() ? 1.0 / std::sqrt(-slope) : 1.0;
    LineSearch search(f, options, res.x, dir, res.value, slope);
    auto [accepted, wolfe] = search.run(step0, res.gradient);
    res.evaluations += search.evaluations();
    if (!wolfe && !(accepted.step > 0.0 && accepted.value < res.value)) {
      res.termination = Termination::kLineSearchFailed;
      break;
    }
    VectorXd s = accepted.x - res.x;
    VectorXd y = accepted.grad - res.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      pairs.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(pairs.size()) > options.memory) pairs.pop_front();
    }
    res.x = std::move(accepted.x);
    res.value = accepted.value;
    res.gradient = std::move(accepted.grad);
    res.trace.push_back(res.value);
    ++res.iterations;
  }
  return res;
}

void OptimizerConfig::validate() const {
  require(memory >= 1, ErrorKind::kInvalidArgument, "memory must be at least 1");
  require(max_outer >= 1, ErrorKind::kInvalidArgument, "max_outer must be at least 1");
  require(inner_iters >= 0, ErrorKind::kInvalidArgument, "inner_iters must be nonnegative");
  require(c1 > 0.0 && c1 < c2 && c2 < 1.0, ErrorKind::kInvalidArgument,
          "line search requires 0 < c1 < c2 < 1");
  require(grad_tol > 0.0, ErrorKind::kInvalidArgument, "grad_tol must be positive");
}

LbfgsOptions OptimizerConfig::lbfgs() const {
  LbfgsOptions o;
  o.memory = memory;
  o.max_iterations = inner_iters;
  o.c1 = c1;
  o.c2 = c2;
  o.grad_tol = grad_tol;
  return o;
}

LowRankL FitReport::model(const GroundSet& ground, double alpha, double gamma, Index i) const {
  require(!thetas.empty(), ErrorKind::kInvalidArgument, "report holds no theta");
  const std::size_t k = thetas.size() == 1 ? 0 : static_cast<std::size_t>(i);
  require(k < thetas.size(), ErrorKind::kOutOfDomain, "theta index out of range");
  LowRankL L;
  L.alpha = alpha;
  L.gamma = gamma;
  L.U = U;
  L.theta = thetas[k];
  L.ground = ground;
  return L;
}

FactorParams initial_params(Index V, Index r, Index num_thetas, std::uint64_t seed) {
  require(V >= 1 && r >= 1 && num_thetas >= 1, ErrorKind::kInvalidArgument,
          "initial_params needs positive sizes");
  Rng rng = make_rng(seed, 0x1u);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(V)));
  FactorParams p;
  p.U.resize(V, r);
  for (Index j = 0; j < r; ++j) {
    for (Index i = 0; i < V; ++i) p.U(i, j) = normal(rng);
  }
  p.thetas.assign(static_cast<std::size_t>(num_thetas), VectorXd::Ones(r));
  return p;
}

FitReport fit(const Corpus& corpus, const GroundSet& ground, const FitSettings& settings,
              const OptimizerConfig& config, const FactorParams* init) {
  const CorpusObjective objective(ground, settings.alpha, settings.gamma, corpus,
                                  settings.penalty, settings.mode);
  return fit(objective, settings.rank, config, init);
}

FitReport fit(const CorpusObjective& objective, Index rank, const OptimizerConfig& config,
              const FactorParams* init) {
  config.validate();
  const Index V = objective.dimension();
  FactorParams params =
      init != nullptr ? *init : initial_params(V, rank, objective.num_thetas(), config.seed);
  require(params.U.rows() == V && params.U.cols() == rank, ErrorKind::kDimensionMismatch,
          "initial U has the wrong shape");
  require(static_cast<Index>(params.thetas.size()) == objective.num_thetas(),
          ErrorKind::kDimensionMismatch, "initial theta count does not match the mode");
  const LbfgsOptions opts = config.lbfgs();

  FitReport report;
  double current = objective.value(params);
  report.trace.push_back({0, "init", 0, current});
  Termination last = Termination::kIterationLimit;

  for (int round = 1; round <= config.max_outer; ++round) {
    const auto start = std::chrono::steady_clock::now();
    const double before = current;

    const DifferentiableFn fu = [&](const VectorXd& x, VectorXd* g) {
      FactorParams p{unflatten(x, V, rank), params.thetas};
      if (g == nullptr) return objective.value(p);
      FactorParams gp;
      const double v = objective.value_and_gradient(p, &gp);
      *g = flatten(gp.U);
      return v;
    };
    LbfgsResult ru = lbfgs_minimize(fu, flatten(params.U), opts);
    params.U = unflatten(ru.x, V, rank);
    current = ru.value;
    last = ru.termination;
    append_trace(report, round, "U", ru);

    const CorpusObjective::FixedU fixed = objective.fix_u(params.U);
    if (objective.mode() == ThetaMode::kShared) {
      const DifferentiableFn ft = [&](const VectorXd& eta, VectorXd* g) {
        const VectorXd theta = eta.array().exp().matrix();
        VectorXd gt;
        const double v = fixed.shared_value(theta, g != nullptr ? &gt : nullptr);
        if (g != nullptr) *g = theta.cwiseProduct(gt);
        return v;
      };
      LbfgsResult rt = lbfgs_minimize(ft, log_positive(params.thetas[0]), opts);
      params.thetas[0] = rt.x.array().exp().matrix();
      current = rt.value;
      last = rt.termination;
      append_trace(report, round, "theta", rt);
    } else {
      // F = sum_i block_i + U terms, so each block run shifts F by the same
      // amount as the block value; the trace records F itself.
      double total = current;
      for (Index i = 0; i < objective.num_observations(); ++i) {
        const DifferentiableFn ft = [&](const VectorXd& eta, VectorXd* g) {
          const VectorXd theta = eta.array().exp().matrix();
          VectorXd gt;
          const double v = fixed.block_value(i, theta, g != nullptr ? &gt : nullptr);
          if (g != nullptr) *g = theta.cwiseProduct(gt);
          return v;
        };
        auto& theta = params.thetas[static_cast<std::size_t>(i)];
        LbfgsResult rt = lbfgs_minimize(ft, log_positive(theta), opts);
        theta = rt.x.array().exp().matrix();
        const double offset = total - rt.trace.front();
        for (double& v : rt.trace) v += offset;
        total = rt.trace.back();
        last = rt.termination;
        append_trace(report, round, "theta", rt);
      }
      current = total;
    }
    report.round_seconds.push_back(seconds_since(start));
    if (before - current <= 1e-12 * (1.0 + std::abs(current))) break;
  }
  report.U = std::move(params.U);
  report.thetas = std::move(params.thetas);
  report.final_objective = current;
  report.termination = to_string(last);
  return report;
}

FitReport fit_spectrum(const Corpus& corpus, int m, int d, const PenaltyConfig& penalty,
                       const OptimizerConfig& config, const VectorXd& init_a) {
  config.validate();
  const SpectrumObjective objective(m, d, corpus, penalty);
  require(init_a.size() == objective.dimension(), ErrorKind::kDimensionMismatch,
          "initial spectrum has the wrong length");
  require((init_a.array() > 0.0).all(), ErrorKind::kOutOfDomain,
          "initial spectrum must be positive");
  const DifferentiableFn fa = [&](const VectorXd& eta, VectorXd* g) {
    const VectorXd a = eta.array().exp().matrix();
    VectorXd ga;
    const double v = objective.value_and_gradient(a, g != nullptr ? &ga : nullptr);
    if (g != nullptr) *g = a.cwiseProduct(ga);
    return v;
  };
  FitReport report;
  VectorXd eta = log_positive(init_a);
  double current = fa(eta, nullptr);
  report.trace.push_back({0, "init", 0, current});
  Termination last = Termination::kIterationLimit;
  for (int round = 1; round <= config.max_outer; ++round) {
    const auto start = std::chrono::steady_clock::now();
    LbfgsResult res = lbfgs_minimize(fa, eta, config.lbfgs());
    eta = res.x;
    const double before = current;
    current = res.value;
    last = res.termination;
    append_trace(report, round, "a", res);
    report.round_seconds.push_back(seconds_since(start));
    if (last == Termination::kGradientTolerance ||
        before - current <= 1e-12 * (1.0 + std::abs(current))) {
      break;
    }
  }
  report.spectrum = eta.array().exp().matrix();
  report.final_objective = current;
  report.termination = to_string(last);
  return report;
}

VectorXd flat_spectrum(const Corpus& corpus, int m, int d) {
  require(!corpus.empty(), ErrorKind::kInvalidArgument, "corpus must be nonempty");
  const Index V = fourier_dimension(m, d);
  double k = 0.0;
  for (const auto& X : corpus) k += static_cast<double>(X.size());
  k /= static_cast<double>(corpus.size());
  require(k > 0.0 && k < static_cast<double>(V), ErrorKind::kDegenerateParameter,
          "mean set size must lie strictly between 0 and (2d+1)^m");
  return VectorXd::Constant(V, k / (static_cast<double>(V) - k));
}

SpectrumBudget select_spectrum_budget(const Corpus& corpus, int m, int d,
                                      const PenaltyConfig& penalty, const OptimizerConfig& config,
                                      const std::vector<int>& budgets, int folds) {
  const Index M = static_cast<Index>(corpus.size());
  require(!budgets.empty(), ErrorKind::kInvalidArgument, "need at least one budget");
  require(folds >= 2 && folds <= M, ErrorKind::kInvalidArgument,
          "folds must lie in [2, corpus size]");
  for (int b : budgets) require(b >= 0, ErrorKind::kInvalidArgument, "budgets must be >= 0");
  SpectrumBudget out;
  out.budgets = budgets;
  out.validation.assign(budgets.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    const Index lo = M * f / folds, hi = M * (f + 1) / folds;
    Corpus train(corpus.begin(), corpus.begin() + lo);
    train.insert(train.end(), corpus.begin() + hi, corpus.end());
    const Corpus held(corpus.begin() + lo, corpus.begin() + hi);
    const SpectrumObjective held_ll(m, d, held, PenaltyConfig{0.0, penalty.smoothing});
    const VectorXd start = flat_spectrum(train, m, d);
    for (std::size_t j = 0; j < budgets.size(); ++j) {
      OptimizerConfig c = config;
      c.max_outer = 1;
      c.inner_iters = budgets[j];
      const FitReport r = fit_spectrum(train, m, d, penalty, c, start);
      double score = -std::numeric_limits<double>::infinity();
      try {
        score = -held_ll.value_and_gradient(r.spectrum, nullptr);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kSingularObservation) throw;
      }
      out.validation[j] += score / folds;
    }
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < budgets.size(); ++j) {
    const bool better = out.validation[j] > out.validation[best] ||
                        (out.validation[j] == out.validation[best] && budgets[j] < budgets[best]);
    if (better) best = j;
  }
  out.inner_iters = budgets[best];
  return out;
}

MatrixXd batch_gradient_u(const CorpusObjective& objective, const FactorParams& params,
                          const std::vector<Index>& batch) {
  MatrixXd grad;
  objective.batch_value_and_gradient_u(params, batch, &grad);
  return grad;
}

FitReport sgd_minimize(const CorpusObjective& objective, const FactorParams& init,
                       const SgdOptions& options) {
  const Index M = objective.num_observations();
  require(M >= 1, ErrorKind::kInvalidArgument, "SGD needs at least one observation");
  require(options.batch >= 1 && options.epochs >= 0, ErrorKind::kInvalidArgument,
          "SGD needs batch >= 1 and epochs >= 0");
  require(static_cast<bool>(options.step_size), ErrorKind::kInvalidArgument,
          "SGD needs a step-size schedule");
  FactorParams params = init;
  Rng rng = make_rng(options.seed, 0x5u);
  FitReport report;
  double current = objective.value(params);
  report.trace.push_back({0, "init", 0, current});
  std::vector<Index> order(static_cast<std::size_t>(M));
  std::iota(order.begin(), order.end(), Index{0});
  int step = 0;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    for (Index lo = 0; lo < M; lo += options.batch) {
      const Index hi = std::min(M, lo + options.batch);
      const std::vector<Index> batch(order.begin() + lo, order.begin() + hi);
      params.U -= options.step_size(step++) * batch_gradient_u(objective, params, batch);
    }
    current = objective.value(params);
    report.trace.push_back({epoch, "sgd", step, current});
    report.round_seconds.push_back(seconds_since(start));
  }
  report.U = std::move(params.U);
  report.thetas = std::move(params.thetas);
  report.final_objective = current;
  report.termination = "epoch_limit";
  return report;
}

}  // namespace subdpp
