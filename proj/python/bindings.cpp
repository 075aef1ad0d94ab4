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

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "subdpp/subdpp.hpp"

namespace py = pybind11;
using namespace subdpp;

namespace {

Corpus to_corpus(const std::vector<py::object>& sets) {
  Corpus out;
  out.reserve(sets.size());
  for (const auto& s : sets) {
    if (py::isinstance<ObservationSet>(s)) {
      out.push_back(s.cast<ObservationSet>());
    } else if (py::isinstance<py::list>(s) || py::isinstance<py::tuple>(s)) {
      out.push_back(ObservationSet::of_items(s.cast<std::vector<Index>>()));
    } else {
      out.push_back(ObservationSet::of_rows(s.cast<MatrixXd>()));
    }
  }
  return out;
}

ObservationSet to_observation(const py::object& s) { return to_corpus({s}).front(); }

}  // namespace

PYBIND11_MODULE(_subdpp, m) {
  m.doc() = "Low-rank determinantal point processes on large and continuous ground sets";
  m.attr("__version__") = SUBDPP_VERSION;

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg = std::string(to_string(e.kind())) + ": " + e.what();
      if (e.kind() == ErrorKind::kIo) {
        PyErr_SetString(PyExc_OSError, msg.c_str());
      } else if (is_numerical(e.kind())) {
        PyErr_SetString(PyExc_ArithmeticError, msg.c_str());
      } else {
        PyErr_SetString(PyExc_ValueError, msg.c_str());
      }
    }
  });

  py::class_<GroundSet>(m, "GroundSet")
      .def_static("items", &GroundSet::items, py::arg("V"))
      .def_static("hypercube", py::overload_cast<VectorXd>(&GroundSet::hypercube), py::arg("pi"))
      .def_static("integers", &GroundSet::integers, py::arg("lam"))
      .def_static("continuous_fourier", &GroundSet::continuous_fourier, py::arg("m"),
                  py::arg("d"))
      .def_property_readonly("dimension", &GroundSet::dimension)
      .def_property_readonly("name", &GroundSet::name)
      .def_property_readonly("log_cardinality", &GroundSet::log_cardinality)
      .def("second_moment", [](const GroundSet& g) { return second_moment(g).dense(); })
      .def("__repr__", [](const GroundSet& g) {
        return "<GroundSet " + g.name() + " V=" + std::to_string(g.dimension()) + ">";
      });

  py::class_<ObservationSet>(m, "ObservationSet")
      .def_static("of_items", &ObservationSet::of_items)
      .def_static("of_rows", &ObservationSet::of_rows)
      .def("__len__", &ObservationSet::size)
      .def_property_readonly("items", &ObservationSet::items)
      .def_property_readonly("rows", &ObservationSet::rows);

  py::class_<LowRankL>(m, "LowRankL")
      .def(py::init([](const GroundSet& g, MatrixXd U, VectorXd theta, double alpha, double gamma) {
             LowRankL L;
             L.ground = g;
             L.U = std::move(U);
             L.theta = std::move(theta);
             L.alpha = alpha;
             L.gamma = gamma;
             L.validate();
             return L;
           }),
           py::arg("ground"), py::arg("U"), py::arg("theta"), py::arg("alpha") = 0.0,
           py::arg("gamma") = 0.0)
      .def_readwrite("U", &LowRankL::U)
      .def_readwrite("theta", &LowRankL::theta)
      .def_readwrite("alpha", &LowRankL::alpha)
      .def_readwrite("gamma", &LowRankL::gamma)
      .def_readwrite("ground", &LowRankL::ground)
      .def_property_readonly("rank", &LowRankL::rank)
      .def("dense_a", &LowRankL::dense_a);

  m.def("log_det_l_plus_i", [](const LowRankL& L) { return log_det_l_plus_i(L); });
  m.def("expected_cardinality", &expected_cardinality);
  m.def(
      "log_likelihood",
      [](const LowRankL& L, const py::object& X) { return log_likelihood(L, to_observation(X)); },
      py::arg("L"), py::arg("X"));
  m.def(
      "k_from_l",
      [](const LowRankL& L) {
        const LowRankK K = k_from_l(L);
        return py::make_tuple(K.sigma, K.B);
      },
      "Marginal kernel (sigma, B) of L");
  m.def(
      "l_from_k",
      [](const GroundSet& g, double sigma, const MatrixXd& B) {
        const DenseL L = l_from_k(LowRankK{sigma, B, g});
        return py::make_tuple(L.alpha, L.A);
      },
      py::arg("ground"), py::arg("sigma"), py::arg("B"));

  m.def(
      "objective",
      [](const GroundSet& g, const std::vector<py::object>& corpus, const MatrixXd& U,
         const std::vector<VectorXd>& thetas, double alpha, double gamma, double penalty,
         bool per_observation) {
        const CorpusObjective obj(g, alpha, gamma, to_corpus(corpus), PenaltyConfig{penalty, 1e-8},
                                  per_observation ? ThetaMode::kPerObservation : ThetaMode::kShared);
        FactorParams grad;
        const double v = obj.value_and_gradient(FactorParams{U, thetas}, &grad);
        return py::make_tuple(v, grad.U, grad.thetas);
      },
      py::arg("ground"), py::arg("corpus"), py::arg("U"), py::arg("thetas"),
      py::arg("alpha") = 0.0, py::arg("gamma") = 0.0, py::arg("penalty") = 0.01,
      py::arg("per_observation") = false, "Objective value and gradients (U, thetas)");

  m.def(
      "fit",
      [](const GroundSet& g, const std::vector<py::object>& corpus, Index rank, double alpha,
         double gamma, double penalty, bool per_observation, int max_outer, int inner_iters,
         std::uint64_t seed) {
        FitSettings s;
        s.rank = rank;
        s.alpha = alpha;
        s.gamma = gamma;
        s.penalty.weight = penalty;
        s.mode = per_observation ? ThetaMode::kPerObservation : ThetaMode::kShared;
        OptimizerConfig c;
        c.max_outer = max_outer;
        c.inner_iters = inner_iters;
        c.seed = seed;
        FitReport rep;
        {
          py::gil_scoped_release release;
          rep = fit(to_corpus(corpus), g, s, c);
        }
        std::vector<double> trace;
        for (const auto& t : rep.trace) trace.push_back(t.objective);
        py::dict out;
        out["U"] = rep.U;
        out["thetas"] = rep.thetas;
        out["objective"] = rep.final_objective;
        out["trace"] = trace;
        out["termination"] = rep.termination;
        return out;
      },
      py::arg("ground"), py::arg("corpus"), py::arg("rank"), py::arg("alpha") = 0.0,
      py::arg("gamma") = 0.0, py::arg("penalty") = 0.01, py::arg("per_observation") = false,
      py::arg("max_outer") = 10, py::arg("inner_iters") = 100, py::arg("seed") = 0);

  m.def(
      "sample",
      [](const LowRankL& L, Index count, std::uint64_t seed, Index cap) {
        Rng rng = make_rng(seed, 0);
        const Corpus c = sample_corpus(L, count, rng, cap);
        return std::vector<ObservationSet>(c.begin(), c.end());
      },
      py::arg("L"), py::arg("count"), py::arg("seed") = 0, py::arg("cap") = kDefaultDenseCap,
      "Exact draws on the enumerated ground set");
  m.def(
      "sample_kernel",
      [](const MatrixXd& L, Index count, std::uint64_t seed) {
        const DenseDPP dpp = build_dense(L);
        Rng rng = make_rng(seed, 0);
        std::vector<std::vector<Index>> out;
        for (Index i = 0; i < count; ++i) out.push_back(sample_dpp(dpp, rng));
        return out;
      },
      py::arg("L"), py::arg("count"), py::arg("seed") = 0, "Exact draws from a dense PSD L");
  m.def(
      "dense_l", [](const LowRankL& L, Index cap) { return dense_l(L, cap); }, py::arg("L"),
      py::arg("cap") = kDefaultDenseCap);

  m.def("greedy_map", py::overload_cast<const MatrixXd&, Index>(&greedy_map), py::arg("kernel"),
        py::arg("l"));
  py::class_<GreedyResult>(m, "GreedyResult")
      .def_readonly("selected", &GreedyResult::selected)
      .def_readonly("gains", &GreedyResult::gains)
      .def_readonly("log_det", &GreedyResult::log_det);

  m.def(
      "subspace_distance",
      [](const MatrixXd& U, const MatrixXd& U_star) { return subspace_distance(U, U_star).value; },
      py::arg("U"), py::arg("U_star"));
  m.def(
      "chance_level",
      [](Index V, Index r, int trials, std::uint64_t seed) {
        const ChanceLevel c = chance_level(V, r, trials, seed);
        py::dict out;
        out["analytic"] = c.analytic;
        out["mean"] = c.mean;
        out["mean_stderr"] = c.mean_stderr;
        out["mean_squared"] = c.mean_squared;
        out["mean_squared_stderr"] = c.mean_squared_stderr;
        return out;
      },
      py::arg("V"), py::arg("r"), py::arg("trials") = 1000, py::arg("seed") = 0);
  m.def(
      "best_diagonal_baseline",
      [](const std::vector<py::object>& corpus, const GroundSet& g) {
        return best_diagonal_baseline(to_corpus(corpus), g).eta;
      },
      py::arg("corpus"), py::arg("ground"));

  m.def(
      "fourier_features",
      [](int m_, int d, const VectorXd& x) { return fourier_features(m_, d, x); },
      py::arg("m"), py::arg("d"), py::arg("x"));
  m.def(
      "synth_spectrum", [](int side, double beta) { return synth_spectrum(side, beta).a; },
      py::arg("grid_side"), py::arg("beta"));

  m.def("split_sentences", [](const std::string& t) { return split_sentences(t); });
  m.def("tokenize", [](const std::string& t) { return tokenize(t); });
  m.def("word_cosine_neighbors", &word_cosine_neighbors, py::arg("U"), py::arg("w"),
        py::arg("k"));
}
