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

#include "subdpp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "subdpp/errors.hpp"

namespace subdpp {

namespace {

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

VectorXd to_vector(const Json& j, const char* what) {
  if (!j.is_array()) fail(ErrorKind::kIo, std::string(what) + " must be an array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(ErrorKind::kIo, std::string(what) + " must hold numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

Json matrix_rows(const MatrixXd& m, bool integral) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) {
      if (integral) {
        row.push_back(static_cast<long long>(std::llround(m(i, j))));
      } else {
        row.push_back(m(i, j));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_rows(const Json& j, Index cols, const char* what) {
  if (!j.is_array()) fail(ErrorKind::kIo, std::string(what) + " must be an array of rows");
  if (!j.empty()) cols = static_cast<Index>(j[0].size());
  MatrixXd m(static_cast<Index>(j.size()), std::max<Index>(cols, 0));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const VectorXd row = to_vector(j[i], what);
    if (row.size() != m.cols()) fail(ErrorKind::kIo, std::string(what) + " rows are ragged");
    m.row(static_cast<Index>(i)) = row.transpose();
  }
  return m;
}

std::string csv_header(const Json& meta) { return "# meta " + meta.dump() + "\n"; }

void write_file(const std::string& path, const std::string& content) { write_text(path, content); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string config_hash(const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json make_meta(const Json& config, std::uint64_t seed) {
  return Json{{"tool", "subdpp"},
              {"version", SUBDPP_VERSION},
              {"config_hash", config_hash(config)},
              {"seed", seed}};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  out << content;
  if (!out) fail(ErrorKind::kIo, "write failed for " + path);
}

Json read_json(const std::string& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::exception& e) {
    fail(ErrorKind::kIo, path + ": " + e.what());
  }
}

void write_json(const std::string& path, const Json& value) {
  write_file(path, value.dump(2) + "\n");
}

Json ground_to_json(const GroundSet& ground) {
  return std::visit(
      [](const auto& g) -> Json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Items>) {
          return Json{{"type", "items"}, {"V", g.V}};
        } else if constexpr (std::is_same_v<T, Hypercube>) {
          return Json{{"type", "hypercube"}, {"pi", to_std(g.pi)}};
        } else if constexpr (std::is_same_v<T, Integers>) {
          return Json{{"type", "integers"}, {"lambda", to_std(g.lambda)}};
        } else {
          return Json{{"type", "continuous_fourier"}, {"m", g.m}, {"d", g.d}};
        }
      },
      ground.variant());
}

GroundSet ground_from_json(const Json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "items") return GroundSet::items(j.at("V").get<Index>());
    if (type == "hypercube") return GroundSet::hypercube(to_vector(j.at("pi"), "pi"));
    if (type == "integers") return GroundSet::integers(to_vector(j.at("lambda"), "lambda"));
    if (type == "continuous_fourier") {
      return GroundSet::continuous_fourier(j.at("m").get<int>(), j.at("d").get<int>());
    }
    fail(ErrorKind::kIo, "unknown ground set type " + type);
  } catch (const Json::exception& e) {
    fail(ErrorKind::kIo, std::string("ground set: ") + e.what());
  }
}

Json model_to_json(const LowRankL& model, const std::vector<VectorXd>& thetas, const Json& meta) {
  Json j{{"version", kModelFormat},
         {"ground", ground_to_json(model.ground)},
         {"alpha", model.alpha},
         {"gamma", model.gamma},
         {"theta", to_std(model.theta)},
         {"U", matrix_rows(model.U, false)}};
  if (!thetas.empty()) {
    Json per = Json::array();
    for (const auto& t : thetas) per.push_back(to_std(t));
    j["theta_per_observation"] = std::move(per);
  }
  if (!meta.is_null()) j["meta"] = meta;
  return j;
}

ModelFile model_from_json(const Json& j) {
  ModelFile f;
  try {
    if (j.at("version").get<std::string>() != kModelFormat) {
      fail(ErrorKind::kIo, "unsupported model format " + j.at("version").dump());
    }
    f.model.ground = ground_from_json(j.at("ground"));
    f.model.alpha = j.at("alpha").get<double>();
    f.model.gamma = j.at("gamma").get<double>();
    f.model.theta = to_vector(j.at("theta"), "theta");
    f.model.U = matrix_from_rows(j.at("U"), f.model.theta.size(), "U");
    if (j.contains("theta_per_observation")) {
      for (const auto& t : j["theta_per_observation"]) {
        f.thetas.push_back(to_vector(t, "theta_per_observation"));
      }
    }
    if (j.contains("meta")) f.meta = j["meta"];
  } catch (const Json::exception& e) {
    fail(ErrorKind::kIo, std::string("model: ") + e.what());
  }
  f.model.validate();
  return f;
}

void write_model(const std::string& path, const LowRankL& model,
                 const std::vector<VectorXd>& thetas, const Json& meta) {
  write_json(path, model_to_json(model, thetas, meta));
}

ModelFile read_model(const std::string& path) { return model_from_json(read_json(path)); }

Json observation_to_json(const GroundSet& ground, const ObservationSet& obs) {
  switch (ground.kind()) {
    case GroundKind::kItems:
      return Json{{"items", obs.items()}};
    case GroundKind::kHypercube:
      return Json{{"vectors", matrix_rows(obs.rows(), true)}};
    case GroundKind::kIntegers:
      return Json{{"counts", matrix_rows(obs.rows(), true)}};
    case GroundKind::kContinuousFourier:
      return Json{{"points", matrix_rows(obs.rows(), false)}};
  }
  return Json();
}

ObservationSet observation_from_json(const Json& j, Index row_dimension) {
  try {
    if (j.contains("items")) return ObservationSet::of_items(j["items"].get<std::vector<Index>>());
    for (const char* key : {"vectors", "counts", "points"}) {
      if (j.contains(key)) return ObservationSet::of_rows(matrix_from_rows(j[key], row_dimension, key));
    }
  } catch (const Json::exception& e) {
    fail(ErrorKind::kIo, std::string("observation: ") + e.what());
  }
  fail(ErrorKind::kIo, "observation needs one of items, vectors, counts, points");
}

std::vector<Json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  std::vector<Json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      fail(ErrorKind::kIo, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (rows.empty() && j.is_object() && j.size() == 1 && j.contains("meta")) continue;
    rows.push_back(std::move(j));
  }
  return rows;
}

void write_jsonl(const std::string& path, const std::vector<Json>& rows, const Json& meta) {
  std::string out;
  if (!meta.is_null()) out += Json{{"meta", meta}}.dump() + "\n";
  for (const auto& r : rows) out += r.dump() + "\n";
  write_file(path, out);
}

void write_corpus(const std::string& path, const GroundSet& ground, const Corpus& corpus,
                  const Json& meta) {
  std::vector<Json> rows;
  rows.reserve(corpus.size());
  for (const auto& obs : corpus) rows.push_back(observation_to_json(ground, obs));
  write_jsonl(path, rows, meta);
}

Corpus read_corpus(const std::string& path, Index row_dimension) {
  Corpus corpus;
  for (const auto& j : read_jsonl(path)) corpus.push_back(observation_from_json(j, row_dimension));
  return corpus;
}

void write_spectrum(const std::string& path, const FourierSpectrum& spec, const Json& meta) {
  Json j{{"m", spec.m}, {"d", spec.d}, {"a", to_std(spec.a)}};
  if (!meta.is_null()) j["meta"] = meta;
  write_json(path, j);
}

FourierSpectrum read_spectrum(const std::string& path) {
  const Json j = read_json(path);
  FourierSpectrum s;
  try {
    s.m = j.at("m").get<int>();
    s.d = j.at("d").get<int>();
    s.a = to_vector(j.at("a"), "a");
  } catch (const Json::exception& e) {
    fail(ErrorKind::kIo, std::string("spectrum: ") + e.what());
  }
  require(s.a.size() == s.dimension(), ErrorKind::kIo, "spectrum length does not match (m, d)");
  return s;
}

void write_vocab(const std::string& path, const Vocabulary& vocab, const Json& meta) {
  Json j{{"words", vocab.words}, {"counts", vocab.counts}};
  if (!meta.is_null()) j["meta"] = meta;
  write_json(path, j);
}

Vocabulary read_vocab(const std::string& path) {
  const Json j = read_json(path);
  try {
    std::vector<Index> counts;
    if (j.contains("counts")) counts = j["counts"].get<std::vector<Index>>();
    return Vocabulary::from_words(j.at("words").get<std::vector<std::string>>(), counts);
  } catch (const Json::exception& e) {
    fail(ErrorKind::kIo, std::string("vocabulary: ") + e.what());
  }
}

Json optimizer_config_to_json(const OptimizerConfig& c) {
  return Json{{"memory", c.memory}, {"max_outer", c.max_outer}, {"inner_iters", c.inner_iters},
              {"c1", c.c1},         {"c2", c.c2},               {"grad_tol", c.grad_tol},
              {"seed", c.seed}};
}

void update_optimizer_config(const Json& j, OptimizerConfig& c) {
  static const std::set<std::string> known{"memory", "max_outer", "inner_iters", "c1",
                                           "c2",     "grad_tol",  "seed"};
  require(j.is_object(), ErrorKind::kInvalidArgument, "optimizer config must be an object");
  for (const auto& item : j.items()) {
    if (known.count(item.key()) == 0) {
      fail(ErrorKind::kInvalidArgument, "unknown optimizer setting " + item.key());
    }
  }
  try {
    if (j.contains("memory")) c.memory = j["memory"].get<int>();
    if (j.contains("max_outer")) c.max_outer = j["max_outer"].get<int>();
    if (j.contains("inner_iters")) c.inner_iters = j["inner_iters"].get<int>();
    if (j.contains("c1")) c.c1 = j["c1"].get<double>();
    if (j.contains("c2")) c.c2 = j["c2"].get<double>();
    if (j.contains("grad_tol")) c.grad_tol = j["grad_tol"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  } catch (const Json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("optimizer config: ") + e.what());
  }
}

void write_grid_csv(const std::string& path, const std::vector<KernelGridValue>& grid,
                    const Json& meta) {
  std::string out = csv_header(meta) + "x,y,K\n";
  for (const auto& g : grid) {
    out += format_double(g.x) + "," + format_double(g.y) + "," + format_double(g.k) + "\n";
  }
  write_file(path, out);
}

void write_metrics_csv(const std::string& path, const std::vector<MetricRecord>& rows,
                       const Json& meta) {
  std::string out = csv_header(meta) + "metric,value,r,V,seed,dataset,iteration\n";
  for (const auto& m : rows) {
    out += m.metric + "," + format_double(m.value) + "," + std::to_string(m.r) + "," +
           std::to_string(m.V) + "," + std::to_string(m.seed) + "," + m.dataset + "," +
           std::to_string(m.iteration) + "\n";
  }
  write_file(path, out);
}

void write_trace_csv(const std::string& path, const std::vector<TraceEntry>& trace,
                     const Json& meta) {
  std::string out = csv_header(meta) + "round,block,iteration,objective\n";
  for (const auto& t : trace) {
    out += std::to_string(t.round) + "," + t.block + "," + std::to_string(t.iteration) + "," +
           format_double(t.objective) + "\n";
  }
  write_file(path, out);
}

void write_points_csv(const std::string& path, const std::vector<MatrixXd>& sets,
                      const std::string& tag, const Json& meta) {
  const Index m = sets.empty() ? 0 : sets.front().cols();
  std::string out = csv_header(meta) + "tag,set";
  for (Index j = 0; j < m; ++j) out += ",x" + std::to_string(j + 1);
  out += "\n";
  for (std::size_t s = 0; s < sets.size(); ++s) {
    require(sets[s].cols() == m || sets[s].rows() == 0, ErrorKind::kDimensionMismatch,
            "point sets must share a dimension");
    for (Index i = 0; i < sets[s].rows(); ++i) {
      out += tag + "," + std::to_string(s);
      for (Index j = 0; j < m; ++j) out += "," + format_double(sets[s](i, j));
      out += "\n";
    }
  }
  write_file(path, out);
}

}  // namespace subdpp
