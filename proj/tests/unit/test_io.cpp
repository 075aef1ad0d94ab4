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

#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "doctest.h"
#include "subdpp/errors.hpp"
#include "subdpp/io.hpp"

using namespace subdpp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("subdpp_io_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("config hash is stable and key-order independent") {
  const Json a = Json::parse(R"({"x": 1, "y": [1, 2]})");
  const Json b = Json::parse(R"({"y": [1, 2], "x": 1})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(Json::parse(R"({"x": 2, "y": [1, 2]})")));
  const Json meta = make_meta(a, 42);
  CHECK(meta["seed"] == 42);
  CHECK(meta["config_hash"] == config_hash(a));
}

TEST_CASE("ground sets round trip") {
  VectorXd pi(3);
  pi << 0.1, 0.5, 0.9;
  for (const auto& g : {GroundSet::items(7), GroundSet::hypercube(pi),
                        GroundSet::integers(Eigen::Vector2d(1.0, 2.5)),
                        GroundSet::continuous_fourier(2, 3)}) {
    const GroundSet back = ground_from_json(ground_to_json(g));
    CHECK(back.kind() == g.kind());
    CHECK(back.dimension() == g.dimension());
    CHECK((second_moment(back).dense() - second_moment(g).dense()).norm() == 0.0);
  }
  CHECK_THROWS_AS(ground_from_json(Json::parse(R"({"type": "sphere"})")), Error);
}

TEST_CASE("models round trip bit-exactly") {
  TempDir tmp;
  LowRankL L;
  L.ground = GroundSet::hypercube(4, 0.3);
  L.alpha = 1e-5;
  L.gamma = 0.1 / 3.0;
  L.U = MatrixXd::Random(4, 2);
  L.theta = Eigen::Vector2d(1.0 / 3.0, 2.0 / 7.0);
  const std::vector<VectorXd> thetas = {Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(0.3, 0.4)};
  write_model(tmp.file("m.json"), L, thetas, make_meta(Json::object(), 1));
  const ModelFile back = read_model(tmp.file("m.json"));
  CHECK(back.model.U == L.U);
  CHECK(back.model.theta == L.theta);
  CHECK(back.model.alpha == L.alpha);
  CHECK(back.model.gamma == L.gamma);
  CHECK(back.thetas.size() == 2);
  CHECK(back.thetas[1] == thetas[1]);
  CHECK(back.meta["seed"] == 1);
  CHECK(read_json(tmp.file("m.json"))["version"] == kModelFormat);
}

TEST_CASE("corpora round trip") {
  TempDir tmp;
  const GroundSet items = GroundSet::items(5);
  const Corpus c = {ObservationSet::of_items({0, 3}), ObservationSet::of_items({})};
  write_corpus(tmp.file("c.jsonl"), items, c, make_meta(Json::object(), 2));
  const Corpus back = read_corpus(tmp.file("c.jsonl"), 0);
  REQUIRE(back.size() == 2);
  CHECK(back[0].items() == std::vector<Index>{0, 3});
  CHECK(back[1].empty());

  const GroundSet cube = GroundSet::continuous_fourier(2, 1);
  MatrixXd rows(2, 2);
  rows << 0.1, 0.2, 1.0 / 3.0, 0.999;
  const Corpus r = {ObservationSet::of_rows(rows), ObservationSet::of_rows(MatrixXd(0, 2))};
  write_corpus(tmp.file("r.jsonl"), cube, r);
  const Corpus rb = read_corpus(tmp.file("r.jsonl"), 2);
  REQUIRE(rb.size() == 2);
  CHECK(rb[0].rows() == rows);
  CHECK(rb[1].size() == 0);
}

TEST_CASE("spectrum and vocabulary round trip") {
  TempDir tmp;
  const FourierSpectrum s = synth_spectrum(5, 2.0);
  write_spectrum(tmp.file("s.json"), s);
  const FourierSpectrum sb = read_spectrum(tmp.file("s.json"));
  CHECK(sb.m == 2);
  CHECK(sb.d == 2);
  CHECK(sb.a == s.a);

  const Vocabulary v = Vocabulary::from_words({"x", "y"}, {3, 1});
  write_vocab(tmp.file("v.json"), v);
  const Vocabulary vb = read_vocab(tmp.file("v.json"));
  CHECK(vb.words == v.words);
  CHECK(vb.counts == v.counts);
  CHECK(vb.find("y") == 1);
}

TEST_CASE("optimizer configuration merges over defaults") {
  OptimizerConfig c;
  update_optimizer_config(Json::parse(R"({"memory": 5, "grad_tol": 1e-8})"), c);
  CHECK(c.memory == 5);
  CHECK(c.grad_tol == 1e-8);
  CHECK(c.max_outer == OptimizerConfig{}.max_outer);
  OptimizerConfig d;
  update_optimizer_config(optimizer_config_to_json(c), d);
  CHECK(d.memory == 5);
  CHECK_THROWS_AS(update_optimizer_config(Json::parse(R"({"memry": 5})"), c), Error);
}

TEST_CASE("CSV outputs carry a meta header") {
  TempDir tmp;
  const Json meta = make_meta(Json::object(), 3);
  write_metrics_csv(tmp.file("m.csv"), {{"loglik_gap", 0.25, 5, 100, 3, "rep_0", 0}}, meta);
  std::ifstream in(tmp.file("m.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# meta ", 0) == 0);
  CHECK(Json::parse(line.substr(7))["seed"] == 3);
  std::getline(in, line);
  CHECK(line == "metric,value,r,V,seed,dataset,iteration");
  std::getline(in, line);
  CHECK(line == "loglik_gap,0.25,5,100,3,rep_0,0");

  write_trace_csv(tmp.file("t.csv"), {{1, "U", 3, -1.5}}, meta);
  const std::string trace = read_text(tmp.file("t.csv"));
  CHECK(trace.find("round,block,iteration,objective\n1,U,3,-1.5") != std::string::npos);

  write_points_csv(tmp.file("p.csv"), {MatrixXd::Constant(1, 2, 0.5)}, "dpp", meta);
  CHECK(read_text(tmp.file("p.csv")).find("dpp,0,0.5,0.5") != std::string::npos);
}

TEST_CASE("doubles print in shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("missing files raise io errors") {
  try {
    read_json("/nonexistent/x.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
}
