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

#ifndef SUBDPP_IO_HPP_
#define SUBDPP_IO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "subdpp/evaluation.hpp"
#include "subdpp/fourier.hpp"
#include "subdpp/ground_set.hpp"
#include "subdpp/kernel_family.hpp"
#include "subdpp/optimizer.hpp"
#include "subdpp/summarizer.hpp"

namespace subdpp {

using Json = nlohmann::json;

inline constexpr const char* kModelFormat = "subdpp-model-v1";

/// FNV-1a 64 of the compact dump, as 16 hex digits.
std::string config_hash(const Json& config);

/// {"tool", "version", "config_hash", "seed"}: embedded in every output.
Json make_meta(const Json& config, std::uint64_t seed);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);
Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& value);

Json ground_to_json(const GroundSet& ground);
GroundSet ground_from_json(const Json& j);

struct ModelFile {
  LowRankL model;
  std::vector<VectorXd> thetas;  // per-observation thetas, empty in shared mode
  Json meta;
};

Json model_to_json(const LowRankL& model, const std::vector<VectorXd>& thetas = {},
                   const Json& meta = Json::object());
ModelFile model_from_json(const Json& j);
void write_model(const std::string& path, const LowRankL& model,
                 const std::vector<VectorXd>& thetas = {}, const Json& meta = Json::object());
ModelFile read_model(const std::string& path);

/// Corpus JSONL: an optional {"meta": ...} first line, then one observation
/// per line as {"items": [...]}, {"vectors": [[...]]}, {"counts": [[...]]} or
/// {"points": [[...]]} depending on the ground set.
Json observation_to_json(const GroundSet& ground, const ObservationSet& obs);
ObservationSet observation_from_json(const Json& j, Index row_dimension);
void write_corpus(const std::string& path, const GroundSet& ground, const Corpus& corpus,
                  const Json& meta = Json());
/// row_dimension sizes empty row observations (ignored for items).
Corpus read_corpus(const std::string& path, Index row_dimension);

/// One JSON value per nonblank line, skipping a leading {"meta": ...} line.
std::vector<Json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<Json>& rows, const Json& meta = Json());

void write_spectrum(const std::string& path, const FourierSpectrum& spec,
                    const Json& meta = Json::object());
FourierSpectrum read_spectrum(const std::string& path);

void write_vocab(const std::string& path, const Vocabulary& vocab,
                 const Json& meta = Json::object());
Vocabulary read_vocab(const std::string& path);

Json optimizer_config_to_json(const OptimizerConfig& config);
/// Fields absent from j keep the values already in `config`.
void update_optimizer_config(const Json& j, OptimizerConfig& config);

/// CSV writers; each file starts with a "# meta ..." comment line.
void write_grid_csv(const std::string& path, const std::vector<KernelGridValue>& grid,
                    const Json& meta);
void write_metrics_csv(const std::string& path, const std::vector<MetricRecord>& rows,
                       const Json& meta);
void write_trace_csv(const std::string& path, const std::vector<TraceEntry>& trace,
                     const Json& meta);
/// One row per point: tag, set index, coordinates.
void write_points_csv(const std::string& path, const std::vector<MatrixXd>& sets,
                      const std::string& tag, const Json& meta);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace subdpp

#endif  // SUBDPP_IO_HPP_
