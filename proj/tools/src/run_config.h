/*
 * Copyright 2026 The hedgepred Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HEDGEPRED_TOOLS_RUN_CONFIG_H_
#define HEDGEPRED_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hedgepred/ablation.h"
#include "hedgepred/corpus.h"
#include "hedgepred/encoding.h"
#include "hedgepred/eval.h"
#include "hedgepred/synthetic.h"

namespace hedgepred::cli {

struct CorpusFiles {
  std::filesystem::path turns;
  std::filesystem::path rapport;
  std::filesystem::path profiles;
  double pretest_scale = 1.0;
};

struct EncodingOptions {
  std::string provider = "hashing";  // or "file"
  std::size_t embedding_dim = 384;
  std::filesystem::path embedding_file;
  std::uint64_t hash_seed = 1;
};

struct ExplainOptions {
  std::size_t background = 100;
  std::size_t instances = 50;
  int samples = 200;
  // Rows of the coordinate-level valence table that are written.
  std::size_t top_features = 20;
};

struct AblationOptions {
  std::vector<ModelSpec> models;  // empty: the default five-model grid
  std::vector<AblationColumn> columns = DefaultAblationColumns();
};

// One experiment. Exactly one of `corpus` and `generator` is set; the seed is
// mandatory but may come from the command line.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::optional<CorpusFiles> corpus;
  std::optional<GeneratorConfig> generator;
  EncodingOptions encoding;
  PipelineConfig pipeline;
  std::vector<ModelSpec> models;
  bool save_models = true;
  ExplainOptions explain;
  AblationOptions ablation;

  // Paths are resolved against `base_dir` (the config file's directory).
  static RunConfig FromJson(const nlohmann::json& j,
                            const std::filesystem::path& base_dir = {});
  nlohmann::json ToJson() const;
  void Validate() const;  // throws Error(kConfig)
};

RunConfig LoadRunConfig(const std::filesystem::path& path);

nlohmann::json GeneratorToJson(const GeneratorConfig& g);
GeneratorConfig GeneratorFromJson(const nlohmann::json& j);

nlohmann::json ModelSpecToJson(const ModelSpec& spec);
ModelSpec ModelSpecFromJson(const nlohmann::json& j);

// Table-1 style model list used when a config names none.
std::vector<ModelSpec> DefaultModels();

// The stratified baseline row present in every report.
ModelSpec DummySpec();

// Loads the corpus files or runs the generator with the run seed.
Corpus BuildCorpus(const RunConfig& config);

TurnEncoder BuildEncoder(const EncodingOptions& options);

}  // namespace hedgepred::cli

#endif  // HEDGEPRED_TOOLS_RUN_CONFIG_H_
