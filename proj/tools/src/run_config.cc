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

#include "run_config.h"

#include <algorithm>
#include <fstream>
#include <initializer_list>

#include "hedgepred/error.h"

namespace hedgepred::cli {
namespace {

using nlohmann::json;

void RequireObject(const json& j, std::string_view where) {
  if (!j.is_object()) Fail(ErrorKind::kConfig, std::string(where) + " must be an object");
}

void RejectUnknown(const json& j, std::initializer_list<std::string_view> allowed,
                   std::string_view where) {
  RequireObject(j, where);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      Fail(ErrorKind::kConfig, std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void Read(const json& j, std::string_view key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

ModelSpec Spec(std::string name, ModelKind kind, FeatureMask mask) {
  ModelSpec s{std::move(name), TrainConfig{}, mask};
  s.train.kind = kind;
  return s;
}

}  // namespace

json GeneratorToJson(const GeneratorConfig& g) {
  json j;
  j["dyads"] = g.dyads;
  j["sessions"] = g.sessions;
  j["turns_per_session"] = g.turns_per_session;
  j["base_hedge_rate"] = g.base_hedge_rate;
  j["tutee_hedge_rate"] = g.tutee_hedge_rate;
  j["window"] = g.window;
  j["max_problem_id"] = g.max_problem_id;
  j["hedge_lexicon"] = g.hedge_lexicon;
  j["coefficients"] = g.coefficients;
  return j;
}

GeneratorConfig GeneratorFromJson(const json& j) {
  RejectUnknown(j,
                {"dyads", "sessions", "turns_per_session", "base_hedge_rate",
                 "tutee_hedge_rate", "window", "max_problem_id", "hedge_lexicon",
                 "coefficients"},
                "generator");
  GeneratorConfig g;
  Read(j, "dyads", g.dyads);
  Read(j, "sessions", g.sessions);
  Read(j, "turns_per_session", g.turns_per_session);
  Read(j, "base_hedge_rate", g.base_hedge_rate);
  Read(j, "tutee_hedge_rate", g.tutee_hedge_rate);
  Read(j, "window", g.window);
  Read(j, "max_problem_id", g.max_problem_id);
  Read(j, "hedge_lexicon", g.hedge_lexicon);
  Read(j, "coefficients", g.coefficients);
  g.Validate();
  return g;
}

json ModelSpecToJson(const ModelSpec& spec) {
  json j = spec.train.ToJson();
  j["name"] = spec.name;
  j["mask"] = spec.mask.Name();
  return j;
}

ModelSpec ModelSpecFromJson(const json& j) {
  RequireObject(j, "model");
  json train = j;
  ModelSpec spec;
  if (!j.contains("name") || !j["name"].is_string()) {
    Fail(ErrorKind::kConfig, "model: 'name' is required");
  }
  spec.name = j["name"].get<std::string>();
  train.erase("name");
  if (auto it = j.find("mask"); it != j.end()) {
    spec.mask = FeatureMask::Parse(it->get<std::string>());
    train.erase("mask");
  }
  spec.train = TrainConfig::FromJson(train);
  return spec;
}

std::vector<ModelSpec> DefaultModels() {
  std::vector<ModelSpec> m;
  m.push_back(Spec("XGBoost-like", ModelKind::kGbdt, FeatureMask::WithoutEmbedding()));
  m.back().train.gbdt = GbdtParams::Preset("xgboost-like");
  m.push_back(Spec("LightGBM-like", ModelKind::kGbdt, FeatureMask::WithoutEmbedding()));
  m.back().train.gbdt = GbdtParams::Preset("lightgbm-like");
  m.push_back(Spec("MLP", ModelKind::kMlp, FeatureMask::All()));
  m.push_back(Spec("LSTM", ModelKind::kLstm, FeatureMask::All()));
  m.push_back(Spec("AttnLSTM", ModelKind::kAttnLstm, FeatureMask::All()));
  return m;
}

ModelSpec DummySpec() { return Spec("Dummy", ModelKind::kDummy, FeatureMask::All()); }

RunConfig RunConfig::FromJson(const json& j, const std::filesystem::path& base_dir) {
  try {
    RejectUnknown(j,
                  {"seed", "corpus", "generator", "encoding", "eval", "smote", "models",
                   "save_models", "explain", "ablation"},
                  "config");
    RunConfig c;
    if (auto it = j.find("seed"); it != j.end() && !it->is_null()) {
      c.seed = it->get<std::uint64_t>();
    }
    if (auto it = j.find("corpus"); it != j.end()) {
      RejectUnknown(*it, {"turns", "rapport", "profiles", "pretest_scale"}, "corpus");
      CorpusFiles f;
      f.turns = Resolve(base_dir, it->at("turns").get<std::string>());
      f.rapport = Resolve(base_dir, it->at("rapport").get<std::string>());
      f.profiles = Resolve(base_dir, it->at("profiles").get<std::string>());
      Read(*it, "pretest_scale", f.pretest_scale);
      c.corpus = f;
    }
    if (auto it = j.find("generator"); it != j.end()) c.generator = GeneratorFromJson(*it);
    if (auto it = j.find("encoding"); it != j.end()) {
      RejectUnknown(*it, {"provider", "embedding_dim", "embedding_file", "hash_seed", "window"},
                    "encoding");
      Read(*it, "provider", c.encoding.provider);
      Read(*it, "embedding_dim", c.encoding.embedding_dim);
      Read(*it, "hash_seed", c.encoding.hash_seed);
      Read(*it, "window", c.pipeline.window);
      if (auto f = it->find("embedding_file"); f != it->end()) {
        c.encoding.embedding_file = Resolve(base_dir, f->get<std::string>());
      }
    }
    if (auto it = j.find("eval"); it != j.end()) {
      RejectUnknown(*it, {"folds", "ci", "bootstrap_resamples"}, "eval");
      Read(*it, "folds", c.pipeline.folds);
      Read(*it, "bootstrap_resamples", c.pipeline.bootstrap_resamples);
      if (auto ci = it->find("ci"); ci != it->end()) {
        const auto m = ci->is_string() ? ParseCiMethod(ci->get<std::string>()) : std::nullopt;
        if (!m) Fail(ErrorKind::kConfig, "eval.ci must be 't' or 'bootstrap'");
        c.pipeline.ci = *m;
      }
    }
    if (auto it = j.find("smote"); it != j.end()) {
      RejectUnknown(*it, {"enabled", "k", "ratio"}, "smote");
      Read(*it, "enabled", c.pipeline.smote);
      Read(*it, "k", c.pipeline.smote_config.k_neighbors);
      Read(*it, "ratio", c.pipeline.smote_config.target_ratio);
    }
    if (auto it = j.find("models"); it != j.end()) {
      if (!it->is_array()) Fail(ErrorKind::kConfig, "models must be an array");
      for (const auto& m : *it) c.models.push_back(ModelSpecFromJson(m));
    } else {
      c.models = DefaultModels();
    }
    Read(j, "save_models", c.save_models);
    if (auto it = j.find("explain"); it != j.end()) {
      RejectUnknown(*it, {"background", "instances", "samples", "top_features"}, "explain");
      Read(*it, "background", c.explain.background);
      Read(*it, "instances", c.explain.instances);
      Read(*it, "samples", c.explain.samples);
      Read(*it, "top_features", c.explain.top_features);
    }
    if (auto it = j.find("ablation"); it != j.end()) {
      RejectUnknown(*it, {"models", "columns"}, "ablation");
      if (auto m = it->find("models"); m != it->end()) {
        for (const auto& spec : *m) c.ablation.models.push_back(ModelSpecFromJson(spec));
      }
      if (auto cols = it->find("columns"); cols != it->end()) {
        c.ablation.columns.clear();
        for (const auto& name : *cols) {
          const auto s = name.get<std::string>();
          if (s == "N/A" || s == "none") {
            c.ablation.columns.emplace_back(std::nullopt);
            continue;
          }
          const auto g = ParseFeatureGroup(s);
          if (!g) Fail(ErrorKind::kConfig, "ablation: unknown column '" + s + "'");
          c.ablation.columns.emplace_back(*g);
        }
      }
    }
    return c;
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("config: ") + e.what());
  }
}

json RunConfig::ToJson() const {
  json j;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  if (corpus) {
    j["corpus"] = {{"turns", corpus->turns.string()},
                   {"rapport", corpus->rapport.string()},
                   {"profiles", corpus->profiles.string()},
                   {"pretest_scale", corpus->pretest_scale}};
  }
  if (generator) j["generator"] = GeneratorToJson(*generator);
  j["encoding"] = {{"provider", encoding.provider},
                   {"embedding_dim", encoding.embedding_dim},
                   {"hash_seed", encoding.hash_seed},
                   {"window", pipeline.window}};
  if (!encoding.embedding_file.empty()) {
    j["encoding"]["embedding_file"] = encoding.embedding_file.string();
  }
  j["eval"] = {{"folds", pipeline.folds},
               {"ci", CiMethodName(pipeline.ci)},
               {"bootstrap_resamples", pipeline.bootstrap_resamples}};
  j["smote"] = {{"enabled", pipeline.smote},
                {"k", pipeline.smote_config.k_neighbors},
                {"ratio", pipeline.smote_config.target_ratio}};
  j["models"] = json::array();
  for (const auto& m : models) j["models"].push_back(ModelSpecToJson(m));
  j["save_models"] = save_models;
  j["explain"] = {{"background", explain.background},
                  {"instances", explain.instances},
                  {"samples", explain.samples},
                  {"top_features", explain.top_features}};
  json ab = {{"models", json::array()}, {"columns", json::array()}};
  for (const auto& m : ablation.models) ab["models"].push_back(ModelSpecToJson(m));
  for (const auto& c : ablation.columns) ab["columns"].push_back(AblationColumnName(c));
  j["ablation"] = ab;
  return j;
}

void RunConfig::Validate() const {
  if (!seed) Fail(ErrorKind::kConfig, "a seed is required (config 'seed' or --seed)");
  if (corpus.has_value() == generator.has_value()) {
    Fail(ErrorKind::kConfig, "exactly one of 'corpus' and 'generator' must be given");
  }
  if (encoding.provider != "hashing" && encoding.provider != "file") {
    Fail(ErrorKind::kConfig, "encoding.provider must be 'hashing' or 'file'");
  }
  if (encoding.provider == "file" && encoding.embedding_file.empty()) {
    Fail(ErrorKind::kConfig, "encoding.embedding_file is required for the file provider");
  }
  if (encoding.provider == "hashing" && encoding.embedding_dim == 0) {
    Fail(ErrorKind::kConfig, "encoding.embedding_dim must be positive");
  }
  pipeline.Validate();
  for (const auto& m : models) m.train.Validate();
  for (const auto& m : ablation.models) m.train.Validate();
  if (explain.background == 0 || explain.instances < 2 || explain.samples < 1) {
    Fail(ErrorKind::kConfig, "explain: background >= 1, instances >= 2, samples >= 1");
  }
  if (std::none_of(ablation.columns.begin(), ablation.columns.end(),
                   [](const AblationColumn& c) { return !c.has_value(); })) {
    Fail(ErrorKind::kConfig, "ablation.columns must include the N/A baseline");
  }
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
  return RunConfig::FromJson(j, path.parent_path());
}

Corpus BuildCorpus(const RunConfig& config) {
  if (config.corpus) {
    LoadOptions options;
    options.pretest_scale = config.corpus->pretest_scale;
    return LoadCorpus(config.corpus->turns, config.corpus->rapport, config.corpus->profiles,
                      options);
  }
  return GenerateSynthetic(*config.generator, *config.seed);
}

TurnEncoder BuildEncoder(const EncodingOptions& options) {
  if (options.provider == "file") {
    auto provider = MakeFileEmbedder(options.embedding_file);
    return TurnEncoder(DefaultSchema(provider->dim()), provider);
  }
  return TurnEncoder(DefaultSchema(options.embedding_dim),
                     MakeHashingEmbedder(options.embedding_dim, options.hash_seed));
}

}  // namespace hedgepred::cli
