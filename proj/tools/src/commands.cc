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

#include "commands.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "hedgepred/ablation.h"
#include "hedgepred/error.h"
#include "hedgepred/explain.h"
#include "hedgepred/parallel.h"
#include "hedgepred/text_io.h"
#include "run_config.h"

namespace hedgepred::cli {
namespace {

using nlohmann::json;

std::string Slug(std::string_view name) {
  std::string out;
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out += static_cast<char>(std::tolower(u));
    } else if (!out.empty() && out.back() != '-') {
      out += '-';
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "model" : out;
}

std::string Dump(const json& j) { return j.dump(2) + "\n"; }

RunConfig ResolveConfig(const CommonOptions& options) {
  RunConfig config = options.config.empty() ? RunConfig::FromJson(json::object())
                                            : LoadRunConfig(options.config);
  if (options.seed) config.seed = options.seed;
  if (options.jobs < 1) Fail(ErrorKind::kConfig, "--jobs must be positive");
  config.pipeline.jobs = options.jobs;
  config.pipeline.seed = config.seed.value_or(0);
  return config;
}

void RequireOut(const CommonOptions& options) {
  if (options.out.empty()) Fail(ErrorKind::kConfig, "--out is required");
}

// Names become file names, so they must stay distinct after slugging.
void CheckNames(const std::vector<ModelSpec>& specs) {
  std::set<std::string> seen;
  for (const auto& s : specs) {
    if (!seen.insert(Slug(s.name)).second) {
      Fail(ErrorKind::kConfig, "duplicate model name '" + s.name + "'");
    }
  }
}

json SchemaDump(const FeatureSchema& schema, const FeatureMask& mask, int window) {
  json j;
  j["mask"] = mask.Name();
  j["window"] = window;
  j["fingerprint"] = InputFingerprint(schema, mask, window);
  j["groups"] = json::array();
  for (auto g : mask.groups()) j["groups"].push_back(FeatureGroupName(g));
  j["row_width"] = IncludedCoordinates(schema, mask).size();
  j["schema"] = schema.ToJson();
  j["flattened"] = FlattenedNames(schema, mask, window);
  return j;
}

std::vector<std::size_t> AllIndices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::string FoldCsv(std::span<const CVReport> reports) {
  std::ostringstream out;
  out << "model,fold,tp,fp,fn,tn,precision,recall,f1,synthetic,model_hash\n";
  for (const auto& r : reports) {
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
      const auto& fr = r.folds[f];
      const auto& m = fr.metrics;
      out << r.model_name << ',' << f << ',' << m.tp << ',' << m.fp << ',' << m.fn << ','
          << m.tn << ',' << FormatFixed(m.precision, 6) << ',' << FormatFixed(m.recall, 6)
          << ',' << FormatFixed(m.f1, 6) << ',' << fr.synthetic_count << ','
          << fr.model_hash << '\n';
    }
  }
  return out.str();
}

const char* ValenceSign(int v) { return v > 0 ? "+" : v < 0 ? "-" : "0"; }

std::string ValenceCsv(std::span<const ValenceRow> rows, std::size_t limit) {
  std::ostringstream out;
  out << "player,valence,correlation,mean_abs_phi,rank\n";
  for (std::size_t i = 0; i < rows.size() && i < limit; ++i) {
    const auto& r = rows[i];
    out << r.player << ',' << ValenceSign(r.valence) << ',' << FormatFixed(r.correlation, 6)
        << ',' << FormatShortest(r.mean_abs_phi) << ',' << r.rank << '\n';
  }
  return out.str();
}

std::string PhiCsv(std::span<const ShapleyReport> reports,
                   std::span<const std::size_t> instances, std::span<const int> labels) {
  std::ostringstream out;
  out << "instance,label,prediction,base_value";
  for (const auto& p : reports.front().players) out << ',' << p;
  out << ",efficiency_residual\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out << instances[i] << ',' << labels[i] << ',' << FormatShortest(r.prediction) << ','
        << FormatShortest(r.base_value);
    for (double phi : r.phi) out << ',' << FormatShortest(phi);
    out << ',' << FormatShortest(r.efficiency_residual) << '\n';
  }
  return out.str();
}

}  // namespace

void OutputSet::Add(const std::string& relative_path, std::string content) {
  files_[relative_path] = std::move(content);
}

void OutputSet::Commit(const std::filesystem::path& dir) const {
  std::error_code ec;
  for (const auto& [rel, content] : files_) {
    const auto path = dir / rel;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) Fail(ErrorKind::kIo, "cannot create " + path.parent_path().string());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
    out << content;
    if (!out) Fail(ErrorKind::kIo, "write failed for " + path.string());
  }
}

void CmdGenerate(const CommonOptions& options) {
  RequireOut(options);
  RunConfig config = ResolveConfig(options);
  if (config.corpus) Fail(ErrorKind::kConfig, "generate needs a 'generator' section, not 'corpus'");
  if (!config.generator) config.generator = GeneratorConfig{};
  config.Validate();
  const Corpus corpus = BuildCorpus(config);
  const auto instances = ExtractInstances(corpus, config.generator->window);
  const auto hedges = static_cast<std::size_t>(
      std::count_if(instances.begin(), instances.end(), [](const Instance& i) { return i.label; }));
  const double rate = instances.empty() ? 0.0
                                        : static_cast<double>(hedges) /
                                              static_cast<double>(instances.size());
  json summary;
  summary["dialogues"] = corpus.dialogues().size();
  summary["turns"] = corpus.turn_count();
  summary["tutor_turns"] = instances.size();
  summary["hedged_tutor_turns"] = hedges;
  summary["hedge_rate"] = rate;

  std::filesystem::create_directories(options.out);
  WriteCorpus(corpus, options.out / "corpus.jsonl", options.out / "rapport.csv",
              options.out / "profiles.csv");
  OutputSet outputs;
  outputs.Add("summary.json", Dump(summary));
  outputs.Add("resolved_config.json", Dump(config.ToJson()));
  outputs.Commit(options.out);
  std::cout << "generated " << corpus.turn_count() << " turns in " << corpus.dialogues().size()
            << " dialogues; " << hedges << " of " << instances.size()
            << " tutor turns hedged (rate " << FormatFixed(rate, 4) << ")\n";
}

void CmdTrainEval(const CommonOptions& options) {
  RequireOut(options);
  RunConfig config = ResolveConfig(options);
  config.Validate();
  std::vector<ModelSpec> specs = config.models;
  if (std::none_of(specs.begin(), specs.end(),
                   [](const ModelSpec& s) { return s.train.kind == ModelKind::kDummy; })) {
    specs.push_back(DummySpec());
  }
  CheckNames(specs);

  const Corpus corpus = BuildCorpus(config);
  const TurnEncoder encoder = BuildEncoder(config.encoding);
  const EncodedCorpus data(encoder, corpus, config.pipeline.window);

  std::vector<CVReport> reports;
  for (const auto& spec : specs) {
    reports.push_back(CrossValidate(data, spec, config.pipeline));
    const auto& r = reports.back();
    std::cerr << "[train-eval] " << spec.name << " (" << r.mask_name
              << "): F1 " << FormatFixed(r.f1.mean, 3) << " +/- "
              << FormatFixed(r.f1.half_width, 3) << '\n';
  }

  OutputSet outputs;
  outputs.Add("report.csv", ReportCsv(reports));
  outputs.Add("report.txt", ReportText(reports));
  outputs.Add("folds.csv", FoldCsv(reports));
  for (const auto& spec : specs) {
    outputs.Add("schema/" + Slug(spec.name) + ".json",
                Dump(SchemaDump(encoder.schema(), spec.mask, config.pipeline.window)));
  }
  if (config.save_models) {
    const auto all = AllIndices(data.size());
    const ProblemRange range = data.FitRange(all);
    std::vector<std::string> files(specs.size());
    ParallelFor(specs.size(), config.pipeline.jobs, [&](std::size_t m) {
      const auto ds = data.Select(all, specs[m].mask, range);
      PipelineFit fit = FitWithPipeline(ds, specs[m], config.pipeline, kFullDataIndex);
      fit.model.set_metadata({{"name", specs[m].name},
                              {"mask", specs[m].mask.Name()},
                              {"problem_range", {range.min, range.max}},
                              {"instances", data.size()}});
      files[m] = fit.model.ToJson().dump(1) + "\n";
    });
    for (std::size_t m = 0; m < specs.size(); ++m) {
      outputs.Add("models/" + Slug(specs[m].name) + ".json", std::move(files[m]));
    }
  }
  json resolved = config.ToJson();
  resolved["models"] = json::array();
  for (const auto& s : specs) resolved["models"].push_back(ModelSpecToJson(s));
  outputs.Add("resolved_config.json", Dump(resolved));
  outputs.Commit(options.out);
  std::cout << ReportText(reports);
}

void CmdExplain(const CommonOptions& options, const std::filesystem::path& model_path) {
  RequireOut(options);
  RunConfig config = ResolveConfig(options);
  config.Validate();
  if (model_path.empty()) Fail(ErrorKind::kConfig, "--model is required");
  const TrainedModel model = TrainedModel::Load(model_path);
  const auto& meta = model.metadata();
  if (!meta.contains("mask") || !meta.contains("problem_range")) {
    Fail(ErrorKind::kConfig, "model file lacks mask/problem_range metadata");
  }
  const FeatureMask mask = FeatureMask::Parse(meta["mask"].get<std::string>());
  const ProblemRange range{meta["problem_range"][0].get<int>(),
                           meta["problem_range"][1].get<int>()};
  const int window = static_cast<int>(model.window());

  const Corpus corpus = BuildCorpus(config);
  const TurnEncoder encoder = BuildEncoder(config.encoding);
  const EncodedCorpus data(encoder, corpus, window);
  const auto all = AllIndices(data.size());
  const EncodedDataset ds = data.Select(all, mask, range);
  model.CheckFingerprint(ds.fingerprint);

  const std::uint64_t seed = *config.seed;
  const Matrix background =
      SampleBackground(ds.x, config.explain.background, DeriveSeed(seed, "background"));
  std::vector<std::size_t> chosen = all;
  Rng pick(DeriveSeed(seed, "instances"));
  pick.Shuffle(chosen.begin(), chosen.end());
  chosen.resize(std::min(chosen.size(), config.explain.instances));
  std::sort(chosen.begin(), chosen.end());
  if (chosen.size() < 2) Fail(ErrorKind::kConfig, "explain needs at least two instances");
  Matrix x(static_cast<Eigen::Index>(chosen.size()), ds.x.cols());
  std::vector<int> labels;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = ds.x.row(static_cast<Eigen::Index>(chosen[i]));
    labels.push_back(ds.y[chosen[i]]);
  }

  const ModelFn f = ModelFunction(model);
  const auto group_players = GroupPlayers(encoder.schema(), mask, window);
  const auto groups = ExplainRows(f, x, background, group_players, ShapleyMode::kExact, 0,
                                  seed, options.jobs);
  const auto feature_players = FeaturePlayers(encoder.schema(), mask, window);
  const auto features =
      ExplainRows(f, x, background, feature_players, ShapleyMode::kSampling,
                  config.explain.samples, DeriveSeed(seed, "features"), options.jobs);

  double worst = 0.0;
  for (const auto& r : groups) worst = std::max(worst, std::abs(r.efficiency_residual));
  json summary;
  summary["model"] = meta.value("name", model_path.filename().string());
  summary["kind"] = ModelKindName(model.kind());
  summary["mask"] = mask.Name();
  summary["instances"] = chosen.size();
  summary["background"] = background.rows();
  summary["feature_samples"] = config.explain.samples;
  summary["max_abs_efficiency_residual"] = worst;

  OutputSet outputs;
  outputs.Add("group_phi.csv", PhiCsv(groups, chosen, labels));
  outputs.Add("group_valence.csv", ValenceCsv(ValenceSummary(groups), group_players.size()));
  outputs.Add("feature_phi.csv", PhiCsv(features, chosen, labels));
  outputs.Add("feature_valence.csv",
              ValenceCsv(ValenceSummary(features), config.explain.top_features));
  outputs.Add("explain_summary.json", Dump(summary));
  outputs.Add("resolved_config.json", Dump(config.ToJson()));
  outputs.Commit(options.out);
  std::cout << "explained " << chosen.size() << " instances; max |efficiency residual| "
            << FormatShortest(worst) << '\n';
}

void CmdAblate(const CommonOptions& options) {
  RequireOut(options);
  RunConfig config = ResolveConfig(options);
  config.Validate();
  AblationGrid grid;
  grid.models = config.ablation.models.empty() ? DefaultAblationModels()
                                               : config.ablation.models;
  grid.columns = config.ablation.columns;
  CheckNames(grid.models);

  const Corpus corpus = BuildCorpus(config);
  const TurnEncoder encoder = BuildEncoder(config.encoding);
  const EncodedCorpus data(encoder, corpus, config.pipeline.window);
  const AblationResult result = RunAblation(data, grid, config.pipeline);

  json resolved = config.ToJson();
  resolved["ablation"]["models"] = json::array();
  for (const auto& s : grid.models) resolved["ablation"]["models"].push_back(ModelSpecToJson(s));
  OutputSet outputs;
  outputs.Add("ablation.csv", AblationCsv(result));
  outputs.Add("ablation.txt", AblationText(result));
  outputs.Add("resolved_config.json", Dump(resolved));
  outputs.Commit(options.out);
  std::cout << AblationText(result);
}

void CmdSchemaDump(const CommonOptions& options, const std::string& mask_name) {
  RunConfig config = ResolveConfig(options);
  const TurnEncoder encoder = BuildEncoder(config.encoding);
  const auto dump =
      Dump(SchemaDump(encoder.schema(), FeatureMask::Parse(mask_name), config.pipeline.window));
  if (options.out.empty()) {
    std::cout << dump;
    return;
  }
  OutputSet outputs;
  outputs.Add("schema.json", dump);
  outputs.Commit(options.out);
}

int Main(int argc, char** argv) {
  CLI::App app{"hedgepred: hedge prediction experiments on tutoring dialogues"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hedgepred 0.1.0");

  CommonOptions common;
  std::string config_path, out_path, model_path, mask = "all";
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--seed", seed, "run seed (overrides the config)");
    sub->add_option("--out", out_path, "output directory");
    sub->add_option("--jobs", common.jobs, "worker threads for folds and cells")
        ->check(CLI::PositiveNumber);
  };
  auto* generate = app.add_subcommand("generate", "write a synthetic planted-signal corpus");
  auto* train = app.add_subcommand("train-eval", "cross-validate the configured models");
  auto* explain = app.add_subcommand("explain", "Shapley attributions for a saved model");
  auto* ablate = app.add_subcommand("ablate", "feature-group ablation grid");
  auto* schema = app.add_subcommand("schema-dump", "print the feature layout");
  for (auto* sub : {generate, train, explain, ablate, schema}) add_common(sub);
  explain->add_option("--model", model_path, "model file written by train-eval")->required();
  schema->add_option("--mask", mask, "feature mask (all, no_emb, only_emb, NB+CS, ...)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error[usage]: " << e.what() << '\n';
    return 1;
  }

  common.config = config_path;
  common.out = out_path;
  for (auto* sub : {generate, train, explain, ablate, schema}) {
    if (*sub && sub->count("--seed") > 0) common.seed = seed;
  }
  try {
    if (*generate) CmdGenerate(common);
    if (*train) CmdTrainEval(common);
    if (*explain) CmdExplain(common, model_path);
    if (*ablate) CmdAblate(common);
    if (*schema) CmdSchemaDump(common, mask);
  } catch (const Error& e) {
    std::cerr << "error[" << ErrorKindName(e.kind()) << "]: " << e.what() << '\n';
    return e.is_user_error() ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace hedgepred::cli
