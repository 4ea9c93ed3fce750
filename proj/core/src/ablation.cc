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

#include "hedgepred/ablation.h"

#include <algorithm>
#include <sstream>

#include "hedgepred/error.h"
#include "hedgepred/parallel.h"
#include "hedgepred/text_io.h"

namespace hedgepred {

std::vector<AblationColumn> DefaultAblationColumns() {
  using G = FeatureGroup;
  return {std::nullopt, G::kRapport, G::kCS, G::kTS, G::kNB, G::kConInfo, G::kDialAct};
}

std::string AblationColumnName(const AblationColumn& column) {
  return column ? std::string(FeatureGroupName(*column)) : "N/A";
}

std::vector<ModelSpec> DefaultAblationModels(const NeuralParams& neural) {
  auto make = [&](std::string name, ModelKind kind, FeatureMask mask) {
    ModelSpec spec{std::move(name), TrainConfig{}, mask};
    spec.train.kind = kind;
    spec.train.neural = neural;
    return spec;
  };
  std::vector<ModelSpec> models;
  models.push_back(make("XGBoost-like", ModelKind::kGbdt, FeatureMask::WithoutEmbedding()));
  models.back().train.gbdt = GbdtParams::Preset("xgboost-like");
  models.push_back(make("LightGBM-like", ModelKind::kGbdt, FeatureMask::WithoutEmbedding()));
  models.back().train.gbdt = GbdtParams::Preset("lightgbm-like");
  models.push_back(make("LSTM", ModelKind::kLstm, FeatureMask::All()));
  models.push_back(make("AttnLSTM", ModelKind::kAttnLstm, FeatureMask::All()));
  models.push_back(make("MLP", ModelKind::kMlp, FeatureMask::All()));
  return models;
}

AblationResult RunAblation(const EncodedCorpus& data, const AblationGrid& grid,
                           const PipelineConfig& config) {
  config.Validate();
  if (grid.models.empty()) Fail(ErrorKind::kConfig, "ablation grid has no models");
  if (std::find(grid.columns.begin(), grid.columns.end(), std::nullopt) == grid.columns.end()) {
    Fail(ErrorKind::kConfig, "ablation grid needs the N/A baseline column");
  }
  AblationResult result;
  result.columns = grid.columns;
  const std::size_t cols = grid.columns.size();
  std::vector<ModelSpec> specs;
  for (const auto& model : grid.models) {
    result.model_names.push_back(model.name);
    for (const auto& column : grid.columns) {
      ModelSpec spec = model;
      if (column && spec.mask.Contains(*column)) spec.mask = spec.mask.Without(*column);
      specs.push_back(std::move(spec));
    }
  }
  PipelineConfig cell_config = config;
  cell_config.jobs = 1;
  std::vector<CVReport> reports(specs.size());
  ParallelFor(specs.size(), config.jobs, [&](std::size_t i) {
    reports[i] = CrossValidate(data, specs[i], cell_config);
  });

  for (std::size_t m = 0; m < grid.models.size(); ++m) {
    std::vector<CVReport> row(reports.begin() + static_cast<long>(m * cols),
                              reports.begin() + static_cast<long>((m + 1) * cols));
    std::optional<std::size_t> worst;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!grid.columns[c]) continue;
      if (!worst || row[c].f1.mean < row[*worst].f1.mean) worst = c;
    }
    result.cells.push_back(std::move(row));
    result.worst.push_back(worst);
  }
  return result;
}

std::string AblationCsv(const AblationResult& result) {
  std::ostringstream out;
  out << "model,removed,mask,f1,f1_ci,precision,recall,worst\n";
  for (std::size_t m = 0; m < result.cells.size(); ++m) {
    for (std::size_t c = 0; c < result.columns.size(); ++c) {
      const auto& r = result.cells[m][c];
      out << result.model_names[m] << ',' << AblationColumnName(result.columns[c]) << ','
          << r.mask_name << ',' << FormatFixed(r.f1.mean, 4) << ','
          << FormatFixed(r.f1.half_width, 4) << ',' << FormatFixed(r.precision.mean, 4) << ','
          << FormatFixed(r.recall.mean, 4) << ','
          << (result.worst[m] == c ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::string AblationText(const AblationResult& result) {
  std::size_t name_w = 5;
  for (const auto& n : result.model_names) name_w = std::max(name_w, n.size());
  constexpr std::size_t kCell = 16;
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  std::ostringstream out;
  out << pad("Model", name_w);
  for (const auto& c : result.columns) out << "  " << pad(AblationColumnName(c), kCell);
  out << '\n';
  for (std::size_t m = 0; m < result.cells.size(); ++m) {
    out << pad(result.model_names[m], name_w);
    for (std::size_t c = 0; c < result.columns.size(); ++c) {
      const auto& f1 = result.cells[m][c].f1;
      std::string cell = FormatFixed(f1.mean, 3) + " +/- " + FormatFixed(f1.half_width, 3);
      if (result.worst[m] == c) cell += " *";
      out << "  " << pad(cell, kCell);
    }
    out << '\n';
  }
  out << "* lowest F1 among removals\n";
  return out.str();
}

}  // namespace hedgepred
