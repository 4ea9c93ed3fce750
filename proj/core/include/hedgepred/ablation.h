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

#ifndef HEDGEPRED_ABLATION_H_
#define HEDGEPRED_ABLATION_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hedgepred/eval.h"

namespace hedgepred {

// nullopt is the no-removal baseline column.
using AblationColumn = std::optional<FeatureGroup>;

// N/A, Rapport, CS, TS, NB, ConInfo, DialAct.
std::vector<AblationColumn> DefaultAblationColumns();
std::string AblationColumnName(const AblationColumn& column);

// xgboost-like and lightgbm-like GBDT without embeddings, then LSTM,
// AttnLSTM and MLP on all groups.
std::vector<ModelSpec> DefaultAblationModels(const NeuralParams& neural = {});

struct AblationGrid {
  std::vector<ModelSpec> models;
  std::vector<AblationColumn> columns = DefaultAblationColumns();
};

struct AblationResult {
  std::vector<std::string> model_names;
  std::vector<AblationColumn> columns;
  std::vector<std::vector<CVReport>> cells;  // [model][column]
  // Per model, the removal column with the lowest mean F1 (nullopt if the
  // grid has no removal columns).
  std::vector<std::optional<std::size_t>> worst;
};

// Each cell cross-validates the model with the column's group removed from its
// mask; all cells share the pipeline seed. Cells run on up to config.jobs
// threads, each cell's folds serially.
AblationResult RunAblation(const EncodedCorpus& data, const AblationGrid& grid,
                           const PipelineConfig& config);

std::string AblationCsv(const AblationResult& result);
// Rows are models, columns the removed group; '*' marks each row's worst cell.
std::string AblationText(const AblationResult& result);

}  // namespace hedgepred

#endif  // HEDGEPRED_ABLATION_H_
