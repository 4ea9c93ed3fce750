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

#ifndef HEDGEPRED_EVAL_H_
#define HEDGEPRED_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hedgepred/corpus.h"
#include "hedgepred/encoding.h"
#include "hedgepred/models.h"
#include "hedgepred/resample.h"

namespace hedgepred {

// Confusion counts and derived scores for the positive (hedge) class.
struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static Metrics FromCounts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);
};

// Harmonic mean, 0 when both are 0.
double F1Score(double precision, double recall);

// Throws Error(kShape) on a length mismatch or empty input.
Metrics ComputeMetrics(std::span<const int> predictions, std::span<const int> labels);

// Expected F1 of guessing positive with probability q when a fraction
// `base_rate` of the labels are positive.
double StratifiedBaselineF1(double base_rate, double q);

struct Fold {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Each class is shuffled and dealt round-robin, so per-fold class counts
// differ by at most one. Throws Error(kConfig) when a class has fewer than k
// members.
std::vector<Fold> StratifiedKFold(std::span<const int> labels, int k, std::uint64_t seed);

struct Interval {
  double mean = 0.0;
  double half_width = 0.0;
  double lower() const { return mean - half_width; }
  double upper() const { return mean + half_width; }
};

double StudentTQuantile(double p, double dof);

// mean +- t(0.975, n-1) * s / sqrt(n). A single value has half-width 0.
Interval TInterval(std::span<const double> values);

enum class CiMethod { kTInterval, kBootstrap };

std::string_view CiMethodName(CiMethod method);
std::optional<CiMethod> ParseCiMethod(std::string_view name);

struct PipelineConfig {
  int window = 4;
  int folds = 5;
  std::uint64_t seed = 0;
  CiMethod ci = CiMethod::kTInterval;
  int bootstrap_resamples = 1000;
  bool smote = true;
  ResampleConfig smote_config;  // seed is overridden per fold
  int jobs = 1;

  void Validate() const;
};

// A model to evaluate: its training config plus the feature groups it sees.
// The training seed is replaced by a per-fold seed during cross-validation.
struct ModelSpec {
  std::string name;
  TrainConfig train;
  FeatureMask mask = FeatureMask::All();
};

// Every instance of a corpus encoded once with all feature groups. Problem-id
// coordinates are filled in per fold from the fold's own range, so a
// selection equals EncodeDataset on the same subset, mask and range.
class EncodedCorpus {
 public:
  EncodedCorpus(const TurnEncoder& encoder, const Corpus& corpus, int window);

  const FeatureSchema& schema() const { return schema_; }
  const std::vector<Instance>& instances() const { return instances_; }
  const std::vector<int>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t window() const { return window_; }

  // Problem-id range over the real history turns of `subset`.
  ProblemRange FitRange(std::span<const std::size_t> subset) const;

  EncodedDataset Select(std::span<const std::size_t> subset, const FeatureMask& mask,
                        const ProblemRange& range) const;

 private:
  FeatureSchema schema_;
  std::size_t window_;
  std::size_t problem_coord_;
  std::vector<Instance> instances_;
  std::vector<int> labels_;
  Matrix tensors_;                      // instance x (window * D)
  std::vector<int> problem_ids_;        // instance x window, -1 for padding
};

// Inputs of one fold, encoded with statistics from its training part only.
struct FoldData {
  std::size_t index = 0;
  Fold fold;
  ProblemRange range;
  EncodedDataset train;
  EncodedDataset test;
};

FoldData PrepareFold(const EncodedCorpus& data, const Fold& fold, std::size_t index,
                     const FeatureMask& mask);

struct FoldResult {
  Metrics metrics;
  std::vector<int> predictions;  // aligned with the fold's test indices
  std::vector<double> proba;
  std::size_t synthetic_count = 0;
  std::string smote_hash;  // empty when SMOTE is skipped
  std::string model_hash;
};

struct PipelineFit {
  TrainedModel model;
  std::size_t synthetic_count = 0;
  std::string smote_hash;  // empty when SMOTE is skipped
};

// The training half of a fold: per-index fit and SMOTE seeds, an automatic
// positive-class weight from the unresampled labels, SMOTE unless the model
// is Dummy, then Fit.
PipelineFit FitWithPipeline(const EncodedDataset& train, const ModelSpec& spec,
                            const PipelineConfig& config, std::uint64_t index);

// Stream index used for a model fitted on every instance.
inline constexpr std::uint64_t kFullDataIndex = ~std::uint64_t{0};

// SMOTE on the training part (not for Dummy, whose prediction rate must track
// the original class distribution), fit, then score the untouched test part.
// An automatic positive-class weight is taken from the training part before
// resampling.
FoldResult RunFold(const FoldData& fold, const ModelSpec& spec, const PipelineConfig& config);

struct CVReport {
  std::string model_name;
  ModelKind kind = ModelKind::kGbdt;
  std::string mask_name;
  std::vector<FoldResult> folds;
  Interval precision;
  Interval recall;
  Interval f1;
};

// Stratified k-fold evaluation of one model. Folds run on up to
// config.jobs threads; the report does not depend on the thread count.
CVReport CrossValidate(const EncodedCorpus& data, const ModelSpec& spec,
                       const PipelineConfig& config);

// The fold partition CrossValidate uses for `config`.
std::vector<Fold> PipelineFolds(const EncodedCorpus& data, const PipelineConfig& config);

// Table-style rendering: model, mask, F1, P, R as "mean,half_width" pairs.
std::string ReportCsv(std::span<const CVReport> reports);
std::string ReportText(std::span<const CVReport> reports);

// Hash of a matrix and label vector, for artifact comparisons.
std::string HashDataset(const Matrix& x, std::span<const int> y);

}  // namespace hedgepred

#endif  // HEDGEPRED_EVAL_H_
