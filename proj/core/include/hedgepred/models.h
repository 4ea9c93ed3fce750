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

#ifndef HEDGEPRED_MODELS_H_
#define HEDGEPRED_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hedgepred/encoding.h"
#include "hedgepred/random.h"

namespace hedgepred {

enum class ModelKind { kGbdt, kMlp, kLstm, kAttnLstm, kDummy };

std::string_view ModelKindName(ModelKind kind);
std::optional<ModelKind> ParseModelKind(std::string_view name);

struct GbdtParams {
  int trees = 100;
  int depth = 6;
  double learning_rate = 0.1;
  int min_leaf = 5;
  int feature_bins = 64;
  // L2 penalty on leaf values, added to the hessian sum.
  double l2 = 1.0;

  // "xgboost-like" or "lightgbm-like"; they differ in depth and bin count.
  static GbdtParams Preset(std::string_view name);
};

struct NeuralParams {
  std::vector<int> mlp_hidden = {256, 64};
  int lstm_hidden = 128;
  int attention_dim = 64;
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 0.1;
};

struct TrainConfig {
  ModelKind kind = ModelKind::kGbdt;
  GbdtParams gbdt;
  NeuralParams neural;
  // Positive-class weight; nullopt means N_neg / N_pos of the training data.
  std::optional<double> pos_weight;
  double threshold = 0.5;
  std::uint64_t seed = 0;

  void Validate() const;  // throws Error(kConfig)
  nlohmann::json ToJson() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig FromJson(const nlohmann::json& j);
  static TrainConfig FromJson(const nlohmann::json& j, TrainConfig base);
};

// Flattened training rows; sequence models reshape each row into
// window x row_width.
struct TrainingData {
  const Matrix& x;
  std::span<const int> y;
  std::size_t window = 1;
  std::size_t row_width = 0;
  std::string fingerprint;
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual ModelKind kind() const = 0;
  virtual void PredictProba(const Matrix& x, std::span<double> out) const = 0;
  // Hard labels. Threshold rule by default; the stratified dummy draws.
  virtual std::vector<int> PredictLabels(const Matrix& x, double threshold,
                                         Rng& rng) const;
  virtual nlohmann::json SaveParameters() const = 0;
};

class TrainedModel {
 public:
  TrainedModel(TrainConfig config, std::shared_ptr<const Classifier> classifier,
               std::string fingerprint, std::size_t window, std::size_t row_width);

  ModelKind kind() const { return config_.kind; }
  const TrainConfig& config() const { return config_; }
  const std::string& fingerprint() const { return fingerprint_; }
  std::size_t window() const { return window_; }
  std::size_t row_width() const { return row_width_; }
  std::size_t input_dim() const { return window_ * row_width_; }
  const Classifier& classifier() const { return *classifier_; }

  // Free-form provenance (mask, normalization ranges, encoder settings).
  const nlohmann::json& metadata() const { return metadata_; }
  void set_metadata(nlohmann::json metadata) { metadata_ = std::move(metadata); }

  // Shape is checked; results lie in [0, 1].
  double PredictProba(std::span<const double> x) const;
  std::vector<double> PredictProba(const Matrix& x) const;
  void PredictProba(const Matrix& x, std::span<double> out) const;
  bool Predict(std::span<const double> x, double threshold) const;
  std::vector<int> PredictLabels(const Matrix& x, double threshold,
                                 std::uint64_t seed) const;

  // Throws Error(kShape) if `fingerprint` differs from the training input.
  void CheckFingerprint(std::string_view fingerprint) const;

  // Hash over the serialized parameters.
  std::string ParameterHash() const;

  nlohmann::json ToJson() const;
  static TrainedModel FromJson(const nlohmann::json& j);
  void Save(const std::filesystem::path& path) const;
  static TrainedModel Load(const std::filesystem::path& path);

 private:
  void CheckWidth(std::size_t cols) const;

  TrainConfig config_;
  std::shared_ptr<const Classifier> classifier_;
  std::string fingerprint_;
  std::size_t window_;
  std::size_t row_width_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

// Errors: kTraining for single-class data (non-dummy) or a NaN loss.
TrainedModel Fit(const TrainConfig& config, const TrainingData& data);

// proba >= threshold.
bool Predict(double proba, double threshold);

double ResolvePosWeight(const std::optional<double>& configured,
                        std::span<const int> y);

// Largest relative error between backprop gradients and central differences
// (h = 1e-5) over all parameters of a freshly initialized network.
double NumericGradientCheck(ModelKind kind, const TrainConfig& config,
                            const TrainingData& batch);

}  // namespace hedgepred

#endif  // HEDGEPRED_MODELS_H_
