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

#include "hedgepred/models.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hedgepred/error.h"
#include "hedgepred/gbdt.h"
#include "hedgepred/neural.h"

namespace hedgepred {
namespace {

constexpr std::string_view kModelFormat = "hedgepred-model";
constexpr int kModelVersion = 1;

// Predicts the training positive rate for every input; hard labels are
// seeded draws from that rate.
class DummyClassifier : public Classifier {
 public:
  explicit DummyClassifier(double rate) : rate_(rate) {}

  ModelKind kind() const override { return ModelKind::kDummy; }

  void PredictProba(const Matrix& x, std::span<double> out) const override {
    std::fill(out.begin(), out.begin() + x.rows(), rate_);
  }

  std::vector<int> PredictLabels(const Matrix& x, double /*threshold*/,
                                 Rng& rng) const override {
    std::vector<int> labels(static_cast<std::size_t>(x.rows()));
    for (int& label : labels) label = rng.Bernoulli(rate_) ? 1 : 0;
    return labels;
  }

  nlohmann::json SaveParameters() const override { return {{"positive_rate", rate_}}; }

 private:
  double rate_;
};

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void RejectUnknownKeys(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                       std::string_view where) {
  if (!j.is_object()) Fail(ErrorKind::kConfig, std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      Fail(ErrorKind::kConfig, std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void ReadKey(const nlohmann::json& j, const char* key, T& out, std::string_view where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    Fail(ErrorKind::kConfig, std::string(where) + ": bad value for '" + key + "'");
  }
}

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGbdt: return "GBDT";
    case ModelKind::kMlp: return "MLP";
    case ModelKind::kLstm: return "LSTM";
    case ModelKind::kAttnLstm: return "AttnLSTM";
    case ModelKind::kDummy: return "Dummy";
  }
  return "?";
}

std::optional<ModelKind> ParseModelKind(std::string_view name) {
  const std::string s = Lower(name);
  if (s == "gbdt") return ModelKind::kGbdt;
  if (s == "mlp") return ModelKind::kMlp;
  if (s == "lstm") return ModelKind::kLstm;
  if (s == "attnlstm" || s == "attn_lstm") return ModelKind::kAttnLstm;
  if (s == "dummy") return ModelKind::kDummy;
  return std::nullopt;
}

GbdtParams GbdtParams::Preset(std::string_view name) {
  GbdtParams p;
  const std::string s = Lower(name);
  if (s == "xgboost-like") {
    p.depth = 6;
    p.feature_bins = 64;
  } else if (s == "lightgbm-like") {
    p.depth = 5;
    p.feature_bins = 32;
  } else {
    Fail(ErrorKind::kConfig, "unknown gbdt preset '" + std::string(name) + "'");
  }
  return p;
}

void TrainConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) Fail(ErrorKind::kConfig, what);
  };
  require(threshold > 0.0 && threshold < 1.0, "threshold must lie in (0,1)");
  require(!pos_weight || (std::isfinite(*pos_weight) && *pos_weight > 0.0),
          "pos_weight must be positive");
  if (kind == ModelKind::kGbdt) {
    require(gbdt.trees >= 0, "gbdt.trees must be nonnegative");
    require(gbdt.depth >= 1, "gbdt.depth must be positive");
    require(gbdt.learning_rate > 0.0, "gbdt.learning_rate must be positive");
    require(gbdt.min_leaf >= 1, "gbdt.min_leaf must be positive");
    require(gbdt.feature_bins >= 2 && gbdt.feature_bins <= 256,
            "gbdt.feature_bins must lie in [2,256]");
    require(gbdt.l2 >= 0.0, "gbdt.l2 must be nonnegative");
  }
  if (kind == ModelKind::kMlp || kind == ModelKind::kLstm || kind == ModelKind::kAttnLstm) {
    require(!neural.mlp_hidden.empty(), "neural.mlp_hidden must be nonempty");
    for (int h : neural.mlp_hidden) require(h >= 1, "neural.mlp_hidden sizes must be positive");
    require(neural.lstm_hidden >= 1, "neural.lstm_hidden must be positive");
    require(neural.attention_dim >= 1, "neural.attention_dim must be positive");
    require(neural.epochs >= 1, "neural.epochs must be positive");
    require(neural.batch_size >= 1, "neural.batch_size must be positive");
    require(neural.learning_rate > 0.0 && std::isfinite(neural.learning_rate),
            "neural.learning_rate must be positive");
  }
}

nlohmann::json TrainConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["kind"] = ModelKindName(kind);
  j["threshold"] = threshold;
  j["seed"] = seed;
  if (pos_weight) {
    j["pos_weight"] = *pos_weight;
  } else {
    j["pos_weight"] = "auto";
  }
  j["gbdt"] = {{"trees", gbdt.trees},         {"depth", gbdt.depth},
               {"learning_rate", gbdt.learning_rate}, {"min_leaf", gbdt.min_leaf},
               {"feature_bins", gbdt.feature_bins},   {"l2", gbdt.l2}};
  j["neural"] = {{"mlp_hidden", neural.mlp_hidden},
                 {"lstm_hidden", neural.lstm_hidden},
                 {"attention_dim", neural.attention_dim},
                 {"epochs", neural.epochs},
                 {"batch_size", neural.batch_size},
                 {"learning_rate", neural.learning_rate}};
  return nlohmann::json::parse(j.dump());
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& j) { return FromJson(j, TrainConfig{}); }

TrainConfig TrainConfig::FromJson(const nlohmann::json& j, TrainConfig base) {
  RejectUnknownKeys(j, {"kind", "threshold", "seed", "pos_weight", "preset", "gbdt", "neural"},
                    "model config");
  TrainConfig c = std::move(base);
  if (auto it = j.find("kind"); it != j.end()) {
    if (!it->is_string()) Fail(ErrorKind::kConfig, "model config: 'kind' must be a string");
    auto kind = ParseModelKind(it->get<std::string>());
    if (!kind) Fail(ErrorKind::kConfig, "unknown model kind '" + it->get<std::string>() + "'");
    c.kind = *kind;
  }
  if (auto it = j.find("preset"); it != j.end()) {
    if (!it->is_string()) Fail(ErrorKind::kConfig, "model config: 'preset' must be a string");
    c.gbdt = GbdtParams::Preset(it->get<std::string>());
  }
  ReadKey(j, "threshold", c.threshold, "model config");
  ReadKey(j, "seed", c.seed, "model config");
  if (auto it = j.find("pos_weight"); it != j.end()) {
    if (it->is_string() && it->get<std::string>() == "auto") {
      c.pos_weight.reset();
    } else if (it->is_number()) {
      c.pos_weight = it->get<double>();
    } else {
      Fail(ErrorKind::kConfig, "model config: pos_weight must be \"auto\" or a number");
    }
  }
  if (auto it = j.find("gbdt"); it != j.end()) {
    RejectUnknownKeys(*it, {"trees", "depth", "learning_rate", "min_leaf", "feature_bins", "l2"},
                      "gbdt");
    ReadKey(*it, "trees", c.gbdt.trees, "gbdt");
    ReadKey(*it, "depth", c.gbdt.depth, "gbdt");
    ReadKey(*it, "learning_rate", c.gbdt.learning_rate, "gbdt");
    ReadKey(*it, "min_leaf", c.gbdt.min_leaf, "gbdt");
    ReadKey(*it, "feature_bins", c.gbdt.feature_bins, "gbdt");
    ReadKey(*it, "l2", c.gbdt.l2, "gbdt");
  }
  if (auto it = j.find("neural"); it != j.end()) {
    RejectUnknownKeys(*it, {"mlp_hidden", "lstm_hidden", "attention_dim", "epochs",
                            "batch_size", "learning_rate"},
                      "neural");
    ReadKey(*it, "mlp_hidden", c.neural.mlp_hidden, "neural");
    ReadKey(*it, "lstm_hidden", c.neural.lstm_hidden, "neural");
    ReadKey(*it, "attention_dim", c.neural.attention_dim, "neural");
    ReadKey(*it, "epochs", c.neural.epochs, "neural");
    ReadKey(*it, "batch_size", c.neural.batch_size, "neural");
    ReadKey(*it, "learning_rate", c.neural.learning_rate, "neural");
  }
  c.Validate();
  return c;
}

std::vector<int> Classifier::PredictLabels(const Matrix& x, double threshold,
                                           Rng& /*rng*/) const {
  std::vector<double> p(static_cast<std::size_t>(x.rows()));
  PredictProba(x, p);
  std::vector<int> labels(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) labels[i] = Predict(p[i], threshold) ? 1 : 0;
  return labels;
}

TrainedModel::TrainedModel(TrainConfig config, std::shared_ptr<const Classifier> classifier,
                           std::string fingerprint, std::size_t window, std::size_t row_width)
    : config_(std::move(config)),
      classifier_(std::move(classifier)),
      fingerprint_(std::move(fingerprint)),
      window_(window),
      row_width_(row_width) {}

void TrainedModel::CheckWidth(std::size_t cols) const {
  if (cols != input_dim()) {
    Fail(ErrorKind::kShape, "input width " + std::to_string(cols) + " does not match model width " +
                                std::to_string(input_dim()));
  }
}

double TrainedModel::PredictProba(std::span<const double> x) const {
  CheckWidth(x.size());
  Matrix row(1, static_cast<Eigen::Index>(x.size()));
  std::copy(x.begin(), x.end(), row.data());
  double p = 0.0;
  classifier_->PredictProba(row, std::span<double>(&p, 1));
  return p;
}

std::vector<double> TrainedModel::PredictProba(const Matrix& x) const {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  PredictProba(x, out);
  return out;
}

void TrainedModel::PredictProba(const Matrix& x, std::span<double> out) const {
  CheckWidth(static_cast<std::size_t>(x.cols()));
  if (out.size() < static_cast<std::size_t>(x.rows())) {
    Fail(ErrorKind::kShape, "output buffer too small");
  }
  classifier_->PredictProba(x, out);
}

bool TrainedModel::Predict(std::span<const double> x, double threshold) const {
  return hedgepred::Predict(PredictProba(x), threshold);
}

std::vector<int> TrainedModel::PredictLabels(const Matrix& x, double threshold,
                                             std::uint64_t seed) const {
  CheckWidth(static_cast<std::size_t>(x.cols()));
  Rng rng(seed);
  return classifier_->PredictLabels(x, threshold, rng);
}

void TrainedModel::CheckFingerprint(std::string_view fingerprint) const {
  if (fingerprint != fingerprint_) {
    Fail(ErrorKind::kShape, "schema fingerprint mismatch: model expects " + fingerprint_ +
                                ", input has " + std::string(fingerprint));
  }
}

std::string TrainedModel::ParameterHash() const {
  return Hex(Fnv1a(classifier_->SaveParameters().dump()));
}

nlohmann::json TrainedModel::ToJson() const {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = ModelKindName(kind());
  j["config"] = config_.ToJson();
  j["fingerprint"] = fingerprint_;
  j["window"] = window_;
  j["row_width"] = row_width_;
  j["seed"] = config_.seed;
  j["metadata"] = metadata_;
  j["parameters"] = classifier_->SaveParameters();
  return nlohmann::json::parse(j.dump());
}

TrainedModel TrainedModel::FromJson(const nlohmann::json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kModelFormat) {
      Fail(ErrorKind::kConfig, "not a hedgepred model file");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      Fail(ErrorKind::kConfig, "unsupported model file version");
    }
    TrainConfig config = TrainConfig::FromJson(j.at("config"));
    auto kind = ParseModelKind(j.at("kind").get<std::string>());
    if (!kind || *kind != config.kind) Fail(ErrorKind::kConfig, "model file: kind mismatch");
    const auto& params = j.at("parameters");
    std::shared_ptr<const Classifier> classifier;
    switch (config.kind) {
      case ModelKind::kGbdt:
        classifier = GbdtClassifier::FromJson(params);
        break;
      case ModelKind::kDummy:
        classifier = std::make_shared<DummyClassifier>(params.at("positive_rate").get<double>());
        break;
      default:
        classifier = NeuralClassifier::FromJson(config.kind, params);
        break;
    }
    TrainedModel model(std::move(config), std::move(classifier),
                       j.at("fingerprint").get<std::string>(),
                       j.at("window").get<std::size_t>(), j.at("row_width").get<std::size_t>());
    if (auto it = j.find("metadata"); it != j.end()) model.set_metadata(*it);
    return model;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("malformed model file: ") + e.what());
  }
}

void TrainedModel::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  out << ToJson().dump(1) << '\n';
  if (!out) Fail(ErrorKind::kIo, "write failed for " + path.string());
}

TrainedModel TrainedModel::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kConfig, path.string() + ": " + e.what());
  }
  return FromJson(j);
}

bool Predict(double proba, double threshold) { return proba >= threshold; }

double ResolvePosWeight(const std::optional<double>& configured, std::span<const int> y) {
  if (configured) return *configured;
  std::size_t pos = 0;
  for (int v : y) pos += v != 0 ? 1 : 0;
  const std::size_t neg = y.size() - pos;
  if (pos == 0 || neg == 0) return 1.0;
  return static_cast<double>(neg) / static_cast<double>(pos);
}

TrainedModel Fit(const TrainConfig& config, const TrainingData& data) {
  config.Validate();
  const auto n = static_cast<std::size_t>(data.x.rows());
  if (n == 0 || data.y.size() != n) Fail(ErrorKind::kShape, "fit: empty or misaligned data");
  if (static_cast<std::size_t>(data.x.cols()) != data.window * data.row_width) {
    Fail(ErrorKind::kShape, "fit: row width does not match window x row_width");
  }
  std::size_t pos = 0;
  for (int v : data.y) pos += v != 0 ? 1 : 0;

  std::shared_ptr<const Classifier> classifier;
  if (config.kind == ModelKind::kDummy) {
    classifier = std::make_shared<DummyClassifier>(static_cast<double>(pos) /
                                                   static_cast<double>(n));
  } else {
    if (pos == 0 || pos == n) {
      Fail(ErrorKind::kTraining, "training data contains a single class");
    }
    const double pw = ResolvePosWeight(config.pos_weight, data.y);
    if (config.kind == ModelKind::kGbdt) {
      classifier = FitGbdt(config.gbdt, data.x, data.y, pw);
    } else {
      classifier = FitNeural(config, data, pw);
    }
  }
  return TrainedModel(config, std::move(classifier), data.fingerprint, data.window,
                      data.row_width);
}

double NumericGradientCheck(ModelKind kind, const TrainConfig& config,
                            const TrainingData& batch) {
  Rng init(DeriveSeed(config.seed, "init"));
  auto net = MakeNetwork(kind, config.neural, batch.window, batch.row_width, &init);
  const double pw = ResolvePosWeight(config.pos_weight, batch.y);
  std::vector<double> w(batch.y.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = batch.y[i] != 0 ? pw : 1.0;

  auto& params = net->parameters();
  std::vector<double> grad(params.size());
  net->LossAndGradient(batch.x, batch.y, w, grad);
  constexpr double kStep = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + kStep;
    const double up = net->Loss(batch.x, batch.y, w);
    params[i] = saved - kStep;
    const double down = net->Loss(batch.x, batch.y, w);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    // The floor keeps roundoff in the differences (~eps * loss / h) from
    // dominating parameters whose true gradient is near zero.
    const double scale = std::max({std::abs(grad[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(grad[i] - numeric) / scale);
  }
  return worst;
}

}  // namespace hedgepred
