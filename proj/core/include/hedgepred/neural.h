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

#ifndef HEDGEPRED_NEURAL_H_
#define HEDGEPRED_NEURAL_H_

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "hedgepred/models.h"

namespace hedgepred {

// A differentiable binary classifier with all parameters in one flat vector.
// The loss is binary cross-entropy with per-row weights, normalized by the
// weight total.
class Network {
 public:
  virtual ~Network() = default;

  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  // Pre-sigmoid outputs, one per row.
  virtual Eigen::VectorXd Logits(const Matrix& x) const = 0;
  void Forward(const Matrix& x, std::span<double> proba) const;
  virtual double LossAndGradient(const Matrix& x, std::span<const int> y,
                                 std::span<const double> weights,
                                 std::span<double> grad) const = 0;
  virtual nlohmann::json Architecture() const = 0;
  virtual std::unique_ptr<Network> Clone() const = 0;

  double Loss(const Matrix& x, std::span<const int> y,
              std::span<const double> weights) const;

 protected:
  std::vector<double> params_;
};

// Fully connected ReLU layers followed by a sigmoid unit.
class MlpNetwork : public Network {
 public:
  MlpNetwork(std::size_t input_dim, std::vector<int> hidden, Rng* init);

  Eigen::VectorXd Logits(const Matrix& x) const override;
  double LossAndGradient(const Matrix& x, std::span<const int> y,
                         std::span<const double> weights,
                         std::span<double> grad) const override;
  nlohmann::json Architecture() const override;
  std::unique_ptr<Network> Clone() const override;

 private:
  std::size_t input_dim_;
  std::vector<int> hidden_;
};

// LSTM over window timesteps of row_width inputs. With attention_dim > 0 an
// additive attention layer pools all hidden states; otherwise the final
// hidden state feeds the output unit.
class LstmNetwork : public Network {
 public:
  LstmNetwork(std::size_t window, std::size_t row_width, int hidden,
              int attention_dim, Rng* init);

  Eigen::VectorXd Logits(const Matrix& x) const override;
  double LossAndGradient(const Matrix& x, std::span<const int> y,
                         std::span<const double> weights,
                         std::span<double> grad) const override;
  nlohmann::json Architecture() const override;
  std::unique_ptr<Network> Clone() const override;

  // n x window attention weights (uniform rows when attention is off).
  Matrix AttentionWeights(const Matrix& x) const;

 private:
  struct Cache;
  void Run(const Matrix& x, Cache& cache) const;

  std::size_t window_;
  std::size_t row_width_;
  int hidden_;
  int attention_dim_;
};

std::unique_ptr<Network> MakeNetwork(ModelKind kind, const NeuralParams& params,
                                     std::size_t window, std::size_t row_width,
                                     Rng* init);

class NeuralClassifier : public Classifier {
 public:
  NeuralClassifier(ModelKind kind, std::unique_ptr<Network> network)
      : kind_(kind), network_(std::move(network)) {}

  ModelKind kind() const override { return kind_; }
  void PredictProba(const Matrix& x, std::span<double> out) const override;
  nlohmann::json SaveParameters() const override;
  static std::shared_ptr<NeuralClassifier> FromJson(ModelKind kind,
                                                    const nlohmann::json& j);
  const Network& network() const { return *network_; }

 private:
  ModelKind kind_;
  std::unique_ptr<Network> network_;
};

// Mini-batch SGD with a fixed learning rate on the weighted loss.
std::shared_ptr<NeuralClassifier> FitNeural(const TrainConfig& config,
                                            const TrainingData& data,
                                            double pos_weight);

}  // namespace hedgepred

#endif  // HEDGEPRED_NEURAL_H_
