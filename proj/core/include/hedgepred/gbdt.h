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

#ifndef HEDGEPRED_GBDT_H_
#define HEDGEPRED_GBDT_H_

#include <memory>
#include <span>
#include <vector>

#include "hedgepred/models.h"

namespace hedgepred {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output, learning rate already applied
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  // x[feature] <= threshold goes left.
  double Evaluate(const double* x) const;
};

class GbdtClassifier : public Classifier {
 public:
  GbdtClassifier(double init_score, std::vector<Tree> trees)
      : init_score_(init_score), trees_(std::move(trees)) {}

  ModelKind kind() const override { return ModelKind::kGbdt; }
  void PredictProba(const Matrix& x, std::span<double> out) const override;
  nlohmann::json SaveParameters() const override;
  static std::shared_ptr<GbdtClassifier> FromJson(const nlohmann::json& j);

  double RawScore(const double* x) const;
  double init_score() const { return init_score_; }
  const std::vector<Tree>& trees() const { return trees_; }

 private:
  double init_score_;
  std::vector<Tree> trees_;
};

// Equal-frequency cut points (at most bins - 1, strictly below the maximum).
std::vector<double> QuantileCuts(std::vector<double> values, int bins);

// Second-order logistic boosting over histogram-binned features. If
// `loss_trace` is given it receives the weighted training log-loss before
// the first tree and after every round.
std::shared_ptr<GbdtClassifier> FitGbdt(const GbdtParams& params, const Matrix& x,
                                        std::span<const int> y, double pos_weight,
                                        std::vector<double>* loss_trace = nullptr);

}  // namespace hedgepred

#endif  // HEDGEPRED_GBDT_H_
