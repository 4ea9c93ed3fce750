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

#include "hedgepred/gbdt.h"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "hedgepred/error.h"

namespace hedgepred {
namespace {

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + exp(z)) - y * z, computed stably.
double LogisticLoss(double z, int y) {
  const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
  return softplus - (y != 0 ? z : 0.0);
}

struct BinStats {
  double g = 0.0;
  double h = 0.0;
  std::uint32_t n = 0;
};

struct SplitChoice {
  int feature = -1;
  int bin = -1;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const GbdtParams& params, const std::vector<std::uint8_t>& bins,
              std::size_t n_features, const std::vector<int>& bins_per_feature,
              const std::vector<std::vector<double>>& cuts,
              const std::vector<double>& grad, const std::vector<double>& hess)
      : params_(params),
        bins_(bins),
        n_features_(n_features),
        bins_per_feature_(bins_per_feature),
        cuts_(cuts),
        grad_(grad),
        hess_(hess),
        stride_(static_cast<std::size_t>(params.feature_bins)) {}

  // Returns the tree and writes each row's leaf output into `leaf_value`.
  Tree Build(std::vector<std::size_t> rows, std::vector<double>& leaf_value) {
    tree_ = Tree{};
    leaf_value_ = &leaf_value;
    auto hist = Histogram(rows);
    Grow(std::move(rows), hist, 0);
    return std::move(tree_);
  }

 private:
  std::vector<BinStats> Histogram(const std::vector<std::size_t>& rows) const {
    std::vector<BinStats> hist(n_features_ * stride_);
    for (std::size_t r : rows) {
      const std::uint8_t* b = &bins_[r * n_features_];
      const double g = grad_[r];
      const double h = hess_[r];
      for (std::size_t f = 0; f < n_features_; ++f) {
        BinStats& s = hist[f * stride_ + b[f]];
        s.g += g;
        s.h += h;
        ++s.n;
      }
    }
    return hist;
  }

  double Score(double g, double h) const { return g * g / (h + params_.l2); }

  SplitChoice BestSplit(const std::vector<BinStats>& hist, double g_total,
                        double h_total, std::size_t n_total) const {
    SplitChoice best;
    const double parent = Score(g_total, h_total);
    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    for (std::size_t f = 0; f < n_features_; ++f) {
      double gl = 0.0;
      double hl = 0.0;
      std::size_t nl = 0;
      const int nb = bins_per_feature_[f];
      for (int b = 0; b + 1 < nb; ++b) {
        const BinStats& s = hist[f * stride_ + static_cast<std::size_t>(b)];
        gl += s.g;
        hl += s.h;
        nl += s.n;
        const std::size_t nr = n_total - nl;
        if (nl < min_leaf) continue;
        if (nr < min_leaf) break;
        const double gain =
            Score(gl, hl) + Score(g_total - gl, h_total - hl) - parent;
        if (gain > best.gain + 1e-12) {
          best = SplitChoice{static_cast<int>(f), b, gain};
        }
      }
    }
    return best;
  }

  int Grow(std::vector<std::size_t> rows, const std::vector<BinStats>& hist,
           int depth) {
    double g_total = 0.0;
    double h_total = 0.0;
    for (std::size_t b = 0; b < stride_; ++b) {
      g_total += hist[b].g;
      h_total += hist[b].h;
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    SplitChoice split;
    if (depth < params_.depth &&
        rows.size() >= 2 * static_cast<std::size_t>(params_.min_leaf)) {
      split = BestSplit(hist, g_total, h_total, rows.size());
    }
    if (split.feature < 0) {
      const double value = -params_.learning_rate * g_total / (h_total + params_.l2);
      tree_.nodes[static_cast<std::size_t>(id)].value = value;
      for (std::size_t r : rows) (*leaf_value_)[r] = value;
      return id;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    const auto f = static_cast<std::size_t>(split.feature);
    for (std::size_t r : rows) {
      (bins_[r * n_features_ + f] <= split.bin ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    // Histogram of the smaller child; the sibling is parent minus child.
    const bool left_small = left.size() <= right.size();
    std::vector<BinStats> small = Histogram(left_small ? left : right);
    std::vector<BinStats> large(hist.size());
    for (std::size_t i = 0; i < hist.size(); ++i) {
      large[i].g = hist[i].g - small[i].g;
      large[i].h = hist[i].h - small[i].h;
      large[i].n = hist[i].n - small[i].n;
    }
    const auto& left_hist = left_small ? small : large;
    const auto& right_hist = left_small ? large : small;

    const int l = Grow(std::move(left), left_hist, depth + 1);
    const int r = Grow(std::move(right), right_hist, depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = cuts_[f][static_cast<std::size_t>(split.bin)];
    node.left = l;
    node.right = r;
    return id;
  }

  const GbdtParams& params_;
  const std::vector<std::uint8_t>& bins_;
  std::size_t n_features_;
  const std::vector<int>& bins_per_feature_;
  const std::vector<std::vector<double>>& cuts_;
  const std::vector<double>& grad_;
  const std::vector<double>& hess_;
  std::size_t stride_;
  Tree tree_;
  std::vector<double>* leaf_value_ = nullptr;
};

}  // namespace

double Tree::Evaluate(const double* x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

double GbdtClassifier::RawScore(const double* x) const {
  double s = init_score_;
  for (const auto& t : trees_) s += t.Evaluate(x);
  return s;
}

void GbdtClassifier::PredictProba(const Matrix& x, std::span<double> out) const {
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out[static_cast<std::size_t>(r)] = Sigmoid(RawScore(x.row(r).data()));
  }
}

nlohmann::json GbdtClassifier::SaveParameters() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) {
    nlohmann::json feature = nlohmann::json::array();
    nlohmann::json threshold = nlohmann::json::array();
    nlohmann::json left = nlohmann::json::array();
    nlohmann::json right = nlohmann::json::array();
    nlohmann::json value = nlohmann::json::array();
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    trees.push_back({{"feature", feature},
                     {"threshold", threshold},
                     {"left", left},
                     {"right", right},
                     {"value", value}});
  }
  return {{"init_score", init_score_}, {"trees", trees}};
}

std::shared_ptr<GbdtClassifier> GbdtClassifier::FromJson(const nlohmann::json& j) {
  std::vector<Tree> trees;
  for (const auto& jt : j.at("trees")) {
    Tree t;
    const auto& feature = jt.at("feature");
    const std::size_t n = feature.size();
    for (std::size_t i = 0; i < n; ++i) {
      TreeNode node;
      node.feature = feature[i].get<int>();
      node.threshold = jt.at("threshold")[i].get<double>();
      node.left = jt.at("left")[i].get<int>();
      node.right = jt.at("right")[i].get<int>();
      node.value = jt.at("value")[i].get<double>();
      const int limit = static_cast<int>(n);
      if (node.feature >= 0 && (node.left <= static_cast<int>(i) || node.left >= limit ||
                                node.right <= static_cast<int>(i) || node.right >= limit)) {
        Fail(ErrorKind::kConfig, "model file: malformed tree");
      }
      t.nodes.push_back(node);
    }
    if (t.nodes.empty()) Fail(ErrorKind::kConfig, "model file: empty tree");
    trees.push_back(std::move(t));
  }
  return std::make_shared<GbdtClassifier>(j.at("init_score").get<double>(),
                                          std::move(trees));
}

std::vector<double> QuantileCuts(std::vector<double> values, int bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> cuts;
  if (values.empty()) return cuts;
  const double top = values.back();
  std::vector<double> distinct = values;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() <= static_cast<std::size_t>(bins)) {
    cuts.assign(distinct.begin(), distinct.end() - 1);
    return cuts;
  }
  const std::size_t n = values.size();
  for (int q = 1; q < bins; ++q) {
    const std::size_t pos = (static_cast<std::size_t>(q) * n + bins - 1) /
                            static_cast<std::size_t>(bins);
    const double c = values[std::max<std::size_t>(pos, 1) - 1];
    if (c < top && (cuts.empty() || c > cuts.back())) cuts.push_back(c);
  }
  return cuts;
}

std::shared_ptr<GbdtClassifier> FitGbdt(const GbdtParams& params, const Matrix& x,
                                        std::span<const int> y, double pos_weight,
                                        std::vector<double>* loss_trace) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  if (n == 0 || n != y.size()) Fail(ErrorKind::kShape, "gbdt: bad training shape");
  if (params.feature_bins < 2 || params.feature_bins > 256) {
    Fail(ErrorKind::kConfig, "gbdt: feature_bins must lie in [2,256]");
  }

  std::vector<std::vector<double>> cuts(d);
  std::vector<int> bins_per_feature(d);
  std::vector<std::uint8_t> bins(n * d);
  std::vector<double> column(n);
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t r = 0; r < n; ++r) {
      column[r] = x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f));
    }
    cuts[f] = QuantileCuts(column, params.feature_bins);
    bins_per_feature[f] = static_cast<int>(cuts[f].size()) + 1;
    for (std::size_t r = 0; r < n; ++r) {
      const auto it = std::lower_bound(cuts[f].begin(), cuts[f].end(), column[r]);
      bins[r * d + f] = static_cast<std::uint8_t>(it - cuts[f].begin());
    }
  }

  std::vector<double> w(n);
  double w_total = 0.0;
  double w_pos = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    w[r] = y[r] != 0 ? pos_weight : 1.0;
    w_total += w[r];
    if (y[r] != 0) w_pos += w[r];
  }
  const double base = std::clamp(w_pos / w_total, 1e-12, 1.0 - 1e-12);
  const double init = std::log(base / (1.0 - base));

  std::vector<double> score(n, init);
  auto weighted_loss = [&] {
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) loss += w[r] * LogisticLoss(score[r], y[r]);
    return loss / w_total;
  };
  if (loss_trace != nullptr) loss_trace->assign(1, weighted_loss());

  std::vector<double> grad(n);
  std::vector<double> hess(n);
  std::vector<double> leaf_value(n);
  std::vector<std::size_t> all_rows(n);
  for (std::size_t r = 0; r < n; ++r) all_rows[r] = r;
  TreeBuilder builder(params, bins, d, bins_per_feature, cuts, grad, hess);

  std::vector<Tree> trees;
  trees.reserve(static_cast<std::size_t>(std::max(params.trees, 0)));
  for (int round = 0; round < params.trees; ++round) {
    for (std::size_t r = 0; r < n; ++r) {
      const double p = Sigmoid(score[r]);
      grad[r] = w[r] * (p - (y[r] != 0 ? 1.0 : 0.0));
      hess[r] = w[r] * p * (1.0 - p);
    }
    trees.push_back(builder.Build(all_rows, leaf_value));
    for (std::size_t r = 0; r < n; ++r) score[r] += leaf_value[r];
    if (loss_trace != nullptr) loss_trace->push_back(weighted_loss());
  }
  return std::make_shared<GbdtClassifier>(init, std::move(trees));
}

}  // namespace hedgepred
