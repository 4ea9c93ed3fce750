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

#include "hedgepred/resample.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hedgepred/error.h"
#include "hedgepred/random.h"

namespace hedgepred {

std::size_t SmoteDeficit(std::size_t minority, std::size_t majority,
                         double target_ratio) {
  const auto wanted =
      static_cast<std::size_t>(std::llround(target_ratio * static_cast<double>(majority)));
  return wanted > minority ? wanted - minority : 0;
}

Resampled Smote(const Matrix& x, std::span<const int> y, const ResampleConfig& config) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    Fail(ErrorKind::kShape, "smote: row count does not match label count");
  }
  if (config.k_neighbors < 1) Fail(ErrorKind::kConfig, "smote: k must be >= 1");
  if (!(config.target_ratio > 0.0 && config.target_ratio <= 1.0)) {
    Fail(ErrorKind::kConfig, "smote: ratio must lie in (0,1]");
  }
  std::size_t positives = 0;
  for (int label : y) positives += label != 0 ? 1 : 0;
  const std::size_t negatives = y.size() - positives;
  if (positives == 0 || negatives == 0) {
    Fail(ErrorKind::kConfig, "smote: both classes must be present");
  }
  const int minority_label = positives <= negatives ? 1 : 0;
  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if ((y[i] != 0 ? 1 : 0) == minority_label) minority.push_back(i);
  }
  const std::size_t m = minority.size();
  const auto k = static_cast<std::size_t>(config.k_neighbors);
  if (m < k + 1) {
    Fail(ErrorKind::kConfig, "smote: minority class has " + std::to_string(m) +
                                 " rows, needs at least k+1 = " +
                                 std::to_string(k + 1));
  }

  Resampled out;
  const std::size_t deficit = SmoteDeficit(m, y.size() - m, config.target_ratio);
  out.synthetic_count = deficit;
  out.x.resize(x.rows() + static_cast<Eigen::Index>(deficit), x.cols());
  out.x.topRows(x.rows()) = x;
  out.y.assign(y.begin(), y.end());
  if (deficit == 0) return out;

  // k nearest minority neighbours of every minority row; ties by index.
  Matrix points(static_cast<Eigen::Index>(m), x.cols());
  for (std::size_t i = 0; i < m; ++i) {
    points.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(minority[i]));
  }
  const Eigen::VectorXd sq = points.rowwise().squaredNorm();
  const Matrix gram = points * points.transpose();
  std::vector<std::vector<std::size_t>> neighbours(m);
  std::vector<std::pair<double, std::size_t>> dist(m);
  for (std::size_t i = 0; i < m; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      dist.emplace_back(std::max(0.0, sq(ii) + sq(jj) - 2.0 * gram(ii, jj)), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
    for (std::size_t n = 0; n < k; ++n) neighbours[i].push_back(dist[n].second);
  }

  Rng rng(config.seed);
  for (std::size_t s = 0; s < deficit; ++s) {
    const std::size_t p = rng.UniformIndex(m);
    const std::size_t q = neighbours[p][rng.UniformIndex(k)];
    const double lambda = config.fixed_lambda ? *config.fixed_lambda : rng.Uniform();
    const auto row = x.rows() + static_cast<Eigen::Index>(s);
    const auto pr = points.row(static_cast<Eigen::Index>(p));
    const auto qr = points.row(static_cast<Eigen::Index>(q));
    out.x.row(row) = pr + lambda * (qr - pr);
    out.y.push_back(minority_label);
  }
  return out;
}

}  // namespace hedgepred
