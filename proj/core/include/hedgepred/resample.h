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

#ifndef HEDGEPRED_RESAMPLE_H_
#define HEDGEPRED_RESAMPLE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hedgepred/encoding.h"

namespace hedgepred {

struct ResampleConfig {
  int k_neighbors = 5;
  // Desired minority/majority count ratio after oversampling, in (0, 1].
  double target_ratio = 1.0;
  std::uint64_t seed = 0;
  // Pins the interpolation factor instead of drawing it from U(0,1).
  std::optional<double> fixed_lambda;
};

struct Resampled {
  // Original rows first, in input order, then the synthetic rows.
  Matrix x;
  std::vector<int> y;
  std::size_t synthetic_count = 0;
};

// SMOTE: each synthetic row is p + lambda * (q - p) for a random minority row
// p and one of its k nearest minority neighbours q (Euclidean).
//
// Errors (kConfig): an empty class, k < 1, ratio outside (0, 1], or fewer
// than k + 1 minority rows.
Resampled Smote(const Matrix& x, std::span<const int> y, const ResampleConfig& config);

// Number of synthetic rows needed to reach the ratio (0 if already reached).
std::size_t SmoteDeficit(std::size_t minority, std::size_t majority, double target_ratio);

}  // namespace hedgepred

#endif  // HEDGEPRED_RESAMPLE_H_
