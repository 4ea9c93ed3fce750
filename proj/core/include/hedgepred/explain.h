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

#ifndef HEDGEPRED_EXPLAIN_H_
#define HEDGEPRED_EXPLAIN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hedgepred/encoding.h"
#include "hedgepred/models.h"

namespace hedgepred {

// Batch predictor: out[i] = f(row i of x). Must be safe to call concurrently.
using ModelFn = std::function<void(const Matrix& x, std::span<double> out)>;

ModelFn ModelFunction(const TrainedModel& model);

// A set of input coordinates that enter or leave a coalition together.
// Coordinates covered by no player always keep the explained value.
struct Player {
  std::string name;
  std::vector<std::size_t> coordinates;
};

// One player per included feature group, spanning all history rows.
std::vector<Player> GroupPlayers(const FeatureSchema& schema, const FeatureMask& mask,
                                 int window);

// One player per flattened coordinate.
std::vector<Player> CoordinatePlayers(const FeatureSchema& schema, const FeatureMask& mask,
                                      int window);

// One player per flattened coordinate, except that each history row's
// embedding block is a single player and history-level values (rapport,
// pretests, session, period) are one player across all rows.
std::vector<Player> FeaturePlayers(const FeatureSchema& schema, const FeatureMask& mask,
                                   int window);

inline constexpr std::size_t kMaxExactPlayers = 12;

struct ShapleyReport {
  std::vector<std::string> players;
  std::vector<double> phi;
  std::vector<double> std_error;      // zero in exact mode
  std::vector<double> player_values;  // mean of the player's coordinates in x
  double base_value = 0.0;            // mean prediction over the background
  double prediction = 0.0;            // f(x)
  // f(x) - base - sum(phi)
  double efficiency_residual = 0.0;
};

// Interventional Shapley values by enumerating all 2^G coalitions.
// v(S) = mean over background rows b of f(x on S, b elsewhere).
// Errors: more than kMaxExactPlayers players (kConfig); shape mismatch.
ShapleyReport ShapleyExact(const ModelFn& f, std::span<const double> x,
                           const Matrix& background, std::span<const Player> players);

// Permutation sampling: each of the `samples` draws picks a random player
// order and a random background row, then credits each player with the
// change in f when its coordinates switch to x. Reports the Monte-Carlo
// standard error of each estimate.
ShapleyReport ShapleySampling(const ModelFn& f, std::span<const double> x,
                              const Matrix& background, std::span<const Player> players,
                              int samples, std::uint64_t seed);

// Up to `size` distinct rows drawn without replacement (all rows if fewer).
Matrix SampleBackground(const Matrix& data, std::size_t size, std::uint64_t seed);

enum class ShapleyMode { kExact, kSampling };

// Explains every row of `x`, on up to `jobs` threads. Instance i of sampling
// mode uses the seed DeriveSeed(seed, "shapley", i).
std::vector<ShapleyReport> ExplainRows(const ModelFn& f, const Matrix& x,
                                       const Matrix& background,
                                       std::span<const Player> players, ShapleyMode mode,
                                       int samples, std::uint64_t seed, int jobs);

struct ValenceRow {
  std::string player;
  int valence = 0;  // +1, -1 or 0
  double correlation = 0.0;
  double mean_abs_phi = 0.0;
  std::size_t rank = 0;  // 1 = largest mean |phi|
};

// Valence is the sign of the Pearson correlation between a player's value and
// its phi across reports (0 when |r| < 0.05 or either side is constant).
// Rows are ordered by rank. Errors: fewer than two reports, or reports with
// different players (kConfig).
std::vector<ValenceRow> ValenceSummary(std::span<const ShapleyReport> reports);

// Pearson correlation; 0 when either input is constant.
double PearsonCorrelation(std::span<const double> a, std::span<const double> b);

// Players found in the top `k` of every summary, ordered by their rank in the
// first summary.
std::vector<std::string> ConsensusTop(std::span<const std::vector<ValenceRow>> summaries,
                                      std::size_t k = 10);

}  // namespace hedgepred

#endif  // HEDGEPRED_EXPLAIN_H_
