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

#include "hedgepred/explain.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "hedgepred/error.h"
#include "hedgepred/parallel.h"

namespace hedgepred {
namespace {

// Upper bound on rows handed to the model in one call.
constexpr std::size_t kRowsPerCall = 16384;

void CheckShapes(std::span<const double> x, const Matrix& background,
                 std::span<const Player> players) {
  if (background.rows() == 0) Fail(ErrorKind::kConfig, "background is empty");
  if (static_cast<std::size_t>(background.cols()) != x.size()) {
    Fail(ErrorKind::kShape, "background width does not match the explained input");
  }
  for (const auto& p : players) {
    for (std::size_t c : p.coordinates) {
      if (c >= x.size()) Fail(ErrorKind::kShape, "player '" + p.name + "' is out of range");
    }
  }
}

double Evaluate(const ModelFn& f, std::span<const double> x) {
  Matrix row(1, static_cast<Eigen::Index>(x.size()));
  std::copy(x.begin(), x.end(), row.data());
  double out = 0.0;
  f(row, std::span<double>(&out, 1));
  return out;
}

double MeanPrediction(const ModelFn& f, const Matrix& background) {
  std::vector<double> out(static_cast<std::size_t>(background.rows()));
  f(background, out);
  return std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
}

void FillCommon(ShapleyReport& r, std::span<const double> x, std::span<const Player> players) {
  r.players.clear();
  r.player_values.clear();
  for (const auto& p : players) {
    r.players.push_back(p.name);
    double s = 0.0;
    for (std::size_t c : p.coordinates) s += x[c];
    r.player_values.push_back(p.coordinates.empty()
                                  ? 0.0
                                  : s / static_cast<double>(p.coordinates.size()));
  }
}

void CopyPlayer(const Player& p, std::span<const double> x, double* row) {
  for (std::size_t c : p.coordinates) row[c] = x[c];
}

// Coordinates that belong to no player keep the explained value.
std::vector<std::size_t> FreeCoordinates(std::size_t dim, std::span<const Player> players) {
  std::vector<char> owned(dim, 0);
  for (const auto& p : players) {
    for (std::size_t c : p.coordinates) owned[c] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < dim; ++c) {
    if (!owned[c]) out.push_back(c);
  }
  return out;
}

}  // namespace

ModelFn ModelFunction(const TrainedModel& model) {
  return [&model](const Matrix& x, std::span<double> out) { model.PredictProba(x, out); };
}

std::vector<Player> GroupPlayers(const FeatureSchema& schema, const FeatureMask& mask,
                                 int window) {
  const auto groups = FlattenedGroups(schema, mask, window);
  std::vector<Player> players;
  for (FeatureGroup g : mask.groups()) {
    Player p{std::string(FeatureGroupName(g)), {}};
    for (std::size_t c = 0; c < groups.size(); ++c) {
      if (groups[c] == g) p.coordinates.push_back(c);
    }
    if (!p.coordinates.empty()) players.push_back(std::move(p));
  }
  return players;
}

std::vector<Player> CoordinatePlayers(const FeatureSchema& schema, const FeatureMask& mask,
                                      int window) {
  const auto names = FlattenedNames(schema, mask, window);
  std::vector<Player> players;
  players.reserve(names.size());
  for (std::size_t c = 0; c < names.size(); ++c) players.push_back({names[c], {c}});
  return players;
}

std::vector<Player> FeaturePlayers(const FeatureSchema& schema, const FeatureMask& mask,
                                   int window) {
  // Values written identically into every row of a history. Per-row copies
  // would split credit arbitrarily, so each becomes a single player.
  static const std::set<std::string, std::less<>> kHistoryLevel = {
      "Rapport/rapport", "ConInfo/session", "ConInfo/period", "ConInfo/tutor_pretest",
      "ConInfo/tutee_pretest"};
  const auto names = FlattenedNames(schema, mask, window);
  const auto groups = FlattenedGroups(schema, mask, window);
  std::vector<Player> players;
  std::map<std::string, std::size_t, std::less<>> merged;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto slash = names[c].find('/');
    const std::string row = names[c].substr(0, slash);
    const std::string feature = names[c].substr(slash + 1);
    if (kHistoryLevel.contains(feature)) {
      auto [it, fresh] = merged.try_emplace(feature, players.size());
      if (fresh) players.push_back({feature, {}});
      players[it->second].coordinates.push_back(c);
      continue;
    }
    if (groups[c] != FeatureGroup::kEmbedding) {
      players.push_back({names[c], {c}});
      continue;
    }
    const std::string name = row + "/Embedding";
    if (players.empty() || players.back().name != name) players.push_back({name, {}});
    players.back().coordinates.push_back(c);
  }
  return players;
}

ShapleyReport ShapleyExact(const ModelFn& f, std::span<const double> x,
                           const Matrix& background, std::span<const Player> players) {
  CheckShapes(x, background, players);
  const std::size_t g = players.size();
  if (g > kMaxExactPlayers) {
    Fail(ErrorKind::kConfig, "exact Shapley supports at most " +
                                 std::to_string(kMaxExactPlayers) + " players, got " +
                                 std::to_string(g));
  }
  const std::size_t coalitions = std::size_t{1} << g;
  const auto b = static_cast<std::size_t>(background.rows());
  const auto free = FreeCoordinates(x.size(), players);

  // v[m] = mean over background rows of f with the players in m set to x.
  std::vector<double> v(coalitions, 0.0);
  const std::size_t per_call = std::max<std::size_t>(1, kRowsPerCall / b);
  Matrix rows;
  std::vector<double> out;
  for (std::size_t first = 0; first < coalitions; first += per_call) {
    const std::size_t count = std::min(per_call, coalitions - first);
    rows.resize(static_cast<Eigen::Index>(count * b), background.cols());
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t m = first + k;
      rows.middleRows(static_cast<Eigen::Index>(k * b), static_cast<Eigen::Index>(b)) =
          background;
      for (std::size_t r = 0; r < b; ++r) {
        double* row = rows.row(static_cast<Eigen::Index>(k * b + r)).data();
        for (std::size_t c : free) row[c] = x[c];
        for (std::size_t j = 0; j < g; ++j) {
          if (m >> j & 1U) CopyPlayer(players[j], x, row);
        }
      }
    }
    out.resize(count * b);
    f(rows, out);
    for (std::size_t k = 0; k < count; ++k) {
      double s = 0.0;
      for (std::size_t r = 0; r < b; ++r) s += out[k * b + r];
      v[first + k] = s / static_cast<double>(b);
    }
  }

  // weight[s] = s! (g - s - 1)! / g!
  std::vector<double> weight(g, 0.0);
  for (std::size_t s = 0; s < g; ++s) {
    weight[s] = std::exp(std::lgamma(static_cast<double>(s) + 1.0) +
                         std::lgamma(static_cast<double>(g - s)) -
                         std::lgamma(static_cast<double>(g) + 1.0));
  }
  ShapleyReport report;
  FillCommon(report, x, players);
  report.phi.assign(g, 0.0);
  report.std_error.assign(g, 0.0);
  for (std::size_t j = 0; j < g; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    double phi = 0.0;
    for (std::size_t m = 0; m < coalitions; ++m) {
      if (m & bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(m));
      phi += weight[size] * (v[m | bit] - v[m]);
    }
    report.phi[j] = phi;
  }
  report.base_value = v[0];
  report.prediction = Evaluate(f, x);
  report.efficiency_residual = report.prediction - report.base_value -
                               std::accumulate(report.phi.begin(), report.phi.end(), 0.0);
  return report;
}

ShapleyReport ShapleySampling(const ModelFn& f, std::span<const double> x,
                              const Matrix& background, std::span<const Player> players,
                              int samples, std::uint64_t seed) {
  CheckShapes(x, background, players);
  if (samples < 1) Fail(ErrorKind::kConfig, "samples must be positive");
  const std::size_t p = players.size();
  const auto m = static_cast<std::size_t>(samples);
  const auto free = FreeCoordinates(x.size(), players);
  Rng rng(seed);

  std::vector<double> sum(p, 0.0), sum_sq(p, 0.0);
  const std::size_t per_call = std::max<std::size_t>(1, kRowsPerCall / (p + 1));
  std::vector<std::vector<std::size_t>> orders;
  Matrix rows;
  std::vector<double> out;
  for (std::size_t first = 0; first < m; first += per_call) {
    const std::size_t count = std::min(per_call, m - first);
    rows.resize(static_cast<Eigen::Index>(count * (p + 1)), background.cols());
    orders.assign(count, {});
    for (std::size_t k = 0; k < count; ++k) {
      auto& order = orders[k];
      order.resize(p);
      std::iota(order.begin(), order.end(), 0);
      rng.Shuffle(order.begin(), order.end());
      const auto b = static_cast<Eigen::Index>(rng.UniformIndex(
          static_cast<std::size_t>(background.rows())));
      const auto base = static_cast<Eigen::Index>(k * (p + 1));
      rows.row(base) = background.row(b);
      double* row0 = rows.row(base).data();
      for (std::size_t c : free) row0[c] = x[c];
      for (std::size_t step = 0; step < p; ++step) {
        const auto r = base + static_cast<Eigen::Index>(step) + 1;
        rows.row(r) = rows.row(r - 1);
        CopyPlayer(players[order[step]], x, rows.row(r).data());
      }
    }
    out.resize(count * (p + 1));
    f(rows, out);
    for (std::size_t k = 0; k < count; ++k) {
      const double* o = out.data() + k * (p + 1);
      for (std::size_t step = 0; step < p; ++step) {
        const double delta = o[step + 1] - o[step];
        const std::size_t j = orders[k][step];
        sum[j] += delta;
        sum_sq[j] += delta * delta;
      }
    }
  }

  ShapleyReport report;
  FillCommon(report, x, players);
  report.phi.resize(p);
  report.std_error.resize(p);
  const double md = static_cast<double>(m);
  for (std::size_t j = 0; j < p; ++j) {
    const double mean = sum[j] / md;
    report.phi[j] = mean;
    if (m > 1) {
      const double var = std::max(0.0, (sum_sq[j] - md * mean * mean) / (md - 1.0));
      report.std_error[j] = std::sqrt(var / md);
    } else {
      report.std_error[j] = 0.0;
    }
  }
  report.base_value = MeanPrediction(f, background);
  report.prediction = Evaluate(f, x);
  report.efficiency_residual = report.prediction - report.base_value -
                               std::accumulate(report.phi.begin(), report.phi.end(), 0.0);
  return report;
}

Matrix SampleBackground(const Matrix& data, std::size_t size, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (n == 0) Fail(ErrorKind::kConfig, "cannot sample a background from no rows");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.Shuffle(idx.begin(), idx.end());
  idx.resize(std::min(size, n));
  std::sort(idx.begin(), idx.end());
  Matrix out(static_cast<Eigen::Index>(idx.size()), data.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = data.row(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

std::vector<ShapleyReport> ExplainRows(const ModelFn& f, const Matrix& x,
                                       const Matrix& background,
                                       std::span<const Player> players, ShapleyMode mode,
                                       int samples, std::uint64_t seed, int jobs) {
  std::vector<ShapleyReport> reports(static_cast<std::size_t>(x.rows()));
  ParallelFor(reports.size(), jobs, [&](std::size_t i) {
    const auto row = x.row(static_cast<Eigen::Index>(i));
    const std::span<const double> xi(row.data(), static_cast<std::size_t>(row.size()));
    reports[i] = mode == ShapleyMode::kExact
                     ? ShapleyExact(f, xi, background, players)
                     : ShapleySampling(f, xi, background, players, samples,
                                       DeriveSeed(seed, "shapley", i));
  });
  return reports;
}

double PearsonCorrelation(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return 0.0;
  const double ma = std::accumulate(a.begin(), a.begin() + static_cast<long>(n), 0.0) /
                    static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.begin() + static_cast<long>(n), 0.0) /
                    static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

std::vector<ValenceRow> ValenceSummary(std::span<const ShapleyReport> reports) {
  if (reports.size() < 2) Fail(ErrorKind::kConfig, "valence needs at least two explained instances");
  const auto& players = reports.front().players;
  for (const auto& r : reports) {
    if (r.players != players) Fail(ErrorKind::kConfig, "reports cover different players");
  }
  constexpr double kDeadZone = 0.05;
  std::vector<ValenceRow> rows;
  std::vector<double> values(reports.size()), phis(reports.size());
  for (std::size_t j = 0; j < players.size(); ++j) {
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      values[i] = reports[i].player_values[j];
      phis[i] = reports[i].phi[j];
      abs_sum += std::abs(phis[i]);
    }
    ValenceRow row;
    row.player = players[j];
    row.correlation = PearsonCorrelation(values, phis);
    row.valence = std::abs(row.correlation) < kDeadZone ? 0 : (row.correlation > 0 ? 1 : -1);
    row.mean_abs_phi = abs_sum / static_cast<double>(reports.size());
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ValenceRow& a, const ValenceRow& b) {
    return a.mean_abs_phi > b.mean_abs_phi;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
  return rows;
}

std::vector<std::string> ConsensusTop(std::span<const std::vector<ValenceRow>> summaries,
                                      std::size_t k) {
  std::vector<std::string> out;
  if (summaries.empty()) return out;
  std::map<std::string, std::size_t> hits;
  for (const auto& s : summaries) {
    for (std::size_t i = 0; i < std::min(k, s.size()); ++i) ++hits[s[i].player];
  }
  const auto& first = summaries.front();
  for (std::size_t i = 0; i < std::min(k, first.size()); ++i) {
    if (hits[first[i].player] == summaries.size()) out.push_back(first[i].player);
  }
  return out;
}

}  // namespace hedgepred
