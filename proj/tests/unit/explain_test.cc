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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hedgepred/error.h"
#include "hedgepred/explain.h"

namespace hedgepred {
namespace {

ModelFn RowFunction(std::function<double(const double*)> g) {
  return [g](const Matrix& x, std::span<double> out) {
    for (long i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = g(x.row(i).data());
  };
}

std::vector<Player> Singletons(std::size_t n) {
  std::vector<Player> p;
  for (std::size_t i = 0; i < n; ++i) p.push_back({"x" + std::to_string(i + 1), {i}});
  return p;
}

Matrix Rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<long>(rows.size()), static_cast<long>(rows.begin()->size()));
  long i = 0;
  for (const auto& r : rows) {
    long j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(ShapleyExactTest, ConstantModel) {
  const auto f = RowFunction([](const double*) { return 0.7; });
  const std::vector<double> x = {1, 2, 3};
  const auto r = ShapleyExact(f, x, Rows({{0, 0, 0}, {5, 5, 5}}), Singletons(3));
  for (double p : r.phi) EXPECT_EQ(p, 0.0);
  EXPECT_DOUBLE_EQ(r.base_value, 0.7);
  const auto s = ShapleySampling(f, x, Rows({{0, 0, 0}, {5, 5, 5}}), Singletons(3), 50, 1);
  for (double p : s.phi) EXPECT_EQ(p, 0.0);
}

TEST(ShapleyExactTest, AdditiveModel) {
  const auto f = RowFunction([](const double* v) { return v[0] + v[1]; });
  const std::vector<double> x = {0.3, -1.2};
  const auto r = ShapleyExact(f, x, Rows({{0, 0}}), Singletons(2));
  EXPECT_NEAR(r.phi[0], 0.3, 1e-15);
  EXPECT_NEAR(r.phi[1], -1.2, 1e-15);
  EXPECT_EQ(r.player_values, (std::vector<double>{0.3, -1.2}));
}

TEST(ShapleyExactTest, ProductSplitsEvenly) {
  const auto f = RowFunction([](const double* v) { return v[0] * v[1]; });
  const std::vector<double> x = {1, 1};
  const auto r = ShapleyExact(f, x, Rows({{0, 0}}), Singletons(2));
  EXPECT_NEAR(r.phi[0], 0.5, 1e-15);
  EXPECT_NEAR(r.phi[1], 0.5, 1e-15);
  EXPECT_EQ(r.prediction, 1.0);
  EXPECT_EQ(r.base_value, 0.0);
}

TEST(ShapleyExactTest, EfficiencySymmetryAndDummy) {
  // Players a and b see identical columns; c is never read.
  const auto f = RowFunction([](const double* v) {
    return std::tanh(v[0] * v[1] + v[2] * v[3] - 0.3 * v[0] * v[2] * v[3]);
  });
  Rng rng(4);
  Matrix bg(6, 6);
  for (long i = 0; i < bg.rows(); ++i) {
    const double s = rng.Normal(), t = rng.Normal();
    bg.row(i) << s, t, s, t, rng.Normal(), rng.Normal();
  }
  const std::vector<Player> players = {{"a", {0, 1}}, {"b", {2, 3}}, {"c", {4, 5}}};
  for (int trial = 0; trial < 10; ++trial) {
    const double s = rng.Normal(), t = rng.Normal();
    const std::vector<double> x = {s, t, s, t, rng.Normal(), rng.Normal()};
    const auto r = ShapleyExact(f, x, bg, players);
    EXPECT_LE(std::abs(r.efficiency_residual), 1e-6);
    EXPECT_NEAR(r.prediction - r.base_value, r.phi[0] + r.phi[1] + r.phi[2], 1e-6);
    EXPECT_EQ(r.phi[2], 0.0);
  }
  // Symmetric function of two players with equal columns.
  const auto g = RowFunction([](const double* v) { return v[0] * v[1] + v[0] + v[1]; });
  const auto r = ShapleyExact(g, std::vector<double>{0.4, 0.4}, Rows({{0.1, 0.1}, {2, 2}}),
                              Singletons(2));
  EXPECT_NEAR(r.phi[0], r.phi[1], 1e-9);
}

TEST(ShapleyExactTest, Errors) {
  const auto f = RowFunction([](const double*) { return 0.0; });
  EXPECT_THROW(ShapleyExact(f, std::vector<double>(13, 0.0), Matrix::Zero(1, 13), Singletons(13)),
               Error);
  EXPECT_THROW(ShapleyExact(f, std::vector<double>(3, 0.0), Matrix::Zero(1, 4), Singletons(3)),
               Error);
}

TEST(ShapleySamplingTest, ConvergesToExactAndErrorShrinks) {
  const auto f = RowFunction([](const double* v) { return v[0] * v[1] + 0.5 * v[0]; });
  Rng rng(9);
  Matrix bg(40, 2);
  for (long i = 0; i < bg.size(); ++i) bg.data()[i] = rng.Normal();
  const std::vector<double> x = {1.5, -0.7};
  const auto exact = ShapleyExact(f, x, bg, Singletons(2));
  const auto small = ShapleySampling(f, x, bg, Singletons(2), 500, 3);
  const auto big = ShapleySampling(f, x, bg, Singletons(2), 2000, 3);
  double se_small = 0.0, se_big = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_GT(big.std_error[i], 0.0);
    EXPECT_LE(std::abs(big.phi[i] - exact.phi[i]), 3.0 * big.std_error[i]) << i;
    se_small += small.std_error[i];
    se_big += big.std_error[i];
  }
  EXPECT_NEAR(se_big / se_small, 0.5, 0.1);
  const auto again = ShapleySampling(f, x, bg, Singletons(2), 2000, 3);
  EXPECT_EQ(again.phi, big.phi);
  EXPECT_EQ(again.std_error, big.std_error);
}

TEST(ExplainRowsTest, ParallelMatchesSerial) {
  const auto f = RowFunction([](const double* v) { return v[0] - v[1] * v[2]; });
  Rng rng(2);
  Matrix x(6, 3), bg(10, 3);
  for (long i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal();
  for (long i = 0; i < bg.size(); ++i) bg.data()[i] = rng.Normal();
  for (auto mode : {ShapleyMode::kExact, ShapleyMode::kSampling}) {
    const auto a = ExplainRows(f, x, bg, Singletons(3), mode, 100, 5, 1);
    const auto b = ExplainRows(f, x, bg, Singletons(3), mode, 100, 5, 3);
    ASSERT_EQ(a.size(), 6u);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].phi, b[i].phi);
  }
}

TEST(BackgroundTest, DistinctSortedRows) {
  Matrix data(20, 1);
  for (long i = 0; i < 20; ++i) data(i, 0) = static_cast<double>(i);
  const Matrix bg = SampleBackground(data, 8, 3);
  ASSERT_EQ(bg.rows(), 8);
  for (long i = 1; i < 8; ++i) EXPECT_LT(bg(i - 1, 0), bg(i, 0));
  EXPECT_EQ(SampleBackground(data, 50, 3).rows(), 20);
}

TEST(PlayersTest, GroupAndCoordinatePlayersCoverFlattenedInput) {
  const auto schema = DefaultSchema(4);
  const auto mask = FeatureMask::WithoutEmbedding();
  const auto groups = GroupPlayers(schema, mask, 4);
  EXPECT_EQ(groups.size(), 6u);
  std::size_t covered = 0;
  for (const auto& p : groups) covered += p.coordinates.size();
  EXPECT_EQ(covered, 144u);
  const auto coords = CoordinatePlayers(schema, mask, 4);
  EXPECT_EQ(coords.size(), 144u);
  EXPECT_EQ(coords[5].coordinates, std::vector<std::size_t>{5});
}

TEST(PlayersTest, FeaturePlayersCollapseEachEmbeddingBlock) {
  const auto schema = DefaultSchema(4);
  const auto players = FeaturePlayers(schema, FeatureMask::All(), 4);
  // 144 non-embedding coordinates, of which 5 history-level features x 4 rows
  // collapse to 5 players, plus one embedding player per row.
  ASSERT_EQ(players.size(), 144u - 20u + 5u + 4u);
  std::size_t covered = 0, embedding = 0;
  for (const auto& p : players) {
    covered += p.coordinates.size();
    if (p.name.find("/Embedding") != std::string::npos) {
      ++embedding;
      EXPECT_EQ(p.coordinates.size(), 4u) << p.name;
    }
  }
  EXPECT_EQ(covered, 144u + 16u);
  EXPECT_EQ(embedding, 4u);
  EXPECT_EQ(FeaturePlayers(schema, FeatureMask::WithoutEmbedding(), 4).size(), 129u);
  const auto rapport = std::find_if(players.begin(), players.end(),
                                    [](const Player& p) { return p.name == "Rapport/rapport"; });
  ASSERT_NE(rapport, players.end());
  EXPECT_EQ(rapport->coordinates.size(), 4u);
}

ShapleyReport Report(double value, double phi) {
  ShapleyReport r;
  r.players = {"p", "q", "flat"};
  r.player_values = {value, value, 1.0};
  r.phi = {phi, -2.0 * phi, 0.01 * value};
  return r;
}

TEST(ValenceTest, SignsAndRanking) {
  std::vector<ShapleyReport> reports;
  for (double v : {0.1, 0.5, 0.9, 0.3}) reports.push_back(Report(v, v));
  const auto rows = ValenceSummary(reports);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].player, "q");
  EXPECT_EQ(rows[0].valence, -1);
  EXPECT_EQ(rows[0].rank, 1u);
  EXPECT_EQ(rows[1].player, "p");
  EXPECT_EQ(rows[1].valence, 1);
  EXPECT_NEAR(rows[1].correlation, 1.0, 1e-12);
  EXPECT_EQ(rows[2].valence, 0);  // constant input
  EXPECT_THROW(ValenceSummary(std::span(reports).first(1)), Error);
  reports[1].players[0] = "other";
  EXPECT_THROW(ValenceSummary(reports), Error);
}

TEST(ValenceTest, ConsensusTop) {
  std::vector<ValenceRow> a = {{"x", 1, 0, 3, 1}, {"y", 1, 0, 2, 2}, {"z", 1, 0, 1, 3}};
  std::vector<ValenceRow> b = {{"z", 1, 0, 3, 1}, {"x", 1, 0, 2, 2}, {"w", 1, 0, 1, 3}};
  const std::vector<std::vector<ValenceRow>> both = {a, b};
  EXPECT_EQ(ConsensusTop(both, 10), (std::vector<std::string>{"x", "z"}));
  EXPECT_EQ(ConsensusTop(both, 1), std::vector<std::string>{});
  EXPECT_EQ(PearsonCorrelation(std::vector<double>{1, 1}, std::vector<double>{1, 2}), 0.0);
}

}  // namespace
}  // namespace hedgepred
