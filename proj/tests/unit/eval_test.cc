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
#include <numeric>
#include <set>

#include "hedgepred/error.h"
#include "hedgepred/eval.h"
#include "hedgepred/synthetic.h"

namespace hedgepred {
namespace {

TEST(MetricsTest, WorkedExamples) {
  EXPECT_NEAR(F1Score(0.16, 0.74), 0.263, 5e-4);
  EXPECT_DOUBLE_EQ(F1Score(0.4, 0.4), 0.4);
  EXPECT_EQ(F1Score(0.0, 0.0), 0.0);
  const auto m = Metrics::FromCounts(1, 1, 3, 5);
  EXPECT_EQ(m.precision, 0.5);
  EXPECT_EQ(m.recall, 0.25);
  EXPECT_DOUBLE_EQ(m.f1, 1.0 / 3.0);
}

TEST(MetricsTest, ComputeFromPredictions) {
  const std::vector<int> pred = {1, 1, 0, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<int> gold = {1, 0, 1, 1, 1, 0, 0, 0, 0, 0};
  const auto m = ComputeMetrics(pred, gold);
  EXPECT_EQ(m.tp, 1u);
  EXPECT_EQ(m.fp, 1u);
  EXPECT_EQ(m.fn, 3u);
  EXPECT_EQ(m.tn, 5u);
  const auto none = ComputeMetrics(std::vector<int>{0, 0}, std::vector<int>{0, 1});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  try {
    ComputeMetrics(pred, std::vector<int>{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
  EXPECT_THROW(ComputeMetrics({}, {}), Error);
}

// Expected precision and recall of random guessing at rate q are pi and q.
TEST(MetricsTest, StratifiedBaselineClosedForm) {
  const double pi = 0.11;
  EXPECT_NEAR(StratifiedBaselineF1(pi, pi), pi, 1e-15);
  EXPECT_NEAR(StratifiedBaselineF1(pi, 0.5), 2 * pi * 0.5 / (pi + 0.5), 1e-15);
}

std::vector<int> Labels(std::size_t pos, std::size_t neg, std::uint64_t seed) {
  std::vector<int> y(pos, 1);
  y.resize(pos + neg, 0);
  Rng rng(seed);
  rng.Shuffle(y.begin(), y.end());
  return y;
}

TEST(KFoldTest, ExactDivisibility) {
  const auto y = Labels(10, 40, 1);
  for (const auto& f : StratifiedKFold(y, 5, 3)) {
    std::size_t pos = 0;
    for (auto i : f.test) pos += static_cast<std::size_t>(y[i]);
    EXPECT_EQ(pos, 2u);
    EXPECT_EQ(f.test.size() - pos, 8u);
  }
}

TEST(KFoldTest, PartitionAndBalancedRemainders) {
  const auto y = Labels(507, 4214, 2);
  const auto folds = StratifiedKFold(y, 5, 11);
  ASSERT_EQ(folds.size(), 5u);
  std::set<std::size_t> seen;
  std::size_t total_pos = 0, min_size = y.size(), max_size = 0;
  for (const auto& f : folds) {
    std::size_t pos = 0;
    for (auto i : f.test) pos += static_cast<std::size_t>(y[i]);
    EXPECT_TRUE(pos == 101 || pos == 102) << pos;
    total_pos += pos;
    min_size = std::min(min_size, f.test.size());
    max_size = std::max(max_size, f.test.size());
    for (auto i : f.test) EXPECT_TRUE(seen.insert(i).second);
    EXPECT_TRUE(std::is_sorted(f.test.begin(), f.test.end()));
    EXPECT_EQ(f.train.size() + f.test.size(), y.size());
    std::vector<std::size_t> both;
    std::set_intersection(f.train.begin(), f.train.end(), f.test.begin(), f.test.end(),
                          std::back_inserter(both));
    EXPECT_TRUE(both.empty());
  }
  EXPECT_EQ(total_pos, 507u);
  EXPECT_EQ(seen.size(), y.size());
  EXPECT_LE(max_size - min_size, 1u);
}

TEST(KFoldTest, DeterministicPerSeedAndValidated) {
  const auto y = Labels(30, 70, 3);
  const auto a = StratifiedKFold(y, 5, 1);
  const auto b = StratifiedKFold(y, 5, 1);
  const auto c = StratifiedKFold(y, 5, 2);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a[i].test, b[i].test);
  bool differs = false;
  for (std::size_t i = 0; i < 5; ++i) differs |= a[i].test != c[i].test;
  EXPECT_TRUE(differs);
  try {
    StratifiedKFold(Labels(4, 50, 1), 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(IntervalTest, StudentT) {
  EXPECT_NEAR(StudentTQuantile(0.975, 4), 2.7764451052, 1e-9);
  const std::vector<double> v = {0.2, 0.3, 0.25, 0.35, 0.15};
  const auto ci = TInterval(v);
  EXPECT_NEAR(ci.mean, 0.25, 1e-15);
  // s = sqrt(0.025 / 4)
  EXPECT_NEAR(ci.half_width, 2.7764451052 * std::sqrt(0.025 / 4.0) / std::sqrt(5.0), 1e-9);
  EXPECT_EQ(TInterval(std::vector<double>{0.4}).half_width, 0.0);
  EXPECT_NEAR(TInterval(std::vector<double>{0.4, 0.4, 0.4}).half_width, 0.0, 1e-12);
  EXPECT_EQ(ParseCiMethod("bootstrap"), CiMethod::kBootstrap);
  EXPECT_FALSE(ParseCiMethod("jackknife"));
}

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    GeneratorConfig g;
    g.dyads = 4;
    g.turns_per_session = 150;
    corpus_ = new Corpus(GenerateSynthetic(g, 21));
    encoder_ = new TurnEncoder(DefaultSchema(8), MakeHashingEmbedder(8, 2));
    data_ = new EncodedCorpus(*encoder_, *corpus_, 4);
  }
  static void TearDownTestSuite() {
    delete data_;
    delete encoder_;
    delete corpus_;
  }

  static ModelSpec Gbdt() {
    ModelSpec s{"gbdt", TrainConfig{}, FeatureMask::WithoutEmbedding()};
    s.train.gbdt.trees = 15;
    s.train.gbdt.depth = 3;
    return s;
  }

  static PipelineConfig Config() {
    PipelineConfig c;
    c.seed = 77;
    return c;
  }

  static Corpus* corpus_;
  static TurnEncoder* encoder_;
  static EncodedCorpus* data_;
};

Corpus* PipelineTest::corpus_ = nullptr;
TurnEncoder* PipelineTest::encoder_ = nullptr;
EncodedCorpus* PipelineTest::data_ = nullptr;

TEST_F(PipelineTest, SelectionMatchesDirectEncoding) {
  const auto folds = PipelineFolds(*data_, Config());
  const auto& train = folds[1].train;
  const ProblemRange range = data_->FitRange(train);
  EXPECT_EQ(range, FitProblemRange(*corpus_, data_->instances(), train));
  for (const auto& mask : {FeatureMask::All(), FeatureMask::WithoutEmbedding(),
                           FeatureMask::Parse("ConInfo+NB")}) {
    const auto cached = data_->Select(folds[1].test, mask, range);
    const auto direct =
        EncodeDataset(*encoder_, *corpus_, data_->instances(), folds[1].test, mask, range);
    EXPECT_EQ(cached.x, direct.x) << mask.Name();
    EXPECT_EQ(cached.y, direct.y);
    EXPECT_EQ(cached.fingerprint, direct.fingerprint);
    EXPECT_EQ(cached.row_width, direct.row_width);
  }
}

TEST_F(PipelineTest, TestRowsCannotInfluenceTraining) {
  const auto folds = PipelineFolds(*data_, Config());
  FoldData clean = PrepareFold(*data_, folds[0], 0, FeatureMask::WithoutEmbedding());
  FoldData poisoned = clean;
  poisoned.test.x.setConstant(1e9);
  for (int& v : poisoned.test.y) v = 1 - v;
  const auto a = RunFold(clean, Gbdt(), Config());
  const auto b = RunFold(poisoned, Gbdt(), Config());
  EXPECT_FALSE(a.smote_hash.empty());
  EXPECT_EQ(a.smote_hash, b.smote_hash);
  EXPECT_EQ(a.model_hash, b.model_hash);
  EXPECT_NE(a.predictions, b.predictions);
}

TEST_F(PipelineTest, ProblemRangeComesFromTrainingPart) {
  const auto folds = PipelineFolds(*data_, Config());
  const auto fd = PrepareFold(*data_, folds[2], 2, FeatureMask::All());
  EXPECT_EQ(fd.range, data_->FitRange(folds[2].train));
  EXPECT_EQ(fd.train.x.rows(), static_cast<long>(folds[2].train.size()));
  EXPECT_EQ(fd.test.x.rows(), static_cast<long>(folds[2].test.size()));
}

TEST_F(PipelineTest, ReportIsIndependentOfJobs) {
  auto cfg = Config();
  const auto serial = CrossValidate(*data_, Gbdt(), cfg);
  cfg.jobs = 3;
  const auto parallel = CrossValidate(*data_, Gbdt(), cfg);
  const std::vector<CVReport> a = {serial}, b = {parallel};
  EXPECT_EQ(ReportCsv(a), ReportCsv(b));
  for (std::size_t i = 0; i < serial.folds.size(); ++i) {
    EXPECT_EQ(serial.folds[i].model_hash, parallel.folds[i].model_hash);
    EXPECT_EQ(serial.folds[i].predictions, parallel.folds[i].predictions);
  }
}

TEST_F(PipelineTest, ReportShape) {
  const auto r = CrossValidate(*data_, Gbdt(), Config());
  EXPECT_EQ(r.folds.size(), 5u);
  EXPECT_EQ(r.mask_name, "no_emb");
  EXPECT_GE(r.f1.half_width, 0.0);
  EXPECT_DOUBLE_EQ(r.f1.mean, F1Score(r.precision.mean, r.recall.mean));
  std::vector<double> recalls;
  for (const auto& f : r.folds) recalls.push_back(f.metrics.recall);
  EXPECT_DOUBLE_EQ(r.recall.mean, TInterval(recalls).mean);
  const std::vector<CVReport> rs = {r};
  const auto csv = ReportCsv(rs);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "model,kind,mask,f1,f1_ci,precision,precision_ci,recall,recall_ci");
  EXPECT_NE(ReportText(rs).find("+/-"), std::string::npos);

  auto boot = Config();
  boot.ci = CiMethod::kBootstrap;
  boot.bootstrap_resamples = 200;
  const auto rb = CrossValidate(*data_, Gbdt(), boot);
  EXPECT_EQ(rb.f1.mean, r.f1.mean);
  EXPECT_GT(rb.f1.half_width, 0.0);
}

TEST_F(PipelineTest, DummyTracksClosedForm) {
  ModelSpec dummy{"dummy", TrainConfig{}, FeatureMask::All()};
  dummy.train.kind = ModelKind::kDummy;
  const double pi = std::accumulate(data_->labels().begin(), data_->labels().end(), 0.0) /
                    static_cast<double>(data_->size());
  const auto r = CrossValidate(*data_, dummy, Config());
  EXPECT_EQ(r.folds[0].synthetic_count, 0u);
  EXPECT_TRUE(r.folds[0].smote_hash.empty());
  EXPECT_NEAR(r.f1.mean, StratifiedBaselineF1(pi, pi), 0.06);
}

TEST(PipelineConfigTest, Validation) {
  PipelineConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.folds = 1;
  EXPECT_THROW(c.Validate(), Error);
  c = PipelineConfig{};
  c.jobs = 0;
  EXPECT_THROW(c.Validate(), Error);
}

}  // namespace
}  // namespace hedgepred
