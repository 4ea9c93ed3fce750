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

#include "hedgepred/ablation.h"
#include "hedgepred/synthetic.h"

namespace hedgepred {
namespace {

class AblationTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    GeneratorConfig g;
    g.dyads = 3;
    g.turns_per_session = 140;
    corpus_ = new Corpus(GenerateSynthetic(g, 5));
    encoder_ = new TurnEncoder(DefaultSchema(4), MakeHashingEmbedder(4, 1));
    data_ = new EncodedCorpus(*encoder_, *corpus_, 4);
  }
  static void TearDownTestSuite() {
    delete data_;
    delete encoder_;
    delete corpus_;
  }

  static ModelSpec Gbdt() {
    ModelSpec s{"gbdt", TrainConfig{}, FeatureMask::WithoutEmbedding()};
    s.train.gbdt.trees = 8;
    s.train.gbdt.depth = 3;
    return s;
  }
  static PipelineConfig Config() {
    PipelineConfig c;
    c.seed = 3;
    return c;
  }

  static Corpus* corpus_;
  static TurnEncoder* encoder_;
  static EncodedCorpus* data_;
};

Corpus* AblationTest::corpus_ = nullptr;
TurnEncoder* AblationTest::encoder_ = nullptr;
EncodedCorpus* AblationTest::data_ = nullptr;

TEST_F(AblationTest, GridShapeBaselineAndWorst) {
  ModelSpec dummy{"dummy", TrainConfig{}, FeatureMask::All()};
  dummy.train.kind = ModelKind::kDummy;
  const AblationGrid grid{{Gbdt(), dummy}};
  const auto result = RunAblation(*data_, grid, Config());
  ASSERT_EQ(result.cells.size(), 2u);
  ASSERT_EQ(result.cells[0].size(), 7u);
  EXPECT_EQ(result.model_names, (std::vector<std::string>{"gbdt", "dummy"}));

  const auto direct = CrossValidate(*data_, Gbdt(), Config());
  const std::vector<CVReport> a = {direct}, b = {result.cells[0][0]};
  EXPECT_EQ(ReportCsv(a), ReportCsv(b));

  for (std::size_t m = 0; m < 2; ++m) {
    ASSERT_TRUE(result.worst[m].has_value());
    const std::size_t w = *result.worst[m];
    EXPECT_GE(w, 1u);
    for (std::size_t c = 1; c < result.columns.size(); ++c) {
      EXPECT_LE(result.cells[m][w].f1.mean, result.cells[m][c].f1.mean);
    }
  }
  EXPECT_EQ(result.cells[0][1].mask_name, "CS+TS+NB+ConInfo+DialAct");

  const auto csv = AblationCsv(result);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "model,removed,mask,f1,f1_ci,precision,recall,worst");
  EXPECT_NE(AblationText(result).find('*'), std::string::npos);
}

TEST_F(AblationTest, RemovingAbsentGroupIsNoOp) {
  const AblationGrid grid{{Gbdt()}, {std::nullopt, FeatureGroup::kEmbedding}};
  const auto result = RunAblation(*data_, grid, Config());
  EXPECT_EQ(result.cells[0][0].f1.mean, result.cells[0][1].f1.mean);
  EXPECT_EQ(result.cells[0][0].folds[0].model_hash, result.cells[0][1].folds[0].model_hash);
  EXPECT_EQ(AblationColumnName(std::nullopt), "N/A");
  EXPECT_EQ(AblationColumnName(FeatureGroup::kRapport), "Rapport");
}

TEST_F(AblationTest, IndependentOfJobs) {
  const AblationGrid grid{{Gbdt()}, {std::nullopt, FeatureGroup::kNB, FeatureGroup::kCS}};
  auto cfg = Config();
  const auto serial = AblationCsv(RunAblation(*data_, grid, cfg));
  cfg.jobs = 3;
  EXPECT_EQ(AblationCsv(RunAblation(*data_, grid, cfg)), serial);
}

TEST(AblationDefaultsTest, ModelsAndColumns) {
  const auto models = DefaultAblationModels();
  ASSERT_EQ(models.size(), 5u);
  EXPECT_EQ(models[0].mask, FeatureMask::WithoutEmbedding());
  EXPECT_EQ(models[2].train.kind, ModelKind::kLstm);
  EXPECT_EQ(models[4].mask, FeatureMask::All());
  const auto cols = DefaultAblationColumns();
  ASSERT_EQ(cols.size(), 7u);
  EXPECT_FALSE(cols[0].has_value());
}

}  // namespace
}  // namespace hedgepred
