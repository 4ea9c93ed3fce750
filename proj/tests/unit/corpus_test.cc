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

#include <string>

#include "hedgepred/corpus.h"
#include "hedgepred/error.h"
#include "test_corpus.h"

namespace hedgepred {
namespace {

using testing::AlternatingDialogue;
using testing::MakeTurn;
using testing::ReadFile;
using testing::ScratchDir;
using testing::SingleDialogueCorpus;
using testing::UniformSlices;
using testing::WriteFile;

// Runs fn and returns the error message, failing the test if nothing throws.
template <typename Fn>
std::string ErrorOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected an error";
  return {};
}

TEST(LabelsTest, RoundTripAllEnums) {
  for (auto g : {GazeTarget::kNone, GazeTarget::kPartner, GazeTarget::kWorksheet,
                 GazeTarget::kElsewhere}) {
    EXPECT_EQ(ParseGaze(GazeLabel(g)), g);
  }
  for (const char* label : {"%", "b", "bh", "qy", "sd", "sv"}) {
    auto a = ParseDialogueAct(label);
    ASSERT_TRUE(a.has_value()) << label;
    EXPECT_EQ(DialogueActLabel(*a), label);
  }
  EXPECT_FALSE(ParseGaze("window").has_value());
  EXPECT_FALSE(ParseDialogueAct("qw").has_value());
  EXPECT_EQ(ParseSpeaker("tutor"), Speaker::kTutor);
}

TEST(CorpusTest, CreateValidatesIndices) {
  Dialogue d = AlternatingDialogue(4);
  d.turns[2].index = 5;
  const auto msg = ErrorOf([&] { SingleDialogueCorpus(d); });
  EXPECT_NE(msg.find("index"), std::string::npos) << msg;
}

TEST(CorpusTest, RejectsDecreasingStartTimes) {
  Dialogue d = AlternatingDialogue(4);
  d.turns[3].start_s = 1.0;
  d.turns[3].end_s = 1.5;
  EXPECT_THROW(SingleDialogueCorpus(d), Error);
}

TEST(CorpusTest, RejectsMissingRapportCoverage) {
  Dialogue d = AlternatingDialogue(40);  // 80 s of turns
  auto slices = UniformSlices("d01", 1, 30.0, 4);
  const auto msg = ErrorOf([&] {
    Corpus::Create({d}, slices, {{"d01", 0.5, 0.5}});
  });
  EXPECT_NE(msg.find("missing rapport coverage"), std::string::npos) << msg;
}

TEST(CorpusTest, RejectsRapportOutOfRange) {
  auto slices = UniformSlices("d01", 1, 20.0, 4);
  slices[0].score = 9;
  const auto msg = ErrorOf([&] {
    Corpus::Create({AlternatingDialogue(4)}, slices, {{"d01", 0.5, 0.5}});
  });
  EXPECT_NE(msg.find("rapport out of range [1,7]"), std::string::npos) << msg;
}

TEST(CorpusTest, RejectsMissingProfile) {
  EXPECT_THROW(Corpus::Create({AlternatingDialogue(4)}, UniformSlices("d01", 1, 20.0, 4), {}),
               Error);
}

TEST(ExtractInstancesTest, AlternatingDialogueOfSixHasThreeInstances) {
  const Corpus c = SingleDialogueCorpus(AlternatingDialogue(6));
  const auto instances = ExtractInstances(c, 4);
  ASSERT_EQ(instances.size(), 3u);
  EXPECT_EQ(instances[0].target, 1u);
  EXPECT_EQ(instances[1].target, 3u);
  EXPECT_EQ(instances[2].target, 5u);
  // Target 1 sees one real turn, left-padded.
  EXPECT_EQ(instances[0].history, (std::vector<int>{kPaddingTurn, kPaddingTurn, kPaddingTurn, 0}));
  EXPECT_EQ(instances[2].history, (std::vector<int>{1, 2, 3, 4}));
}

TEST(ExtractInstancesTest, FirstTutorTurnIsFullyPadded) {
  Dialogue d = AlternatingDialogue(3);
  d.turns[0].speaker = Speaker::kTutor;
  const Corpus c = SingleDialogueCorpus(d);
  const auto instances = ExtractInstances(c, 4);
  ASSERT_FALSE(instances.empty());
  EXPECT_EQ(instances[0].target, 0u);
  for (int h : instances[0].history) EXPECT_EQ(h, kPaddingTurn);
  for (const Turn* t : HistoryTurns(c, instances[0])) EXPECT_EQ(t, nullptr);
}

TEST(ExtractInstancesTest, LabelsFollowTargetHedgeAndHistoryPrecedesTarget) {
  Dialogue d = AlternatingDialogue(10);
  d.turns[3].cs.hedge = true;
  d.turns[4].cs.hedge = true;  // tutee hedge, never a target
  const Corpus c = SingleDialogueCorpus(d);
  const auto instances = ExtractInstances(c, 2);
  ASSERT_EQ(instances.size(), 5u);
  int positives = 0;
  for (const auto& inst : instances) {
    const Turn& target = c.dialogues()[inst.dialogue].turns[inst.target];
    EXPECT_EQ(target.speaker, Speaker::kTutor);
    EXPECT_EQ(inst.label, target.cs.hedge);
    for (int h : inst.history) EXPECT_LT(h, static_cast<int>(inst.target));
    positives += inst.label;
  }
  EXPECT_EQ(positives, 1);
  EXPECT_EQ(ExtractInstances(c, 2), instances);
}

TEST(ExtractInstancesTest, CountsMatchTutorHedgeTotals) {
  // 4214 non-hedge and 507 hedge tutor turns spread over several dialogues.
  std::vector<Dialogue> dialogues;
  std::vector<RapportSlice> slices;
  std::vector<DyadProfile> profiles;
  int hedges_left = 507;
  int tutor_left = 4721;
  for (int k = 0; tutor_left > 0; ++k) {
    const std::string dyad = "d" + std::to_string(k);
    const int tutor_here = std::min(tutor_left, 500);
    Dialogue d = AlternatingDialogue(2 * tutor_here, dyad);
    for (auto& t : d.turns) {
      if (t.speaker == Speaker::kTutor && hedges_left > 0 && t.index % 18 == 1) {
        t.cs.hedge = true;
        --hedges_left;
      }
    }
    tutor_left -= tutor_here;
    auto s = UniformSlices(dyad, 1, d.turns.back().end_s + 1.0, 3);
    slices.insert(slices.end(), s.begin(), s.end());
    profiles.push_back({dyad, 0.5, 0.5});
    dialogues.push_back(std::move(d));
  }
  // Top up the hedge count on remaining tutor turns.
  for (auto& d : dialogues) {
    for (auto& t : d.turns) {
      if (hedges_left == 0) break;
      if (t.speaker == Speaker::kTutor && !t.cs.hedge) {
        t.cs.hedge = true;
        --hedges_left;
      }
    }
  }
  const Corpus c = Corpus::Create(dialogues, slices, profiles);
  const auto instances = ExtractInstances(c, 4);
  int positives = 0;
  for (const auto& i : instances) positives += i.label;
  EXPECT_EQ(instances.size(), 4721u);
  EXPECT_EQ(positives, 507);
}

TEST(ExtractInstancesTest, EmptyCorpusGivesNoInstances) {
  const Corpus c = Corpus::Create({}, {}, {});
  EXPECT_TRUE(ExtractInstances(c, 4).empty());
  EXPECT_THROW(ExtractInstances(c, 0), Error);
}

class RapportForHistoryTest : public ::testing::Test {
 protected:
  std::vector<Turn> turns_;
  std::vector<RapportSlice> slices_ = {{"d01", 1, 0, 2}, {"d01", 1, 1, 6}, {"d01", 1, 2, 5}};

  int Run(std::initializer_list<double> midpoints) {
    turns_.clear();
    int i = 0;
    for (double m : midpoints) {
      Turn t = MakeTurn(i++, Speaker::kTutee, m - 1.0);
      turns_.push_back(t);
    }
    std::vector<const Turn*> history;
    for (const auto& t : turns_) history.push_back(&t);
    return RapportForHistory(history, slices_);
  }
};

TEST_F(RapportForHistoryTest, SingleSliceUsesItsScore) {
  EXPECT_EQ(Run({62.0, 65.0, 70.0, 88.0}), 5);
}

TEST_F(RapportForHistoryTest, MajorityOfMidpointsWins) {
  // One midpoint in [0,30) scored 2, three in [30,60) scored 6.
  EXPECT_EQ(Run({25.0, 33.0, 41.0, 55.0}), 6);
}

TEST_F(RapportForHistoryTest, TieGoesToLaterSlice) {
  slices_ = {{"d01", 1, 0, 3}, {"d01", 1, 1, 4}};
  EXPECT_EQ(Run({5.0, 10.0, 40.0, 50.0}), 4);
}

TEST_F(RapportForHistoryTest, SkipsPaddingAndRejectsUncovered) {
  Turn t = MakeTurn(0, Speaker::kTutor, 10.0);
  std::vector<const Turn*> history = {nullptr, nullptr, &t};
  EXPECT_EQ(RapportForHistory(history, slices_), 2);
  Turn late = MakeTurn(1, Speaker::kTutor, 200.0);
  history.push_back(&late);
  EXPECT_THROW(RapportForHistory(history, slices_), Error);
  std::vector<const Turn*> padding_only = {nullptr, nullptr};
  EXPECT_THROW(RapportForHistory(padding_only, slices_), Error);
}

TEST_F(RapportForHistoryTest, ResultIsAnInputScore) {
  for (double a = 1.0; a < 89.0; a += 7.0) {
    const int score = Run({a, a + 1.0, std::min(a + 25.0, 89.0)});
    bool found = false;
    for (const auto& s : slices_) found = found || s.score == score;
    EXPECT_TRUE(found);
  }
}

TEST(CorpusIoTest, ThreeTurnDialogueRoundTrips) {
  ScratchDir dir("corpus-io");
  const Corpus c = SingleDialogueCorpus(AlternatingDialogue(3));
  WriteCorpus(c, dir / "turns.jsonl", dir / "rapport.csv", dir / "profiles.csv");
  const Corpus loaded = LoadCorpus(dir / "turns.jsonl", dir / "rapport.csv", dir / "profiles.csv");
  ASSERT_EQ(loaded.dialogues().size(), 1u);
  EXPECT_EQ(loaded.dialogues()[0].turns.size(), 3u);
  EXPECT_EQ(loaded, c);
}

TEST(CorpusIoTest, TurnCodecRoundTrips) {
  Turn t = MakeTurn(7, Speaker::kTutor, 12.25);
  t.tokens = {"i", "guess", "um"};
  t.cs.praise = true;
  t.ts.deep_question = true;
  t.da = DialogueAct::kBackchannelQuestion;
  t.nb.tutee_gaze = GazeTarget::kPartner;
  t.nb.tutor_smile = true;
  t.ctx.correctness = true;
  EXPECT_EQ(TurnFromJsonLine(TurnToJsonLine(t), "x:1"), t);
}

TEST(CorpusIoTest, UnknownGazeTargetIsNamed) {
  Turn t = MakeTurn(0, Speaker::kTutor);
  std::string line = TurnToJsonLine(t);
  const auto pos = line.find("\"worksheet\"");
  ASSERT_NE(pos, std::string::npos);
  line.replace(pos, 11, "\"window\"");
  const auto msg = ErrorOf([&] { TurnFromJsonLine(line, "turns.jsonl:3"); });
  EXPECT_NE(msg.find("unknown gaze target"), std::string::npos) << msg;
  EXPECT_NE(msg.find("turns.jsonl:3"), std::string::npos) << msg;
}

TEST(CorpusIoTest, RejectsUnknownAndMissingFields) {
  const std::string line = TurnToJsonLine(MakeTurn(0, Speaker::kTutor));
  std::string extra = line;
  extra.insert(1, "\"mood\":\"happy\",");
  EXPECT_THROW(TurnFromJsonLine(extra, "x"), Error);
  std::string missing = line;
  const auto pos = missing.find("\"speaker\":\"tutor\",");
  ASSERT_NE(pos, std::string::npos);
  missing.erase(pos, 18);
  EXPECT_THROW(TurnFromJsonLine(missing, "x"), Error);
}

TEST(CorpusIoTest, RapportScoreNineIsRejected) {
  ScratchDir dir("rapport9");
  const Corpus c = SingleDialogueCorpus(AlternatingDialogue(3));
  WriteCorpus(c, dir / "turns.jsonl", dir / "rapport.csv", dir / "profiles.csv");
  WriteFile(dir / "rapport.csv", "dyad_id,session,slice_index,score\nd01,1,0,9\n");
  const auto msg = ErrorOf([&] {
    LoadCorpus(dir / "turns.jsonl", dir / "rapport.csv", dir / "profiles.csv");
  });
  EXPECT_NE(msg.find("rapport out of range [1,7]"), std::string::npos) << msg;
}

TEST(CorpusIoTest, PretestScaleNormalizesProfiles) {
  ScratchDir dir("pretest");
  const Corpus c = SingleDialogueCorpus(AlternatingDialogue(3));
  WriteCorpus(c, dir / "turns.jsonl", dir / "rapport.csv", dir / "profiles.csv");
  WriteFile(dir / "profiles.csv", "dyad_id,tutor_pretest,tutee_pretest\nd01,40,75\n");
  EXPECT_THROW(LoadCorpus(dir / "turns.jsonl", dir / "rapport.csv", dir / "profiles.csv"), Error);
  const Corpus scaled = LoadCorpus(dir / "turns.jsonl", dir / "rapport.csv",
                                   dir / "profiles.csv", LoadOptions{100.0});
  EXPECT_DOUBLE_EQ(scaled.ProfileFor("d01").tutor_pretest, 0.40);
  EXPECT_DOUBLE_EQ(scaled.ProfileFor("d01").tutee_pretest, 0.75);
}

TEST(CorpusIoTest, MissingFileIsAnIoError) {
  ScratchDir dir("missing");
  try {
    LoadCorpus(dir / "nope.jsonl", dir / "r.csv", dir / "p.csv");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(CorpusIoTest, WriterIsByteStable) {
  ScratchDir dir("stable");
  const Corpus c = SingleDialogueCorpus(AlternatingDialogue(5));
  WriteCorpus(c, dir / "a.jsonl", dir / "a.csv", dir / "ap.csv");
  WriteCorpus(c, dir / "b.jsonl", dir / "b.csv", dir / "bp.csv");
  EXPECT_EQ(ReadFile(dir / "a.jsonl"), ReadFile(dir / "b.jsonl"));
  EXPECT_EQ(ReadFile(dir / "a.csv"), ReadFile(dir / "b.csv"));
}

}  // namespace
}  // namespace hedgepred
