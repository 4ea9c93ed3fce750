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

#ifndef HEDGEPRED_CORPUS_H_
#define HEDGEPRED_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hedgepred {

enum class Speaker { kTutor, kTutee };

// One-hot order used by the encoder: none, partner, worksheet, elsewhere.
enum class GazeTarget { kNone, kPartner, kWorksheet, kElsewhere };

// One-hot order used by the encoder: %, b, bh, qy, sd, sv.
enum class DialogueAct {
  kAbandoned,
  kBackchannel,
  kBackchannelQuestion,
  kYesNoQuestion,
  kStatementNonOpinion,
  kStatementOpinion,
};

inline constexpr std::size_t kGazeTargetCount = 4;
inline constexpr std::size_t kDialogueActCount = 6;

std::string_view SpeakerLabel(Speaker s);
std::string_view GazeLabel(GazeTarget g);
std::string_view DialogueActLabel(DialogueAct a);
std::optional<Speaker> ParseSpeaker(std::string_view label);
std::optional<GazeTarget> ParseGaze(std::string_view label);
std::optional<DialogueAct> ParseDialogueAct(std::string_view label);

// Conversational strategies of the turn holder.
struct ConvStrategies {
  bool self_disclosure = false;
  bool praise = false;
  bool norm_violation = false;
  bool hedge = false;

  bool operator==(const ConvStrategies&) const = default;
};

// Tutoring strategies of the turn holder.
struct TutStrategies {
  bool deep_question = false;
  bool shallow_question = false;
  bool metacomm = false;
  bool knowledge_building = false;
  bool knowledge_telling = false;

  bool operator==(const TutStrategies&) const = default;
};

// Nonverbal behaviour of both participants during one turn.
struct Nonverbal {
  bool tutor_nod = false;
  bool tutee_nod = false;
  bool tutor_smile = false;
  bool tutee_smile = false;
  GazeTarget tutor_gaze = GazeTarget::kNone;
  GazeTarget tutee_gaze = GazeTarget::kNone;

  bool operator==(const Nonverbal&) const = default;
};

struct TurnContext {
  int problem_id = 0;
  bool correctness = false;
  int session = 1;  // 1 or 2
  int period = 1;   // 1 or 2

  bool operator==(const TurnContext&) const = default;
};

struct Turn {
  std::string dyad_id;
  int session = 1;
  int period = 1;
  int index = 0;
  Speaker speaker = Speaker::kTutor;
  std::vector<std::string> tokens;
  double start_s = 0.0;
  double end_s = 0.0;
  ConvStrategies cs;
  TutStrategies ts;
  DialogueAct da = DialogueAct::kStatementNonOpinion;
  Nonverbal nb;
  TurnContext ctx;

  double midpoint_s() const { return 0.5 * (start_s + end_s); }
  bool operator==(const Turn&) const = default;
};

inline constexpr double kRapportSliceSeconds = 30.0;

struct RapportSlice {
  std::string dyad_id;
  int session = 1;
  int slice_index = 0;
  int score = 4;  // 1..7

  double start_s() const { return kRapportSliceSeconds * slice_index; }
  double end_s() const { return kRapportSliceSeconds * (slice_index + 1); }
  bool operator==(const RapportSlice&) const = default;
};

struct DyadProfile {
  std::string dyad_id;
  double tutor_pretest = 0.0;  // normalized to [0, 1]
  double tutee_pretest = 0.0;

  bool operator==(const DyadProfile&) const = default;
};

// All turns of one (dyad, session) recording, in order.
struct Dialogue {
  std::string dyad_id;
  int session = 1;
  std::vector<Turn> turns;

  bool operator==(const Dialogue&) const = default;
};

// Validated, immutable collection of dialogues with their rapport slices and
// dyad profiles. Construct through Corpus::Create, which checks every
// invariant and throws Error(kCorpus) naming the offending record.
class Corpus {
 public:
  static Corpus Create(std::vector<Dialogue> dialogues,
                       std::vector<RapportSlice> rapport,
                       std::vector<DyadProfile> profiles);

  const std::vector<Dialogue>& dialogues() const { return dialogues_; }
  const std::vector<RapportSlice>& rapport() const { return rapport_; }
  const std::vector<DyadProfile>& profiles() const { return profiles_; }

  // Slices of one session, ordered by slice index.
  std::span<const RapportSlice> SlicesFor(std::string_view dyad_id,
                                          int session) const;
  const DyadProfile& ProfileFor(std::string_view dyad_id) const;

  std::size_t turn_count() const;

  bool operator==(const Corpus& other) const {
    return dialogues_ == other.dialogues_ && rapport_ == other.rapport_ &&
           profiles_ == other.profiles_;
  }

 private:
  Corpus() = default;

  std::vector<Dialogue> dialogues_;
  // Sorted by (dyad, session, slice_index).
  std::vector<RapportSlice> rapport_;
  std::vector<DyadProfile> profiles_;
  std::map<std::pair<std::string, int>, std::pair<std::size_t, std::size_t>>
      slice_ranges_;
  std::map<std::string, std::size_t, std::less<>> profile_index_;
};

// Marks a left-padding position in an instance history.
inline constexpr int kPaddingTurn = -1;

// One prediction target: a tutor turn and the window of turns before it.
struct Instance {
  std::size_t dialogue = 0;
  std::size_t target = 0;
  // Turn indices within the dialogue, oldest first; kPaddingTurn for padding.
  std::vector<int> history;
  bool label = false;

  bool operator==(const Instance&) const = default;
};

// One instance per tutor turn, in dialogue order then turn order. Histories
// shorter than `window` are left-padded.
std::vector<Instance> ExtractInstances(const Corpus& corpus, int window);

// History turns of an instance; padding positions are nullptr.
std::vector<const Turn*> HistoryTurns(const Corpus& corpus,
                                      const Instance& instance);

// Rapport score for a history window. If every turn midpoint lies in one
// 30 s slice that slice's score is returned, otherwise the score of the slice
// holding the most midpoints, ties going to the later slice. Null entries
// (padding) are skipped. Slices of other sessions are ignored.
int RapportForHistory(std::span<const Turn* const> history,
                      std::span<const RapportSlice> slices);

struct LoadOptions {
  // Raw pre-test scores are divided by this before the [0, 1] range check.
  double pretest_scale = 1.0;
};

Corpus LoadCorpus(const std::filesystem::path& turns_path,
                  const std::filesystem::path& rapport_path,
                  const std::filesystem::path& profile_path,
                  const LoadOptions& options = {});

void WriteCorpus(const Corpus& corpus, const std::filesystem::path& turns_path,
                 const std::filesystem::path& rapport_path,
                 const std::filesystem::path& profile_path);

// Single-record codecs shared by the loaders and tests. `where` prefixes error
// messages (e.g. "corpus.jsonl:12").
std::string TurnToJsonLine(const Turn& turn);
Turn TurnFromJsonLine(std::string_view line, std::string_view where);

}  // namespace hedgepred

#endif  // HEDGEPRED_CORPUS_H_
