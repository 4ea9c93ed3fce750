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

#include "hedgepred/corpus.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "hedgepred/error.h"

namespace hedgepred {
namespace {

constexpr std::array<std::string_view, kGazeTargetCount> kGazeLabels = {
    "none", "partner", "worksheet", "elsewhere"};
constexpr std::array<std::string_view, kDialogueActCount> kActLabels = {
    "%", "b", "bh", "qy", "sd", "sv"};

std::string DialogueName(const Dialogue& d) {
  std::ostringstream os;
  os << "dialogue (" << d.dyad_id << ", session " << d.session << ")";
  return os.str();
}

[[noreturn]] void CorpusFail(const std::string& message) {
  Fail(ErrorKind::kCorpus, message);
}

void ValidateTurn(const Dialogue& d, const Turn& t, std::size_t position) {
  std::ostringstream where;
  where << DialogueName(d) << " turn " << position << ": ";
  if (t.dyad_id != d.dyad_id || t.session != d.session) {
    CorpusFail(where.str() + "field 'dyad_id/session' does not match dialogue");
  }
  if (t.index != static_cast<int>(position)) {
    CorpusFail(where.str() + "field 'index' is " + std::to_string(t.index) +
               ", expected contiguous index " + std::to_string(position));
  }
  if (t.session < 1 || t.session > 2) {
    CorpusFail(where.str() + "field 'session' out of range {1,2}");
  }
  if (t.period < 1 || t.period > 2) {
    CorpusFail(where.str() + "field 'period' out of range {1,2}");
  }
  if (t.ctx.session != t.session || t.ctx.period != t.period) {
    CorpusFail(where.str() + "field 'ctx' session/period disagree with turn");
  }
  if (t.ctx.problem_id < 0) {
    CorpusFail(where.str() + "field 'ctx.problem_id' is negative");
  }
  if (!std::isfinite(t.start_s) || !std::isfinite(t.end_s) || t.start_s < 0 ||
      t.end_s < t.start_s) {
    CorpusFail(where.str() + "field 'start_s/end_s' must satisfy 0 <= start <= end");
  }
}

}  // namespace

std::string_view SpeakerLabel(Speaker s) {
  return s == Speaker::kTutor ? "tutor" : "tutee";
}
std::string_view GazeLabel(GazeTarget g) {
  return kGazeLabels[static_cast<std::size_t>(g)];
}
std::string_view DialogueActLabel(DialogueAct a) {
  return kActLabels[static_cast<std::size_t>(a)];
}

std::optional<Speaker> ParseSpeaker(std::string_view label) {
  if (label == "tutor") return Speaker::kTutor;
  if (label == "tutee") return Speaker::kTutee;
  return std::nullopt;
}

std::optional<GazeTarget> ParseGaze(std::string_view label) {
  for (std::size_t i = 0; i < kGazeLabels.size(); ++i) {
    if (kGazeLabels[i] == label) return static_cast<GazeTarget>(i);
  }
  return std::nullopt;
}

std::optional<DialogueAct> ParseDialogueAct(std::string_view label) {
  for (std::size_t i = 0; i < kActLabels.size(); ++i) {
    if (kActLabels[i] == label) return static_cast<DialogueAct>(i);
  }
  return std::nullopt;
}

Corpus Corpus::Create(std::vector<Dialogue> dialogues,
                      std::vector<RapportSlice> rapport,
                      std::vector<DyadProfile> profiles) {
  Corpus corpus;

  for (const auto& p : profiles) {
    if (!(p.tutor_pretest >= 0.0 && p.tutor_pretest <= 1.0) ||
        !(p.tutee_pretest >= 0.0 && p.tutee_pretest <= 1.0)) {
      CorpusFail("profile " + p.dyad_id + ": pretest out of range [0,1]");
    }
    if (!corpus.profile_index_.emplace(p.dyad_id, corpus.profile_index_.size())
             .second) {
      CorpusFail("profile " + p.dyad_id + ": duplicate dyad_id");
    }
  }
  corpus.profiles_ = std::move(profiles);

  std::stable_sort(rapport.begin(), rapport.end(),
                   [](const RapportSlice& a, const RapportSlice& b) {
                     return std::tie(a.dyad_id, a.session, a.slice_index) <
                            std::tie(b.dyad_id, b.session, b.slice_index);
                   });
  for (std::size_t i = 0; i < rapport.size();) {
    const auto key = std::make_pair(rapport[i].dyad_id, rapport[i].session);
    std::size_t j = i;
    while (j < rapport.size() && rapport[j].dyad_id == key.first &&
           rapport[j].session == key.second) {
      const auto& s = rapport[j];
      if (s.score < 1 || s.score > 7) {
        CorpusFail("rapport slice (" + s.dyad_id + ", " +
                   std::to_string(s.session) + ", " +
                   std::to_string(s.slice_index) +
                   "): rapport out of range [1,7]");
      }
      if (s.slice_index != static_cast<int>(j - i)) {
        CorpusFail("rapport slices for (" + s.dyad_id + ", " +
                   std::to_string(s.session) +
                   "): slice indices must be contiguous from 0 (found " +
                   std::to_string(s.slice_index) + ")");
      }
      ++j;
    }
    corpus.slice_ranges_[key] = {i, j};
    i = j;
  }
  corpus.rapport_ = std::move(rapport);

  std::set<std::pair<std::string, int>> seen;
  for (const auto& d : dialogues) {
    if (!seen.emplace(d.dyad_id, d.session).second) {
      CorpusFail(DialogueName(d) + ": duplicate dialogue");
    }
    for (std::size_t i = 0; i < d.turns.size(); ++i) {
      ValidateTurn(d, d.turns[i], i);
      if (i > 0 && d.turns[i].start_s < d.turns[i - 1].start_s) {
        CorpusFail(DialogueName(d) + " turn " + std::to_string(i) +
                   ": field 'start_s' decreases");
      }
    }
    if (!corpus.profile_index_.contains(d.dyad_id)) {
      CorpusFail(DialogueName(d) + ": missing dyad profile");
    }
    auto it = corpus.slice_ranges_.find({d.dyad_id, d.session});
    if (it == corpus.slice_ranges_.end()) {
      CorpusFail(DialogueName(d) + ": missing rapport coverage");
    }
    const double covered =
        kRapportSliceSeconds *
        static_cast<double>(it->second.second - it->second.first);
    for (const auto& t : d.turns) {
      if (t.midpoint_s() >= covered) {
        CorpusFail(DialogueName(d) + " turn " + std::to_string(t.index) +
                   ": missing rapport coverage at " +
                   std::to_string(t.midpoint_s()) + " s");
      }
    }
  }
  corpus.dialogues_ = std::move(dialogues);
  return corpus;
}

std::span<const RapportSlice> Corpus::SlicesFor(std::string_view dyad_id,
                                                int session) const {
  auto it = slice_ranges_.find({std::string(dyad_id), session});
  if (it == slice_ranges_.end()) return {};
  return std::span<const RapportSlice>(rapport_).subspan(
      it->second.first, it->second.second - it->second.first);
}

const DyadProfile& Corpus::ProfileFor(std::string_view dyad_id) const {
  auto it = profile_index_.find(dyad_id);
  if (it == profile_index_.end()) {
    CorpusFail("no profile for dyad " + std::string(dyad_id));
  }
  return profiles_[it->second];
}

std::size_t Corpus::turn_count() const {
  std::size_t n = 0;
  for (const auto& d : dialogues_) n += d.turns.size();
  return n;
}

std::vector<Instance> ExtractInstances(const Corpus& corpus, int window) {
  if (window < 1) Fail(ErrorKind::kConfig, "window must be >= 1");
  std::vector<Instance> out;
  const auto& dialogues = corpus.dialogues();
  for (std::size_t d = 0; d < dialogues.size(); ++d) {
    const auto& turns = dialogues[d].turns;
    for (std::size_t i = 0; i < turns.size(); ++i) {
      if (turns[i].speaker != Speaker::kTutor) continue;
      Instance inst;
      inst.dialogue = d;
      inst.target = i;
      inst.label = turns[i].cs.hedge;
      inst.history.resize(static_cast<std::size_t>(window));
      for (int k = 0; k < window; ++k) {
        const long pos = static_cast<long>(i) - window + k;
        inst.history[static_cast<std::size_t>(k)] =
            pos < 0 ? kPaddingTurn : static_cast<int>(pos);
      }
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::vector<const Turn*> HistoryTurns(const Corpus& corpus,
                                      const Instance& instance) {
  const auto& turns = corpus.dialogues().at(instance.dialogue).turns;
  std::vector<const Turn*> out;
  out.reserve(instance.history.size());
  for (int idx : instance.history) {
    out.push_back(idx == kPaddingTurn ? nullptr
                                      : &turns.at(static_cast<std::size_t>(idx)));
  }
  return out;
}

int RapportForHistory(std::span<const Turn* const> history,
                      std::span<const RapportSlice> slices) {
  const Turn* first = nullptr;
  for (const Turn* t : history) {
    if (t != nullptr) {
      first = t;
      break;
    }
  }
  if (first == nullptr) {
    Fail(ErrorKind::kCorpus, "rapport_for_history: history has no real turns");
  }
  // slice index -> midpoint count
  std::map<int, int> counts;
  for (const Turn* t : history) {
    if (t == nullptr) continue;
    if (t->dyad_id != first->dyad_id || t->session != first->session) {
      Fail(ErrorKind::kCorpus,
           "rapport_for_history: history spans several dialogues");
    }
    const int slice =
        static_cast<int>(std::floor(t->midpoint_s() / kRapportSliceSeconds));
    ++counts[slice];
  }
  std::map<int, int> scores;
  for (const auto& s : slices) {
    if (s.dyad_id == first->dyad_id && s.session == first->session) {
      scores[s.slice_index] = s.score;
    }
  }
  int best_slice = 0;
  int best_count = -1;
  for (const auto& [slice, count] : counts) {
    if (!scores.contains(slice)) {
      Fail(ErrorKind::kCorpus, "rapport_for_history: no covering slice " +
                                   std::to_string(slice) + " for (" +
                                   first->dyad_id + ", session " +
                                   std::to_string(first->session) + ")");
    }
    // Ascending iteration with >= sends ties to the later slice.
    if (count >= best_count) {
      best_slice = slice;
      best_count = count;
    }
  }
  return scores.at(best_slice);
}

}  // namespace hedgepred
