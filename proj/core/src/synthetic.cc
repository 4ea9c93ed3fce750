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

#include "hedgepred/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hedgepred/error.h"
#include "hedgepred/random.h"

namespace hedgepred {
namespace {

constexpr std::array<std::string_view, 30> kContentWords = {
    "the",    "x",     "equals", "so",    "we",       "divide", "by",
    "two",    "both",  "sides",  "is",    "that",     "answer", "what",
    "do",     "next",  "you",    "multiply", "minus", "plus",   "negative",
    "five",   "three", "it",     "this",  "one",      "wait",   "then",
    "subtract", "y"};
constexpr std::array<std::string_view, 8> kBackchannelWords = {
    "um", "uh", "hhm", "mhm", "oh", "yeah", "okay", "right"};

// Dialogue-act prior in enum order: %, b, bh, qy, sd, sv.
constexpr std::array<double, kDialogueActCount> kActWeights = {0.05, 0.15, 0.03,
                                                               0.10, 0.50, 0.17};
// Gaze prior in enum order: none, partner, worksheet, elsewhere.
constexpr std::array<double, kGazeTargetCount> kGazeWeights = {0.12, 0.30, 0.43,
                                                               0.15};

double Sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

const Turn* LastReal(std::span<const Turn* const> history) {
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (*it != nullptr) return *it;
  }
  return nullptr;
}

std::vector<std::string> SplitWords(std::string_view phrase) {
  std::vector<std::string> out;
  std::istringstream is{std::string(phrase)};
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

// Annotation layers drawn independently of the hedge label.
Turn DrawTurn(Rng& rng, const std::string& dyad, int session, int index,
              int turns_in_session, Speaker speaker, int problem_id,
              double start_s) {
  Turn t;
  t.dyad_id = dyad;
  t.session = session;
  t.period = index < turns_in_session / 2 ? 1 : 2;
  t.index = index;
  t.speaker = speaker;
  t.start_s = start_s;
  t.end_s = start_s + rng.Uniform(1.0, 6.0);
  const bool tutor = speaker == Speaker::kTutor;
  t.cs.self_disclosure = rng.Bernoulli(0.05);
  t.cs.praise = rng.Bernoulli(tutor ? 0.12 : 0.03);
  t.cs.norm_violation = rng.Bernoulli(0.03);
  t.ts.deep_question = rng.Bernoulli(tutor ? 0.04 : 0.12);
  t.ts.shallow_question = rng.Bernoulli(0.10);
  t.ts.metacomm = rng.Bernoulli(0.06);
  t.ts.knowledge_building = rng.Bernoulli(0.10);
  t.ts.knowledge_telling = rng.Bernoulli(tutor ? 0.20 : 0.08);
  t.da = static_cast<DialogueAct>(rng.Categorical(kActWeights));
  t.nb.tutor_nod = rng.Bernoulli(0.15);
  t.nb.tutee_nod = rng.Bernoulli(0.15);
  t.nb.tutor_smile = rng.Bernoulli(0.20);
  t.nb.tutee_smile = rng.Bernoulli(0.20);
  t.nb.tutor_gaze = static_cast<GazeTarget>(rng.Categorical(kGazeWeights));
  t.nb.tutee_gaze = static_cast<GazeTarget>(rng.Categorical(kGazeWeights));
  t.ctx.problem_id = problem_id;
  t.ctx.correctness = rng.Bernoulli(0.6);
  t.ctx.session = session;
  t.ctx.period = t.period;
  return t;
}

void DrawTokens(Rng& rng, Turn& t, const std::vector<std::string>& lexicon) {
  t.tokens.clear();
  if (t.da == DialogueAct::kBackchannel ||
      t.da == DialogueAct::kBackchannelQuestion) {
    const std::size_t n = 1 + rng.UniformIndex(2);
    for (std::size_t i = 0; i < n; ++i) {
      t.tokens.emplace_back(
          kBackchannelWords[rng.UniformIndex(kBackchannelWords.size())]);
    }
  } else {
    if (rng.Bernoulli(0.25)) {
      t.tokens.emplace_back(
          kBackchannelWords[rng.UniformIndex(kBackchannelWords.size())]);
    }
    const std::size_t n = 2 + rng.UniformIndex(8);
    for (std::size_t i = 0; i < n; ++i) {
      t.tokens.emplace_back(kContentWords[rng.UniformIndex(kContentWords.size())]);
    }
  }
  if (t.cs.hedge) {
    auto words = SplitWords(lexicon[rng.UniformIndex(lexicon.size())]);
    const std::size_t at = rng.UniformIndex(t.tokens.size() + 1);
    t.tokens.insert(t.tokens.begin() + static_cast<long>(at), words.begin(),
                    words.end());
  }
}

double CalibrateIntercept(const std::vector<double>& scores, double rate) {
  double lo = -40.0;
  double hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double mean = 0.0;
    for (double s : scores) mean += Sigmoid(mid + s);
    mean /= static_cast<double>(scores.size());
    (mean < rate ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

const std::vector<PlantedFeature>& PlantedFeatures() {
  static const std::vector<PlantedFeature> kFeatures = {
      {"correctness", FeatureGroup::kConInfo, "last turn's answer is correct"},
      {"problem_id", FeatureGroup::kConInfo, "last turn's problem id / max"},
      {"tutor_pretest", FeatureGroup::kConInfo, "tutor pre-test score"},
      {"tutee_pretest", FeatureGroup::kConInfo, "tutee pre-test score"},
      {"rapport", FeatureGroup::kRapport, "(history rapport - 1) / 6"},
      {"tutor_gaze_none", FeatureGroup::kNB, "last turn: no tutor gaze"},
      {"tutor_gaze_partner", FeatureGroup::kNB, "last turn: tutor gazes at tutee"},
      {"tutor_gaze_elsewhere", FeatureGroup::kNB, "last turn: tutor gazes elsewhere"},
      {"tutee_gaze_partner", FeatureGroup::kNB, "last turn: tutee gazes at tutor"},
      {"tutor_nod", FeatureGroup::kNB, "last turn: tutor nods"},
      {"tutee_smile", FeatureGroup::kNB, "last turn: tutee smiles"},
      {"tutor_praise", FeatureGroup::kCS, "last turn is a tutor praise"},
      {"self_disclosure", FeatureGroup::kCS, "last turn is a self-disclosure"},
      {"tutee_deep_question", FeatureGroup::kTS, "last turn is a tutee deep question"},
      {"knowledge_telling", FeatureGroup::kTS, "last turn is knowledge telling"},
      {"dialact_qy", FeatureGroup::kDialAct, "last turn is a yes/no question"},
      {"dialact_sd", FeatureGroup::kDialAct, "last turn is a non-opinion statement"},
  };
  return kFeatures;
}

std::map<std::string, double> ReportedValenceCoefficients() {
  return {
      {"correctness", 1.2},          {"rapport", -1.5},
      {"tutee_gaze_partner", -1.0},  {"tutor_gaze_none", -0.8},
      {"tutor_gaze_elsewhere", -0.8}, {"problem_id", -0.6},
      {"tutee_pretest", -0.6},       {"tutee_deep_question", -1.0},
      {"tutor_praise", -1.0},
  };
}

void GeneratorConfig::Validate() const {
  auto bad = [](const std::string& what) {
    Fail(ErrorKind::kConfig, "generator: " + what);
  };
  if (dyads < 1) bad("dyads must be positive");
  if (sessions < 1 || sessions > 2) bad("sessions must be 1 or 2");
  if (turns_per_session < 1) bad("turns_per_session must be positive");
  if (!(base_hedge_rate > 0.0 && base_hedge_rate < 1.0)) {
    bad("base_hedge_rate must lie in (0,1)");
  }
  if (!(tutee_hedge_rate >= 0.0 && tutee_hedge_rate < 1.0)) {
    bad("tutee_hedge_rate must lie in [0,1)");
  }
  if (window < 1) bad("window must be positive");
  if (max_problem_id < 1) bad("max_problem_id must be positive");
  if (hedge_lexicon.empty()) bad("hedge_lexicon must not be empty");
  for (const auto& phrase : hedge_lexicon) {
    if (SplitWords(phrase).empty()) bad("hedge_lexicon has an empty phrase");
  }
  for (const auto& [name, coefficient] : coefficients) {
    const auto& known = PlantedFeatures();
    if (std::none_of(known.begin(), known.end(),
                     [&](const PlantedFeature& f) { return f.name == name; })) {
      bad("unknown planted feature '" + name + "'");
    }
    if (!std::isfinite(coefficient)) bad("coefficient for '" + name + "' is not finite");
  }
}

std::map<std::string, double> PlantedFeatureValues(
    std::span<const Turn* const> history, std::span<const RapportSlice> slices,
    const DyadProfile& profile, int max_problem_id) {
  std::map<std::string, double> v;
  for (const auto& f : PlantedFeatures()) v[std::string(f.name)] = 0.0;
  const Turn* last = LastReal(history);
  if (last == nullptr) return v;
  auto flag = [](bool b) { return b ? 1.0 : 0.0; };
  v["correctness"] = flag(last->ctx.correctness);
  v["problem_id"] = std::min(1.0, static_cast<double>(last->ctx.problem_id) /
                                      static_cast<double>(max_problem_id));
  v["tutor_pretest"] = profile.tutor_pretest;
  v["tutee_pretest"] = profile.tutee_pretest;
  v["rapport"] = (RapportForHistory(history, slices) - 1) / 6.0;
  v["tutor_gaze_none"] = flag(last->nb.tutor_gaze == GazeTarget::kNone);
  v["tutor_gaze_partner"] = flag(last->nb.tutor_gaze == GazeTarget::kPartner);
  v["tutor_gaze_elsewhere"] = flag(last->nb.tutor_gaze == GazeTarget::kElsewhere);
  v["tutee_gaze_partner"] = flag(last->nb.tutee_gaze == GazeTarget::kPartner);
  v["tutor_nod"] = flag(last->nb.tutor_nod);
  v["tutee_smile"] = flag(last->nb.tutee_smile);
  v["tutor_praise"] = flag(last->speaker == Speaker::kTutor && last->cs.praise);
  v["self_disclosure"] = flag(last->cs.self_disclosure);
  v["tutee_deep_question"] =
      flag(last->speaker == Speaker::kTutee && last->ts.deep_question);
  v["knowledge_telling"] = flag(last->ts.knowledge_telling);
  v["dialact_qy"] = flag(last->da == DialogueAct::kYesNoQuestion);
  v["dialact_sd"] = flag(last->da == DialogueAct::kStatementNonOpinion);
  return v;
}

Corpus GenerateSynthetic(const GeneratorConfig& config, std::uint64_t seed) {
  config.Validate();
  Rng rng(DeriveSeed(seed, "synthetic"));

  std::vector<DyadProfile> profiles;
  std::vector<RapportSlice> slices;
  std::vector<Dialogue> dialogues;
  for (int d = 0; d < config.dyads; ++d) {
    char name[16];
    std::snprintf(name, sizeof(name), "d%02d", d + 1);
    const std::string dyad(name);
    profiles.push_back(DyadProfile{dyad, std::round(rng.Uniform() * 100) / 100,
                                   std::round(rng.Uniform() * 100) / 100});
    for (int s = 1; s <= config.sessions; ++s) {
      Dialogue dialogue{dyad, s, {}};
      Speaker speaker = rng.Bernoulli(0.5) ? Speaker::kTutor : Speaker::kTutee;
      int problem = 0;
      double clock = rng.Uniform(0.0, 5.0);
      for (int i = 0; i < config.turns_per_session; ++i) {
        if (i > 0) {
          if (rng.Bernoulli(0.8)) {
            speaker = speaker == Speaker::kTutor ? Speaker::kTutee : Speaker::kTutor;
          }
          if (rng.Bernoulli(0.05)) problem = std::min(problem + 1, config.max_problem_id);
          clock = dialogue.turns.back().end_s + rng.Uniform(0.2, 1.5);
        }
        dialogue.turns.push_back(DrawTurn(rng, dyad, s, i, config.turns_per_session,
                                          speaker, problem, clock));
      }
      // Bounded random walk over the 30 s slices covering the session.
      const int n_slices = static_cast<int>(std::floor(
                               dialogue.turns.back().end_s / kRapportSliceSeconds)) +
                           1;
      int score = 2 + static_cast<int>(rng.UniformIndex(5));
      for (int k = 0; k < n_slices; ++k) {
        if (k > 0) {
          const double u = rng.Uniform();
          score = std::clamp(score + (u < 0.25 ? -1 : (u < 0.75 ? 0 : 1)), 1, 7);
        }
        slices.push_back(RapportSlice{dyad, s, k, score});
      }
      dialogues.push_back(std::move(dialogue));
    }
  }

  // Label-free corpus gives validated slice lookup for the planted features.
  const Corpus unlabeled = Corpus::Create(dialogues, slices, profiles);
  std::vector<std::pair<std::size_t, std::size_t>> tutor_turns;
  std::vector<double> scores;
  for (const auto& inst : ExtractInstances(unlabeled, config.window)) {
    const auto history = HistoryTurns(unlabeled, inst);
    const auto& d = unlabeled.dialogues()[inst.dialogue];
    const auto values =
        PlantedFeatureValues(history, unlabeled.SlicesFor(d.dyad_id, d.session),
                             unlabeled.ProfileFor(d.dyad_id), config.max_problem_id);
    double s = 0.0;
    for (const auto& [name, coefficient] : config.coefficients) {
      s += coefficient * values.at(name);
    }
    tutor_turns.emplace_back(inst.dialogue, inst.target);
    scores.push_back(s);
  }
  const double intercept =
      scores.empty() ? 0.0 : CalibrateIntercept(scores, config.base_hedge_rate);

  for (std::size_t i = 0; i < tutor_turns.size(); ++i) {
    auto [d, t] = tutor_turns[i];
    dialogues[d].turns[t].cs.hedge = rng.Bernoulli(Sigmoid(intercept + scores[i]));
  }
  for (auto& dialogue : dialogues) {
    for (auto& turn : dialogue.turns) {
      if (turn.speaker == Speaker::kTutee) {
        turn.cs.hedge = rng.Bernoulli(config.tutee_hedge_rate);
      }
      DrawTokens(rng, turn, config.hedge_lexicon);
    }
  }
  return Corpus::Create(std::move(dialogues), std::move(slices),
                        std::move(profiles));
}

}  // namespace hedgepred
