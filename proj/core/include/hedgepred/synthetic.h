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

#ifndef HEDGEPRED_SYNTHETIC_H_
#define HEDGEPRED_SYNTHETIC_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hedgepred/corpus.h"
#include "hedgepred/feature_group.h"

namespace hedgepred {

// A feature the generator can plant signal on. Each is computed from the
// window of turns preceding a tutor turn ("last" is the most recent one) and
// lives in [0, 1].
struct PlantedFeature {
  std::string_view name;
  FeatureGroup group;
  std::string_view description;
};

const std::vector<PlantedFeature>& PlantedFeatures();

// Coefficients whose signs follow the reported valences: correctness is
// positive; rapport, problem id, tutee pre-test, tutee deep question, tutor
// praise, tutee gaze at tutor, and tutor gaze none/elsewhere are negative.
std::map<std::string, double> ReportedValenceCoefficients();

struct GeneratorConfig {
  int dyads = 14;
  int sessions = 2;
  int turns_per_session = 340;
  // Mean hedge probability over tutor turns; the logistic intercept is
  // calibrated to hit it on each generated corpus.
  double base_hedge_rate = 0.11;
  // Hedge rate of tutee turns, which only ever appear in histories.
  double tutee_hedge_rate = 0.11;
  int window = 4;
  int max_problem_id = 19;
  std::vector<std::string> hedge_lexicon = {"sort of", "i guess", "i'm sorry",
                                            "maybe", "probably"};
  // Planted-feature name -> logistic coefficient. Unlisted features get 0.
  std::map<std::string, double> coefficients = ReportedValenceCoefficients();

  // Throws Error(kConfig).
  void Validate() const;
};

// Deterministic in (config, seed). Tutor-turn hedge labels are drawn from
//   P(hedge) = sigmoid(b + sum_k coefficient_k * feature_k(history))
// with b chosen so the mean probability equals base_hedge_rate.
Corpus GenerateSynthetic(const GeneratorConfig& config, std::uint64_t seed);

// Planted feature values for one history (padding entries are nullptr).
std::map<std::string, double> PlantedFeatureValues(
    std::span<const Turn* const> history, std::span<const RapportSlice> slices,
    const DyadProfile& profile, int max_problem_id);

}  // namespace hedgepred

#endif  // HEDGEPRED_SYNTHETIC_H_
