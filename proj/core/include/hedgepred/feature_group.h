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

#ifndef HEDGEPRED_FEATURE_GROUP_H_
#define HEDGEPRED_FEATURE_GROUP_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace hedgepred {

// Named feature groups of a turn vector. Rapport is kept apart from the other
// turn annotations so that it can be ablated on its own.
enum class FeatureGroup {
  kEmbedding,
  kCS,
  kTS,
  kNB,
  kConInfo,
  kDialAct,
  kRapport,
};

inline constexpr std::size_t kFeatureGroupCount = 7;

inline constexpr std::array<FeatureGroup, kFeatureGroupCount> kAllFeatureGroups = {
    FeatureGroup::kEmbedding, FeatureGroup::kCS,      FeatureGroup::kTS,
    FeatureGroup::kNB,        FeatureGroup::kConInfo, FeatureGroup::kDialAct,
    FeatureGroup::kRapport};

std::string_view FeatureGroupName(FeatureGroup group);

// Accepts the canonical names ("Embedding", "CS", ...) case-insensitively.
std::optional<FeatureGroup> ParseFeatureGroup(std::string_view name);

}  // namespace hedgepred

#endif  // HEDGEPRED_FEATURE_GROUP_H_
