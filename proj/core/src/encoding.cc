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

#include "hedgepred/encoding.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "hedgepred/error.h"
#include "hedgepred/random.h"

namespace hedgepred {
namespace {

FeatureEntry Flag(FeatureGroup g, std::string name) {
  return FeatureEntry{g, std::move(name), 0, 1, {}};
}

FeatureEntry Block(FeatureGroup g, std::string name, std::vector<std::string> labels) {
  const std::size_t width = labels.size();
  return FeatureEntry{g, std::move(name), 0, width, std::move(labels)};
}

std::vector<std::string> GazeLabels() {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < kGazeTargetCount; ++i) {
    out.emplace_back(GazeLabel(static_cast<GazeTarget>(i)));
  }
  return out;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string_view FeatureGroupName(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::kEmbedding:
      return "Embedding";
    case FeatureGroup::kCS:
      return "CS";
    case FeatureGroup::kTS:
      return "TS";
    case FeatureGroup::kNB:
      return "NB";
    case FeatureGroup::kConInfo:
      return "ConInfo";
    case FeatureGroup::kDialAct:
      return "DialAct";
    case FeatureGroup::kRapport:
      return "Rapport";
  }
  return "?";
}

std::optional<FeatureGroup> ParseFeatureGroup(std::string_view name) {
  const std::string lowered = Lower(name);
  for (auto g : kAllFeatureGroups) {
    if (Lower(FeatureGroupName(g)) == lowered) return g;
  }
  if (lowered == "emb") return FeatureGroup::kEmbedding;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// FeatureSchema

FeatureSchema::FeatureSchema(std::vector<FeatureEntry> entries)
    : entries_(std::move(entries)) {
  std::set<std::pair<FeatureGroup, std::string>> names;
  std::size_t next = 0;
  for (const auto& e : entries_) {
    if (e.offset != next) {
      Fail(ErrorKind::kSchema, "schema entry '" + e.name + "' is not contiguous");
    }
    if (e.width == 0) {
      Fail(ErrorKind::kSchema, "schema entry '" + e.name + "' has zero width");
    }
    if (!e.labels.empty() && e.labels.size() != e.width) {
      Fail(ErrorKind::kSchema, "schema entry '" + e.name + "' label count != width");
    }
    if (!names.emplace(e.group, e.name).second) {
      Fail(ErrorKind::kSchema, "duplicate schema entry '" + e.name + "'");
    }
    next += e.width;
    coordinate_group_.insert(coordinate_group_.end(), e.width, e.group);
  }
  total_dim_ = next;
}

std::size_t FeatureSchema::group_width(FeatureGroup group) const {
  std::size_t w = 0;
  for (const auto& e : entries_) {
    if (e.group == group) w += e.width;
  }
  return w;
}

const FeatureEntry& FeatureSchema::Find(FeatureGroup group,
                                        std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.group == group && e.name == name) return e;
  }
  Fail(ErrorKind::kSchema, "schema has no entry " +
                               std::string(FeatureGroupName(group)) + "/" +
                               std::string(name));
}

std::vector<std::string> FeatureSchema::CoordinateNames() const {
  std::vector<std::string> out;
  out.reserve(total_dim_);
  for (const auto& e : entries_) {
    const std::string base = std::string(FeatureGroupName(e.group)) + "/" + e.name;
    if (e.width == 1 && e.labels.empty()) {
      out.push_back(base);
    } else {
      for (std::size_t i = 0; i < e.width; ++i) {
        out.push_back(base + "=" + (e.labels.empty() ? std::to_string(i) : e.labels[i]));
      }
    }
  }
  return out;
}

FeatureGroup FeatureSchema::GroupOf(std::size_t coordinate) const {
  return coordinate_group_.at(coordinate);
}

std::string FeatureSchema::Fingerprint() const {
  std::ostringstream os;
  for (const auto& e : entries_) {
    os << FeatureGroupName(e.group) << '/' << e.name << '@' << e.offset << '+'
       << e.width << ';';
  }
  std::ostringstream hex;
  hex << std::hex << Fnv1a(os.str());
  return hex.str();
}

nlohmann::json FeatureSchema::ToJson() const {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& e : entries_) {
    nlohmann::ordered_json j;
    j["group"] = FeatureGroupName(e.group);
    j["name"] = e.name;
    j["offset"] = e.offset;
    j["width"] = e.width;
    if (!e.labels.empty()) j["labels"] = e.labels;
    entries.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["total_dim"] = total_dim_;
  out["fingerprint"] = Fingerprint();
  out["entries"] = std::move(entries);
  return nlohmann::json::parse(out.dump());
}

FeatureSchema DefaultSchema(std::size_t embedding_dim) {
  using G = FeatureGroup;
  std::vector<FeatureEntry> e;
  if (embedding_dim > 0) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < embedding_dim; ++i) labels.push_back(std::to_string(i));
    e.push_back(Block(G::kEmbedding, "embedding", std::move(labels)));
  }
  for (const char* n : {"self_disclosure", "praise", "norm_violation", "hedge",
                        "speaker_is_tutor"}) {
    e.push_back(Flag(G::kCS, n));
  }
  for (const char* n : {"deep_question", "shallow_question", "metacomm",
                        "knowledge_building", "knowledge_telling"}) {
    e.push_back(Flag(G::kTS, n));
  }
  {
    std::vector<std::string> acts;
    for (std::size_t i = 0; i < kDialogueActCount; ++i) {
      acts.emplace_back(DialogueActLabel(static_cast<DialogueAct>(i)));
    }
    e.push_back(Block(G::kDialAct, "dialogue_act", std::move(acts)));
  }
  for (const char* n : {"tutor_nod", "tutee_nod", "tutor_smile", "tutee_smile"}) {
    e.push_back(Flag(G::kNB, n));
  }
  e.push_back(Block(G::kNB, "tutor_gaze", GazeLabels()));
  e.push_back(Block(G::kNB, "tutee_gaze", GazeLabels()));
  e.push_back(Flag(G::kRapport, "rapport"));
  for (const char* n : {"session", "period", "problem_id", "correctness",
                        "tutor_pretest", "tutee_pretest", "backchannels"}) {
    e.push_back(Flag(G::kConInfo, n));
  }
  std::size_t offset = 0;
  for (auto& entry : e) {
    entry.offset = offset;
    offset += entry.width;
  }
  return FeatureSchema(std::move(e));
}

// ---------------------------------------------------------------------------
// FeatureMask

FeatureMask::FeatureMask(std::span<const FeatureGroup> included) {
  for (auto g : included) bits_.set(static_cast<std::size_t>(g));
  if (bits_.none()) Fail(ErrorKind::kConfig, "feature mask must not be empty");
}

FeatureMask FeatureMask::All() { return FeatureMask(kAllFeatureGroups); }

FeatureMask FeatureMask::WithoutEmbedding() {
  return All().Without(FeatureGroup::kEmbedding);
}

FeatureMask FeatureMask::OnlyEmbedding() {
  const FeatureGroup g[] = {FeatureGroup::kEmbedding};
  return FeatureMask(g);
}

FeatureMask FeatureMask::Parse(std::string_view name) {
  if (name == "all") return All();
  if (name == "no_emb" || name == "w/o emb") return WithoutEmbedding();
  if (name == "only_emb" || name == "only emb") return OnlyEmbedding();
  std::vector<FeatureGroup> groups;
  std::size_t start = 0;
  while (start <= name.size()) {
    const std::size_t plus = name.find('+', start);
    const auto part = name.substr(start, plus - start);
    auto g = ParseFeatureGroup(part);
    if (!g) {
      Fail(ErrorKind::kConfig, "unknown feature mask '" + std::string(name) + "'");
    }
    groups.push_back(*g);
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return FeatureMask(groups);
}

FeatureMask FeatureMask::Without(FeatureGroup group) const {
  FeatureMask m;
  m.bits_ = bits_;
  m.bits_.reset(static_cast<std::size_t>(group));
  if (m.bits_.none()) {
    Fail(ErrorKind::kConfig, "removing " + std::string(FeatureGroupName(group)) +
                                 " leaves an empty feature mask");
  }
  return m;
}

std::vector<FeatureGroup> FeatureMask::groups() const {
  std::vector<FeatureGroup> out;
  for (auto g : kAllFeatureGroups) {
    if (Contains(g)) out.push_back(g);
  }
  return out;
}

std::string FeatureMask::Name() const {
  if (*this == All()) return "all";
  if (*this == WithoutEmbedding()) return "no_emb";
  if (*this == OnlyEmbedding()) return "only_emb";
  std::string out;
  for (auto g : groups()) {
    if (!out.empty()) out += '+';
    out += FeatureGroupName(g);
  }
  return out;
}

std::string InputFingerprint(const FeatureSchema& schema, const FeatureMask& mask,
                             int window) {
  std::ostringstream os;
  os << schema.Fingerprint() << '|' << mask.Name() << '|' << window;
  std::ostringstream hex;
  hex << std::hex << Fnv1a(os.str());
  return hex.str();
}

// ---------------------------------------------------------------------------
// Encoding

const std::vector<std::string>& DefaultBackchannelLexicon() {
  static const std::vector<std::string> kLexicon = {"um",  "uh",   "hhm",  "mhm",
                                                    "oh",  "yeah", "okay", "right"};
  return kLexicon;
}

std::size_t CountBackchannels(std::span<const Turn* const> history,
                              const std::set<std::string, std::less<>>& lexicon) {
  std::size_t n = 0;
  for (const Turn* t : history) {
    if (t == nullptr) continue;
    for (const auto& tok : t->tokens) n += lexicon.contains(tok) ? 1 : 0;
  }
  return n;
}

double ProblemRange::Normalize(int problem_id) const {
  if (max <= min) return 0.0;
  const double v = static_cast<double>(problem_id - min) / static_cast<double>(max - min);
  return std::clamp(v, 0.0, 1.0);
}

ProblemRange FitProblemRange(const Corpus& corpus,
                             std::span<const Instance> instances,
                             std::span<const std::size_t> subset) {
  bool any = false;
  ProblemRange r;
  for (std::size_t i : subset) {
    for (const Turn* t : HistoryTurns(corpus, instances[i])) {
      if (t == nullptr) continue;
      if (!any) {
        r.min = r.max = t->ctx.problem_id;
        any = true;
      } else {
        r.min = std::min(r.min, t->ctx.problem_id);
        r.max = std::max(r.max, t->ctx.problem_id);
      }
    }
  }
  return r;
}

TurnEncoder::TurnEncoder(FeatureSchema schema,
                         std::shared_ptr<const EmbeddingProvider> provider,
                         EncoderOptions options)
    : schema_(std::move(schema)),
      provider_(std::move(provider)),
      options_(std::move(options)),
      lexicon_(options_.backchannel_lexicon.begin(),
               options_.backchannel_lexicon.end()) {
  if (!provider_) Fail(ErrorKind::kConfig, "embedding provider is required");
  if (provider_->dim() != schema_.embedding_dim()) {
    Fail(ErrorKind::kSchema, "embedding provider dim " +
                                 std::to_string(provider_->dim()) +
                                 " != schema embedding width " +
                                 std::to_string(schema_.embedding_dim()));
  }
  if (options_.backchannel_cap == 0) {
    Fail(ErrorKind::kConfig, "backchannel_cap must be positive");
  }
}

std::vector<double> TurnEncoder::EncodeTurn(const Turn* turn, int rapport_score,
                                            std::size_t backchannel_count,
                                            const DyadProfile& profile,
                                            const ProblemRange& range) const {
  using G = FeatureGroup;
  std::vector<double> v(schema_.total_dim(), 0.0);
  if (turn == nullptr) return v;
  if (rapport_score < 1 || rapport_score > 7) {
    Fail(ErrorKind::kCorpus, "rapport out of range [1,7]");
  }
  auto set = [&](G g, std::string_view name, double value) {
    v[schema_.Find(g, name).offset] = value;
  };
  auto one_hot = [&](G g, std::string_view name, std::size_t hot) {
    v[schema_.Find(g, name).offset + hot] = 1.0;
  };
  auto flag = [](bool b) { return b ? 1.0 : 0.0; };

  if (schema_.embedding_dim() > 0) {
    const auto emb = provider_->Embed(*turn);
    if (emb.size() != schema_.embedding_dim()) {
      Fail(ErrorKind::kSchema, "embedding provider returned " +
                                   std::to_string(emb.size()) + " values");
    }
    const auto& e = schema_.Find(G::kEmbedding, "embedding");
    std::copy(emb.begin(), emb.end(), v.begin() + static_cast<long>(e.offset));
  }
  set(G::kCS, "self_disclosure", flag(turn->cs.self_disclosure));
  set(G::kCS, "praise", flag(turn->cs.praise));
  set(G::kCS, "norm_violation", flag(turn->cs.norm_violation));
  set(G::kCS, "hedge", flag(turn->cs.hedge));
  set(G::kCS, "speaker_is_tutor", flag(turn->speaker == Speaker::kTutor));
  set(G::kTS, "deep_question", flag(turn->ts.deep_question));
  set(G::kTS, "shallow_question", flag(turn->ts.shallow_question));
  set(G::kTS, "metacomm", flag(turn->ts.metacomm));
  set(G::kTS, "knowledge_building", flag(turn->ts.knowledge_building));
  set(G::kTS, "knowledge_telling", flag(turn->ts.knowledge_telling));
  one_hot(G::kDialAct, "dialogue_act", static_cast<std::size_t>(turn->da));
  set(G::kNB, "tutor_nod", flag(turn->nb.tutor_nod));
  set(G::kNB, "tutee_nod", flag(turn->nb.tutee_nod));
  set(G::kNB, "tutor_smile", flag(turn->nb.tutor_smile));
  set(G::kNB, "tutee_smile", flag(turn->nb.tutee_smile));
  one_hot(G::kNB, "tutor_gaze", static_cast<std::size_t>(turn->nb.tutor_gaze));
  one_hot(G::kNB, "tutee_gaze", static_cast<std::size_t>(turn->nb.tutee_gaze));
  set(G::kRapport, "rapport", (rapport_score - 1) / 6.0);
  set(G::kConInfo, "session", turn->ctx.session - 1.0);
  set(G::kConInfo, "period", turn->ctx.period - 1.0);
  set(G::kConInfo, "problem_id", range.Normalize(turn->ctx.problem_id));
  set(G::kConInfo, "correctness", flag(turn->ctx.correctness));
  set(G::kConInfo, "tutor_pretest", profile.tutor_pretest);
  set(G::kConInfo, "tutee_pretest", profile.tutee_pretest);
  set(G::kConInfo, "backchannels",
      static_cast<double>(std::min(backchannel_count, options_.backchannel_cap)) /
          static_cast<double>(options_.backchannel_cap));
  return v;
}

HistoryTensor TurnEncoder::EncodeInstance(const Instance& instance,
                                          const Corpus& corpus,
                                          const FeatureMask& mask,
                                          const ProblemRange& range) const {
  const auto& dialogue = corpus.dialogues().at(instance.dialogue);
  const auto history = HistoryTurns(corpus, instance);
  HistoryTensor tensor;
  tensor.window = history.size();
  tensor.dim = schema_.total_dim();
  tensor.values.assign(tensor.window * tensor.dim, 0.0);

  const bool any_real =
      std::any_of(history.begin(), history.end(), [](const Turn* t) { return t; });
  if (!any_real) return tensor;
  const int rapport = RapportForHistory(
      history, corpus.SlicesFor(dialogue.dyad_id, dialogue.session));
  const DyadProfile& profile = corpus.ProfileFor(dialogue.dyad_id);

  for (std::size_t r = 0; r < history.size(); ++r) {
    const Turn* t = history[r];
    if (t == nullptr) continue;
    std::vector<const Turn*> before;
    const int first = std::max(0, t->index - static_cast<int>(options_.backchannel_span));
    for (int j = first; j < t->index; ++j) {
      before.push_back(&dialogue.turns[static_cast<std::size_t>(j)]);
    }
    const auto row = EncodeTurn(t, rapport, CountBackchannels(before, lexicon_),
                                profile, range);
    std::copy(row.begin(), row.end(), tensor.row(r).begin());
  }
  ApplyMask(tensor, schema_, mask);
  return tensor;
}

void ApplyMask(HistoryTensor& tensor, const FeatureSchema& schema,
               const FeatureMask& mask) {
  for (const auto& e : schema.entries()) {
    if (mask.Contains(e.group)) continue;
    for (std::size_t r = 0; r < tensor.window; ++r) {
      auto row = tensor.row(r);
      std::fill_n(row.begin() + static_cast<long>(e.offset), e.width, 0.0);
    }
  }
}

std::vector<std::size_t> IncludedCoordinates(const FeatureSchema& schema,
                                             const FeatureMask& mask) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < schema.total_dim(); ++c) {
    if (mask.Contains(schema.GroupOf(c))) out.push_back(c);
  }
  return out;
}

std::vector<double> Flatten(const HistoryTensor& tensor, const FeatureSchema& schema,
                            const FeatureMask& mask) {
  if (tensor.dim != schema.total_dim()) {
    Fail(ErrorKind::kShape, "tensor width does not match schema");
  }
  const auto coords = IncludedCoordinates(schema, mask);
  std::vector<double> out;
  out.reserve(tensor.window * coords.size());
  for (std::size_t r = 0; r < tensor.window; ++r) {
    const auto row = tensor.row(r);
    for (std::size_t c : coords) out.push_back(row[c]);
  }
  return out;
}

std::vector<std::string> FlattenedNames(const FeatureSchema& schema,
                                        const FeatureMask& mask, int window) {
  const auto names = schema.CoordinateNames();
  const auto coords = IncludedCoordinates(schema, mask);
  std::vector<std::string> out;
  for (int r = 0; r < window; ++r) {
    const std::string prefix = "t-" + std::to_string(window - r) + "/";
    for (std::size_t c : coords) out.push_back(prefix + names[c]);
  }
  return out;
}

std::vector<FeatureGroup> FlattenedGroups(const FeatureSchema& schema,
                                          const FeatureMask& mask, int window) {
  const auto coords = IncludedCoordinates(schema, mask);
  std::vector<FeatureGroup> out;
  for (int r = 0; r < window; ++r) {
    for (std::size_t c : coords) out.push_back(schema.GroupOf(c));
  }
  return out;
}

EncodedDataset EncodeDataset(const TurnEncoder& encoder, const Corpus& corpus,
                             std::span<const Instance> instances,
                             std::span<const std::size_t> subset,
                             const FeatureMask& mask, const ProblemRange& range) {
  const auto& schema = encoder.schema();
  const auto coords = IncludedCoordinates(schema, mask);
  EncodedDataset data;
  data.window = instances.empty() ? 0 : instances.front().history.size();
  data.row_width = coords.size();
  data.fingerprint =
      InputFingerprint(schema, mask, static_cast<int>(data.window));
  data.x.resize(static_cast<Eigen::Index>(subset.size()),
                static_cast<Eigen::Index>(data.window * data.row_width));
  data.y.reserve(subset.size());
  for (std::size_t r = 0; r < subset.size(); ++r) {
    const Instance& inst = instances[subset[r]];
    if (inst.history.size() != data.window) {
      Fail(ErrorKind::kShape, "instances have mixed window sizes");
    }
    const auto flat = Flatten(encoder.EncodeInstance(inst, corpus, mask, range),
                              schema, mask);
    std::copy(flat.begin(), flat.end(), data.x.row(static_cast<Eigen::Index>(r)).data());
    data.y.push_back(inst.label ? 1 : 0);
  }
  return data;
}

}  // namespace hedgepred
