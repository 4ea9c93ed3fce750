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

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hedgepred/corpus.h"
#include "hedgepred/error.h"
#include "hedgepred/text_io.h"

namespace hedgepred {
namespace {

using ordered_json = nlohmann::ordered_json;

class FieldReader {
 public:
  FieldReader(const nlohmann::json& object, std::string_view where,
              std::string prefix = "")
      : object_(object), where_(where), prefix_(std::move(prefix)) {
    if (!object_.is_object()) Fail("", "expected an object");
  }

  [[noreturn]] void Fail(std::string_view field, std::string_view what) const {
    std::string msg(where_);
    msg += ": field '";
    msg += prefix_;
    msg += field;
    msg += "': ";
    msg += what;
    hedgepred::Fail(ErrorKind::kCorpus, msg);
  }

  const nlohmann::json& Get(std::string_view field) const {
    auto it = object_.find(std::string(field));
    if (it == object_.end()) Fail(field, "missing");
    return *it;
  }

  bool Bool(std::string_view field) const {
    const auto& v = Get(field);
    if (!v.is_boolean()) Fail(field, "expected boolean");
    return v.get<bool>();
  }

  int Int(std::string_view field) const {
    const auto& v = Get(field);
    if (!v.is_number_integer()) Fail(field, "expected integer");
    return v.get<int>();
  }

  double Number(std::string_view field) const {
    const auto& v = Get(field);
    if (!v.is_number()) Fail(field, "expected number");
    return v.get<double>();
  }

  std::string String(std::string_view field) const {
    const auto& v = Get(field);
    if (!v.is_string()) Fail(field, "expected string");
    return v.get<std::string>();
  }

  FieldReader Object(std::string_view field) const {
    return FieldReader(Get(field), where_, prefix_ + std::string(field) + ".");
  }

  // Every key of the object must be one of `allowed`.
  void ExpectOnly(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, _] : object_.items()) {
      bool ok = false;
      for (auto a : allowed) ok = ok || a == key;
      if (!ok) Fail(key, "unknown field");
    }
  }

 private:
  const nlohmann::json& object_;
  std::string_view where_;
  std::string prefix_;
};

GazeTarget ReadGaze(const FieldReader& r, std::string_view field) {
  const std::string label = r.String(field);
  auto g = ParseGaze(label);
  if (!g) r.Fail(field, "unknown gaze target '" + label + "'");
  return *g;
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string TurnToJsonLine(const Turn& t) {
  ordered_json j;
  j["dyad_id"] = t.dyad_id;
  j["session"] = t.session;
  j["period"] = t.period;
  j["index"] = t.index;
  j["speaker"] = SpeakerLabel(t.speaker);
  j["tokens"] = t.tokens;
  j["start_s"] = t.start_s;
  j["end_s"] = t.end_s;
  j["cs"] = {{"self_disclosure", t.cs.self_disclosure},
             {"praise", t.cs.praise},
             {"norm_violation", t.cs.norm_violation},
             {"hedge", t.cs.hedge}};
  j["ts"] = {{"deep_question", t.ts.deep_question},
             {"shallow_question", t.ts.shallow_question},
             {"metacomm", t.ts.metacomm},
             {"knowledge_building", t.ts.knowledge_building},
             {"knowledge_telling", t.ts.knowledge_telling}};
  j["da"] = DialogueActLabel(t.da);
  j["nb"] = {{"tutor_nod", t.nb.tutor_nod},
             {"tutee_nod", t.nb.tutee_nod},
             {"tutor_smile", t.nb.tutor_smile},
             {"tutee_smile", t.nb.tutee_smile},
             {"tutor_gaze", GazeLabel(t.nb.tutor_gaze)},
             {"tutee_gaze", GazeLabel(t.nb.tutee_gaze)}};
  j["ctx"] = {{"problem_id", t.ctx.problem_id},
              {"correctness", t.ctx.correctness},
              {"session", t.ctx.session},
              {"period", t.ctx.period}};
  return j.dump();
}

Turn TurnFromJsonLine(std::string_view line, std::string_view where) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    Fail(ErrorKind::kCorpus, std::string(where) + ": malformed record: " + e.what());
  }
  FieldReader r(j, where);
  r.ExpectOnly({"dyad_id", "session", "period", "index", "speaker", "tokens",
                "start_s", "end_s", "cs", "ts", "da", "nb", "ctx"});
  Turn t;
  t.dyad_id = r.String("dyad_id");
  t.session = r.Int("session");
  t.period = r.Int("period");
  t.index = r.Int("index");
  {
    const std::string label = r.String("speaker");
    auto s = ParseSpeaker(label);
    if (!s) r.Fail("speaker", "unknown speaker '" + label + "'");
    t.speaker = *s;
  }
  const auto& tokens = r.Get("tokens");
  if (!tokens.is_array()) r.Fail("tokens", "expected array of strings");
  for (const auto& tok : tokens) {
    if (!tok.is_string()) r.Fail("tokens", "expected array of strings");
    std::string s = tok.get<std::string>();
    for (unsigned char c : s) {
      if (std::isupper(c)) r.Fail("tokens", "token '" + s + "' is not lowercase");
    }
    t.tokens.push_back(std::move(s));
  }
  t.start_s = r.Number("start_s");
  t.end_s = r.Number("end_s");

  const FieldReader cs = r.Object("cs");
  cs.ExpectOnly({"self_disclosure", "praise", "norm_violation", "hedge"});
  t.cs.self_disclosure = cs.Bool("self_disclosure");
  t.cs.praise = cs.Bool("praise");
  t.cs.norm_violation = cs.Bool("norm_violation");
  t.cs.hedge = cs.Bool("hedge");

  const FieldReader ts = r.Object("ts");
  ts.ExpectOnly({"deep_question", "shallow_question", "metacomm",
                 "knowledge_building", "knowledge_telling"});
  t.ts.deep_question = ts.Bool("deep_question");
  t.ts.shallow_question = ts.Bool("shallow_question");
  t.ts.metacomm = ts.Bool("metacomm");
  t.ts.knowledge_building = ts.Bool("knowledge_building");
  t.ts.knowledge_telling = ts.Bool("knowledge_telling");

  {
    const std::string label = r.String("da");
    auto a = ParseDialogueAct(label);
    if (!a) r.Fail("da", "unknown dialogue act '" + label + "'");
    t.da = *a;
  }

  const FieldReader nb = r.Object("nb");
  nb.ExpectOnly({"tutor_nod", "tutee_nod", "tutor_smile", "tutee_smile",
                 "tutor_gaze", "tutee_gaze"});
  t.nb.tutor_nod = nb.Bool("tutor_nod");
  t.nb.tutee_nod = nb.Bool("tutee_nod");
  t.nb.tutor_smile = nb.Bool("tutor_smile");
  t.nb.tutee_smile = nb.Bool("tutee_smile");
  t.nb.tutor_gaze = ReadGaze(nb, "tutor_gaze");
  t.nb.tutee_gaze = ReadGaze(nb, "tutee_gaze");

  const FieldReader ctx = r.Object("ctx");
  ctx.ExpectOnly({"problem_id", "correctness", "session", "period"});
  t.ctx.problem_id = ctx.Int("problem_id");
  t.ctx.correctness = ctx.Bool("correctness");
  t.ctx.session = ctx.Int("session");
  t.ctx.period = ctx.Int("period");
  return t;
}

Corpus LoadCorpus(const std::filesystem::path& turns_path,
                  const std::filesystem::path& rapport_path,
                  const std::filesystem::path& profile_path,
                  const LoadOptions& options) {
  if (!(options.pretest_scale > 0.0)) {
    Fail(ErrorKind::kConfig, "pretest_scale must be positive");
  }
  const std::string turns_name = turns_path.filename().string();

  std::vector<Dialogue> dialogues;
  {
    auto in = OpenForRead(turns_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (IsBlank(line)) continue;
      const std::string where = turns_name + ":" + std::to_string(line_no);
      Turn t = TurnFromJsonLine(line, where);
      if (dialogues.empty() || dialogues.back().dyad_id != t.dyad_id ||
          dialogues.back().session != t.session) {
        for (const auto& d : dialogues) {
          if (d.dyad_id == t.dyad_id && d.session == t.session) {
            Fail(ErrorKind::kCorpus,
                 where + ": turns of dialogue (" + t.dyad_id + ", session " +
                     std::to_string(t.session) + ") are not contiguous");
          }
        }
        dialogues.push_back(Dialogue{t.dyad_id, t.session, {}});
      }
      dialogues.back().turns.push_back(std::move(t));
    }
  }

  std::vector<RapportSlice> slices;
  {
    auto in = OpenForRead(rapport_path);
    const std::string name = rapport_path.filename().string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (IsBlank(line)) continue;
      auto cols = SplitCsvLine(line);
      if (line_no == 1 && !cols.empty() && cols[0] == "dyad_id") continue;
      const std::string where = name + ":" + std::to_string(line_no);
      if (cols.size() != 4) {
        Fail(ErrorKind::kCorpus, where + ": expected 4 columns dyad_id,session,slice_index,score");
      }
      RapportSlice s;
      s.dyad_id = cols[0];
      s.session = ParseIntField(cols[1], where, "session");
      s.slice_index = ParseIntField(cols[2], where, "slice_index");
      s.score = ParseIntField(cols[3], where, "score");
      if (s.score < 1 || s.score > 7) {
        Fail(ErrorKind::kCorpus, where + ": field 'score': rapport out of range [1,7]");
      }
      slices.push_back(std::move(s));
    }
  }

  std::vector<DyadProfile> profiles;
  {
    auto in = OpenForRead(profile_path);
    const std::string name = profile_path.filename().string();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (IsBlank(line)) continue;
      auto cols = SplitCsvLine(line);
      if (line_no == 1 && !cols.empty() && cols[0] == "dyad_id") continue;
      const std::string where = name + ":" + std::to_string(line_no);
      if (cols.size() != 3) {
        Fail(ErrorKind::kCorpus, where + ": expected 3 columns dyad_id,tutor_pretest,tutee_pretest");
      }
      DyadProfile p;
      p.dyad_id = cols[0];
      p.tutor_pretest =
          ParseDoubleField(cols[1], where, "tutor_pretest") / options.pretest_scale;
      p.tutee_pretest =
          ParseDoubleField(cols[2], where, "tutee_pretest") / options.pretest_scale;
      for (double v : {p.tutor_pretest, p.tutee_pretest}) {
        if (!(v >= 0.0 && v <= 1.0)) {
          Fail(ErrorKind::kCorpus, where + ": pretest out of range [0,1] after scaling");
        }
      }
      profiles.push_back(std::move(p));
    }
  }

  return Corpus::Create(std::move(dialogues), std::move(slices),
                        std::move(profiles));
}

void WriteCorpus(const Corpus& corpus, const std::filesystem::path& turns_path,
                 const std::filesystem::path& rapport_path,
                 const std::filesystem::path& profile_path) {
  {
    auto out = OpenForWrite(turns_path);
    for (const auto& d : corpus.dialogues()) {
      for (const auto& t : d.turns) out << TurnToJsonLine(t) << '\n';
    }
  }
  {
    auto out = OpenForWrite(rapport_path);
    out << "dyad_id,session,slice_index,score\n";
    for (const auto& s : corpus.rapport()) {
      out << s.dyad_id << ',' << s.session << ',' << s.slice_index << ','
          << s.score << '\n';
    }
  }
  {
    auto out = OpenForWrite(profile_path);
    out << "dyad_id,tutor_pretest,tutee_pretest\n";
    for (const auto& p : corpus.profiles()) {
      out << p.dyad_id << ',' << FormatShortest(p.tutor_pretest) << ','
          << FormatShortest(p.tutee_pretest) << '\n';
    }
  }
}

}  // namespace hedgepred
