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

#ifndef HEDGEPRED_TOOLS_COMMANDS_H_
#define HEDGEPRED_TOOLS_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace hedgepred::cli {

struct CommonOptions {
  std::filesystem::path config;  // empty: defaults only
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
  int jobs = 1;
};

// Files produced by a command, written together once every result exists so
// a failing run leaves no partial tables behind.
class OutputSet {
 public:
  void Add(const std::string& relative_path, std::string content);
  void Commit(const std::filesystem::path& dir) const;
  const std::map<std::string, std::string>& files() const { return files_; }

 private:
  std::map<std::string, std::string> files_;
};

// Each command returns normally on success and throws hedgepred::Error on
// failure.
void CmdGenerate(const CommonOptions& options);
void CmdTrainEval(const CommonOptions& options);
void CmdExplain(const CommonOptions& options, const std::filesystem::path& model_path);
void CmdAblate(const CommonOptions& options);
void CmdSchemaDump(const CommonOptions& options, const std::string& mask);

// Full command line: parses arguments, runs the command and maps failures to
// exit codes (0 ok, 1 user error, 2 internal error).
int Main(int argc, char** argv);

}  // namespace hedgepred::cli

#endif  // HEDGEPRED_TOOLS_COMMANDS_H_
