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

#ifndef HEDGEPRED_ERROR_H_
#define HEDGEPRED_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace hedgepred {

// Failure categories. User-facing categories (everything except kInternal)
// are caused by inputs and map to exit code 1 in the command-line tool.
enum class ErrorKind {
  kConfig,
  kCorpus,
  kSchema,
  kShape,
  kIo,
  kTraining,
  kInternal,
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  bool is_user_error() const { return kind_ != ErrorKind::kInternal; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return "config";
    case ErrorKind::kCorpus:
      return "corpus";
    case ErrorKind::kSchema:
      return "schema";
    case ErrorKind::kShape:
      return "shape";
    case ErrorKind::kIo:
      return "io";
    case ErrorKind::kTraining:
      return "training";
    case ErrorKind::kInternal:
      return "internal";
  }
  return "internal";
}

}  // namespace hedgepred

#endif  // HEDGEPRED_ERROR_H_
