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

#include "hedgepred/text_io.h"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "hedgepred/error.h"

namespace hedgepred {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void FieldFail(std::string_view where, std::string_view field,
                            std::string_view what, std::string_view text) {
  Fail(ErrorKind::kCorpus, std::string(where) + ": field '" +
                               std::string(field) + "': " + std::string(what) +
                               " '" + std::string(text) + "'");
}

}  // namespace

bool IsBlank(std::string_view line) { return Trim(line).empty(); }

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(Trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

int ParseIntField(std::string_view text, std::string_view where,
                  std::string_view field) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    FieldFail(where, field, "expected integer, got", text);
  }
  return value;
}

double ParseDoubleField(std::string_view text, std::string_view where,
                        std::string_view field) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty() || !std::isfinite(value)) {
    FieldFail(where, field, "expected number, got", text);
  }
  return value;
}

std::string FormatShortest(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) Fail(ErrorKind::kInternal, "FormatShortest failed");
  return std::string(buf.data(), ptr);
}

std::string FormatFixed(double value, int digits) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::fixed, digits);
  if (ec != std::errc()) Fail(ErrorKind::kInternal, "FormatFixed failed");
  std::string s(buf.data(), ptr);
  // Avoid "-0.000" so reports compare stably.
  if (s.find_first_not_of("-0.") == std::string::npos && !s.empty() && s[0] == '-') {
    s.erase(0, 1);
  }
  return s;
}

}  // namespace hedgepred
