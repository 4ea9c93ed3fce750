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

#ifndef HEDGEPRED_TEXT_IO_H_
#define HEDGEPRED_TEXT_IO_H_

#include <string>
#include <string_view>
#include <vector>

namespace hedgepred {

bool IsBlank(std::string_view line);

// Splits on commas and trims surrounding whitespace. No quoting support.
std::vector<std::string> SplitCsvLine(std::string_view line);

// Parse helpers raise Error(kCorpus) naming `where` and `field`.
int ParseIntField(std::string_view text, std::string_view where,
                  std::string_view field);
double ParseDoubleField(std::string_view text, std::string_view where,
                        std::string_view field);

// Shortest decimal form that round-trips to the same double.
std::string FormatShortest(double value);

// Fixed-point with `digits` decimals; used by report writers.
std::string FormatFixed(double value, int digits);

}  // namespace hedgepred

#endif  // HEDGEPRED_TEXT_IO_H_
