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

#include <cmath>
#include <fstream>
#include <sstream>

#include "hedgepred/encoding.h"
#include "hedgepred/error.h"
#include "hedgepred/random.h"
#include "hedgepred/text_io.h"

namespace hedgepred {

HashingEmbedder::HashingEmbedder(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim_ == 0) Fail(ErrorKind::kConfig, "hashing embedder needs dim >= 1");
}

std::vector<double> HashingEmbedder::EmbedTokens(
    std::span<const std::string> tokens) const {
  std::vector<double> v(dim_, 0.0);
  const std::uint64_t basis = MixSeed(seed_);
  for (const auto& tok : tokens) {
    const std::uint64_t h = MixSeed(Fnv1a(tok, basis));
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    v[static_cast<std::size_t>(h % dim_)] += sign;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

std::vector<double> HashingEmbedder::Embed(const Turn& turn) const {
  return EmbedTokens(turn.tokens);
}

std::string HashingEmbedder::Describe() const {
  return "hashing(dim=" + std::to_string(dim_) + ",seed=" + std::to_string(seed_) + ")";
}

FileEmbedder::FileEmbedder(const std::filesystem::path& path)
    : source_(path.string()) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kIo, "cannot open embedding file " + source_);
  const std::string name = path.filename().string();
  std::string line;
  std::size_t line_no = 0;
  bool have_dim = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    const auto cols = SplitCsvLine(line);
    if (line_no == 1 && !cols.empty() && cols[0] == "dyad_id") continue;
    const std::string where = name + ":" + std::to_string(line_no);
    if (cols.size() < 4) {
      Fail(ErrorKind::kCorpus, where + ": expected dyad_id,session,index and values");
    }
    const std::size_t dim = cols.size() - 3;
    if (!have_dim) {
      dim_ = dim;
      have_dim = true;
    } else if (dim != dim_) {
      Fail(ErrorKind::kCorpus, where + ": inconsistent vector length " +
                                   std::to_string(dim) + " (expected " +
                                   std::to_string(dim_) + ")");
    }
    std::vector<double> values;
    values.reserve(dim);
    for (std::size_t i = 3; i < cols.size(); ++i) {
      values.push_back(ParseDoubleField(cols[i], where, "value"));
    }
    auto key = std::make_tuple(cols[0], ParseIntField(cols[1], where, "session"),
                               ParseIntField(cols[2], where, "index"));
    if (!rows_.emplace(std::move(key), std::move(values)).second) {
      Fail(ErrorKind::kCorpus, where + ": duplicate embedding key");
    }
  }
  if (!have_dim) Fail(ErrorKind::kCorpus, name + ": no embedding rows");
}

std::vector<double> FileEmbedder::Embed(const Turn& turn) const {
  auto it = rows_.find(std::make_tuple(turn.dyad_id, turn.session, turn.index));
  if (it == rows_.end()) {
    Fail(ErrorKind::kCorpus, "no embedding for turn (" + turn.dyad_id + ", " +
                                 std::to_string(turn.session) + ", " +
                                 std::to_string(turn.index) + ")");
  }
  return it->second;
}

std::string FileEmbedder::Describe() const {
  return "file(" + source_ + ",dim=" + std::to_string(dim_) + ")";
}

std::shared_ptr<const EmbeddingProvider> MakeHashingEmbedder(std::size_t dim,
                                                             std::uint64_t seed) {
  return std::make_shared<HashingEmbedder>(dim, seed);
}

std::shared_ptr<const EmbeddingProvider> MakeFileEmbedder(
    const std::filesystem::path& path) {
  return std::make_shared<FileEmbedder>(path);
}

}  // namespace hedgepred
