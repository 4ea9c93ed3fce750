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

#ifndef HEDGEPRED_ENCODING_H_
#define HEDGEPRED_ENCODING_H_

#include <bitset>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "hedgepred/corpus.h"
#include "hedgepred/feature_group.h"

namespace hedgepred {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureEntry {
  FeatureGroup group;
  std::string name;
  std::size_t offset = 0;
  std::size_t width = 0;
  // Per-coordinate suffixes for blocks wider than one ("partner", "qy", ...).
  std::vector<std::string> labels;

  bool operator==(const FeatureEntry&) const = default;
};

// Ordered layout of a turn vector. Entries are contiguous, non-overlapping and
// cover [0, total_dim()).
class FeatureSchema {
 public:
  explicit FeatureSchema(std::vector<FeatureEntry> entries);

  const std::vector<FeatureEntry>& entries() const { return entries_; }
  std::size_t total_dim() const { return total_dim_; }
  std::size_t embedding_dim() const { return group_width(FeatureGroup::kEmbedding); }
  std::size_t group_width(FeatureGroup group) const;

  // Throws Error(kSchema) if absent.
  const FeatureEntry& Find(FeatureGroup group, std::string_view name) const;

  // "group/name" or "group/name=label" for every coordinate.
  std::vector<std::string> CoordinateNames() const;
  FeatureGroup GroupOf(std::size_t coordinate) const;

  std::string Fingerprint() const;
  nlohmann::json ToJson() const;

  bool operator==(const FeatureSchema& other) const { return entries_ == other.entries_; }

 private:
  std::vector<FeatureEntry> entries_;
  std::vector<FeatureGroup> coordinate_group_;
  std::size_t total_dim_ = 0;
};

// Embedding (E), CS (5), TS (5), DialAct (6), NB (12), Rapport (1),
// ConInfo (7): D = E + 36.
FeatureSchema DefaultSchema(std::size_t embedding_dim);

// Nonempty set of included feature groups.
class FeatureMask {
 public:
  // Throws Error(kConfig) on an empty set.
  explicit FeatureMask(std::span<const FeatureGroup> included);

  static FeatureMask All();
  static FeatureMask WithoutEmbedding();
  static FeatureMask OnlyEmbedding();
  // "all", "no_emb", "only_emb", or a '+'-joined list of group names.
  static FeatureMask Parse(std::string_view name);

  bool Contains(FeatureGroup group) const {
    return bits_.test(static_cast<std::size_t>(group));
  }
  // Throws if the result would be empty.
  FeatureMask Without(FeatureGroup group) const;
  std::vector<FeatureGroup> groups() const;
  std::string Name() const;

  bool operator==(const FeatureMask&) const = default;

 private:
  FeatureMask() = default;
  std::bitset<kFeatureGroupCount> bits_;
};

// Fingerprint of what a model consumes: schema layout, mask and window.
std::string InputFingerprint(const FeatureSchema& schema, const FeatureMask& mask,
                             int window);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  // Deterministic; a turn without tokens maps to the zero vector.
  virtual std::vector<double> Embed(const Turn& turn) const = 0;
  virtual std::string Describe() const = 0;
};

// Signed feature hashing of tokens, L2-normalized.
class HashingEmbedder : public EmbeddingProvider {
 public:
  HashingEmbedder(std::size_t dim, std::uint64_t seed);

  std::size_t dim() const override { return dim_; }
  std::vector<double> Embed(const Turn& turn) const override;
  std::vector<double> EmbedTokens(std::span<const std::string> tokens) const;
  std::string Describe() const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Precomputed embeddings keyed by (dyad_id, session, index); CSV rows
// "dyad_id,session,index,v0,...,v{E-1}".
class FileEmbedder : public EmbeddingProvider {
 public:
  explicit FileEmbedder(const std::filesystem::path& path);

  std::size_t dim() const override { return dim_; }
  std::vector<double> Embed(const Turn& turn) const override;
  std::string Describe() const override;

 private:
  std::string source_;
  std::size_t dim_ = 0;
  std::map<std::tuple<std::string, int, int>, std::vector<double>> rows_;
};

std::shared_ptr<const EmbeddingProvider> MakeHashingEmbedder(std::size_t dim,
                                                             std::uint64_t seed);
std::shared_ptr<const EmbeddingProvider> MakeFileEmbedder(
    const std::filesystem::path& path);

const std::vector<std::string>& DefaultBackchannelLexicon();

std::size_t CountBackchannels(std::span<const Turn* const> history,
                              const std::set<std::string, std::less<>>& lexicon);

// Problem-id min/max, fitted on training data only.
struct ProblemRange {
  int min = 0;
  int max = 0;

  double Normalize(int problem_id) const;
  bool operator==(const ProblemRange&) const = default;
};

ProblemRange FitProblemRange(const Corpus& corpus,
                             std::span<const Instance> instances,
                             std::span<const std::size_t> subset);

// omega x D matrix of encoded history turns, oldest first.
struct HistoryTensor {
  std::size_t window = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * dim, dim);
  }
  std::span<double> row(std::size_t i) {
    return std::span<double>(values).subspan(i * dim, dim);
  }
  bool operator==(const HistoryTensor&) const = default;
};

struct EncoderOptions {
  std::vector<std::string> backchannel_lexicon = DefaultBackchannelLexicon();
  std::size_t backchannel_cap = 10;
  // Number of earlier turns scanned for backchannel tokens.
  std::size_t backchannel_span = 4;
};

class TurnEncoder {
 public:
  TurnEncoder(FeatureSchema schema, std::shared_ptr<const EmbeddingProvider> provider,
              EncoderOptions options = {});

  const FeatureSchema& schema() const { return schema_; }
  const EmbeddingProvider& provider() const { return *provider_; }
  const EncoderOptions& options() const { return options_; }

  // `turn == nullptr` is the padding sentinel and encodes to zeros.
  std::vector<double> EncodeTurn(const Turn* turn, int rapport_score,
                                 std::size_t backchannel_count,
                                 const DyadProfile& profile,
                                 const ProblemRange& range) const;

  // Rows for each history turn, masked groups zeroed.
  HistoryTensor EncodeInstance(const Instance& instance, const Corpus& corpus,
                               const FeatureMask& mask,
                               const ProblemRange& range) const;

 private:
  FeatureSchema schema_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  EncoderOptions options_;
  std::set<std::string, std::less<>> lexicon_;
};

// Zeroes excluded groups. Idempotent.
void ApplyMask(HistoryTensor& tensor, const FeatureSchema& schema,
               const FeatureMask& mask);

// Coordinates of one turn row that survive the mask, ascending.
std::vector<std::size_t> IncludedCoordinates(const FeatureSchema& schema,
                                             const FeatureMask& mask);

// Row-major concatenation of the included coordinates of each row.
std::vector<double> Flatten(const HistoryTensor& tensor, const FeatureSchema& schema,
                            const FeatureMask& mask);

// "t-k/group/name" per flattened coordinate (row 0 is t-window).
std::vector<std::string> FlattenedNames(const FeatureSchema& schema,
                                        const FeatureMask& mask, int window);

// Group of each flattened coordinate.
std::vector<FeatureGroup> FlattenedGroups(const FeatureSchema& schema,
                                          const FeatureMask& mask, int window);

// Flattened design matrix for a subset of instances.
struct EncodedDataset {
  Matrix x;
  std::vector<int> y;
  std::size_t window = 0;
  std::size_t row_width = 0;
  std::string fingerprint;
};

EncodedDataset EncodeDataset(const TurnEncoder& encoder, const Corpus& corpus,
                             std::span<const Instance> instances,
                             std::span<const std::size_t> subset,
                             const FeatureMask& mask, const ProblemRange& range);

}  // namespace hedgepred

#endif  // HEDGEPRED_ENCODING_H_
