// Copyright 2026 The dptext Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Customized output sets.
//
// The vocabulary is partitioned into groups of K semantically close tokens.
// Every token in a group is mapped to that same group, so all members are
// mutually adjacent inputs and each member's output set is the group itself.
// Each group carries a |G| x |G| score matrix u(x, y) obtained by min-max
// normalizing the raw pair values over members x members:
//
//   euclidean (negative polarity): u = -(d - d_min) / (d_max - d_min)
//   cosine    (positive polarity): u =  (d - d_min) / (d_max - d_min)
//
// so scores lie in [-1, 0] or [0, 1] and the self score is row-maximal.
// A group with d_max == d_min gets all-zero scores.

#ifndef DPTEXT_MAPPING_H_
#define DPTEXT_MAPPING_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dptext/vocab.h"

namespace dptext {

enum class SeedOrder : uint8_t { kVocabOrder = 0, kFrequencyOrder = 1 };

absl::StatusOr<SeedOrder> SeedOrderFromName(std::string_view name);
std::string_view SeedOrderName(SeedOrder order);

struct Group {
  std::vector<TokenId> members;
  // Row-major |members| x |members|; scores[i * size() + j] = u(m_i, m_j).
  std::vector<double> scores;
  double d_min = 0.0;
  double d_max = 0.0;

  size_t size() const { return members.size(); }
  std::span<const double> row(size_t i) const {
    return {scores.data() + i * members.size(), members.size()};
  }
  double score(size_t i, size_t j) const {
    return scores[i * members.size() + j];
  }
};

struct GroupScores {
  std::vector<double> scores;
  double d_min = 0.0;
  double d_max = 0.0;
};

// Normalized score matrix for one group.
absl::StatusOr<GroupScores> BuildScores(std::span<const TokenId> members,
                                        const EmbeddingTable& table,
                                        SimilarityMeasure measure);

// A token's view of the mapping: its group and its score row.
struct GroupRow {
  size_t group_index;
  const Group* group;
  size_t position;  // index of the token within group->members
  std::span<const double> scores;
};

class MappingTable {
 public:
  MappingTable() = default;

  // Validates that `groups` partition the vocabulary, that at most one group
  // is smaller than K, and that every score matrix is square.
  static absl::StatusOr<MappingTable> Create(Vocabulary vocab,
                                             std::vector<Group> groups,
                                             size_t k, SimilarityMeasure measure,
                                             SeedOrder order,
                                             uint64_t vocab_hash);

  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<Group>& groups() const { return groups_; }
  size_t k() const { return k_; }
  SimilarityMeasure measure() const { return measure_; }
  SeedOrder seed_order() const { return order_; }
  uint64_t vocab_hash() const { return vocab_hash_; }

  size_t group_of(TokenId id) const { return token_to_group_[id]; }
  size_t position_of(TokenId id) const { return token_to_position_[id]; }

  GroupRow Lookup(TokenId id) const;
  // nullopt is the OOV signal.
  std::optional<GroupRow> Lookup(std::string_view surface) const;

  // Non-fatal conditions found during generation (degenerate K). Not
  // serialized.
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  Vocabulary vocab_;
  std::vector<Group> groups_;
  std::vector<uint32_t> token_to_group_;
  std::vector<uint32_t> token_to_position_;
  size_t k_ = 0;
  SimilarityMeasure measure_ = SimilarityMeasure::Euclidean();
  SeedOrder order_ = SeedOrder::kVocabOrder;
  uint64_t vocab_hash_ = 0;
  std::vector<std::string> warnings_;
};

struct MappingOptions {
  size_t k = 20;
  SimilarityMeasure measure = SimilarityMeasure::Euclidean();
  SeedOrder order = SeedOrder::kVocabOrder;
  // Per-token corpus counts, required for kFrequencyOrder.
  std::vector<uint64_t> frequencies;
  // Use the OpenMP candidate scan. The result is identical either way.
  bool parallel = true;
};

// Greedy partition: take the next unmapped seed token under `order`, join it
// with its K-1 closest unmapped tokens (ties by token id), remove them, and
// repeat until fewer than K tokens remain; those form one final group.
absl::StatusOr<MappingTable> GenerateMapping(const EmbeddingTable& table,
                                             const MappingOptions& options);

// Reads "surface count" lines into a per-token count vector aligned with
// `vocab`. Surfaces not in the vocabulary are ignored; missing tokens get 0.
absl::StatusOr<std::vector<uint64_t>> LoadFrequencies(
    const std::filesystem::path& path, const Vocabulary& vocab);

}  // namespace dptext

#endif  // DPTEXT_MAPPING_H_
