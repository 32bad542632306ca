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

#ifndef DPTEXT_VOCAB_H_
#define DPTEXT_VOCAB_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dptext {

// Dense token index. Ids are contiguous from 0 in vocabulary order.
using TokenId = uint32_t;

enum class MeasureKind : uint8_t { kEuclidean = 0, kCosine = 1 };

// Whether a larger raw value means "closer" (positive) or "farther"
// (negative).
enum class Polarity : uint8_t { kNegative = 0, kPositive = 1 };

// Euclidean distance (negative polarity) or cosine similarity (positive
// polarity). The polarity is implied by the kind and cannot be set
// independently.
class SimilarityMeasure {
 public:
  static constexpr SimilarityMeasure Euclidean() {
    return SimilarityMeasure(MeasureKind::kEuclidean);
  }
  static constexpr SimilarityMeasure Cosine() {
    return SimilarityMeasure(MeasureKind::kCosine);
  }
  // Accepts "euclidean" or "cosine".
  static absl::StatusOr<SimilarityMeasure> FromName(std::string_view name);
  static absl::StatusOr<SimilarityMeasure> FromKind(uint8_t kind);

  constexpr MeasureKind kind() const { return kind_; }
  constexpr Polarity polarity() const {
    return kind_ == MeasureKind::kEuclidean ? Polarity::kNegative
                                            : Polarity::kPositive;
  }
  std::string_view name() const;

  friend constexpr bool operator==(SimilarityMeasure a, SimilarityMeasure b) {
    return a.kind_ == b.kind_;
  }

 private:
  constexpr explicit SimilarityMeasure(MeasureKind kind) : kind_(kind) {}
  MeasureKind kind_;
};

// Interned token surfaces. Surface -> id -> surface is the identity.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Fails on empty, whitespace-containing or duplicate surfaces.
  static absl::StatusOr<Vocabulary> Create(std::vector<std::string> surfaces);

  size_t size() const { return surfaces_.size(); }
  bool empty() const { return surfaces_.empty(); }
  std::string_view surface(TokenId id) const { return surfaces_[id]; }
  const std::vector<std::string>& surfaces() const { return surfaces_; }
  std::optional<TokenId> Find(std::string_view surface) const;

 private:
  std::vector<std::string> surfaces_;
  absl::flat_hash_map<std::string, TokenId> index_;
};

// Vocabulary plus one `dim`-component vector per token. Immutable after
// construction.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  // `values` is row-major, surfaces.size() * dim entries, all finite.
  static absl::StatusOr<EmbeddingTable> Create(std::vector<std::string> surfaces,
                                               std::vector<float> values,
                                               size_t dim);

  size_t size() const { return vocab_.size(); }
  size_t dim() const { return dim_; }
  const Vocabulary& vocab() const { return vocab_; }
  std::string_view surface(TokenId id) const { return vocab_.surface(id); }
  std::optional<TokenId> Find(std::string_view surface) const {
    return vocab_.Find(surface);
  }
  std::span<const float> vector(TokenId id) const {
    return {values_.data() + static_cast<size_t>(id) * dim_, dim_};
  }
  double norm(TokenId id) const { return norms_[id]; }

  // Lines dropped by the loader because their surface was already seen.
  size_t duplicate_count() const { return duplicate_count_; }
  void set_duplicate_count(size_t n) { duplicate_count_ = n; }

  // FNV-1a over dim, surfaces and vector bit patterns. Stored in mapping
  // artifacts to detect mismatched embedding files.
  uint64_t Hash() const { return hash_; }

 private:
  Vocabulary vocab_;
  std::vector<float> values_;
  std::vector<double> norms_;
  size_t dim_ = 0;
  size_t duplicate_count_ = 0;
  uint64_t hash_ = 0;
};

// Parses GloVe-style text: "surface v1 v2 ... vdim" per line. Duplicate
// surfaces keep the first occurrence. Malformed lines, dimension mismatches
// and non-finite values are hard errors naming the 1-based line number.
absl::StatusOr<EmbeddingTable> ParseEmbeddings(
    std::istream& in, std::optional<size_t> expected_dim = std::nullopt,
    std::string_view source_name = "<stream>");

absl::StatusOr<EmbeddingTable> LoadEmbeddings(
    const std::filesystem::path& path,
    std::optional<size_t> expected_dim = std::nullopt);

double EuclideanDistance(std::span<const float> a, std::span<const float> b);

// <a,b> / (norm_a * norm_b), clamped to [-1, 1]. Norms must be nonzero.
double CosineSimilarity(std::span<const float> a, double norm_a,
                        std::span<const float> b, double norm_b);

// Raw pair value d(x, y): the L2 distance for euclidean, the cosine
// similarity for cosine. d(x, x) is exactly 0 (euclidean) or 1 (cosine).
// Fails under cosine when either vector has zero norm.
absl::StatusOr<double> Distance(const EmbeddingTable& table,
                                SimilarityMeasure measure, TokenId x,
                                TokenId y);

}  // namespace dptext

#endif  // DPTEXT_VOCAB_H_
