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

#include "dptext/vocab.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <utility>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"
#include "strings.h"

namespace dptext {
namespace {

constexpr uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr uint64_t kFnvPrime = 1099511628211ULL;

void FnvBytes(uint64_t& h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void FnvLittleEndian(uint64_t& h, uint64_t value, int bytes) {
  for (int i = 0; i < bytes; ++i) {
    unsigned char b = static_cast<unsigned char>(value >> (8 * i));
    FnvBytes(h, &b, 1);
  }
}

bool IsFieldSeparator(char c) { return c == ' ' || c == '\t'; }

bool HasWhitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
           c == '\f';
  });
}

}  // namespace

absl::StatusOr<SimilarityMeasure> SimilarityMeasure::FromName(
    std::string_view name) {
  if (name == "euclidean") return Euclidean();
  if (name == "cosine") return Cosine();
  return absl::InvalidArgumentError(
      internal::StrCat("unknown similarity measure '", name,
                   "' (expected euclidean or cosine)"));
}

absl::StatusOr<SimilarityMeasure> SimilarityMeasure::FromKind(uint8_t kind) {
  switch (kind) {
    case static_cast<uint8_t>(MeasureKind::kEuclidean):
      return Euclidean();
    case static_cast<uint8_t>(MeasureKind::kCosine):
      return Cosine();
  }
  return absl::InvalidArgumentError(
      internal::StrCat("unknown similarity measure kind ", kind));
}

std::string_view SimilarityMeasure::name() const {
  return kind_ == MeasureKind::kEuclidean ? "euclidean" : "cosine";
}

absl::StatusOr<Vocabulary> Vocabulary::Create(
    std::vector<std::string> surfaces) {
  Vocabulary vocab;
  vocab.index_.reserve(surfaces.size());
  for (size_t i = 0; i < surfaces.size(); ++i) {
    const std::string& s = surfaces[i];
    if (s.empty()) {
      return absl::InvalidArgumentError(
          internal::StrCat("token ", i, " has an empty surface"));
    }
    if (HasWhitespace(s)) {
      return absl::InvalidArgumentError(
          internal::StrCat("token ", i, " surface contains whitespace"));
    }
    if (!vocab.index_.emplace(s, static_cast<TokenId>(i)).second) {
      return absl::InvalidArgumentError(
          internal::StrCat("duplicate token surface '", s, "'"));
    }
  }
  vocab.surfaces_ = std::move(surfaces);
  return vocab;
}

std::optional<TokenId> Vocabulary::Find(std::string_view surface) const {
  auto it = index_.find(internal::AbslView(surface));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

absl::StatusOr<EmbeddingTable> EmbeddingTable::Create(
    std::vector<std::string> surfaces, std::vector<float> values, size_t dim) {
  if (dim == 0) {
    return absl::InvalidArgumentError("embedding dimension must be positive");
  }
  if (values.size() != surfaces.size() * dim) {
    return absl::InvalidArgumentError(
        internal::StrCat("expected ", surfaces.size() * dim, " vector values, got ",
                     values.size()));
  }
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      return absl::InvalidArgumentError(
          internal::StrCat("non-finite component in vector of token ", i / dim));
    }
  }
  EmbeddingTable table;
  auto vocab = Vocabulary::Create(std::move(surfaces));
  if (!vocab.ok()) return vocab.status();
  table.vocab_ = *std::move(vocab);
  table.values_ = std::move(values);
  table.dim_ = dim;

  table.norms_.resize(table.size());
  for (TokenId id = 0; id < table.size(); ++id) {
    double sum = 0.0;
    for (float v : table.vector(id)) sum += static_cast<double>(v) * v;
    table.norms_[id] = std::sqrt(sum);
  }

  uint64_t h = kFnvOffset;
  FnvLittleEndian(h, dim, 8);
  for (TokenId id = 0; id < table.size(); ++id) {
    std::string_view s = table.surface(id);
    FnvBytes(h, s.data(), s.size());
    FnvLittleEndian(h, 0, 1);
    for (float v : table.vector(id)) {
      FnvLittleEndian(h, std::bit_cast<uint32_t>(v), 4);
    }
  }
  table.hash_ = h;
  return table;
}

absl::StatusOr<EmbeddingTable> ParseEmbeddings(std::istream& in,
                                               std::optional<size_t> expected_dim,
                                               std::string_view source_name) {
  std::vector<std::string> surfaces;
  std::vector<float> values;
  absl::flat_hash_set<std::string> seen;
  std::optional<size_t> dim = expected_dim;
  size_t duplicates = 0;
  std::vector<float> row;

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::string_view rest = line;
    auto next_field = [&rest]() -> std::string_view {
      size_t b = 0;
      while (b < rest.size() && IsFieldSeparator(rest[b])) ++b;
      size_t e = b;
      while (e < rest.size() && !IsFieldSeparator(rest[e])) ++e;
      std::string_view field = rest.substr(b, e - b);
      rest.remove_prefix(e);
      return field;
    };

    std::string_view surface = next_field();
    if (surface.empty()) {
      return absl::InvalidArgumentError(internal::StrCat(
          source_name, ": malformed line ", line_no, ": missing token"));
    }
    row.clear();
    for (std::string_view field = next_field(); !field.empty();
         field = next_field()) {
      double v = 0.0;
      auto [ptr, ec] =
          std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec == std::errc::result_out_of_range) {
        return absl::InvalidArgumentError(
            internal::StrCat(source_name, ": non-finite value '", field,
                         "' at line ", line_no));
      }
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        return absl::InvalidArgumentError(
            internal::StrCat(source_name, ": malformed number '", field,
                         "' at line ", line_no));
      }
      float f = static_cast<float>(v);
      if (!std::isfinite(v) || !std::isfinite(f)) {
        return absl::InvalidArgumentError(
            internal::StrCat(source_name, ": non-finite value '", field,
                         "' at line ", line_no));
      }
      row.push_back(f);
    }
    if (row.empty()) {
      return absl::InvalidArgumentError(internal::StrCat(
          source_name, ": malformed line ", line_no, ": no vector components"));
    }
    if (!dim) dim = row.size();
    if (row.size() != *dim) {
      return absl::InvalidArgumentError(internal::StrCat(
          source_name, ": dimension mismatch at line ", line_no, ": expected ",
          *dim, ", found ", row.size()));
    }
    if (!seen.emplace(surface).second) {
      ++duplicates;
      continue;
    }
    surfaces.emplace_back(surface);
    values.insert(values.end(), row.begin(), row.end());
  }
  if (in.bad()) {
    return absl::DataLossError(internal::StrCat(source_name, ": read error"));
  }
  if (surfaces.empty()) {
    return absl::InvalidArgumentError(
        internal::StrCat(source_name, ": empty embedding file"));
  }
  auto table = EmbeddingTable::Create(std::move(surfaces), std::move(values),
                                      *dim);
  if (!table.ok()) {
    return absl::InvalidArgumentError(
        internal::StrCat(source_name, ": ", table.status().message()));
  }
  table->set_duplicate_count(duplicates);
  return table;
}

absl::StatusOr<EmbeddingTable> LoadEmbeddings(const std::filesystem::path& path,
                                              std::optional<size_t> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(
        internal::StrCat("cannot open embedding file ", path.string()));
  }
  return ParseEmbeddings(in, expected_dim, path.string());
}

double EuclideanDistance(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

double CosineSimilarity(std::span<const float> a, double norm_a,
                        std::span<const float> b, double norm_b) {
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return std::clamp(dot / (norm_a * norm_b), -1.0, 1.0);
}

absl::StatusOr<double> Distance(const EmbeddingTable& table,
                                SimilarityMeasure measure, TokenId x,
                                TokenId y) {
  if (x >= table.size() || y >= table.size()) {
    return absl::OutOfRangeError(
        internal::StrCat("token id out of range: ", std::max(x, y)));
  }
  if (measure.kind() == MeasureKind::kEuclidean) {
    if (x == y) return 0.0;
    return EuclideanDistance(table.vector(x), table.vector(y));
  }
  for (TokenId t : {x, y}) {
    if (table.norm(t) == 0.0) {
      return absl::InvalidArgumentError(
          internal::StrCat("token '", table.surface(t),
                       "' has a zero vector; cosine similarity is undefined"));
    }
  }
  if (x == y) return 1.0;
  return CosineSimilarity(table.vector(x), table.norm(x), table.vector(y),
                          table.norm(y));
}

}  // namespace dptext
