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

#include "dptext/mapping.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "dptext/kernels.h"
#include "strings.h"

namespace dptext {
namespace {

constexpr uint32_t kUnassigned = std::numeric_limits<uint32_t>::max();

// Raw pair value with exact self values; inputs already validated.
double PairValue(const EmbeddingTable& table, SimilarityMeasure measure,
                 TokenId x, TokenId y) {
  if (measure.kind() == MeasureKind::kEuclidean) {
    return x == y ? 0.0 : EuclideanDistance(table.vector(x), table.vector(y));
  }
  return x == y ? 1.0
                : CosineSimilarity(table.vector(x), table.norm(x),
                                   table.vector(y), table.norm(y));
}

GroupScores ScoreMembers(std::span<const TokenId> members,
                         const EmbeddingTable& table,
                         SimilarityMeasure measure) {
  const size_t n = members.size();
  GroupScores out;
  std::vector<double> raw(n * n);
  for (size_t i = 0; i < n; ++i) {
    raw[i * n + i] = PairValue(table, measure, members[i], members[i]);
    for (size_t j = i + 1; j < n; ++j) {
      const double d = PairValue(table, measure, members[i], members[j]);
      raw[i * n + j] = d;
      raw[j * n + i] = d;
    }
  }
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  out.d_min = *lo;
  out.d_max = *hi;
  out.scores.assign(n * n, 0.0);
  if (out.d_max == out.d_min) return out;
  const double range = out.d_max - out.d_min;
  const double sign =
      measure.polarity() == Polarity::kNegative ? -1.0 : 1.0;
  for (size_t i = 0; i < n * n; ++i) {
    // + 0.0 turns -0.0 into 0.0 so serialized bytes do not depend on sign.
    out.scores[i] = sign * ((raw[i] - out.d_min) / range) + 0.0;
  }
  return out;
}

absl::Status CheckCosineNorms(const EmbeddingTable& table,
                              SimilarityMeasure measure,
                              std::span<const TokenId> ids) {
  if (measure.kind() != MeasureKind::kCosine) return absl::OkStatus();
  for (TokenId id : ids) {
    if (id >= table.size()) {
      return absl::OutOfRangeError(internal::StrCat("token id out of range: ", id));
    }
    if (table.norm(id) == 0.0) {
      return absl::InvalidArgumentError(
          internal::StrCat("token '", table.surface(id),
                       "' has a zero vector; cosine similarity is undefined"));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<SeedOrder> SeedOrderFromName(std::string_view name) {
  if (name == "vocab") return SeedOrder::kVocabOrder;
  if (name == "frequency") return SeedOrder::kFrequencyOrder;
  return absl::InvalidArgumentError(internal::StrCat(
      "unknown seed order '", name, "' (expected vocab or frequency)"));
}

std::string_view SeedOrderName(SeedOrder order) {
  return order == SeedOrder::kVocabOrder ? "vocab" : "frequency";
}

absl::StatusOr<GroupScores> BuildScores(std::span<const TokenId> members,
                                        const EmbeddingTable& table,
                                        SimilarityMeasure measure) {
  if (members.empty()) {
    return absl::InvalidArgumentError("cannot score an empty group");
  }
  for (TokenId id : members) {
    if (id >= table.size()) {
      return absl::OutOfRangeError(internal::StrCat("token id out of range: ", id));
    }
  }
  if (auto s = CheckCosineNorms(table, measure, members); !s.ok()) return s;
  return ScoreMembers(members, table, measure);
}

absl::StatusOr<MappingTable> MappingTable::Create(
    Vocabulary vocab, std::vector<Group> groups, size_t k,
    SimilarityMeasure measure, SeedOrder order, uint64_t vocab_hash) {
  if (k == 0) return absl::InvalidArgumentError("K must be at least 1");
  MappingTable m;
  m.token_to_group_.assign(vocab.size(), kUnassigned);
  m.token_to_position_.assign(vocab.size(), kUnassigned);
  size_t short_groups = 0;
  const double lo = measure.polarity() == Polarity::kNegative ? -1.0 : 0.0;
  const double hi = measure.polarity() == Polarity::kNegative ? 0.0 : 1.0;
  for (size_t g = 0; g < groups.size(); ++g) {
    const Group& group = groups[g];
    if (group.members.empty()) {
      return absl::InvalidArgumentError(internal::StrCat("group ", g, " is empty"));
    }
    if (group.size() > k) {
      return absl::InvalidArgumentError(internal::StrCat(
          "group ", g, " has ", group.size(), " members, more than K=", k));
    }
    if (group.size() < k) ++short_groups;
    if (group.scores.size() != group.size() * group.size()) {
      return absl::InvalidArgumentError(
          internal::StrCat("group ", g, " score matrix has wrong size"));
    }
    for (double u : group.scores) {
      if (!(u >= lo && u <= hi)) {
        return absl::InvalidArgumentError(internal::StrCat(
            "group ", g, " has score ", u, " outside [", lo, ", ", hi, "]"));
      }
    }
    for (size_t i = 0; i < group.size(); ++i) {
      const TokenId id = group.members[i];
      if (id >= vocab.size()) {
        return absl::InvalidArgumentError(
            internal::StrCat("group ", g, " references unknown token id ", id));
      }
      if (m.token_to_group_[id] != kUnassigned) {
        return absl::InvalidArgumentError(internal::StrCat(
            "token '", vocab.surface(id), "' appears in more than one group"));
      }
      m.token_to_group_[id] = static_cast<uint32_t>(g);
      m.token_to_position_[id] = static_cast<uint32_t>(i);
    }
  }
  for (TokenId id = 0; id < vocab.size(); ++id) {
    if (m.token_to_group_[id] == kUnassigned) {
      return absl::InvalidArgumentError(
          internal::StrCat("token '", vocab.surface(id), "' is in no group"));
    }
  }
  if (short_groups > 1) {
    return absl::InvalidArgumentError(
        internal::StrCat(short_groups, " groups are smaller than K=", k));
  }
  m.vocab_ = std::move(vocab);
  m.groups_ = std::move(groups);
  m.k_ = k;
  m.measure_ = measure;
  m.order_ = order;
  m.vocab_hash_ = vocab_hash;
  return m;
}

GroupRow MappingTable::Lookup(TokenId id) const {
  const size_t g = token_to_group_[id];
  const size_t pos = token_to_position_[id];
  return {g, &groups_[g], pos, groups_[g].row(pos)};
}

std::optional<GroupRow> MappingTable::Lookup(std::string_view surface) const {
  std::optional<TokenId> id = vocab_.Find(surface);
  if (!id) return std::nullopt;
  return Lookup(*id);
}

absl::StatusOr<MappingTable> GenerateMapping(const EmbeddingTable& table,
                                             const MappingOptions& options) {
  const size_t vocab_size = table.size();
  if (options.k == 0) return absl::InvalidArgumentError("K must be at least 1");
  if (vocab_size == 0) return absl::InvalidArgumentError("vocabulary is empty");

  std::vector<TokenId> all(vocab_size);
  std::iota(all.begin(), all.end(), TokenId{0});
  if (auto s = CheckCosineNorms(table, options.measure, all); !s.ok()) return s;

  std::vector<TokenId> seeds = all;
  if (options.order == SeedOrder::kFrequencyOrder) {
    if (options.frequencies.size() != vocab_size) {
      return absl::InvalidArgumentError(internal::StrCat(
          "frequency order needs ", vocab_size, " counts, got ",
          options.frequencies.size()));
    }
    const auto& freq = options.frequencies;
    std::stable_sort(seeds.begin(), seeds.end(), [&](TokenId a, TokenId b) {
      return freq[a] > freq[b];
    });
  }

  std::vector<std::string> warnings;
  if (options.k > vocab_size) {
    warnings.push_back(internal::StrCat("K=", options.k, " exceeds vocabulary size ",
                                    vocab_size,
                                    "; the whole vocabulary forms one group"));
  }
  if (options.k == 1) {
    warnings.push_back(
        "K=1: every token is its own group; no token has an adjacent input, "
        "so the output carries NO differential-privacy protection");
  }

  std::vector<TokenId> pool = all;
  std::vector<char> mapped(vocab_size, 0);
  std::vector<Group> groups;
  groups.reserve(vocab_size / options.k + 1);
  size_t cursor = 0;
  while (!pool.empty()) {
    while (mapped[seeds[cursor]]) ++cursor;
    const TokenId seed = seeds[cursor];
    const size_t want = std::min(options.k, pool.size()) - 1;
    std::vector<kernels::Candidate> nearest =
        options.parallel
            ? kernels::NearestParallel(table, options.measure, seed, pool, want)
            : kernels::NearestSerial(table, options.measure, seed, pool, want);
    Group group;
    group.members.reserve(want + 1);
    group.members.push_back(seed);
    for (const auto& c : nearest) group.members.push_back(c.id);
    for (TokenId id : group.members) mapped[id] = 1;
    std::erase_if(pool, [&](TokenId id) { return mapped[id] != 0; });
    groups.push_back(std::move(group));
  }

  const std::ptrdiff_t group_count = static_cast<std::ptrdiff_t>(groups.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t g = 0; g < group_count; ++g) {
    GroupScores s = ScoreMembers(groups[g].members, table, options.measure);
    groups[g].scores = std::move(s.scores);
    groups[g].d_min = s.d_min;
    groups[g].d_max = s.d_max;
  }

  auto mapping = MappingTable::Create(table.vocab(), std::move(groups),
                                      options.k, options.measure, options.order,
                                      table.Hash());
  if (!mapping.ok()) return mapping.status();
  for (auto& w : warnings) mapping->add_warning(std::move(w));
  return mapping;
}

absl::StatusOr<std::vector<uint64_t>> LoadFrequencies(
    const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(
        internal::StrCat("cannot open frequency file ", path.string()));
  }
  std::vector<uint64_t> counts(vocab.size(), 0);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t sep = line.find_first_of(" \t");
    if (sep == std::string::npos) {
      return absl::InvalidArgumentError(internal::StrCat(
          path.string(), ": line ", line_no, ": expected 'surface count'"));
    }
    std::string_view surface(line.data(), sep);
    std::string_view rest(line.data() + sep + 1, line.size() - sep - 1);
    while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) {
      rest.remove_prefix(1);
    }
    uint64_t count = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), count);
    if (ec != std::errc() || ptr != rest.data() + rest.size()) {
      return absl::InvalidArgumentError(internal::StrCat(
          path.string(), ": line ", line_no, ": bad count '", rest, "'"));
    }
    if (auto id = vocab.Find(surface)) counts[*id] = count;
  }
  return counts;
}

}  // namespace dptext
