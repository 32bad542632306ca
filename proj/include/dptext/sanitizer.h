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

// Document sanitization.
//
// Each token at position (record i, token j) is handled in this order:
//   1. custext_plus and the token is a stopword  -> copied unchanged
//   2. the token is in the vocabulary             -> replaced by a sample
//      (exponential mechanism over its group, or the MLDP baseline)
//   3. OOV numeric token                          -> digits randomized or
//                                                    retained per policy
//   4. any other OOV token                        -> copied unchanged
// All randomness for a position comes from RandomStream(seed).At(i, j), so
// output is independent of thread count.

#ifndef DPTEXT_SANITIZER_H_
#define DPTEXT_SANITIZER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/container/flat_hash_set.h"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dptext/mapping.h"
#include "dptext/random.h"
#include "dptext/vocab.h"

namespace dptext {

struct TokenSpan {
  std::string surface;
  // Byte range in the source line.
  size_t begin = 0;
  size_t end = 0;
};

using Record = std::vector<TokenSpan>;

struct Document {
  std::vector<Record> records;
};

enum class Mode : uint8_t { kCusText, kCusTextPlus, kBaseline };
enum class NumberPolicy : uint8_t { kRandomizeDigits, kRetain };

absl::StatusOr<Mode> ModeFromName(std::string_view name);
std::string_view ModeName(Mode mode);
absl::StatusOr<NumberPolicy> NumberPolicyFromName(std::string_view name);
std::string_view NumberPolicyName(NumberPolicy policy);

using StopwordSet = absl::flat_hash_set<std::string>;

struct SanitizeConfig {
  double epsilon = 2.0;
  size_t k = 20;
  SimilarityMeasure measure = SimilarityMeasure::Euclidean();
  Mode mode = Mode::kCusText;
  StopwordSet stopwords;
  uint64_t seed = 0;
  NumberPolicy number_policy = NumberPolicy::kRandomizeDigits;
  bool lowercase = true;
  // Baseline only. Unset means eps' = epsilon / d_max.
  std::optional<double> baseline_epsilon_prime;

  absl::Status Validate() const;
};

struct SanitizeCounts {
  size_t records = 0;
  size_t tokens = 0;
  size_t replaced = 0;
  size_t stopword_passthrough = 0;
  size_t oov_retained = 0;
  size_t numeric_randomized = 0;
  size_t numeric_retained = 0;

  SanitizeCounts& operator+=(const SanitizeCounts& o);
  friend bool operator==(const SanitizeCounts&, const SanitizeCounts&) = default;
};

struct SanitizeResult {
  Document document;
  SanitizeCounts counts;
  // eps' actually used in baseline mode, 0 otherwise.
  double baseline_epsilon_prime = 0.0;
};

// Whitespace split, then every leading and trailing ASCII punctuation byte
// becomes its own token. Lowercasing is ASCII-only.
Record Tokenize(std::string_view line, bool lowercase);

// Surfaces joined with single spaces.
std::string JoinRecord(const Record& record);

// At least one ASCII digit; otherwise only digits and . , : / - +
bool IsNumericSurface(std::string_view surface);

// Replaces every ASCII digit with a uniform digit drawn from `stream`.
std::string RandomizeDigits(std::string_view surface, Substream& stream);

absl::StatusOr<StopwordSet> LoadStopwords(const std::filesystem::path& path,
                                          bool lowercase);

// Fails before producing output when the mapping's K or measure differ from
// the config, or when `table` is given and its hash differs from the
// mapping's. Baseline mode requires `table`. Records are numbered from
// `first_record` for substream derivation.
absl::StatusOr<SanitizeResult> SanitizeDocument(
    const Document& doc, const MappingTable& mapping,
    const SanitizeConfig& config, const EmbeddingTable* table = nullptr,
    uint64_t first_record = 0);

struct CorpusOptions {
  // Sanitize only this 0-based tab-separated column; others copied verbatim.
  std::optional<size_t> tsv_column;
  // Copy the first line verbatim (TSV header).
  bool has_header = false;
};

// Line-for-line sanitization of a plain-text or TSV file.
absl::StatusOr<SanitizeCounts> SanitizeCorpus(
    const std::filesystem::path& input, const std::filesystem::path& output,
    const MappingTable& mapping, const SanitizeConfig& config,
    const CorpusOptions& options = {}, const EmbeddingTable* table = nullptr);

// Reads a corpus file into a tokenized Document (same column rules as
// SanitizeCorpus).
absl::StatusOr<Document> ReadDocument(const std::filesystem::path& path,
                                      bool lowercase,
                                      const CorpusOptions& options = {});

}  // namespace dptext

#endif  // DPTEXT_SANITIZER_H_
