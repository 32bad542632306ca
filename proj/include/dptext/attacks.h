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

// Empirical privacy and utility measurements.
//
// Query attack: the adversary requests n independent sanitizations of the
// same token and guesses the unique most frequent output (a tie is a
// failure). N is the smallest n whose success probability reaches the
// confidence level. Repeated releases are not charged extra privacy budget;
// every query re-runs the mechanism on the original input.
//
// Inversion attack: a stand-in for masked-LM inference. The adversary knows
// the mapping and epsilon and maps each observed output y to the member x of
// y's group maximizing Pr[y | x] (uniform prior, ties to the smallest id).

#ifndef DPTEXT_ATTACKS_H_
#define DPTEXT_ATTACKS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dptext/mapping.h"
#include "dptext/sampler.h"
#include "dptext/sanitizer.h"
#include "dptext/vocab.h"

namespace dptext {

struct QueryAttackOptions {
  size_t trials = 1000;
  double confidence = 0.95;
  uint64_t seed = 0;
  // Search stops here; the result is then flagged `capped`.
  size_t max_queries = size_t{1} << 22;
  bool parallel = true;
};

struct QueryAttackResult {
  TokenId token = 0;
  size_t n = 1;  // smallest query count reaching the confidence
  size_t trials = 0;
  double epsilon = 0.0;
  double success_estimate = 1.0;  // estimated success probability at n
  bool no_protection = false;     // singleton group
  bool capped = false;
};

// Doubling then bisection over odd n (ties make even n weaker than n - 1),
// followed by a check of n - 1.
absl::StatusOr<QueryAttackResult> QueryAttack(const MappingTable& mapping,
                                              TokenId x,
                                              const SamplerParams& params,
                                              const QueryAttackOptions& options);

struct InversionAttackResult {
  double success_rate = 0.0;
  size_t tokens_evaluated = 0;
  double privacy_level() const { return 1.0 - success_rate; }
};

struct Observation {
  TokenId truth;
  TokenId observed;
};

// Maximum-likelihood input for every output token at this epsilon.
std::vector<TokenId> InversionGuesses(const MappingTable& mapping,
                                      const SamplerParams& params);

InversionAttackResult InversionAttack(const MappingTable& mapping,
                                      const SamplerParams& params,
                                      std::span<const Observation> observations);

// Aligns truth and sanitized documents token by token. Positions whose truth
// token is OOV, or a stopword when `stopwords` is given, are skipped.
absl::StatusOr<InversionAttackResult> InversionAttackOnCorpus(
    const MappingTable& mapping, const SamplerParams& params,
    const Document& truth, const Document& sanitized,
    const StopwordSet* stopwords = nullptr);

// Expected success under a uniform prior over the vocabulary:
// (1 / V) * sum over groups, over outputs y, of max_x Pr[y | x].
double AnalyticInversionSuccess(const MappingTable& mapping,
                                const SamplerParams& params);

// Draws `samples_per_token` outputs for every vocabulary token and attacks
// them.
InversionAttackResult SimulateInversionAttack(const MappingTable& mapping,
                                              const SamplerParams& params,
                                              size_t samples_per_token,
                                              uint64_t seed);

struct UtilityMetrics {
  // Over sampler-processed positions (in-vocab and not a passed-through
  // stopword).
  double retention = 1.0;
  double mean_cosine = 1.0;
  size_t sampled_tokens = 0;
  // Fraction of stopword occurrences left unchanged; 1 when none occur.
  double stopword_passthrough = 1.0;
  size_t stopword_tokens = 0;
};

absl::StatusOr<UtilityMetrics> UtilityProxy(const Document& original,
                                            const Document& sanitized,
                                            const EmbeddingTable& table,
                                            const StopwordSet* stopwords = nullptr);

struct SweepOptions {
  std::vector<double> epsilons;
  // Template for every cell; epsilon, k and measure are overwritten.
  SanitizeConfig config;
  // Token for the query attack column; empty leaves the column blank.
  std::string probe;
  QueryAttackOptions query;
};

struct SweepRow {
  double epsilon = 0.0;
  size_t k = 0;
  std::string measure;
  std::string mode;
  size_t tokens = 0;
  UtilityMetrics utility;
  InversionAttackResult inversion;
  double analytic_inversion = 0.0;
  std::optional<QueryAttackResult> query;
};

inline constexpr std::string_view kSweepCsvHeader =
    "epsilon,K,measure,mode,tokens,sampled_tokens,retention,mean_cosine,"
    "stopword_passthrough,inversion_success,privacy_level,"
    "analytic_inversion_success,probe,query_n";

// One row per (mapping, epsilon), mappings outer. Deterministic given the
// config seed.
absl::StatusOr<std::vector<SweepRow>> Sweep(
    const Document& corpus, std::span<const MappingTable* const> mappings,
    const EmbeddingTable& table, const SweepOptions& options);

std::string SweepCsv(std::span<const SweepRow> rows, std::string_view probe);

}  // namespace dptext

#endif  // DPTEXT_ATTACKS_H_
