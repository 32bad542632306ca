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

// Exponential-mechanism sampling.
//
// For input x with score row u(x, .) over its group, output y is drawn with
//
//   Pr[y | x] = exp(eps * u(x, y) / (2 * du)) / sum_y' exp(eps * u(x, y') / (2 * du))
//
// with the sensitivity du fixed at 1. Scores are normalized to a unit range,
// so any two adjacent inputs change a score by at most 1 and the ratio
// Pr[y | x] / Pr[y | x'] is bounded by e^eps. DpRatioCheck measures that
// ratio exactly.
//
// The MLDP baseline samples from the whole vocabulary with
// Pr[y | x] proportional to exp(-eps' * d(x, y) / 2); it is eps'-MLDP and
// therefore (eps' * d_max)-DP.

#ifndef DPTEXT_SAMPLER_H_
#define DPTEXT_SAMPLER_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dptext/mapping.h"
#include "dptext/random.h"
#include "dptext/vocab.h"

namespace dptext {

class SamplerParams {
 public:
  static constexpr double kSensitivity = 1.0;

  // epsilon must be positive and finite.
  static absl::StatusOr<SamplerParams> Create(double epsilon);

  double epsilon() const { return epsilon_; }
  double delta_u() const { return kSensitivity; }

 private:
  explicit SamplerParams(double epsilon) : epsilon_(epsilon) {}
  double epsilon_;
};

// log Pr[y | x] for each entry of the score row, via max-subtraction.
std::vector<double> EmLogProbabilities(std::span<const double> scores,
                                       double epsilon);

std::vector<double> EmProbabilities(std::span<const double> scores,
                                    const SamplerParams& params);

// Running sum of `probabilities`, with every entry from the last positive
// probability onward pinned to exactly 1.
std::vector<double> CumulativeDistribution(std::span<const double> probabilities);

// Inverse-CDF draw of one index.
size_t SampleIndex(std::span<const double> cdf, Substream& stream);

// One exponential-mechanism draw for token x from its group.
TokenId EmSample(const MappingTable& mapping, TokenId x,
                 const SamplerParams& params, Substream& stream);

// Precomputed CDFs for every token of a mapping at one epsilon.
class EmSampler {
 public:
  EmSampler(const MappingTable& mapping, const SamplerParams& params);

  TokenId Sample(TokenId x, Substream& stream) const;
  std::span<const double> cdf(TokenId x) const { return cdfs_[x]; }
  const MappingTable& mapping() const { return *mapping_; }

 private:
  const MappingTable* mapping_;
  std::vector<std::vector<double>> cdfs_;
};

// Full-vocabulary Pr[y | x] of the MLDP baseline. Fails for non-metric
// measures.
absl::StatusOr<std::vector<double>> BaselineProbabilities(
    const EmbeddingTable& table, SimilarityMeasure measure, TokenId x,
    double epsilon_prime);

absl::StatusOr<TokenId> BaselineMldpSample(const EmbeddingTable& table,
                                           SimilarityMeasure measure, TokenId x,
                                           double epsilon_prime,
                                           Substream& stream);

// Caches baseline CDFs. Prepare() fills them in parallel; Sample() on an
// unprepared token computes its CDF on the fly (not thread-safe).
class BaselineSampler {
 public:
  static absl::StatusOr<BaselineSampler> Create(const EmbeddingTable& table,
                                                SimilarityMeasure measure,
                                                double epsilon_prime);

  void Prepare(std::span<const TokenId> tokens);
  TokenId Sample(TokenId x, Substream& stream);
  double epsilon_prime() const { return epsilon_prime_; }

 private:
  BaselineSampler(const EmbeddingTable& table, double epsilon_prime)
      : table_(&table), epsilon_prime_(epsilon_prime), cdfs_(table.size()) {}
  void Fill(TokenId x);

  const EmbeddingTable* table_;
  double epsilon_prime_;
  std::vector<std::vector<double>> cdfs_;
};

// Largest euclidean distance over the vocabulary; eps = eps' * d_max aligns
// the baseline with eps-DP.
double MaxPairwiseDistance(const EmbeddingTable& table);

struct RatioRow {
  size_t group = 0;
  TokenId x = 0;        // numerator input
  TokenId x_prime = 0;  // denominator input
  TokenId y = 0;        // output
  double ratio = 1.0;
  double bound = 1.0;
};

struct DpRatioReport {
  std::vector<RatioRow> rows;  // one per group, or one for the baseline
  double worst_ratio = 1.0;
  double epsilon = 0.0;
  double bound = 1.0;  // e^epsilon
  // worst_ratio <= bound * (1 + 1e-9)
  bool ok() const;
};

inline constexpr double kRatioTolerance = 1e-9;

// Exact worst-case Pr[y | x] / Pr[y | x'] over every group, every pair of
// members and every output.
DpRatioReport DpRatioCheck(const MappingTable& mapping,
                           const SamplerParams& params);

// Same check for the MLDP baseline over the whole vocabulary (O(V^3)); the
// bound is e^(eps' * d_max).
absl::StatusOr<DpRatioReport> BaselineDpRatioCheck(const EmbeddingTable& table,
                                                   double epsilon_prime);

// CSV: group,x,x_prime,y,ratio,bound
std::string RatioReportCsv(const DpRatioReport& report, const Vocabulary& vocab);

}  // namespace dptext

#endif  // DPTEXT_SAMPLER_H_
