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

#include "dptext/sampler.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "csv.h"
#include "dptext/kernels.h"

namespace dptext {
namespace {

std::vector<double> Normalize(std::vector<double> log_weights) {
  const double m = *std::max_element(log_weights.begin(), log_weights.end());
  double sum = 0.0;
  for (double& w : log_weights) {
    w = std::exp(w - m);
    sum += w;
  }
  for (double& w : log_weights) w /= sum;
  return log_weights;
}

absl::Status RequireMetric(SimilarityMeasure measure) {
  if (measure.kind() != MeasureKind::kEuclidean) {
    return absl::InvalidArgumentError(
        "MLDP baseline requires a metric distance");
  }
  return absl::OkStatus();
}

std::vector<double> BaselineLogWeights(const EmbeddingTable& table, TokenId x,
                                       double epsilon_prime) {
  std::vector<double> w(table.size());
  for (TokenId y = 0; y < table.size(); ++y) {
    const double d =
        x == y ? 0.0 : EuclideanDistance(table.vector(x), table.vector(y));
    w[y] = -epsilon_prime * d / 2.0;
  }
  return w;
}

}  // namespace

absl::StatusOr<SamplerParams> SamplerParams::Create(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive and finite, got ", epsilon));
  }
  return SamplerParams(epsilon);
}

std::vector<double> EmLogProbabilities(std::span<const double> scores,
                                       double epsilon) {
  const double scale = epsilon / (2.0 * SamplerParams::kSensitivity);
  std::vector<double> a(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) a[i] = scale * scores[i];
  const double m = *std::max_element(a.begin(), a.end());
  double sum = 0.0;
  for (double v : a) sum += std::exp(v - m);
  const double log_z = m + std::log(sum);
  for (double& v : a) v -= log_z;
  return a;
}

std::vector<double> EmProbabilities(std::span<const double> scores,
                                    const SamplerParams& params) {
  const double scale = params.epsilon() / (2.0 * params.delta_u());
  std::vector<double> a(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) a[i] = scale * scores[i];
  return Normalize(std::move(a));
}

std::vector<double> CumulativeDistribution(
    std::span<const double> probabilities) {
  std::vector<double> cdf(probabilities.size());
  double run = 0.0;
  size_t last_positive = 0;
  for (size_t i = 0; i < probabilities.size(); ++i) {
    run += probabilities[i];
    cdf[i] = run;
    if (probabilities[i] > 0.0) last_positive = i;
  }
  for (size_t i = last_positive; i < cdf.size(); ++i) cdf[i] = 1.0;
  return cdf;
}

size_t SampleIndex(std::span<const double> cdf, Substream& stream) {
  return kernels::InverseCdf(cdf, stream.NextUniform());
}

TokenId EmSample(const MappingTable& mapping, TokenId x,
                 const SamplerParams& params, Substream& stream) {
  const GroupRow row = mapping.Lookup(x);
  if (row.group->size() == 1) return x;
  const std::vector<double> cdf =
      CumulativeDistribution(EmProbabilities(row.scores, params));
  return row.group->members[SampleIndex(cdf, stream)];
}

EmSampler::EmSampler(const MappingTable& mapping, const SamplerParams& params)
    : mapping_(&mapping), cdfs_(mapping.vocab().size()) {
  for (const Group& g : mapping.groups()) {
    for (size_t i = 0; i < g.size(); ++i) {
      cdfs_[g.members[i]] =
          CumulativeDistribution(EmProbabilities(g.row(i), params));
    }
  }
}

TokenId EmSampler::Sample(TokenId x, Substream& stream) const {
  const GroupRow row = mapping_->Lookup(x);
  if (row.group->size() == 1) return x;
  return row.group->members[SampleIndex(cdfs_[x], stream)];
}

absl::StatusOr<std::vector<double>> BaselineProbabilities(
    const EmbeddingTable& table, SimilarityMeasure measure, TokenId x,
    double epsilon_prime) {
  if (auto s = RequireMetric(measure); !s.ok()) return s;
  if (x >= table.size()) {
    return absl::OutOfRangeError(absl::StrCat("token id out of range: ", x));
  }
  if (!(epsilon_prime > 0.0) || !std::isfinite(epsilon_prime)) {
    return absl::InvalidArgumentError("epsilon' must be positive and finite");
  }
  return Normalize(BaselineLogWeights(table, x, epsilon_prime));
}

absl::StatusOr<TokenId> BaselineMldpSample(const EmbeddingTable& table,
                                           SimilarityMeasure measure, TokenId x,
                                           double epsilon_prime,
                                           Substream& stream) {
  auto p = BaselineProbabilities(table, measure, x, epsilon_prime);
  if (!p.ok()) return p.status();
  return static_cast<TokenId>(SampleIndex(CumulativeDistribution(*p), stream));
}

absl::StatusOr<BaselineSampler> BaselineSampler::Create(
    const EmbeddingTable& table, SimilarityMeasure measure,
    double epsilon_prime) {
  if (auto s = RequireMetric(measure); !s.ok()) return s;
  if (!(epsilon_prime > 0.0) || !std::isfinite(epsilon_prime)) {
    return absl::InvalidArgumentError("epsilon' must be positive and finite");
  }
  return BaselineSampler(table, epsilon_prime);
}

void BaselineSampler::Fill(TokenId x) {
  cdfs_[x] = CumulativeDistribution(
      Normalize(BaselineLogWeights(*table_, x, epsilon_prime_)));
}

void BaselineSampler::Prepare(std::span<const TokenId> tokens) {
  std::vector<TokenId> todo;
  for (TokenId x : tokens) {
    if (cdfs_[x].empty()) todo.push_back(x);
  }
  std::sort(todo.begin(), todo.end());
  todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(todo.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) Fill(todo[i]);
}

TokenId BaselineSampler::Sample(TokenId x, Substream& stream) {
  if (cdfs_[x].empty()) Fill(x);
  return static_cast<TokenId>(SampleIndex(cdfs_[x], stream));
}

double MaxPairwiseDistance(const EmbeddingTable& table) {
  return kernels::MaxPairwiseDistanceParallel(table);
}

bool DpRatioReport::ok() const {
  return worst_ratio <= bound * (1.0 + kRatioTolerance);
}

DpRatioReport DpRatioCheck(const MappingTable& mapping,
                           const SamplerParams& params) {
  DpRatioReport report;
  report.epsilon = params.epsilon();
  report.bound = std::exp(params.epsilon());
  const auto& groups = mapping.groups();
  std::vector<kernels::GroupRatio> ratios =
      kernels::WorstRatiosParallel(groups, params.epsilon());
  report.rows.reserve(groups.size());
  for (size_t g = 0; g < groups.size(); ++g) {
    const kernels::GroupRatio& r = ratios[g];
    const auto& m = groups[g].members;
    report.rows.push_back(
        {g, m[r.x], m[r.x_prime], m[r.y], r.ratio, report.bound});
    report.worst_ratio = std::max(report.worst_ratio, r.ratio);
  }
  return report;
}

absl::StatusOr<DpRatioReport> BaselineDpRatioCheck(const EmbeddingTable& table,
                                                   double epsilon_prime) {
  if (!(epsilon_prime > 0.0) || !std::isfinite(epsilon_prime)) {
    return absl::InvalidArgumentError("epsilon' must be positive and finite");
  }
  const size_t n = table.size();
  std::vector<double> log_p(n * n);
  for (TokenId x = 0; x < n; ++x) {
    std::vector<double> w = BaselineLogWeights(table, x, epsilon_prime);
    const double m = *std::max_element(w.begin(), w.end());
    double sum = 0.0;
    for (double v : w) sum += std::exp(v - m);
    const double log_z = m + std::log(sum);
    for (TokenId y = 0; y < n; ++y) log_p[x * n + y] = w[y] - log_z;
  }
  DpRatioReport report;
  report.epsilon = epsilon_prime * MaxPairwiseDistance(table);
  report.bound = std::exp(report.epsilon);
  RatioRow worst{0, 0, 0, 0, 1.0, report.bound};
  double worst_log = 0.0;
  for (TokenId y = 0; y < n; ++y) {
    TokenId hi = 0, lo = 0;
    for (TokenId x = 1; x < n; ++x) {
      if (log_p[x * n + y] > log_p[hi * n + y]) hi = x;
      if (log_p[x * n + y] < log_p[lo * n + y]) lo = x;
    }
    const double gap = log_p[hi * n + y] - log_p[lo * n + y];
    if (gap > worst_log) {
      worst_log = gap;
      worst.x = hi;
      worst.x_prime = lo;
      worst.y = y;
    }
  }
  worst.ratio = std::exp(worst_log);
  report.worst_ratio = worst.ratio;
  report.rows.push_back(worst);
  return report;
}

std::string RatioReportCsv(const DpRatioReport& report,
                           const Vocabulary& vocab) {
  std::string out = "group,x,x_prime,y,ratio,bound\n";
  for (const RatioRow& r : report.rows) {
    absl::StrAppendFormat(&out, "%d,%s,%s,%s,%.17g,%.17g\n", r.group,
                          internal::CsvField(vocab.surface(r.x)),
                          internal::CsvField(vocab.surface(r.x_prime)),
                          internal::CsvField(vocab.surface(r.y)), r.ratio,
                          r.bound);
  }
  return out;
}

}  // namespace dptext
