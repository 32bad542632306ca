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

#include "dptext/kernels.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dptext/sampler.h"

namespace dptext::kernels {
namespace {

constexpr size_t kBlock = 4096;
// Below this pool size the thread fan-out costs more than it saves.
constexpr size_t kMinParallelPool = 8192;

void KeepClosest(std::vector<Candidate>& best, size_t k) {
  if (best.size() <= k) return;
  std::nth_element(best.begin(), best.begin() + k, best.end(), Closer);
  best.resize(k);
}

void ScanInto(std::vector<Candidate>& best, const EmbeddingTable& table,
              SimilarityMeasure measure, TokenId seed,
              std::span<const TokenId> pool, size_t k) {
  for (size_t start = 0; start < pool.size(); start += kBlock) {
    const size_t end = std::min(pool.size(), start + kBlock);
    for (size_t i = start; i < end; ++i) {
      if (pool[i] == seed) continue;
      best.push_back({ClosenessKey(table, measure, seed, pool[i]), pool[i]});
    }
    KeepClosest(best, k);
  }
}

bool UniqueMaxAt(std::span<const uint32_t> counts, size_t self) {
  const uint32_t c = counts[self];
  for (size_t i = 0; i < counts.size(); ++i) {
    if (i != self && counts[i] >= c) return false;
  }
  return true;
}

bool RunQueryTrial(std::span<const double> cdf, size_t self, size_t n,
                   Substream s, std::vector<uint32_t>& counts) {
  std::fill(counts.begin(), counts.end(), 0);
  for (size_t q = 0; q < n; ++q) ++counts[InverseCdf(cdf, s.NextUniform())];
  return UniqueMaxAt(counts, self);
}

}  // namespace

double ClosenessKey(const EmbeddingTable& table, SimilarityMeasure measure,
                    TokenId a, TokenId b) {
  if (measure.kind() == MeasureKind::kEuclidean) {
    return EuclideanDistance(table.vector(a), table.vector(b));
  }
  return -CosineSimilarity(table.vector(a), table.norm(a), table.vector(b),
                           table.norm(b));
}

std::vector<Candidate> NearestSerial(const EmbeddingTable& table,
                                     SimilarityMeasure measure, TokenId seed,
                                     std::span<const TokenId> pool, size_t k) {
  std::vector<Candidate> best;
  if (k == 0) return best;
  best.reserve(k + kBlock);
  ScanInto(best, table, measure, seed, pool, k);
  std::sort(best.begin(), best.end(), Closer);
  return best;
}

std::vector<Candidate> NearestParallel(const EmbeddingTable& table,
                                       SimilarityMeasure measure, TokenId seed,
                                       std::span<const TokenId> pool,
                                       size_t k) {
  if (k == 0) return {};
  const int threads = omp_get_max_threads();
  if (threads <= 1 || pool.size() < kMinParallelPool) {
    return NearestSerial(table, measure, seed, pool, k);
  }
  std::vector<std::vector<Candidate>> partial(threads);
#pragma omp parallel num_threads(threads)
  {
    const int t = omp_get_thread_num();
    const int nt = omp_get_num_threads();
    const size_t chunk = (pool.size() + nt - 1) / nt;
    const size_t begin = std::min(pool.size(), chunk * t);
    const size_t end = std::min(pool.size(), begin + chunk);
    std::vector<Candidate>& best = partial[t];
    best.reserve(k + kBlock);
    ScanInto(best, table, measure, seed, pool.subspan(begin, end - begin), k);
  }
  std::vector<Candidate> merged;
  merged.reserve(k * threads);
  for (const auto& p : partial) merged.insert(merged.end(), p.begin(), p.end());
  KeepClosest(merged, k);
  std::sort(merged.begin(), merged.end(), Closer);
  return merged;
}

GroupRatio WorstGroupRatio(const Group& group, double epsilon) {
  const size_t n = group.size();
  GroupRatio worst;
  if (n < 2) return worst;
  // log Pr[y | x] for every member pair.
  std::vector<double> log_p(n * n);
  for (size_t x = 0; x < n; ++x) {
    std::vector<double> row = EmLogProbabilities(group.row(x), epsilon);
    std::copy(row.begin(), row.end(), log_p.begin() + x * n);
  }
  double worst_log = 0.0;
  for (size_t y = 0; y < n; ++y) {
    size_t hi = 0, lo = 0;
    for (size_t x = 1; x < n; ++x) {
      if (log_p[x * n + y] > log_p[hi * n + y]) hi = x;
      if (log_p[x * n + y] < log_p[lo * n + y]) lo = x;
    }
    const double gap = log_p[hi * n + y] - log_p[lo * n + y];
    if (gap > worst_log) {
      worst_log = gap;
      worst = {0.0, hi, lo, y};
    }
  }
  worst.ratio = std::exp(worst_log);
  return worst;
}

std::vector<GroupRatio> WorstRatiosSerial(std::span<const Group> groups,
                                          double epsilon) {
  std::vector<GroupRatio> out(groups.size());
  for (size_t g = 0; g < groups.size(); ++g) {
    out[g] = WorstGroupRatio(groups[g], epsilon);
  }
  return out;
}

std::vector<GroupRatio> WorstRatiosParallel(std::span<const Group> groups,
                                            double epsilon) {
  std::vector<GroupRatio> out(groups.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(groups.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t g = 0; g < n; ++g) {
    out[g] = WorstGroupRatio(groups[g], epsilon);
  }
  return out;
}

size_t InverseCdf(std::span<const double> cdf, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) return cdf.size() - 1;
  return static_cast<size_t>(it - cdf.begin());
}

size_t QuerySuccessesSerial(std::span<const double> cdf, size_t self, size_t n,
                            size_t trials, const RandomStream& stream,
                            uint64_t stream_key) {
  std::vector<uint32_t> counts(cdf.size());
  size_t successes = 0;
  for (size_t t = 0; t < trials; ++t) {
    Substream s = stream.At(stream_key, t, StreamDomain::kQueryAttack);
    if (RunQueryTrial(cdf, self, n, s, counts)) ++successes;
  }
  return successes;
}

size_t QuerySuccessesParallel(std::span<const double> cdf, size_t self,
                              size_t n, size_t trials,
                              const RandomStream& stream, uint64_t stream_key) {
  size_t successes = 0;
  const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel reduction(+ : successes)
  {
    std::vector<uint32_t> counts(cdf.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t t = 0; t < total; ++t) {
      Substream s = stream.At(stream_key, t, StreamDomain::kQueryAttack);
      if (RunQueryTrial(cdf, self, n, s, counts)) ++successes;
    }
  }
  return successes;
}

double MaxPairwiseDistanceSerial(const EmbeddingTable& table) {
  double best = 0.0;
  for (TokenId i = 0; i < table.size(); ++i) {
    for (TokenId j = i + 1; j < table.size(); ++j) {
      best = std::max(best, EuclideanDistance(table.vector(i), table.vector(j)));
    }
  }
  return best;
}

double MaxPairwiseDistanceParallel(const EmbeddingTable& table) {
  double best = 0.0;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(table.size());
#pragma omp parallel for schedule(dynamic, 8) reduction(max : best)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = i + 1; j < n; ++j) {
      best = std::max(best, EuclideanDistance(table.vector(i), table.vector(j)));
    }
  }
  return best;
}

}  // namespace dptext::kernels
