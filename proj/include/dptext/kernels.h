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

// Data-parallel inner loops.
//
// Each kernel comes as a serial reference and an OpenMP version. The two
// must return identical results for any thread count; the tests compare
// them directly and bench/kernels_bench.cc times them.

#ifndef DPTEXT_KERNELS_H_
#define DPTEXT_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dptext/mapping.h"
#include "dptext/random.h"
#include "dptext/vocab.h"

namespace dptext::kernels {

// Smaller key means closer: the euclidean distance, or the negated cosine
// similarity.
struct Candidate {
  double key;
  TokenId id;
};

// Total order used for nearest-neighbor selection: (key, id) ascending.
inline bool Closer(const Candidate& a, const Candidate& b) {
  return a.key < b.key || (a.key == b.key && a.id < b.id);
}

// Cosine requires nonzero norms; callers check that up front.
double ClosenessKey(const EmbeddingTable& table, SimilarityMeasure measure,
                    TokenId a, TokenId b);

// The k closest members of `pool` to `seed` (seed itself excluded), sorted
// by Closer. Keys are computed in fixed-size blocks and reduced with a
// partial selection.
std::vector<Candidate> NearestSerial(const EmbeddingTable& table,
                                     SimilarityMeasure measure, TokenId seed,
                                     std::span<const TokenId> pool, size_t k);
std::vector<Candidate> NearestParallel(const EmbeddingTable& table,
                                       SimilarityMeasure measure, TokenId seed,
                                       std::span<const TokenId> pool, size_t k);

// Worst Pr[y | x] / Pr[y | x'] within one group. Indices are positions in
// the group, not token ids.
struct GroupRatio {
  double ratio = 1.0;
  size_t x = 0;
  size_t x_prime = 0;
  size_t y = 0;
};

GroupRatio WorstGroupRatio(const Group& group, double epsilon);
std::vector<GroupRatio> WorstRatiosSerial(std::span<const Group> groups,
                                          double epsilon);
std::vector<GroupRatio> WorstRatiosParallel(std::span<const Group> groups,
                                            double epsilon);

// First index i with u < cdf[i]; cdf must end at 1.
size_t InverseCdf(std::span<const double> cdf, double u);

// Simulates `trials` query attacks of n queries each against one input whose
// output distribution has cumulative form `cdf`. A trial succeeds when the
// input's index `self` is the unique most frequent output. Trial t draws the
// first n values of substream stream.At(stream_key, t, kQueryAttack), so
// calls with growing n reuse the same trial prefixes.
size_t QuerySuccessesSerial(std::span<const double> cdf, size_t self, size_t n,
                            size_t trials, const RandomStream& stream,
                            uint64_t stream_key);
size_t QuerySuccessesParallel(std::span<const double> cdf, size_t self,
                              size_t n, size_t trials,
                              const RandomStream& stream, uint64_t stream_key);

// max over all pairs of the euclidean distance.
double MaxPairwiseDistanceSerial(const EmbeddingTable& table);
double MaxPairwiseDistanceParallel(const EmbeddingTable& table);

}  // namespace dptext::kernels

#endif  // DPTEXT_KERNELS_H_
