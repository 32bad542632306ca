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

// Straightforward reference computations used to check the library.

#ifndef DPTEXT_TESTS_ORACLES_H_
#define DPTEXT_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "dptext/vocab.h"

namespace dptext::testing {

// Greedy partition from a full pairwise key matrix; candidates ranked by a
// stable sort on the key, so equal keys keep id order.
inline std::vector<std::vector<TokenId>> BruteForceGroups(
    const EmbeddingTable& table, SimilarityMeasure measure, size_t k,
    const std::vector<TokenId>& seed_order) {
  const size_t n = table.size();
  std::vector<double> key(n * n);
  for (TokenId i = 0; i < n; ++i) {
    for (TokenId j = 0; j < n; ++j) {
      auto a = table.vector(i), b = table.vector(j);
      double dot = 0, sq = 0;
      for (size_t d = 0; d < a.size(); ++d) {
        double diff = double(a[d]) - double(b[d]);
        sq += diff * diff;
        dot += double(a[d]) * double(b[d]);
      }
      key[i * n + j] =
          measure.kind() == MeasureKind::kEuclidean
              ? std::sqrt(sq)
              : -std::clamp(dot / (table.norm(i) * table.norm(j)), -1.0, 1.0);
    }
  }
  std::vector<bool> mapped(n, false);
  std::vector<std::vector<TokenId>> groups;
  for (TokenId seed : seed_order) {
    if (mapped[seed]) continue;
    std::vector<TokenId> rest;
    for (TokenId t = 0; t < n; ++t) {
      if (!mapped[t] && t != seed) rest.push_back(t);
    }
    std::stable_sort(rest.begin(), rest.end(), [&](TokenId a, TokenId b) {
      return key[seed * n + a] < key[seed * n + b];
    });
    std::vector<TokenId> group = {seed};
    for (size_t i = 0; i < rest.size() && group.size() < k; ++i) {
      group.push_back(rest[i]);
    }
    for (TokenId t : group) mapped[t] = true;
    groups.push_back(group);
  }
  return groups;
}

inline std::vector<TokenId> Iota(size_t n) {
  std::vector<TokenId> v(n);
  std::iota(v.begin(), v.end(), TokenId{0});
  return v;
}

// exp(eps * u / 2) / sum, evaluated directly.
inline std::vector<double> NaiveEm(std::span<const double> scores, double eps) {
  std::vector<double> w;
  for (double u : scores) w.push_back(std::exp(eps * u / 2.0));
  const double z = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= z;
  return w;
}

inline double TotalVariation(const std::vector<double>& p,
                             const std::vector<double>& q) {
  double tv = 0.0;
  for (size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return tv / 2.0;
}

}  // namespace dptext::testing

#endif  // DPTEXT_TESTS_ORACLES_H_
