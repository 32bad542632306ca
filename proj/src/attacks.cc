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

#include "dptext/attacks.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "csv.h"
#include "dptext/kernels.h"
#include "dptext/random.h"
#include "strings.h"

namespace dptext {
namespace {

// Pr[y | x] for one group, row-major by input position.
std::vector<double> GroupProbabilities(const Group& g,
                                       const SamplerParams& params) {
  const size_t n = g.size();
  std::vector<double> p(n * n);
  for (size_t x = 0; x < n; ++x) {
    std::vector<double> row = EmProbabilities(g.row(x), params);
    std::copy(row.begin(), row.end(), p.begin() + x * n);
  }
  return p;
}

}  // namespace

absl::StatusOr<QueryAttackResult> QueryAttack(const MappingTable& mapping,
                                              TokenId x,
                                              const SamplerParams& params,
                                              const QueryAttackOptions& options) {
  if (x >= mapping.vocab().size()) {
    return absl::OutOfRangeError(internal::StrCat("token id out of range: ", x));
  }
  if (options.trials < 100) {
    return absl::InvalidArgumentError(
        internal::StrCat("query attack needs at least 100 trials, got ",
                     options.trials));
  }
  if (!(options.confidence > 0.0 && options.confidence < 1.0)) {
    return absl::InvalidArgumentError("confidence must lie in (0, 1)");
  }
  QueryAttackResult result;
  result.token = x;
  result.trials = options.trials;
  result.epsilon = params.epsilon();

  const GroupRow row = mapping.Lookup(x);
  if (row.group->size() == 1) {
    result.n = 1;
    result.no_protection = true;
    return result;
  }
  const std::vector<double> cdf =
      CumulativeDistribution(EmProbabilities(row.scores, params));
  const RandomStream stream(options.seed);

  std::map<size_t, double> cache;
  auto estimate = [&](size_t n) {
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    const size_t hits =
        options.parallel
            ? kernels::QuerySuccessesParallel(cdf, row.position, n,
                                              options.trials, stream, x)
            : kernels::QuerySuccessesSerial(cdf, row.position, n,
                                            options.trials, stream, x);
    const double p = static_cast<double>(hits) / options.trials;
    cache.emplace(n, p);
    return p;
  };
  auto odd = [](size_t m) { return 2 * m + 1; };
  const double c = options.confidence;

  size_t hi = 0;
  if (estimate(odd(0)) < c) {
    size_t lo = 0;
    hi = 1;
    while (estimate(odd(hi)) < c) {
      lo = hi;
      hi *= 2;
      if (odd(hi) > options.max_queries) {
        result.n = options.max_queries;
        result.capped = true;
        result.success_estimate = estimate(odd(lo));
        return result;
      }
    }
    while (hi - lo > 1) {
      const size_t mid = lo + (hi - lo) / 2;
      if (estimate(odd(mid)) >= c) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  result.n = odd(hi);
  result.success_estimate = estimate(result.n);
  if (result.n > 1 && estimate(result.n - 1) >= c) {
    result.n -= 1;
    result.success_estimate = estimate(result.n);
  }
  return result;
}

std::vector<TokenId> InversionGuesses(const MappingTable& mapping,
                                      const SamplerParams& params) {
  std::vector<TokenId> guess(mapping.vocab().size());
  for (const Group& g : mapping.groups()) {
    const size_t n = g.size();
    const std::vector<double> p = GroupProbabilities(g, params);
    for (size_t y = 0; y < n; ++y) {
      size_t best = 0;
      for (size_t x = 1; x < n; ++x) {
        const double a = p[x * n + y];
        const double b = p[best * n + y];
        if (a > b || (a == b && g.members[x] < g.members[best])) best = x;
      }
      guess[g.members[y]] = g.members[best];
    }
  }
  return guess;
}

InversionAttackResult InversionAttack(const MappingTable& mapping,
                                      const SamplerParams& params,
                                      std::span<const Observation> observations) {
  const std::vector<TokenId> guess = InversionGuesses(mapping, params);
  InversionAttackResult r;
  size_t hits = 0;
  for (const Observation& o : observations) {
    if (guess[o.observed] == o.truth) ++hits;
  }
  r.tokens_evaluated = observations.size();
  r.success_rate = observations.empty()
                       ? 0.0
                       : static_cast<double>(hits) / observations.size();
  return r;
}

absl::StatusOr<InversionAttackResult> InversionAttackOnCorpus(
    const MappingTable& mapping, const SamplerParams& params,
    const Document& truth, const Document& sanitized,
    const StopwordSet* stopwords) {
  if (truth.records.size() != sanitized.records.size()) {
    return absl::InvalidArgumentError(internal::StrCat(
        "corpora are misaligned: ", truth.records.size(), " vs ",
        sanitized.records.size(), " records"));
  }
  const Vocabulary& vocab = mapping.vocab();
  std::vector<Observation> obs;
  for (size_t i = 0; i < truth.records.size(); ++i) {
    const Record& a = truth.records[i];
    const Record& b = sanitized.records[i];
    if (a.size() != b.size()) {
      return absl::InvalidArgumentError(internal::StrCat(
          "corpora are misaligned at record ", i + 1, ": ", a.size(), " vs ",
          b.size(), " tokens"));
    }
    for (size_t j = 0; j < a.size(); ++j) {
      if (stopwords != nullptr && stopwords->contains(a[j].surface)) continue;
      auto t = vocab.Find(a[j].surface);
      auto o = vocab.Find(b[j].surface);
      if (t && o) obs.push_back({*t, *o});
    }
  }
  return InversionAttack(mapping, params, obs);
}

double AnalyticInversionSuccess(const MappingTable& mapping,
                                const SamplerParams& params) {
  double total = 0.0;
  for (const Group& g : mapping.groups()) {
    const size_t n = g.size();
    const std::vector<double> p = GroupProbabilities(g, params);
    for (size_t y = 0; y < n; ++y) {
      double best = 0.0;
      for (size_t x = 0; x < n; ++x) best = std::max(best, p[x * n + y]);
      total += best;
    }
  }
  return total / static_cast<double>(mapping.vocab().size());
}

InversionAttackResult SimulateInversionAttack(const MappingTable& mapping,
                                              const SamplerParams& params,
                                              size_t samples_per_token,
                                              uint64_t seed) {
  const std::vector<TokenId> guess = InversionGuesses(mapping, params);
  const EmSampler sampler(mapping, params);
  const RandomStream stream(seed);
  const std::ptrdiff_t v = static_cast<std::ptrdiff_t>(mapping.vocab().size());
  size_t hits = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : hits)
  for (std::ptrdiff_t x = 0; x < v; ++x) {
    for (size_t s = 0; s < samples_per_token; ++s) {
      Substream sub = stream.At(x, s, StreamDomain::kInversion);
      if (guess[sampler.Sample(static_cast<TokenId>(x), sub)] ==
          static_cast<TokenId>(x)) {
        ++hits;
      }
    }
  }
  InversionAttackResult r;
  r.tokens_evaluated = static_cast<size_t>(v) * samples_per_token;
  r.success_rate = r.tokens_evaluated == 0
                       ? 0.0
                       : static_cast<double>(hits) / r.tokens_evaluated;
  return r;
}

absl::StatusOr<UtilityMetrics> UtilityProxy(const Document& original,
                                            const Document& sanitized,
                                            const EmbeddingTable& table,
                                            const StopwordSet* stopwords) {
  if (original.records.size() != sanitized.records.size()) {
    return absl::InvalidArgumentError(internal::StrCat(
        "corpora are misaligned: ", original.records.size(), " vs ",
        sanitized.records.size(), " records"));
  }
  UtilityMetrics m;
  size_t retained = 0, stop_kept = 0, cosine_count = 0;
  double cosine_sum = 0.0;
  for (size_t i = 0; i < original.records.size(); ++i) {
    const Record& a = original.records[i];
    const Record& b = sanitized.records[i];
    if (a.size() != b.size()) {
      return absl::InvalidArgumentError(internal::StrCat(
          "corpora are misaligned at record ", i + 1, ": ", a.size(), " vs ",
          b.size(), " tokens"));
    }
    for (size_t j = 0; j < a.size(); ++j) {
      const std::string& in = a[j].surface;
      const std::string& out = b[j].surface;
      if (stopwords != nullptr && stopwords->contains(in)) {
        ++m.stopword_tokens;
        if (in == out) ++stop_kept;
        continue;
      }
      auto x = table.Find(in);
      if (!x) continue;
      ++m.sampled_tokens;
      if (in == out) ++retained;
      auto y = table.Find(out);
      if (y && table.norm(*x) > 0.0 && table.norm(*y) > 0.0) {
        cosine_sum += *x == *y ? 1.0
                               : CosineSimilarity(table.vector(*x),
                                                  table.norm(*x),
                                                  table.vector(*y),
                                                  table.norm(*y));
        ++cosine_count;
      }
    }
  }
  if (m.sampled_tokens > 0) {
    m.retention = static_cast<double>(retained) / m.sampled_tokens;
  }
  if (cosine_count > 0) m.mean_cosine = cosine_sum / cosine_count;
  if (m.stopword_tokens > 0) {
    m.stopword_passthrough = static_cast<double>(stop_kept) / m.stopword_tokens;
  }
  return m;
}

absl::StatusOr<std::vector<SweepRow>> Sweep(
    const Document& corpus, std::span<const MappingTable* const> mappings,
    const EmbeddingTable& table, const SweepOptions& options) {
  if (options.config.mode == Mode::kBaseline) {
    return absl::InvalidArgumentError(
        "sweep runs custext or custext_plus; the inversion attack is defined "
        "over mapping groups");
  }
  const StopwordSet* stopwords = options.config.mode == Mode::kCusTextPlus
                                     ? &options.config.stopwords
                                     : nullptr;
  std::vector<SweepRow> rows;
  for (const MappingTable* mapping : mappings) {
    std::optional<TokenId> probe;
    if (!options.probe.empty()) {
      probe = mapping->vocab().Find(options.probe);
      if (!probe) {
        return absl::InvalidArgumentError(
            internal::StrCat("probe token '", options.probe,
                         "' is not in the vocabulary"));
      }
    }
    for (double eps : options.epsilons) {
      SanitizeConfig cfg = options.config;
      cfg.epsilon = eps;
      cfg.k = mapping->k();
      cfg.measure = mapping->measure();
      auto params = SamplerParams::Create(eps);
      if (!params.ok()) return params.status();
      auto sanitized = SanitizeDocument(corpus, *mapping, cfg, &table);
      if (!sanitized.ok()) return sanitized.status();

      SweepRow row;
      row.epsilon = eps;
      row.k = mapping->k();
      row.measure = std::string(mapping->measure().name());
      row.mode = std::string(ModeName(cfg.mode));
      row.tokens = sanitized->counts.tokens;
      auto utility =
          UtilityProxy(corpus, sanitized->document, table, stopwords);
      if (!utility.ok()) return utility.status();
      row.utility = *utility;
      auto inversion = InversionAttackOnCorpus(*mapping, *params, corpus,
                                               sanitized->document, stopwords);
      if (!inversion.ok()) return inversion.status();
      row.inversion = *inversion;
      row.analytic_inversion = AnalyticInversionSuccess(*mapping, *params);
      if (probe) {
        auto q = QueryAttack(*mapping, *probe, *params, options.query);
        if (!q.ok()) return q.status();
        row.query = *q;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string SweepCsv(std::span<const SweepRow> rows, std::string_view probe) {
  std::string out = internal::StrCat(kSweepCsvHeader, "\n");
  for (const SweepRow& r : rows) {
    absl::StrAppendFormat(
        &out, "%.10g,%d,%s,%s,%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%s,",
        r.epsilon, r.k, r.measure, r.mode, r.tokens, r.utility.sampled_tokens,
        r.utility.retention, r.utility.mean_cosine,
        r.utility.stopword_passthrough, r.inversion.success_rate,
        r.inversion.privacy_level(), r.analytic_inversion,
        r.query ? internal::CsvField(probe) : std::string());
    if (r.query) absl::StrAppend(&out, r.query->n);
    out += '\n';
  }
  return out;
}

}  // namespace dptext
