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

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dptext/attacks.h"
#include "dptext/mapping.h"
#include "dptext/mapping_io.h"
#include "dptext/sampler.h"
#include "dptext/sanitizer.h"
#include "json.hpp"
#include "oracles.h"
#include "test_util.h"

namespace dptext {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass;
  std::string detail;
};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs the dptext binary; returns its exit status.
int Cli(const std::string& args, const fs::path& cwd = {}) {
  const std::string cd = cwd.empty() ? "" : absl::StrCat("cd '", cwd.string(), "' && ");
  const std::string cmd =
      absl::StrCat(cd, DPTEXT_CLI_PATH, " ", args, " 2> /dev/null");
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

nlohmann::json ReadJson(const fs::path& path) {
  return nlohmann::json::parse(testing::ReadFile(path));
}

std::string Q(const fs::path& p) { return "'" + p.string() + "'"; }

// 1. verify-dp over K x epsilon on a 1000 x 50 table.
Verdict DpExactness(const testing::TempDir& dir) {
  const auto start = Clock::now();
  testing::WriteFile(dir / "t1.txt",
                     testing::TableText(testing::RandomTable(1000, 50, 101)));
  double worst_margin = 0.0;
  for (int k : {2, 5, 20}) {
    const fs::path map = dir / absl::StrCat("t1_k", k, ".bin");
    if (Cli(absl::StrCat("build-map --embeddings ", Q(dir / "t1.txt"), " --K ", k,
                         " --out ", Q(map), " --summary-json ", Q(dir / "s.json"))) != 0) {
      return {false, absl::StrCat("build-map failed for K=", k)};
    }
    for (double eps : {0.1, 1.0, 2.0, 3.0, 8.0}) {
      const int rc = Cli(absl::StrCat("verify-dp --map ", Q(map), " --epsilon ", eps,
                                      " --out ", Q(dir / "r.csv"), " --summary-json ",
                                      Q(dir / "v.json")));
      const auto summary = ReadJson(dir / "v.json");
      const double ratio = summary["result"]["worst_ratio"];
      const bool ok = rc == 0 && ratio <= std::exp(eps) * (1 + 1e-9);
      if (!ok) {
        return {false, absl::StrFormat("K=%d eps=%g ratio %.12g > e^eps", k, eps, ratio)};
      }
      worst_margin = std::max(worst_margin, std::log(ratio) / eps);
    }
  }
  const double secs = Seconds(start);
  return {secs < 30.0,
          absl::StrFormat("15 cells, max ln(ratio)/eps = %.4f, %.1fs (< 30s)",
                          worst_margin, secs)};
}

// 2. Greedy partition equals the brute-force oracle.
Verdict OracleEquivalence() {
  const EmbeddingTable table = testing::RandomTable(100, 20, 202);
  int cells = 0;
  for (SimilarityMeasure m :
       {SimilarityMeasure::Euclidean(), SimilarityMeasure::Cosine()}) {
    for (size_t k : {2u, 3u, 7u}) {
      const MappingTable mapping = testing::MustMap(table, k, m);
      std::vector<std::vector<TokenId>> got;
      for (const Group& g : mapping.groups()) got.push_back(g.members);
      if (got != testing::BruteForceGroups(table, m, k, testing::Iota(100))) {
        return {false, absl::StrCat(std::string(m.name()), " K=", k, " differs from oracle")};
      }
      ++cells;
    }
  }
  return {true, absl::StrCat(cells, " (measure, K) cells identical")};
}

// 3. Empirical sampler output against the analytic distribution.
Verdict SamplerFidelity() {
  const EmbeddingTable table = testing::RandomTable(500, 20, 303);
  const MappingTable mapping = testing::MustMap(table, 20);
  const SamplerParams params = *SamplerParams::Create(2.0);
  const EmSampler sampler(mapping, params);
  std::mt19937_64 pick(3);
  const RandomStream stream(33);
  double worst_tv = 0.0;
  for (int i = 0; i < 20; ++i) {
    const TokenId x = static_cast<TokenId>(pick() % table.size());
    const GroupRow row = mapping.Lookup(x);
    std::vector<double> freq(row.group->size(), 0.0);
    Substream s = stream.At(x, i, StreamDomain::kSampling);
    for (int d = 0; d < 100000; ++d) freq[mapping.position_of(sampler.Sample(x, s))] += 1;
    for (double& f : freq) f /= 100000;
    worst_tv = std::max(worst_tv,
                        testing::TotalVariation(freq, testing::NaiveEm(row.scores, 2.0)));
  }
  const MappingTable toy = testing::MustMap(testing::ToyTable(), 2);
  const double analytic = EmProbabilities(toy.Lookup(0).scores, params)[0];
  const EmSampler toy_sampler(toy, params);
  Substream s(7);
  double self = 0;
  for (int d = 0; d < 100000; ++d) self += toy_sampler.Sample(0, s) == 0;
  self /= 100000;
  const bool pass = worst_tv < 0.01 && std::abs(analytic - 0.7311) <= 0.005 &&
                    std::abs(self - 0.7311) <= 0.005;
  return {pass, absl::StrFormat("max TV %.4f (< 0.01); toy self analytic %.6f, "
                                "empirical %.4f (0.7311 +- 0.005)",
                                worst_tv, analytic, self)};
}

// 4. Query attack on the toy group and across epsilon on K=20.
Verdict QueryAttackCriterion() {
  const auto start = Clock::now();
  const MappingTable toy = testing::MustMap(testing::ToyTable(), 2);
  QueryAttackOptions options;
  options.trials = 1000;
  options.seed = 4;
  auto toy_result = QueryAttack(toy, 0, *SamplerParams::Create(2.0), options);
  if (!toy_result.ok()) return {false, std::string(toy_result.status().message())};
  const size_t toy_n = toy_result->n;

  const MappingTable k20 = testing::MustMap(testing::RandomTable(1000, 50, 404), 20);
  std::vector<size_t> ns;
  for (double eps : {1.0, 2.0, 3.0, 8.0}) {
    auto r = QueryAttack(k20, 0, *SamplerParams::Create(eps), options);
    if (!r.ok()) return {false, std::string(r.status().message())};
    ns.push_back(r->n);
  }
  bool monotone = true;
  for (size_t i = 1; i < ns.size(); ++i) monotone &= ns[i] <= ns[i - 1];
  const double secs = Seconds(start);
  const bool pass = toy_n >= 9 && toy_n <= 13 && monotone && secs < 60.0;
  return {pass, absl::StrFormat("toy N=%d (exact 11, accept [9,13]); K=20 N over "
                                "eps {1,2,3,8} = %d, %d, %d, %d; %.1fs (< 60s)",
                                toy_n, ns[0], ns[1], ns[2], ns[3], secs)};
}

// 5. custext_plus on a 10,000-line corpus with 100 stopwords, via the CLI.
Verdict CusTextPlusContract(const testing::TempDir& dir) {
  const EmbeddingTable table = testing::RandomTable(2000, 16, 505);
  testing::WriteFile(dir / "t5.txt", testing::TableText(table));
  std::string stop_text;
  absl::flat_hash_set<std::string> stop;
  for (int i = 0; i < 100; ++i) {
    stop.insert("w" + std::to_string(i * 7));
    stop_text += "w" + std::to_string(i * 7) + "\n";
  }
  testing::WriteFile(dir / "stop.txt", stop_text);
  std::mt19937_64 rng(5);
  std::string corpus;
  for (int line = 0; line < 10000; ++line) {
    const int len = 3 + static_cast<int>(rng() % 15);
    for (int t = 0; t < len; ++t) {
      if (t) corpus += ' ';
      const uint64_t r = rng() % 100;
      if (r < 30) {
        corpus += "w" + std::to_string((rng() % 100) * 7);
      } else if (r < 90) {
        corpus += "w" + std::to_string(rng() % 2000);
      } else {
        corpus += "oov" + std::to_string(rng() % 50);
      }
    }
    corpus += '\n';
  }
  testing::WriteFile(dir / "c5.txt", corpus);
  if (Cli(absl::StrCat("build-map --embeddings ", Q(dir / "t5.txt"), " --K 20 --out ",
                       Q(dir / "m5.bin"))) != 0 ||
      Cli(absl::StrCat("sanitize --map ", Q(dir / "m5.bin"),
                       " --epsilon 1 --mode custext_plus --stopwords ",
                       Q(dir / "stop.txt"), " --seed 5 --in ", Q(dir / "c5.txt"),
                       " --out ", Q(dir / "o5.txt"))) != 0) {
    return {false, "CLI run failed"};
  }
  const MappingTable mapping = *ReadMapping(dir / "m5.bin");
  auto truth = ReadDocument(dir / "c5.txt", true);
  auto out = ReadDocument(dir / "o5.txt", true);
  if (!truth.ok() || !out.ok() || truth->records.size() != out->records.size()) {
    return {false, "output is not line-aligned"};
  }
  size_t stop_total = 0, stop_same = 0, sampled = 0, in_group = 0;
  for (size_t i = 0; i < truth->records.size(); ++i) {
    const Record& a = truth->records[i];
    const Record& b = out->records[i];
    if (a.size() != b.size()) return {false, absl::StrCat("token count differs on line ", i + 1)};
    for (size_t j = 0; j < a.size(); ++j) {
      if (stop.contains(a[j].surface)) {
        ++stop_total;
        stop_same += a[j].surface == b[j].surface;
      } else if (auto x = table.Find(a[j].surface)) {
        ++sampled;
        auto y = table.Find(b[j].surface);
        in_group += y && mapping.group_of(*x) == mapping.group_of(*y);
      }
    }
  }
  const bool pass = stop_total > 0 && stop_same == stop_total && in_group == sampled;
  return {pass, absl::StrFormat("stopwords unchanged %d/%d; in-group replacements %d/%d",
                                stop_same, stop_total, in_group, sampled)};
}

// 6. Baseline ratio check after rescaling, and utility ordering.
Verdict BaselineRescaling() {
  const EmbeddingTable small = testing::RandomTable(60, 5, 606);
  const double d_max_small = MaxPairwiseDistance(small);
  const double eps_prime = 0.25;
  auto report = BaselineDpRatioCheck(small, eps_prime);
  if (!report.ok()) return {false, std::string(report.status().message())};
  const double eps = eps_prime * d_max_small;
  const bool ratio_ok = report->worst_ratio <= std::exp(eps) * (1 + 1e-9);

  const EmbeddingTable table = testing::RandomTable(1000, 50, 607);
  const MappingTable mapping = testing::MustMap(table, 20);
  Document doc;
  std::mt19937_64 rng(6);
  for (int i = 0; i < 2000; ++i) {
    Record r;
    for (int t = 0; t < 10; ++t) {
      r.push_back({"w" + std::to_string(rng() % 1000), 0, 0});
    }
    doc.records.push_back(std::move(r));
  }
  const double matched_eps = 3.0;
  SanitizeConfig config;
  config.epsilon = matched_eps;
  config.k = 20;
  config.seed = 6;
  auto custext = SanitizeDocument(doc, mapping, config);
  config.mode = Mode::kBaseline;
  auto baseline = SanitizeDocument(doc, mapping, config, &table);
  if (!custext.ok() || !baseline.ok()) return {false, "sanitize failed"};
  const double u_custext = UtilityProxy(doc, custext->document, table)->mean_cosine;
  const double u_baseline = UtilityProxy(doc, baseline->document, table)->mean_cosine;
  const bool pass = ratio_ok && report->ok() && u_custext > u_baseline;
  return {pass, absl::StrFormat(
                    "60-token table: eps'=%.2f, d_max=%.4f, worst ratio %.6g <= "
                    "e^%.4f = %.6g; at eps=%.0f mean cosine custext %.4f > "
                    "baseline %.4f (eps'=%.4f)",
                    eps_prime, d_max_small, report->worst_ratio, eps,
                    std::exp(eps), matched_eps, u_custext, u_baseline,
                    baseline->baseline_epsilon_prime)};
}

// 7. Near-uniform at tiny epsilon, near-identity at large epsilon.
Verdict EpsilonExtremes() {
  const EmbeddingTable table = testing::RandomTable(400, 20, 707);
  const MappingTable mapping = testing::MustMap(table, 5);
  const EmSampler tiny(mapping, *SamplerParams::Create(1e-6));
  const RandomStream stream(77);
  double worst_tv = 0.0;
  for (TokenId x = 0; x < 40; ++x) {
    const size_t n = mapping.Lookup(x).group->size();
    std::vector<double> freq(n, 0.0);
    Substream s = stream.At(x, 0, StreamDomain::kSampling);
    for (int d = 0; d < 20000; ++d) freq[mapping.position_of(tiny.Sample(x, s))] += 1;
    for (double& f : freq) f /= 20000;
    worst_tv = std::max(worst_tv, testing::TotalVariation(freq, std::vector<double>(n, 1.0 / n)));
  }
  const EmSampler sharp(mapping, *SamplerParams::Create(100.0));
  size_t same = 0, total = 0;
  for (TokenId x = 0; x < table.size(); ++x) {
    Substream s = stream.At(x, 1, StreamDomain::kSampling);
    for (int d = 0; d < 500; ++d) {
      same += sharp.Sample(x, s) == x;
      ++total;
    }
  }
  const double rate = static_cast<double>(same) / total;
  return {worst_tv < 0.02 && rate > 0.999,
          absl::StrFormat("eps=1e-6 max TV to uniform %.4f (< 0.02); eps=100 "
                          "self rate %.5f (> 0.999)",
                          worst_tv, rate)};
}

// 8. Two full CLI pipelines with the same seeds are byte-identical.
Verdict Determinism(const testing::TempDir& dir) {
  testing::WriteFile(dir / "t8.txt", testing::TableText(testing::RandomTable(300, 10, 808)));
  std::string corpus;
  for (int i = 0; i < 500; ++i) {
    corpus += absl::StrCat("w", i % 300, " w", (i * 11) % 300, ", 19", i % 10, " zz\n");
  }
  testing::WriteFile(dir / "c8.txt", corpus);
  // Each run works in its own directory with relative paths, so the summaries
  // (which record paths) are comparable byte for byte.
  auto run = [&](const std::string& tag, int threads) -> std::vector<std::string> {
    const fs::path d = dir / tag;
    fs::create_directories(d);
    fs::copy_file(dir / "t8.txt", d / "t8.txt");
    fs::copy_file(dir / "c8.txt", d / "c8.txt");
    auto cli = [&](const std::string& args) {
      return Cli(absl::StrCat("--threads ", threads, " ", args), d);
    };
    cli("build-map --embeddings t8.txt --K 5 --out m.bin --summary-json s1.json");
    cli("sanitize --map m.bin --epsilon 2 --seed 42 --in c8.txt --out o.txt "
        "--summary-json s2.json");
    cli("attack query --map m.bin --epsilon 2 --token w3 --seed 42 > q.csv");
    cli("attack invert --map m.bin --epsilon 2 --in o.txt --truth c8.txt > i.csv");
    cli("sweep --map m.bin --embeddings t8.txt --in c8.txt --epsilons 1,4 --seed 42 "
        "--probe w3 --out sw.csv");
    std::vector<std::string> files;
    for (const char* f : {"m.bin", "s1.json", "o.txt", "s2.json", "q.csv", "i.csv", "sw.csv"}) {
      files.push_back(testing::ReadFile(d / f));
    }
    return files;
  };
  const auto a = run("run_a", 1);
  const auto b = run("run_b", 1);
  const auto c = run("run_c", 4);
  for (const auto& f : a) {
    if (f.empty()) return {false, "a pipeline artifact is empty"};
  }
  return {a == b && a == c,
          "mapping, sanitized corpus, summaries and 3 CSVs byte-identical across "
          "2 runs (plus a 4-thread run)"};
}

// 9. build-map at 10,000 x 300, K=20.
Verdict ScaleSanity(const testing::TempDir& dir) {
  testing::WriteFile(dir / "t9.txt",
                     testing::TableText(testing::RandomTable(10000, 300, 909)));
  const auto start = Clock::now();
  const int rc = Cli(absl::StrCat("build-map --embeddings ", Q(dir / "t9.txt"),
                                  " --K 20 --out ", Q(dir / "m9.bin"), " --summary-json ",
                                  Q(dir / "s9.json")));
  const double secs = Seconds(start);
  if (rc != 0) return {false, "build-map failed"};
  const auto summary = ReadJson(dir / "s9.json");
  return {secs < 60.0, absl::StrFormat("%d groups in %.1fs (< 60s)",
                                       summary["result"]["groups"].get<int>(), secs)};
}

}  // namespace
}  // namespace dptext

int main() {
  using dptext::Verdict;
  dptext::testing::TempDir dir;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"AC1 eps-DP exactness (verify-dp)", [&] { return dptext::DpExactness(dir); }},
      {"AC2 mapping oracle equivalence", [] { return dptext::OracleEquivalence(); }},
      {"AC3 sampler fidelity", [] { return dptext::SamplerFidelity(); }},
      {"AC4 query attack", [] { return dptext::QueryAttackCriterion(); }},
      {"AC5 custext_plus contract", [&] { return dptext::CusTextPlusContract(dir); }},
      {"AC6 baseline rescaling", [] { return dptext::BaselineRescaling(); }},
      {"AC7 epsilon extremes", [] { return dptext::EpsilonExtremes(); }},
      {"AC8 determinism", [&] { return dptext::Determinism(dir); }},
      {"AC9 scale sanity", [&] { return dptext::ScaleSanity(dir); }},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const Verdict v = check();
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
