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

#include "dptext/cli.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string_view>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dptext/attacks.h"
#include "dptext/mapping.h"
#include "dptext/mapping_io.h"
#include "dptext/sampler.h"
#include "dptext/sanitizer.h"
#include "dptext/vocab.h"
#include "json.hpp"

namespace dptext::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Thrown by subcommand handlers for data errors; mapped to kExitData.
struct DataError {
  absl::Status status;
};

template <typename T>
T Unwrap(absl::StatusOr<T> v) {
  if (!v.ok()) throw DataError{v.status()};
  return *std::move(v);
}

void Check(const absl::Status& s) {
  if (!s.ok()) throw DataError{s};
}

std::string Hex(uint64_t v) { return absl::StrFormat("%016x", v); }

void WriteTextFile(const fs::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw DataError{absl::PermissionDeniedError(
        absl::StrCat("cannot write ", path.string()))};
  }
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) {
    throw DataError{
        absl::DataLossError(absl::StrCat("failed writing ", path.string()))};
  }
}

size_t EditDistance(std::string_view a, std::string_view b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void CollectLongNames(const CLI::App* app, std::vector<std::string>& names) {
  for (const CLI::Option* opt : app->get_options()) {
    for (const std::string& n : opt->get_lnames()) names.push_back("--" + n);
  }
  for (const CLI::App* sub : app->get_subcommands({})) {
    CollectLongNames(sub, names);
  }
}

// "did you mean" hints for unrecognized --flags.
std::string Suggestions(const CLI::App& app,
                        const std::vector<std::string>& args) {
  std::vector<std::string> names;
  CollectLongNames(&app, names);
  std::string out;
  for (const std::string& arg : args) {
    if (arg.rfind("--", 0) != 0) continue;
    const std::string flag = arg.substr(0, arg.find('='));
    if (std::find(names.begin(), names.end(), flag) != names.end()) continue;
    const std::string* best = nullptr;
    size_t best_d = 0;
    for (const std::string& n : names) {
      const size_t d = EditDistance(flag, n);
      if (best == nullptr || d < best_d) {
        best = &n;
        best_d = d;
      }
    }
    if (best != nullptr && best_d <= 3) {
      absl::StrAppend(&out, "unknown flag ", flag, "; did you mean ", *best,
                      "?\n");
    } else {
      absl::StrAppend(&out, "unknown flag ", flag, "\n");
    }
  }
  return out;
}

struct Common {
  std::string summary_path;
};

void EmitSummary(const Common& common, const json& summary, std::ostream& err) {
  const std::string text = summary.dump(2) + "\n";
  if (common.summary_path.empty()) {
    err << text;
  } else {
    WriteTextFile(common.summary_path, text);
  }
}

void AddSummaryFlag(CLI::App* sub, Common& common) {
  sub->add_option("--summary-json,--summary", common.summary_path,
                  "Write the machine-readable run summary here instead of "
                  "stderr");
}

// ---- build-map ----

struct BuildMapArgs {
  Common common;
  std::string embeddings;
  size_t k = 20;
  std::string measure = "euclidean";
  std::string order = "vocab";
  std::string frequencies;
  std::optional<size_t> expected_dim;
  std::string out;
  std::string jsonl;
};

void RunBuildMap(const BuildMapArgs& a, std::ostream& err) {
  const SimilarityMeasure measure = Unwrap(SimilarityMeasure::FromName(a.measure));
  const SeedOrder order = Unwrap(SeedOrderFromName(a.order));
  const EmbeddingTable table = Unwrap(LoadEmbeddings(a.embeddings, a.expected_dim));
  MappingOptions options;
  options.k = a.k;
  options.measure = measure;
  options.order = order;
  if (order == SeedOrder::kFrequencyOrder) {
    if (a.frequencies.empty()) {
      throw DataError{absl::InvalidArgumentError(
          "--order frequency requires --frequencies")};
    }
    options.frequencies = Unwrap(LoadFrequencies(a.frequencies, table.vocab()));
  }
  const MappingTable mapping = Unwrap(GenerateMapping(table, options));
  if (table.duplicate_count() > 0) {
    err << "warning: " << table.duplicate_count()
        << " duplicate surface(s) ignored; first occurrence kept\n";
  }
  for (const std::string& w : mapping.warnings()) err << "warning: " << w << "\n";
  Check(WriteMapping(mapping, a.out));
  if (!a.jsonl.empty()) WriteTextFile(a.jsonl, MappingToJsonLines(mapping));

  size_t smallest = mapping.groups().empty() ? 0 : mapping.groups()[0].size();
  for (const Group& g : mapping.groups()) smallest = std::min(smallest, g.size());
  json s;
  s["command"] = "build-map";
  s["config"] = {{"embeddings", a.embeddings}, {"K", a.k},
                 {"measure", std::string(measure.name())},
                 {"order", std::string(SeedOrderName(order))},
                 {"frequencies", a.frequencies}, {"out", a.out}};
  s["result"] = {{"vocab_size", table.size()},
                 {"dim", table.dim()},
                 {"duplicates_dropped", table.duplicate_count()},
                 {"groups", mapping.groups().size()},
                 {"smallest_group", smallest},
                 {"vocab_hash", Hex(mapping.vocab_hash())},
                 {"warnings", mapping.warnings()}};
  EmitSummary(a.common, s, err);
}

// ---- sanitize ----

struct SanitizeArgs {
  Common common;
  std::string map;
  double epsilon = 0.0;
  std::string mode = "custext";
  std::string stopwords;
  uint64_t seed = 0;
  std::string in;
  std::string out;
  std::optional<size_t> tsv_col;
  bool tsv_header = false;
  std::string number_policy = "randomize_digits";
  bool no_lowercase = false;
  std::string embeddings;
  std::optional<double> epsilon_prime;
};

void RunSanitize(const SanitizeArgs& a, std::ostream& err) {
  const MappingTable mapping = Unwrap(ReadMapping(a.map));
  SanitizeConfig config;
  config.epsilon = a.epsilon;
  config.k = mapping.k();
  config.measure = mapping.measure();
  config.mode = Unwrap(ModeFromName(a.mode));
  config.seed = a.seed;
  config.number_policy = Unwrap(NumberPolicyFromName(a.number_policy));
  config.lowercase = !a.no_lowercase;
  if (!a.stopwords.empty()) {
    config.stopwords = Unwrap(LoadStopwords(a.stopwords, config.lowercase));
  }
  std::optional<EmbeddingTable> table;
  if (!a.embeddings.empty()) table = Unwrap(LoadEmbeddings(a.embeddings));
  if (config.mode == Mode::kBaseline) {
    if (!table) {
      throw DataError{absl::InvalidArgumentError(
          "--mode baseline requires --embeddings")};
    }
    if (a.epsilon_prime) {
      config.baseline_epsilon_prime = a.epsilon_prime;
    } else {
      const double d_max = MaxPairwiseDistance(*table);
      if (d_max <= 0.0) {
        throw DataError{absl::InvalidArgumentError("d_max of the table is 0")};
      }
      config.baseline_epsilon_prime = config.epsilon / d_max;
    }
  }
  CorpusOptions corpus;
  corpus.tsv_column = a.tsv_col;
  corpus.has_header = a.tsv_header;
  const SanitizeCounts counts =
      Unwrap(SanitizeCorpus(a.in, a.out, mapping, config, corpus,
                            table ? &*table : nullptr));

  json s;
  s["command"] = "sanitize";
  json cfg = {{"map", a.map},
              {"epsilon", config.epsilon},
              {"K", config.k},
              {"measure", std::string(config.measure.name())},
              {"mode", std::string(ModeName(config.mode))},
              {"seed", config.seed},
              {"number_policy", std::string(NumberPolicyName(config.number_policy))},
              {"lowercase", config.lowercase},
              {"stopwords", a.stopwords},
              {"stopword_count", config.stopwords.size()},
              {"in", a.in},
              {"out", a.out},
              {"vocab_hash", Hex(mapping.vocab_hash())}};
  if (a.tsv_col) cfg["tsv_col"] = *a.tsv_col;
  if (config.baseline_epsilon_prime) {
    cfg["epsilon_prime"] = *config.baseline_epsilon_prime;
  }
  s["config"] = cfg;
  s["result"] = {{"records", counts.records},
                 {"tokens", counts.tokens},
                 {"replaced", counts.replaced},
                 {"stopword_passthrough", counts.stopword_passthrough},
                 {"oov_retained", counts.oov_retained},
                 {"numeric_randomized", counts.numeric_randomized},
                 {"numeric_retained", counts.numeric_retained}};
  EmitSummary(a.common, s, err);
}

// ---- attack ----

struct QueryArgs {
  Common common;
  std::string map;
  double epsilon = 0.0;
  std::string token;
  size_t trials = 1000;
  double confidence = 0.95;
  uint64_t seed = 0;
  size_t max_queries = size_t{1} << 22;
};

void RunQuery(const QueryArgs& a, std::ostream& out, std::ostream& err) {
  const MappingTable mapping = Unwrap(ReadMapping(a.map));
  const SamplerParams params = Unwrap(SamplerParams::Create(a.epsilon));
  auto id = mapping.vocab().Find(a.token);
  if (!id) {
    throw DataError{absl::NotFoundError(
        absl::StrCat("token '", a.token, "' is not in the vocabulary"))};
  }
  QueryAttackOptions options;
  options.trials = a.trials;
  options.confidence = a.confidence;
  options.seed = a.seed;
  options.max_queries = a.max_queries;
  const QueryAttackResult r =
      Unwrap(QueryAttack(mapping, *id, params, options));
  if (r.no_protection) {
    err << "warning: '" << a.token
        << "' is in a singleton group: no protection, N = 1\n";
  }
  out << "token,epsilon,K,group_size,trials,confidence,N,success_estimate,"
         "no_protection,capped\n";
  out << absl::StrFormat("%s,%.10g,%d,%d,%d,%.10g,%d,%.10g,%d,%d\n", a.token,
                         a.epsilon, mapping.k(),
                         mapping.Lookup(*id).group->size(), r.trials,
                         a.confidence, r.n, r.success_estimate,
                         r.no_protection ? 1 : 0, r.capped ? 1 : 0);
  json s;
  s["command"] = "attack query";
  s["config"] = {{"map", a.map},         {"epsilon", a.epsilon},
                 {"token", a.token},     {"trials", a.trials},
                 {"confidence", a.confidence}, {"seed", a.seed},
                 {"max_queries", a.max_queries}};
  s["result"] = {{"N", r.n},
                 {"success_estimate", r.success_estimate},
                 {"no_protection", r.no_protection},
                 {"capped", r.capped}};
  EmitSummary(a.common, s, err);
}

struct InvertArgs {
  Common common;
  std::string map;
  double epsilon = 0.0;
  std::string in;
  std::string truth;
  std::string stopwords;
  std::optional<size_t> tsv_col;
  bool tsv_header = false;
  bool no_lowercase = false;
};

void RunInvert(const InvertArgs& a, std::ostream& out, std::ostream& err) {
  const MappingTable mapping = Unwrap(ReadMapping(a.map));
  const SamplerParams params = Unwrap(SamplerParams::Create(a.epsilon));
  CorpusOptions corpus;
  corpus.tsv_column = a.tsv_col;
  corpus.has_header = a.tsv_header;
  const bool lowercase = !a.no_lowercase;
  const Document sanitized = Unwrap(ReadDocument(a.in, lowercase, corpus));
  const Document truth = Unwrap(ReadDocument(a.truth, lowercase, corpus));
  std::optional<StopwordSet> stopwords;
  if (!a.stopwords.empty()) stopwords = Unwrap(LoadStopwords(a.stopwords, lowercase));
  const InversionAttackResult r = Unwrap(InversionAttackOnCorpus(
      mapping, params, truth, sanitized, stopwords ? &*stopwords : nullptr));
  const double analytic = AnalyticInversionSuccess(mapping, params);
  out << "epsilon,K,tokens_evaluated,success_rate,privacy_level,"
         "analytic_success_rate\n";
  out << absl::StrFormat("%.10g,%d,%d,%.10g,%.10g,%.10g\n", a.epsilon,
                         mapping.k(), r.tokens_evaluated, r.success_rate,
                         r.privacy_level(), analytic);
  json s;
  s["command"] = "attack invert";
  s["attack"] =
      "Bayesian inversion (maximum-likelihood input per output); proxy for "
      "masked-LM token inference";
  s["config"] = {{"map", a.map},     {"epsilon", a.epsilon},
                 {"in", a.in},       {"truth", a.truth},
                 {"stopwords", a.stopwords}, {"lowercase", lowercase}};
  s["result"] = {{"tokens_evaluated", r.tokens_evaluated},
                 {"success_rate", r.success_rate},
                 {"privacy_level", r.privacy_level()},
                 {"analytic_success_rate", analytic}};
  EmitSummary(a.common, s, err);
}

// ---- sweep ----

struct SweepArgs {
  Common common;
  std::string map_dir;
  std::vector<std::string> maps;
  std::string embeddings;
  std::string in;
  std::vector<double> epsilons;
  std::string mode = "custext";
  std::string stopwords;
  uint64_t seed = 0;
  std::string probe;
  size_t trials = 1000;
  std::optional<size_t> tsv_col;
  bool tsv_header = false;
  bool no_lowercase = false;
  std::string out;
};

void RunSweep(const SweepArgs& a, std::ostream& err) {
  std::vector<std::string> paths = a.maps;
  if (!a.map_dir.empty()) {
    std::error_code ec;
    std::vector<std::string> found;
    for (const auto& entry : fs::directory_iterator(a.map_dir, ec)) {
      if (entry.is_regular_file() && entry.path().extension() == ".bin") {
        found.push_back(entry.path().string());
      }
    }
    if (ec) {
      throw DataError{absl::NotFoundError(
          absl::StrCat("cannot list ", a.map_dir, ": ", ec.message()))};
    }
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  if (paths.empty()) {
    throw DataError{absl::InvalidArgumentError(
        "no mapping files (give --map or a --map-dir containing *.bin)")};
  }
  std::vector<MappingTable> mappings;
  for (const std::string& p : paths) mappings.push_back(Unwrap(ReadMapping(p)));
  std::vector<const MappingTable*> ptrs;
  for (const MappingTable& m : mappings) ptrs.push_back(&m);

  const EmbeddingTable table = Unwrap(LoadEmbeddings(a.embeddings));
  SweepOptions options;
  options.epsilons = a.epsilons;
  options.config.mode = Unwrap(ModeFromName(a.mode));
  options.config.seed = a.seed;
  options.config.lowercase = !a.no_lowercase;
  if (!a.stopwords.empty()) {
    options.config.stopwords =
        Unwrap(LoadStopwords(a.stopwords, options.config.lowercase));
  }
  options.probe = a.probe;
  options.query.trials = a.trials;
  options.query.seed = a.seed;
  CorpusOptions corpus_opts;
  corpus_opts.tsv_column = a.tsv_col;
  corpus_opts.has_header = a.tsv_header;
  const Document corpus =
      Unwrap(ReadDocument(a.in, options.config.lowercase, corpus_opts));
  const std::vector<SweepRow> rows = Unwrap(Sweep(corpus, ptrs, table, options));
  WriteTextFile(a.out, SweepCsv(rows, a.probe));

  json s;
  s["command"] = "sweep";
  s["config"] = {{"maps", paths},       {"embeddings", a.embeddings},
                 {"in", a.in},          {"epsilons", a.epsilons},
                 {"mode", a.mode},      {"stopwords", a.stopwords},
                 {"seed", a.seed},      {"probe", a.probe},
                 {"trials", a.trials},  {"out", a.out}};
  s["result"] = {{"rows", rows.size()}};
  EmitSummary(a.common, s, err);
}

// ---- verify-dp ----

struct VerifyArgs {
  Common common;
  std::string map;
  double epsilon = 0.0;
  std::string out;
};

bool RunVerify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const MappingTable mapping = Unwrap(ReadMapping(a.map));
  const SamplerParams params = Unwrap(SamplerParams::Create(a.epsilon));
  const DpRatioReport report = DpRatioCheck(mapping, params);
  const std::string csv = RatioReportCsv(report, mapping.vocab());
  if (a.out.empty()) {
    out << csv;
  } else {
    WriteTextFile(a.out, csv);
  }
  err << absl::StrFormat("worst ratio %.12g %s e^%g = %.12g: %s\n",
                         report.worst_ratio, report.ok() ? "<=" : ">",
                         a.epsilon, report.bound,
                         report.ok() ? "OK" : "VIOLATION");
  json s;
  s["command"] = "verify-dp";
  s["config"] = {{"map", a.map}, {"epsilon", a.epsilon}, {"out", a.out}};
  s["result"] = {{"worst_ratio", report.worst_ratio},
                 {"bound", report.bound},
                 {"groups", report.rows.size()},
                 {"ok", report.ok()}};
  EmitSummary(a.common, s, err);
  return report.ok();
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Differentially private text sanitization with customized "
               "output sets",
               "dptext"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML/INI file of defaults; flags override it");
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (default: all cores); results do not depend "
                 "on it")
      ->check(CLI::NonNegativeNumber);

  BuildMapArgs bm;
  CLI::App* build = app.add_subcommand(
      "build-map", "Partition the vocabulary into output groups and save the "
                   "mapping artifact");
  build->add_option("--embeddings", bm.embeddings, "GloVe-style text embeddings")
      ->required();
  build->add_option("--K", bm.k, "Output set size")->check(CLI::PositiveNumber);
  build->add_option("--measure", bm.measure, "euclidean | cosine");
  build->add_option("--order", bm.order, "Seed order: vocab | frequency");
  build->add_option("--frequencies", bm.frequencies,
                    "\"surface count\" lines for --order frequency");
  build->add_option("--expected-dim", bm.expected_dim, "Reject other dimensions");
  build->add_option("--out", bm.out, "Mapping artifact path")->required();
  build->add_option("--jsonl", bm.jsonl, "Also write a JSON-lines debug export");
  AddSummaryFlag(build, bm.common);

  SanitizeArgs sa;
  CLI::App* sanitize = app.add_subcommand("sanitize", "Sanitize a corpus");
  sanitize->add_option("--map", sa.map, "Mapping artifact")->required();
  sanitize->add_option("--epsilon", sa.epsilon, "Privacy parameter (eps-DP)")
      ->required();
  sanitize->add_option("--mode", sa.mode, "custext | custext_plus | baseline");
  sanitize->add_option("--stopwords", sa.stopwords, "One stopword per line");
  sanitize->add_option("--seed", sa.seed, "Master seed");
  sanitize->add_option("--in", sa.in, "Input corpus")->required();
  sanitize->add_option("--out", sa.out, "Output corpus")->required();
  sanitize->add_option("--tsv-col", sa.tsv_col,
                       "Sanitize only this 0-based TSV column");
  sanitize->add_flag("--tsv-header", sa.tsv_header, "Copy the first line as is");
  sanitize->add_option("--number-policy", sa.number_policy,
                       "OOV numbers: randomize_digits | retain");
  sanitize->add_flag("--no-lowercase", sa.no_lowercase, "Keep input casing");
  sanitize->add_option("--embeddings", sa.embeddings,
                       "Embedding file (required for baseline; checked "
                       "against the mapping's vocab hash)");
  sanitize->add_option("--epsilon-prime", sa.epsilon_prime,
                       "Baseline eps' (default eps / d_max)");
  AddSummaryFlag(sanitize, sa.common);

  CLI::App* attack = app.add_subcommand("attack", "Run a privacy attack");
  attack->require_subcommand(1);
  QueryArgs qa;
  CLI::App* query = attack->add_subcommand(
      "query",
      "Smallest number of repeated queries that identifies the input token.\n"
      "stdout CSV columns: token,epsilon,K,group_size,trials,confidence,N,"
      "success_estimate,no_protection,capped");
  query->add_option("--map", qa.map, "Mapping artifact")->required();
  query->add_option("--epsilon", qa.epsilon, "Privacy parameter")->required();
  query->add_option("--token", qa.token, "Input token to attack")->required();
  query->add_option("--trials", qa.trials, "Monte-Carlo trials (>= 100)");
  query->add_option("--confidence", qa.confidence, "Target success probability");
  query->add_option("--seed", qa.seed, "Master seed");
  query->add_option("--max-queries", qa.max_queries, "Search cap");
  AddSummaryFlag(query, qa.common);

  InvertArgs ia;
  CLI::App* invert = attack->add_subcommand(
      "invert",
      "Maximum-likelihood inversion of a sanitized corpus (proxy for masked-LM "
      "inference).\nstdout CSV columns: epsilon,K,tokens_evaluated,"
      "success_rate,privacy_level,analytic_success_rate");
  invert->add_option("--map", ia.map, "Mapping artifact")->required();
  invert->add_option("--epsilon", ia.epsilon, "Privacy parameter")->required();
  invert->add_option("--in", ia.in, "Sanitized corpus")->required();
  invert->add_option("--truth", ia.truth, "Original corpus")->required();
  invert->add_option("--stopwords", ia.stopwords, "Skip these truth tokens");
  invert->add_option("--tsv-col", ia.tsv_col, "0-based TSV text column");
  invert->add_flag("--tsv-header", ia.tsv_header, "Skip the first line");
  invert->add_flag("--no-lowercase", ia.no_lowercase, "Keep input casing");
  AddSummaryFlag(invert, ia.common);

  SweepArgs sw;
  CLI::App* sweep = app.add_subcommand(
      "sweep",
      "Privacy-utility sweep over epsilons and mappings.\nCSV columns: " +
          std::string(kSweepCsvHeader));
  sweep->add_option("--map-dir", sw.map_dir, "Directory of *.bin mappings");
  sweep->add_option("--map", sw.maps, "Mapping artifact (repeatable)");
  sweep->add_option("--embeddings", sw.embeddings, "Embedding file")
      ->required();
  sweep->add_option("--in", sw.in, "Original corpus")->required();
  sweep->add_option("--epsilons", sw.epsilons, "Comma-separated epsilons")
      ->delimiter(',')
      ->required();
  sweep->add_option("--mode", sw.mode, "custext | custext_plus");
  sweep->add_option("--stopwords", sw.stopwords, "Stopword file");
  sweep->add_option("--seed", sw.seed, "Master seed");
  sweep->add_option("--probe", sw.probe, "Token for the query_n column");
  sweep->add_option("--trials", sw.trials, "Query-attack trials");
  sweep->add_option("--tsv-col", sw.tsv_col, "0-based TSV text column");
  sweep->add_flag("--tsv-header", sw.tsv_header, "Skip the first line");
  sweep->add_flag("--no-lowercase", sw.no_lowercase, "Keep input casing");
  sweep->add_option("--out", sw.out, "Output CSV")->required();
  AddSummaryFlag(sweep, sw.common);

  VerifyArgs va;
  CLI::App* verify = app.add_subcommand(
      "verify-dp",
      "Exact worst-case probability ratio per group.\nCSV columns: "
      "group,x,x_prime,y,ratio,bound");
  verify->add_option("--map", va.map, "Mapping artifact")->required();
  verify->add_option("--epsilon", va.epsilon, "Privacy parameter")->required();
  verify->add_option("--out", va.out, "Report CSV (default stdout)");
  AddSummaryFlag(verify, va.common);

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("dptext");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << Suggestions(app, args);
    const CLI::App* failing = &app;
    for (CLI::App* sub : app.get_subcommands()) {
      failing = sub;
      for (CLI::App* leaf : sub->get_subcommands()) failing = leaf;
    }
    err << failing->help();
    return kExitUsage;
  }

  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (build->parsed()) {
      RunBuildMap(bm, err);
    } else if (sanitize->parsed()) {
      RunSanitize(sa, err);
    } else if (query->parsed()) {
      RunQuery(qa, out, err);
    } else if (invert->parsed()) {
      RunInvert(ia, out, err);
    } else if (sweep->parsed()) {
      RunSweep(sw, err);
    } else if (verify->parsed()) {
      if (!RunVerify(va, out, err)) return kExitData;
    }
  } catch (const DataError& e) {
    err << "error: " << e.status.message() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace dptext::cli
