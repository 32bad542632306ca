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

#include "dptext/sanitizer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "dptext/sampler.h"
#include "strings.h"

namespace dptext {
namespace {

constexpr size_t kLinesPerChunk = 8192;

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

bool IsPunct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
         (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

char AsciiLower(char c) { return (c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c; }

// Holds per-run sampling state so corpus chunks share it.
class PreparedSanitizer {
 public:
  static absl::StatusOr<std::unique_ptr<PreparedSanitizer>> Create(
      const MappingTable& mapping, const SanitizeConfig& config,
      const EmbeddingTable* table) {
    if (auto s = config.Validate(); !s.ok()) return s;
    if (mapping.k() != config.k) {
      return absl::FailedPreconditionError(internal::StrCat(
          "mapping was built with K=", mapping.k(), " but config has K=",
          config.k));
    }
    if (!(mapping.measure() == config.measure)) {
      return absl::FailedPreconditionError(internal::StrCat(
          "mapping was built with measure ", mapping.measure().name(),
          " but config has ", config.measure.name()));
    }
    if (table != nullptr && table->Hash() != mapping.vocab_hash()) {
      return absl::FailedPreconditionError(
          "embedding table does not match the mapping (vocab hash mismatch)");
    }
    auto params = SamplerParams::Create(config.epsilon);
    if (!params.ok()) return params.status();

    auto p = std::unique_ptr<PreparedSanitizer>(
        new PreparedSanitizer(mapping, config, *params));
    if (config.mode == Mode::kBaseline) {
      if (table == nullptr) {
        return absl::FailedPreconditionError(
            "baseline mode requires the embedding table");
      }
      double eps_prime = config.baseline_epsilon_prime.value_or(0.0);
      if (!config.baseline_epsilon_prime) {
        const double d_max = MaxPairwiseDistance(*table);
        if (d_max <= 0.0) {
          return absl::FailedPreconditionError(
              "all embedding vectors coincide; d_max is 0");
        }
        eps_prime = config.epsilon / d_max;
      }
      auto baseline = BaselineSampler::Create(*table, config.measure, eps_prime);
      if (!baseline.ok()) return baseline.status();
      p->baseline_ = std::make_unique<BaselineSampler>(*std::move(baseline));
    } else {
      p->em_ = std::make_unique<EmSampler>(mapping, *params);
    }
    return p;
  }

  double baseline_epsilon_prime() const {
    return baseline_ ? baseline_->epsilon_prime() : 0.0;
  }

  SanitizeResult Run(const Document& doc, uint64_t first_record) {
    const Vocabulary& vocab = mapping_.vocab();
    if (baseline_) {
      std::vector<TokenId> needed;
      for (const Record& r : doc.records) {
        for (const TokenSpan& t : r) {
          if (IsPassthrough(t.surface)) continue;
          if (auto id = vocab.Find(t.surface)) needed.push_back(*id);
        }
      }
      baseline_->Prepare(needed);
    }

    SanitizeResult result;
    result.baseline_epsilon_prime = baseline_epsilon_prime();
    result.document.records.resize(doc.records.size());
    std::vector<SanitizeCounts> counts(doc.records.size());
    const RandomStream stream(config_.seed);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(doc.records.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const Record& in = doc.records[i];
      Record& out = result.document.records[i];
      SanitizeCounts& c = counts[i];
      out.resize(in.size());
      c.records = 1;
      c.tokens = in.size();
      for (size_t j = 0; j < in.size(); ++j) {
        out[j].begin = in[j].begin;
        out[j].end = in[j].end;
        const std::string& surface = in[j].surface;
        if (IsPassthrough(surface)) {
          out[j].surface = surface;
          ++c.stopword_passthrough;
          continue;
        }
        Substream s = stream.At(first_record + i, j);
        if (auto id = vocab.Find(surface)) {
          const TokenId y =
              baseline_ ? baseline_->Sample(*id, s) : em_->Sample(*id, s);
          out[j].surface = vocab.surface(y);
          ++c.replaced;
        } else if (IsNumericSurface(surface)) {
          if (config_.number_policy == NumberPolicy::kRandomizeDigits) {
            out[j].surface = RandomizeDigits(surface, s);
            ++c.numeric_randomized;
          } else {
            out[j].surface = surface;
            ++c.numeric_retained;
          }
        } else {
          out[j].surface = surface;
          ++c.oov_retained;
        }
      }
    }
    for (const SanitizeCounts& c : counts) result.counts += c;
    return result;
  }

 private:
  PreparedSanitizer(const MappingTable& mapping, const SanitizeConfig& config,
                    SamplerParams params)
      : mapping_(mapping), config_(config), params_(params) {}

  bool IsPassthrough(const std::string& surface) const {
    return config_.mode == Mode::kCusTextPlus &&
           config_.stopwords.contains(surface);
  }

  const MappingTable& mapping_;
  const SanitizeConfig& config_;
  SamplerParams params_;
  std::unique_ptr<EmSampler> em_;
  std::unique_ptr<BaselineSampler> baseline_;
};

struct SplitLine {
  std::vector<std::string> columns;  // empty in plain-text mode
  std::string text;
};

absl::StatusOr<SplitLine> SplitColumns(std::string line,
                                       const CorpusOptions& options,
                                       size_t line_no,
                                       std::optional<size_t>& column_count) {
  SplitLine out;
  if (!options.tsv_column) {
    out.text = std::move(line);
    return out;
  }
  out.columns = absl::StrSplit(line, '\t');
  if (!column_count) column_count = out.columns.size();
  if (out.columns.size() != *column_count) {
    return absl::InvalidArgumentError(internal::StrCat(
        "malformed TSV row at line ", line_no, ": expected ", *column_count,
        " columns, found ", out.columns.size()));
  }
  if (*options.tsv_column >= out.columns.size()) {
    return absl::InvalidArgumentError(
        internal::StrCat("TSV column ", *options.tsv_column,
                     " does not exist at line ", line_no, " (",
                     out.columns.size(), " columns)"));
  }
  out.text = out.columns[*options.tsv_column];
  return out;
}

}  // namespace

absl::StatusOr<Mode> ModeFromName(std::string_view name) {
  if (name == "custext") return Mode::kCusText;
  if (name == "custext_plus") return Mode::kCusTextPlus;
  if (name == "baseline") return Mode::kBaseline;
  return absl::InvalidArgumentError(internal::StrCat(
      "unknown mode '", name, "' (expected custext, custext_plus or baseline)"));
}

std::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kCusText:
      return "custext";
    case Mode::kCusTextPlus:
      return "custext_plus";
    case Mode::kBaseline:
      return "baseline";
  }
  return "?";
}

absl::StatusOr<NumberPolicy> NumberPolicyFromName(std::string_view name) {
  if (name == "randomize_digits") return NumberPolicy::kRandomizeDigits;
  if (name == "retain") return NumberPolicy::kRetain;
  return absl::InvalidArgumentError(internal::StrCat(
      "unknown number policy '", name, "' (expected randomize_digits or retain)"));
}

std::string_view NumberPolicyName(NumberPolicy policy) {
  return policy == NumberPolicy::kRandomizeDigits ? "randomize_digits"
                                                  : "retain";
}

absl::Status SanitizeConfig::Validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        internal::StrCat("epsilon must be positive and finite, got ", epsilon));
  }
  if (k == 0) return absl::InvalidArgumentError("K must be at least 1");
  if (mode == Mode::kCusTextPlus && stopwords.empty()) {
    return absl::InvalidArgumentError(
        "custext_plus mode requires a nonempty stopword list");
  }
  if (mode == Mode::kBaseline && measure.kind() != MeasureKind::kEuclidean) {
    return absl::InvalidArgumentError(
        "MLDP baseline requires a metric distance");
  }
  if (baseline_epsilon_prime &&
      (!(*baseline_epsilon_prime > 0.0) ||
       !std::isfinite(*baseline_epsilon_prime))) {
    return absl::InvalidArgumentError("epsilon' must be positive and finite");
  }
  return absl::OkStatus();
}

SanitizeCounts& SanitizeCounts::operator+=(const SanitizeCounts& o) {
  records += o.records;
  tokens += o.tokens;
  replaced += o.replaced;
  stopword_passthrough += o.stopword_passthrough;
  oov_retained += o.oov_retained;
  numeric_randomized += o.numeric_randomized;
  numeric_retained += o.numeric_retained;
  return *this;
}

Record Tokenize(std::string_view line, bool lowercase) {
  Record record;
  auto emit = [&](size_t b, size_t e) {
    TokenSpan t;
    t.surface.assign(line.substr(b, e - b));
    if (lowercase) {
      std::transform(t.surface.begin(), t.surface.end(), t.surface.begin(),
                     AsciiLower);
    }
    t.begin = b;
    t.end = e;
    record.push_back(std::move(t));
  };
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsSpace(line[i])) ++i;
    if (i == line.size()) break;
    size_t b = i;
    while (i < line.size() && !IsSpace(line[i])) ++i;
    size_t e = i;
    while (b < e && IsPunct(line[b])) {
      emit(b, b + 1);
      ++b;
    }
    size_t core_end = e;
    while (core_end > b && IsPunct(line[core_end - 1])) --core_end;
    if (core_end > b) emit(b, core_end);
    for (size_t p = core_end; p < e; ++p) emit(p, p + 1);
  }
  return record;
}

std::string JoinRecord(const Record& record) {
  return absl::StrJoin(record, " ", [](std::string* out, const TokenSpan& t) {
    out->append(t.surface);
  });
}

bool IsNumericSurface(std::string_view surface) {
  bool digit = false;
  for (char c : surface) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != '.' && c != ',' && c != ':' && c != '/' && c != '-' &&
               c != '+') {
      return false;
    }
  }
  return digit;
}

std::string RandomizeDigits(std::string_view surface, Substream& stream) {
  std::string out(surface);
  for (char& c : out) {
    if (c >= '0' && c <= '9') c = static_cast<char>('0' + stream.NextBelow(10));
  }
  return out;
}

absl::StatusOr<StopwordSet> LoadStopwords(const std::filesystem::path& path,
                                          bool lowercase) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(
        internal::StrCat("cannot open stopword file ", path.string()));
  }
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    for (TokenSpan& t : Tokenize(line, lowercase)) {
      words.insert(std::move(t.surface));
    }
  }
  return words;
}

absl::StatusOr<SanitizeResult> SanitizeDocument(const Document& doc,
                                                const MappingTable& mapping,
                                                const SanitizeConfig& config,
                                                const EmbeddingTable* table,
                                                uint64_t first_record) {
  auto prepared = PreparedSanitizer::Create(mapping, config, table);
  if (!prepared.ok()) return prepared.status();
  return (*prepared)->Run(doc, first_record);
}

absl::StatusOr<SanitizeCounts> SanitizeCorpus(
    const std::filesystem::path& input, const std::filesystem::path& output,
    const MappingTable& mapping, const SanitizeConfig& config,
    const CorpusOptions& options, const EmbeddingTable* table) {
  auto prepared = PreparedSanitizer::Create(mapping, config, table);
  if (!prepared.ok()) return prepared.status();

  std::ifstream in(input, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(
        internal::StrCat("cannot open input ", input.string()));
  }
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(
        internal::StrCat("cannot write output ", output.string()));
  }

  SanitizeCounts total;
  std::optional<size_t> column_count;
  size_t line_no = 0;
  bool eof = false;
  std::string line;
  if (options.has_header && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (options.tsv_column) {
      auto split = SplitColumns(line, options, line_no, column_count);
      if (!split.ok()) return split.status();
    }
    out << line << '\n';
  }
  while (!eof) {
    std::vector<SplitLine> chunk;
    Document doc;
    const uint64_t first_record = line_no;
    while (chunk.size() < kLinesPerChunk) {
      if (!std::getline(in, line)) {
        eof = true;
        break;
      }
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto split = SplitColumns(std::move(line), options, line_no, column_count);
      if (!split.ok()) return split.status();
      doc.records.push_back(Tokenize(split->text, config.lowercase));
      chunk.push_back(*std::move(split));
    }
    if (in.bad()) {
      return absl::DataLossError(
          internal::StrCat("read error in ", input.string()));
    }
    if (chunk.empty()) break;
    SanitizeResult result = (*prepared)->Run(doc, first_record);
    total += result.counts;
    for (size_t i = 0; i < chunk.size(); ++i) {
      std::string text = JoinRecord(result.document.records[i]);
      if (options.tsv_column) {
        chunk[i].columns[*options.tsv_column] = std::move(text);
        out << absl::StrJoin(chunk[i].columns, "\t") << '\n';
      } else {
        out << text << '\n';
      }
    }
  }
  out.flush();
  if (!out) {
    return absl::DataLossError(
        internal::StrCat("failed writing output ", output.string()));
  }
  return total;
}

absl::StatusOr<Document> ReadDocument(const std::filesystem::path& path,
                                      bool lowercase,
                                      const CorpusOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(internal::StrCat("cannot open ", path.string()));
  }
  Document doc;
  std::optional<size_t> column_count;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto split = SplitColumns(std::move(line), options, line_no, column_count);
    if (!split.ok()) return split.status();
    if (line_no == 1 && options.has_header) continue;
    doc.records.push_back(Tokenize(split->text, lowercase));
  }
  return doc;
}

}  // namespace dptext
