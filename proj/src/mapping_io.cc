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

#include "dptext/mapping_io.h"

#include <bit>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "strings.h"

namespace dptext {
namespace {

uint64_t Fnv1a(std::string_view bytes) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

class Writer {
 public:
  void U8(uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void U16(uint16_t v) { Le(v, 2); }
  void U32(uint32_t v) { Le(v, 4); }
  void U64(uint64_t v) { Le(v, 8); }
  void F64(double v) { Le(std::bit_cast<uint64_t>(v), 8); }
  void Bytes(std::string_view s) { out_.append(s); }
  std::string Take() { return std::move(out_); }
  std::string_view view() const { return out_; }

 private:
  void Le(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>(v >> (8 * i)));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::optional<uint64_t> Le(int n) {
    if (!Has(n)) return std::nullopt;
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += n;
    return v;
  }
  std::optional<double> F64() {
    auto v = Le(8);
    if (!v) return std::nullopt;
    return std::bit_cast<double>(*v);
  }
  std::optional<std::string_view> Bytes(size_t n) {
    if (!Has(n)) return std::nullopt;
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool Has(size_t n) const { return bytes_.size() - pos_ >= n; }
  size_t pos() const { return pos_; }

 private:
  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string SerializeMapping(const MappingTable& mapping) {
  Writer w;
  w.Bytes(kMappingMagic);
  w.U32(kMappingFormatVersion);
  w.U32(static_cast<uint32_t>(mapping.k()));
  w.U8(static_cast<uint8_t>(mapping.measure().kind()));
  w.U8(static_cast<uint8_t>(mapping.seed_order()));
  w.U16(0);
  w.U64(mapping.vocab_hash());
  const Vocabulary& vocab = mapping.vocab();
  w.U64(vocab.size());
  for (const std::string& s : vocab.surfaces()) {
    w.U32(static_cast<uint32_t>(s.size()));
    w.Bytes(s);
  }
  w.U64(mapping.groups().size());
  for (const Group& g : mapping.groups()) {
    w.U32(static_cast<uint32_t>(g.size()));
    for (TokenId id : g.members) w.U32(id);
    w.F64(g.d_min);
    w.F64(g.d_max);
    for (double u : g.scores) w.F64(u);
  }
  w.U64(Fnv1a(w.view()));
  return w.Take();
}

absl::StatusOr<MappingTable> DeserializeMapping(std::string_view bytes,
                                                std::string_view source_name) {
  auto corrupt = [&](std::string_view what) {
    return absl::DataLossError(
        internal::StrCat(source_name, ": corrupt mapping file: ", what));
  };
  if (bytes.size() < kMappingMagic.size() ||
      bytes.substr(0, kMappingMagic.size()) != kMappingMagic) {
    return absl::DataLossError(
        internal::StrCat(source_name, ": not a mapping file (bad magic)"));
  }
  if (bytes.size() < kMappingMagic.size() + 8) return corrupt("truncated");
  std::string_view body = bytes.substr(0, bytes.size() - 8);
  Reader trailer(bytes.substr(bytes.size() - 8));
  if (*trailer.Le(8) != Fnv1a(body)) return corrupt("checksum mismatch");

  Reader r(body);
  r.Bytes(kMappingMagic.size());
  auto version = r.Le(4);
  if (!version) return corrupt("truncated header");
  if (*version != kMappingFormatVersion) {
    return absl::DataLossError(internal::StrCat(
        source_name, ": unsupported mapping format version ", *version));
  }
  auto k = r.Le(4);
  auto measure_kind = r.Le(1);
  auto order = r.Le(1);
  auto reserved = r.Le(2);
  auto hash = r.Le(8);
  auto vocab_size = r.Le(8);
  if (!k || !measure_kind || !order || !reserved || !hash || !vocab_size) {
    return corrupt("truncated header");
  }
  auto measure = SimilarityMeasure::FromKind(static_cast<uint8_t>(*measure_kind));
  if (!measure.ok()) return corrupt(internal::StdView(measure.status().message()));
  if (*order > static_cast<uint8_t>(SeedOrder::kFrequencyOrder)) {
    return corrupt("unknown seed order");
  }
  // Every surface needs at least 5 bytes; reject absurd counts before
  // reserving.
  if (!r.Has(*vocab_size * 5)) return corrupt("truncated vocabulary");

  std::vector<std::string> surfaces;
  surfaces.reserve(*vocab_size);
  for (uint64_t i = 0; i < *vocab_size; ++i) {
    auto len = r.Le(4);
    if (!len) return corrupt("truncated vocabulary");
    auto s = r.Bytes(*len);
    if (!s) return corrupt("truncated vocabulary");
    surfaces.emplace_back(*s);
  }
  auto vocab = Vocabulary::Create(std::move(surfaces));
  if (!vocab.ok()) return corrupt(internal::StdView(vocab.status().message()));

  auto group_count = r.Le(8);
  if (!group_count || !r.Has(*group_count * 4)) return corrupt("truncated groups");
  std::vector<Group> groups(*group_count);
  for (Group& g : groups) {
    auto n = r.Le(4);
    if (!n || *n == 0 || *n > vocab->size()) return corrupt("bad group size");
    if (!r.Has(*n * 4 + 16 + *n * *n * 8)) return corrupt("truncated group");
    g.members.resize(*n);
    for (TokenId& id : g.members) id = static_cast<TokenId>(*r.Le(4));
    g.d_min = *r.F64();
    g.d_max = *r.F64();
    g.scores.resize(*n * *n);
    for (double& u : g.scores) u = *r.F64();
  }
  if (r.Has(1)) return corrupt("trailing bytes");

  auto mapping =
      MappingTable::Create(*std::move(vocab), std::move(groups), *k, *measure,
                           static_cast<SeedOrder>(*order), *hash);
  if (!mapping.ok()) return corrupt(internal::StdView(mapping.status().message()));
  return mapping;
}

absl::Status WriteMapping(const MappingTable& mapping,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(
        internal::StrCat("cannot write mapping file ", path.string()));
  }
  const std::string bytes = SerializeMapping(mapping);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    return absl::DataLossError(
        internal::StrCat("failed writing mapping file ", path.string()));
  }
  return absl::OkStatus();
}

absl::StatusOr<MappingTable> ReadMapping(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(
        internal::StrCat("cannot open mapping file ", path.string()));
  }
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return DeserializeMapping(bytes, path.string());
}

std::string MappingToJsonLines(const MappingTable& mapping) {
  std::string out;
  const auto& groups = mapping.groups();
  for (size_t g = 0; g < groups.size(); ++g) {
    const Group& group = groups[g];
    nlohmann::json j;
    j["group"] = g;
    j["size"] = group.size();
    j["ids"] = group.members;
    auto& members = j["members"] = nlohmann::json::array();
    for (TokenId id : group.members) {
      members.push_back(std::string(mapping.vocab().surface(id)));
    }
    j["d_min"] = group.d_min;
    j["d_max"] = group.d_max;
    auto& rows = j["scores"] = nlohmann::json::array();
    for (size_t i = 0; i < group.size(); ++i) {
      auto row = group.row(i);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace dptext
