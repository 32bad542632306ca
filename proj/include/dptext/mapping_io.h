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

// Mapping artifact file. All integers little-endian, doubles as IEEE-754
// binary64 bit patterns:
//
//   char[8]  magic "DPTXMAP\0"
//   u32      format version (1)
//   u32      K
//   u8       measure kind (0 euclidean, 1 cosine)
//   u8       seed order (0 vocab, 1 frequency)
//   u16      reserved, 0
//   u64      vocab hash of the embedding table
//   u64      vocabulary size V
//   V x      { u32 byte length, bytes }         token surfaces in id order
//   u64      group count G
//   G x      { u32 n, u32 ids[n], f64 d_min, f64 d_max, f64 scores[n*n] }
//   u64      FNV-1a checksum of every preceding byte
//
// The layout is a pure function of the MappingTable, so load followed by
// save reproduces the input bytes.

#ifndef DPTEXT_MAPPING_IO_H_
#define DPTEXT_MAPPING_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dptext/mapping.h"

namespace dptext {

inline constexpr std::string_view kMappingMagic{"DPTXMAP\0", 8};
inline constexpr uint32_t kMappingFormatVersion = 1;

std::string SerializeMapping(const MappingTable& mapping);

// Fails with DataLossError on bad magic, truncation or checksum mismatch.
absl::StatusOr<MappingTable> DeserializeMapping(std::string_view bytes,
                                                std::string_view source_name);

absl::Status WriteMapping(const MappingTable& mapping,
                          const std::filesystem::path& path);
absl::StatusOr<MappingTable> ReadMapping(const std::filesystem::path& path);

// Debug export: one JSON object per group per line.
std::string MappingToJsonLines(const MappingTable& mapping);

}  // namespace dptext

#endif  // DPTEXT_MAPPING_IO_H_
