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

// Position-keyed random substreams.
//
// Every random draw in the library comes from a Substream derived from
// (master seed, domain, a, b). Deriving the same key always yields the same
// sequence, so results do not depend on processing order or thread count.
// The std distributions are avoided on purpose: their output is
// implementation-defined and artifacts must be byte-reproducible.

#ifndef DPTEXT_RANDOM_H_
#define DPTEXT_RANDOM_H_

#include <cstdint>
#include <limits>

namespace dptext {

// SplitMix64 finalizer.
constexpr uint64_t Mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// SplitMix64 generator. Satisfies UniformRandomBitGenerator.
class Substream {
 public:
  using result_type = uint64_t;

  constexpr explicit Substream(uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix64(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  constexpr double NextUniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform on [0, bound), unbiased. bound must be positive.
  constexpr uint64_t NextBelow(uint64_t bound) {
    const uint64_t limit = max() - max() % bound;
    uint64_t x = (*this)();
    while (x >= limit) x = (*this)();
    return x % bound;
  }

 private:
  uint64_t state_;
};

// Separates the uses of one master seed so that, e.g., sanitizing record 3
// and running query-attack trial 3 never share draws.
enum class StreamDomain : uint64_t {
  kSanitize = 1,
  kQueryAttack = 2,
  kInversion = 3,
  kSampling = 4,
};

class RandomStream {
 public:
  constexpr explicit RandomStream(uint64_t master_seed)
      : master_seed_(master_seed) {}

  constexpr uint64_t master_seed() const { return master_seed_; }

  // Substream for position (a, b), e.g. (record index, token index).
  constexpr Substream At(uint64_t a, uint64_t b,
                         StreamDomain domain = StreamDomain::kSanitize) const {
    uint64_t h = Mix64(master_seed_ ^ Mix64(static_cast<uint64_t>(domain)));
    h = Mix64(h + 0x9e3779b97f4a7c15ULL * (a + 1));
    h = Mix64(h ^ (0xd1b54a32d192ed03ULL * (b + 1)));
    return Substream(h);
  }

 private:
  uint64_t master_seed_;
};

}  // namespace dptext

#endif  // DPTEXT_RANDOM_H_
