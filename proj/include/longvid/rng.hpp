// Copyright 2026 The longvid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LONGVID_RNG_HPP_
#define LONGVID_RNG_HPP_

#include <cstdint>
#include <cstddef>

namespace longvid {

/// SplitMix64. Chosen over <random> engines + distributions because the
/// stream must be bit-identical across standard library implementations;
/// every seeded artifact (init, mock features, review sampling) goes
/// through this generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [-bound, bound).
  double next_symmetric(double bound) { return (2.0 * next_double() - 1.0) * bound; }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t next_index(std::size_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return static_cast<std::size_t>(v % n);
  }

 private:
  std::uint64_t state_;
};

/// Order-sensitive 64-bit mix, used to derive sub-stream seeds from keys.
inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace longvid

#endif  // LONGVID_RNG_HPP_
