// Copyright 2026 The gamedyn Authors
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

#ifndef GAMEDYN_RNG_HPP
#define GAMEDYN_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace gamedyn {

// Philox 4x32-10 counter-based generator (Salmon et al., SC'11).
// One block = 4 x 32-bit words per (key, counter) pair; keyed by the run seed
// and a per-path stream index. Draws depend only on (seed, stream, call
// order), so Monte Carlo paths are bit-reproducible under any scheduling.
namespace philox {

inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace philox

// A seeded, indexed random stream. Each Monte Carlo path owns one stream;
// streams with distinct (seed, stream) indices are statistically independent.
class SeededStream {
 public:
  SeededStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint64_t seed() const {
    return (static_cast<std::uint64_t>(key_[1]) << 32) | key_[0];
  }
  std::uint64_t stream() const {
    return (static_cast<std::uint64_t>(stream_hi_) << 32) | stream_lo_;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    const std::uint64_t bits = next_u64();
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; pairs are cached so draws stay aligned
  // with the underlying word stream.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t next_u64() {
    if (word_pos_ >= 4) refill();
    const std::uint32_t lo = words_[word_pos_];
    const std::uint32_t hi = words_[word_pos_ + 1];
    word_pos_ += 2;
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
  }

 private:
  void refill() {
    words_ = philox::block({block_lo_, block_hi_, stream_lo_, stream_hi_}, key_);
    word_pos_ = 0;
    if (++block_lo_ == 0) ++block_hi_;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_ = 0;
  std::uint32_t stream_hi_ = 0;
  std::uint32_t block_lo_ = 0;
  std::uint32_t block_hi_ = 0;
  std::array<std::uint32_t, 4> words_{};
  int word_pos_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gamedyn

#endif  // GAMEDYN_RNG_HPP
