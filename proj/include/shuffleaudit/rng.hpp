//
// Copyright 2026 The shuffle-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#ifndef SHUFFLEAUDIT_RNG_HPP_
#define SHUFFLEAUDIT_RNG_HPP_

#include <cmath>
#include <cstdint>

namespace shuffleaudit {

// Identifies one deterministic random stream. (master_seed, stream_index) ->
// stream is a pure function, so results never depend on thread count or
// scheduling; audits key one stream per observation index.
struct RngStreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

namespace detail {

// MurmurHash3 64-bit finalizer.
inline std::uint64_t fmix64(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256++ keyed from (master_seed, stream_index) via a SplitMix64
// expansion of a mixed key. Supplies the three deviate kinds the audit
// pipeline needs: raw 64-bit words, bounded integers, standard normals.
class RandomStream {
 public:
  explicit RandomStream(RngStreamKey key) {
    std::uint64_t mixed =
        detail::fmix64(key.master_seed) ^
        detail::fmix64(~key.stream_index * 0x9e3779b97f4a7c15ULL);
    for (auto& word : state_) {
      word = detail::splitmix64(mixed);
    }
    // All-zero state is invalid for xoshiro; unreachable in practice but
    // guarded so a pathological key cannot wedge the generator.
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
      state_[0] = 0x9e3779b97f4a7c15ULL;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result =
        detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  // Unbiased integer in [0, bound); Lemire's multiply-with-rejection.
  std::uint64_t uniform_below(std::uint64_t bound) {
    unsigned __int128 product =
        static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (low < threshold) {
        product = static_cast<unsigned __int128>(next_u64()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via the Marsaglia polar method (exact, no trig).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

 private:
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline RandomStream derive_stream(RngStreamKey key) {
  return RandomStream(key);
}

}  // namespace shuffleaudit

#endif  // SHUFFLEAUDIT_RNG_HPP_
