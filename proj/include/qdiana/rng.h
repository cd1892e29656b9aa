// Copyright 2026 The qdiana Authors. All Rights Reserved.
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
// ==============================================================================

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace qdiana {

// SplitMix64 finalizer. The constants are part of the reproducibility
// contract: changing them changes every trace.
constexpr std::uint64_t Mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Small splittable generator. Satisfies UniformRandomBitGenerator, but the
// conversions below are used instead of <random> distributions so that
// streams are bit-reproducible across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), Lemire's multiply-shift with rejection.
  std::uint64_t Below(std::uint64_t n) noexcept {
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<__uint128_t>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool Bernoulli(double p) noexcept { return Uniform() < p; }

  // Standard normal via Box-Muller (one value per call, no caching).
  double Normal() noexcept {
    const double u1 = 1.0 - Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

// Logical roles that consume randomness. Each (seed, owner, purpose, round)
// tuple maps to its own stream; no stream serves two roles.
enum class Purpose : std::uint64_t {
  kQuantize = 0x51,
  kSample = 0x53,
  kCoin = 0x43,
  kPartition = 0x50,
  kSynth = 0x59,
  kProbe = 0x46,
  kSigma = 0x56,
};

inline constexpr std::uint64_t kMasterId =
    std::numeric_limits<std::uint64_t>::max();

constexpr std::uint64_t StreamSeed(std::uint64_t seed, std::uint64_t owner,
                                   Purpose purpose,
                                   std::uint64_t round) noexcept {
  std::uint64_t h = Mix64(seed);
  h = Mix64(h ^ owner);
  h = Mix64(h ^ static_cast<std::uint64_t>(purpose));
  return Mix64(h ^ round);
}

inline Rng DeriveStream(std::uint64_t seed, std::uint64_t owner,
                        Purpose purpose, std::uint64_t round) noexcept {
  return Rng(StreamSeed(seed, owner, purpose, round));
}

}  // namespace qdiana
