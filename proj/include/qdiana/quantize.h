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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdiana/linalg.h"
#include "qdiana/rng.h"

namespace qdiana {

// Bit accounting for transmitted messages. Purely an accounting model:
// simulation arithmetic is always double precision.
struct LedgerModel {
  int float_bits = 64;                // 32 or 64
  std::optional<int> index_bits;      // default ceil(log2 d) per (block) dim

  void Validate() const;
  int IndexWidth(std::size_t dim) const;
};

// ceil(log2(n)) for n >= 1; 0 for n <= 1.
int CeilLog2(std::uint64_t n);

enum class Scheme : std::uint8_t {
  kIdentity = 0,
  kDither = 1,
  kSparsify = 2,
  kBlockDither = 3,
};

const char* SchemeName(Scheme scheme);

struct QuantizerSpec {
  Scheme scheme = Scheme::kIdentity;
  double p = 2.0;                          // dither norm exponent, may be +inf
  std::uint32_t s = 1;                     // dither levels
  std::uint32_t r = 1;                     // sparsify: kept coordinates
  std::vector<std::uint32_t> block_sizes;  // block dither (p = 2, s = 1)

  static QuantizerSpec Identity();
  static QuantizerSpec Dither(double p, std::uint32_t s);
  static QuantizerSpec Sparsify(std::uint32_t r);
  static QuantizerSpec BlockDither(std::vector<std::uint32_t> block_sizes);

  // Throws kInvalidInput when the spec cannot act on vectors of size `dim`.
  void Validate(std::size_t dim) const;

  std::string Describe() const;

  bool operator==(const QuantizerSpec&) const = default;
};

// Blocks of `block_size` coordinates; the last block takes the remainder.
std::vector<std::uint32_t> UniformBlocks(std::size_t dim,
                                         std::size_t block_size);

struct DitherEntry {
  std::uint32_t index;  // block-local
  bool negative;
  std::uint32_t level;  // 1 <= level <= s + 1

  bool operator==(const DitherEntry&) const = default;
};

struct DitherPayload {
  double norm = 0.0;
  std::vector<DitherEntry> entries;

  bool operator==(const DitherPayload&) const = default;
};

struct SparseEntry {
  std::uint32_t index;
  double value;  // the original coordinate; decode applies d / r

  bool operator==(const SparseEntry&) const = default;
};

// Encoded output of a quantizer. Which payload field is populated depends on
// spec.scheme: Identity -> dense, Dither -> blocks[0], BlockDither -> one
// DitherPayload per block, Sparsify -> sparse.
struct QuantizedMessage {
  QuantizerSpec spec;
  std::uint32_t dim = 0;
  std::vector<double> dense;
  std::vector<DitherPayload> blocks;
  std::vector<SparseEntry> sparse;
  std::uint64_t bit_cost = 0;

  std::size_t NonZeros() const;

  bool operator==(const QuantizedMessage&) const = default;
};

QuantizedMessage IdentityEncode(const Vector& x, const LedgerModel& ledger = {});

// Random dithering: sign(x) * ||x||_p * floor(s |x| / ||x||_p + xi) / s with
// xi uniform on [0,1)^d. The zero vector encodes as an empty payload.
QuantizedMessage Dither(const Vector& x, double p, std::uint32_t s, Rng& rng,
                        const LedgerModel& ledger = {});

// Dithering with caller-supplied noise xi (one value in [0, 1) per
// coordinate). Dither() draws xi from its stream and calls this.
QuantizedMessage DitherWithNoise(const Vector& x, double p, std::uint32_t s,
                                 std::span<const double> xi,
                                 const LedgerModel& ledger = {});

// Keeps a uniformly random r-subset of coordinates, scaled by d / r.
QuantizedMessage Sparsify(const Vector& x, std::uint32_t r, Rng& rng,
                          const LedgerModel& ledger = {});

// Sparsification onto a given strictly increasing index subset.
QuantizedMessage SparsifyOnto(const Vector& x,
                              std::span<const std::uint32_t> indices,
                              const LedgerModel& ledger = {});

// Independent p = 2, s = 1 dithering of consecutive blocks.
QuantizedMessage BlockDither(const Vector& x,
                             std::span<const std::uint32_t> block_sizes,
                             Rng& rng, const LedgerModel& ledger = {});

QuantizedMessage Quantize(const QuantizerSpec& spec, const Vector& x, Rng& rng,
                          const LedgerModel& ledger = {});

// Throws kCorruptMessage on malformed payloads.
Vector Decode(const QuantizedMessage& msg);
void DecodeInto(const QuantizedMessage& msg, Vector& out);

// Worst-case variance parameter omega such that E||Q(x)||^2 <= (omega+1)||x||^2
// for all x in R^dim.
double OmegaBound(const QuantizerSpec& spec, std::size_t dim);

// Per-vector dithering variance parameter 2 + ||x||_1 ||x||_p / (s ||x||_2^2).
double DitherOmegaAt(const Vector& x, double p, std::uint32_t s);

std::uint64_t BitCost(const QuantizedMessage& msg, const LedgerModel& ledger);

double LpNorm(std::span<const double> x, double p);

// Little-endian wire format: scheme tag (u8), dim (u32), scheme params,
// then the payload. bit_cost is not serialized; Deserialize recomputes it
// under `ledger`.
std::vector<std::uint8_t> Serialize(const QuantizedMessage& msg);
QuantizedMessage Deserialize(std::span<const std::uint8_t> bytes,
                             const LedgerModel& ledger = {});

}  // namespace qdiana
