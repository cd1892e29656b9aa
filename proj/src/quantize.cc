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

#include "qdiana/quantize.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>

#include "qdiana/error.h"

namespace qdiana {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void Invalid(const std::string& what) {
  throw Error(ErrorKind::kInvalidInput, what);
}

[[noreturn]] void Corrupt(const std::string& what) {
  throw Error(ErrorKind::kCorruptMessage, "corrupt message: " + what);
}

void RequireFinite(const Vector& x) {
  if (!x.allFinite()) Invalid("quantizer input contains non-finite values");
}

void RequireDim(const Vector& x) {
  if (x.size() == 0) Invalid("quantizer input is empty");
  if (static_cast<std::uint64_t>(x.size()) >
      std::numeric_limits<std::uint32_t>::max()) {
    Invalid("quantizer input exceeds 2^32 coordinates");
  }
}

DitherPayload DitherSpan(std::span<const double> x, double p, std::uint32_t s,
                         std::span<const double> xi) {
  DitherPayload out;
  const double norm = LpNorm(x, p);
  if (norm == 0.0) return out;
  out.norm = norm;
  const double levels = static_cast<double>(s);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    const double scaled = levels * std::abs(x[i]) / norm;
    const auto level = static_cast<std::uint32_t>(std::floor(scaled + xi[i]));
    if (level == 0) continue;
    out.entries.push_back(
        {static_cast<std::uint32_t>(i), std::signbit(x[i]), level});
  }
  return out;
}

// One uniform per coordinate, zero or not, so that stream consumption
// depends only on the dimension.
std::vector<double> DrawNoise(std::size_t count, Rng& rng) {
  std::vector<double> xi(count);
  for (double& v : xi) v = rng.Uniform();
  return xi;
}

std::uint64_t DitherPayloadBits(const DitherPayload& payload,
                                std::size_t block_dim, std::uint32_t s,
                                const LedgerModel& ledger) {
  const std::uint64_t per_entry = static_cast<std::uint64_t>(
      ledger.IndexWidth(block_dim) + 1 + CeilLog2(std::uint64_t{s} + 1));
  return static_cast<std::uint64_t>(ledger.float_bits) +
         payload.entries.size() * per_entry;
}

void DecodeDitherPayload(const DitherPayload& payload, std::uint32_t s,
                         std::size_t offset, std::size_t block_dim,
                         Vector& out) {
  if (!std::isfinite(payload.norm) || payload.norm < 0.0) {
    Corrupt("dither norm must be finite and nonnegative");
  }
  std::int64_t previous = -1;
  for (const DitherEntry& e : payload.entries) {
    if (e.index >= block_dim) Corrupt("dither index out of range");
    if (static_cast<std::int64_t>(e.index) <= previous) {
      Corrupt("dither indices must be strictly increasing");
    }
    if (e.level == 0 || e.level > s + 1) Corrupt("dither level out of range");
    previous = e.index;
    const double magnitude = payload.norm * e.level / s;
    out[static_cast<Eigen::Index>(offset + e.index)] =
        e.negative ? -magnitude : magnitude;
  }
}

// --- little-endian byte helpers -------------------------------------------

class Writer {
 public:
  void U8(std::uint8_t v) { bytes_.push_back(v); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void F64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  std::vector<std::uint8_t> Take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t U8() {
    Need(1);
    return bytes_[pos_++];
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
    return v;
  }
  double F64() {
    Need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_++]} << (8 * i);
    return std::bit_cast<double>(v);
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) Corrupt("truncated payload");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void WriteDitherPayload(Writer& w, const DitherPayload& payload) {
  w.F64(payload.norm);
  w.U32(static_cast<std::uint32_t>(payload.entries.size()));
  for (const DitherEntry& e : payload.entries) {
    w.U32(e.index);
    w.U8(e.negative ? 1 : 0);
    w.U32(e.level);
  }
}

DitherPayload ReadDitherPayload(Reader& r, std::size_t block_dim) {
  DitherPayload payload;
  payload.norm = r.F64();
  const std::uint32_t count = r.U32();
  if (count > block_dim) Corrupt("more dither entries than coordinates");
  payload.entries.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    DitherEntry e{};
    e.index = r.U32();
    const std::uint8_t sign = r.U8();
    if (sign > 1) Corrupt("sign byte must be 0 or 1");
    e.negative = sign == 1;
    e.level = r.U32();
    payload.entries.push_back(e);
  }
  return payload;
}

}  // namespace

// --- LedgerModel -------------------------------------------------------------

void LedgerModel::Validate() const {
  if (float_bits != 32 && float_bits != 64) {
    Invalid("ledger float width must be 32 or 64");
  }
  if (index_bits && (*index_bits < 0 || *index_bits > 64)) {
    Invalid("ledger index width must be in [0, 64]");
  }
}

int LedgerModel::IndexWidth(std::size_t dim) const {
  return index_bits ? *index_bits : CeilLog2(dim);
}

int CeilLog2(std::uint64_t n) {
  if (n <= 1) return 0;
  return 64 - std::countl_zero(n - 1);
}

// --- QuantizerSpec -----------------------------------------------------------

const char* SchemeName(Scheme scheme) {
  switch (scheme) {
    case Scheme::kIdentity: return "identity";
    case Scheme::kDither: return "dither";
    case Scheme::kSparsify: return "sparsify";
    case Scheme::kBlockDither: return "block_dither";
  }
  return "unknown";
}

QuantizerSpec QuantizerSpec::Identity() { return {}; }

QuantizerSpec QuantizerSpec::Dither(double p, std::uint32_t s) {
  QuantizerSpec spec;
  spec.scheme = Scheme::kDither;
  spec.p = p;
  spec.s = s;
  return spec;
}

QuantizerSpec QuantizerSpec::Sparsify(std::uint32_t r) {
  QuantizerSpec spec;
  spec.scheme = Scheme::kSparsify;
  spec.r = r;
  return spec;
}

QuantizerSpec QuantizerSpec::BlockDither(std::vector<std::uint32_t> sizes) {
  QuantizerSpec spec;
  spec.scheme = Scheme::kBlockDither;
  spec.block_sizes = std::move(sizes);
  return spec;
}

void QuantizerSpec::Validate(std::size_t dim) const {
  if (dim == 0) Invalid("dimension must be positive");
  switch (scheme) {
    case Scheme::kIdentity:
      return;
    case Scheme::kDither:
      if (std::isnan(p) || p < 1.0) Invalid("dither requires p >= 1");
      if (s < 1) Invalid("dither requires s >= 1");
      return;
    case Scheme::kSparsify:
      if (r < 1 || r > dim) {
        Invalid("sparsify requires 1 <= r <= d (r=" + std::to_string(r) +
                ", d=" + std::to_string(dim) + ")");
      }
      return;
    case Scheme::kBlockDither: {
      if (block_sizes.empty()) Invalid("block dither needs at least one block");
      std::uint64_t total = 0;
      for (std::uint32_t b : block_sizes) {
        if (b == 0) Invalid("block sizes must be positive");
        total += b;
      }
      if (total != dim) {
        Invalid("block sizes sum to " + std::to_string(total) +
                " but the vector has " + std::to_string(dim) + " coordinates");
      }
      return;
    }
  }
  Invalid("unknown quantizer scheme");
}

std::string QuantizerSpec::Describe() const {
  std::ostringstream os;
  os << SchemeName(scheme);
  switch (scheme) {
    case Scheme::kIdentity: break;
    case Scheme::kDither:
      os << "(p=";
      if (std::isinf(p)) {
        os << "inf";
      } else {
        os << p;
      }
      os << ",s=" << s << ")";
      break;
    case Scheme::kSparsify: os << "(r=" << r << ")"; break;
    case Scheme::kBlockDither: os << "(t=" << block_sizes.size() << ")"; break;
  }
  return os.str();
}

std::vector<std::uint32_t> UniformBlocks(std::size_t dim,
                                         std::size_t block_size) {
  if (dim == 0 || block_size == 0) Invalid("block size and dimension must be positive");
  std::vector<std::uint32_t> sizes;
  for (std::size_t start = 0; start < dim; start += block_size) {
    sizes.push_back(static_cast<std::uint32_t>(std::min(block_size, dim - start)));
  }
  return sizes;
}

std::size_t QuantizedMessage::NonZeros() const {
  switch (spec.scheme) {
    case Scheme::kIdentity:
      return static_cast<std::size_t>(
          std::count_if(dense.begin(), dense.end(), [](double v) { return v != 0.0; }));
    case Scheme::kSparsify:
      return sparse.size();
    case Scheme::kDither:
    case Scheme::kBlockDither: {
      std::size_t nnz = 0;
      for (const auto& b : blocks) nnz += b.entries.size();
      return nnz;
    }
  }
  return 0;
}

// --- norms -------------------------------------------------------------------

double LpNorm(std::span<const double> x, double p) {
  double max_abs = 0.0;
  for (double v : x) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0 || std::isinf(p)) return max_abs;
  if (p == 1.0) {
    double sum = 0.0;
    for (double v : x) sum += std::abs(v);
    return sum;
  }
  if (p == 2.0) {
    double sum = 0.0;
    for (double v : x) sum += v * v;
    if (std::isfinite(sum) && sum > 0.0) return std::sqrt(sum);
    // Overflow or underflow: rescale by the max.
    sum = 0.0;
    for (double v : x) {
      const double t = v / max_abs;
      sum += t * t;
    }
    return max_abs * std::sqrt(sum);
  }
  double sum = 0.0;
  for (double v : x) sum += std::pow(std::abs(v) / max_abs, p);
  return max_abs * std::pow(sum, 1.0 / p);
}

// --- encoders ----------------------------------------------------------------

QuantizedMessage IdentityEncode(const Vector& x, const LedgerModel& ledger) {
  RequireDim(x);
  RequireFinite(x);
  QuantizedMessage msg;
  msg.spec = QuantizerSpec::Identity();
  msg.dim = static_cast<std::uint32_t>(x.size());
  msg.dense.assign(x.data(), x.data() + x.size());
  msg.bit_cost = BitCost(msg, ledger);
  return msg;
}

QuantizedMessage DitherWithNoise(const Vector& x, double p, std::uint32_t s,
                                 std::span<const double> xi,
                                 const LedgerModel& ledger) {
  RequireDim(x);
  RequireFinite(x);
  if (xi.size() != static_cast<std::size_t>(x.size())) {
    Invalid("dither noise has wrong length");
  }
  QuantizedMessage msg;
  msg.spec = QuantizerSpec::Dither(p, s);
  msg.spec.Validate(static_cast<std::size_t>(x.size()));
  msg.dim = static_cast<std::uint32_t>(x.size());
  msg.blocks.push_back(
      DitherSpan(std::span<const double>(x.data(), x.size()), p, s, xi));
  msg.bit_cost = BitCost(msg, ledger);
  return msg;
}

QuantizedMessage Dither(const Vector& x, double p, std::uint32_t s, Rng& rng,
                        const LedgerModel& ledger) {
  RequireDim(x);
  const std::vector<double> xi = DrawNoise(static_cast<std::size_t>(x.size()), rng);
  return DitherWithNoise(x, p, s, xi, ledger);
}

QuantizedMessage SparsifyOnto(const Vector& x,
                              std::span<const std::uint32_t> indices,
                              const LedgerModel& ledger) {
  RequireDim(x);
  RequireFinite(x);
  const auto d = static_cast<std::size_t>(x.size());
  QuantizedMessage msg;
  msg.spec = QuantizerSpec::Sparsify(static_cast<std::uint32_t>(indices.size()));
  msg.spec.Validate(d);
  msg.dim = static_cast<std::uint32_t>(d);
  msg.sparse.reserve(indices.size());
  for (std::size_t t = 0; t < indices.size(); ++t) {
    if (indices[t] >= d || (t > 0 && indices[t] <= indices[t - 1])) {
      Invalid("sparsify indices must be strictly increasing and below d");
    }
    msg.sparse.push_back({indices[t], x[indices[t]]});
  }
  msg.bit_cost = BitCost(msg, ledger);
  return msg;
}

QuantizedMessage Sparsify(const Vector& x, std::uint32_t r, Rng& rng,
                          const LedgerModel& ledger) {
  RequireDim(x);
  const auto d = static_cast<std::size_t>(x.size());
  QuantizerSpec::Sparsify(r).Validate(d);
  // Partial Fisher-Yates: the first r slots form a uniform r-subset.
  std::vector<std::uint32_t> order(d);
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t t = 0; t < r; ++t) {
    const std::size_t j = t + static_cast<std::size_t>(rng.Below(d - t));
    std::swap(order[t], order[j]);
  }
  std::sort(order.begin(), order.begin() + r);
  return SparsifyOnto(x, std::span<const std::uint32_t>(order.data(), r), ledger);
}

QuantizedMessage BlockDither(const Vector& x,
                             std::span<const std::uint32_t> block_sizes,
                             Rng& rng, const LedgerModel& ledger) {
  RequireDim(x);
  RequireFinite(x);
  QuantizedMessage msg;
  msg.spec = QuantizerSpec::BlockDither(
      std::vector<std::uint32_t>(block_sizes.begin(), block_sizes.end()));
  msg.spec.Validate(static_cast<std::size_t>(x.size()));
  msg.dim = static_cast<std::uint32_t>(x.size());
  msg.blocks.reserve(block_sizes.size());
  std::size_t offset = 0;
  for (std::uint32_t size : block_sizes) {
    const std::vector<double> xi = DrawNoise(size, rng);
    msg.blocks.push_back(
        DitherSpan(std::span<const double>(x.data() + offset, size), 2.0, 1, xi));
    offset += size;
  }
  msg.bit_cost = BitCost(msg, ledger);
  return msg;
}

QuantizedMessage Quantize(const QuantizerSpec& spec, const Vector& x, Rng& rng,
                          const LedgerModel& ledger) {
  switch (spec.scheme) {
    case Scheme::kIdentity: return IdentityEncode(x, ledger);
    case Scheme::kDither: return Dither(x, spec.p, spec.s, rng, ledger);
    case Scheme::kSparsify: return Sparsify(x, spec.r, rng, ledger);
    case Scheme::kBlockDither: return BlockDither(x, spec.block_sizes, rng, ledger);
  }
  Invalid("unknown quantizer scheme");
}

// --- decode ------------------------------------------------------------------

void DecodeInto(const QuantizedMessage& msg, Vector& out) {
  if (msg.dim == 0) Corrupt("dimension must be positive");
  try {
    msg.spec.Validate(msg.dim);
  } catch (const Error& e) {
    Corrupt(e.what());
  }
  out.setZero(msg.dim);
  switch (msg.spec.scheme) {
    case Scheme::kIdentity:
      if (msg.dense.size() != msg.dim) Corrupt("dense payload has wrong length");
      for (std::size_t i = 0; i < msg.dense.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = msg.dense[i];
      }
      return;
    case Scheme::kDither:
      if (msg.blocks.size() != 1) Corrupt("dither message needs exactly one payload");
      DecodeDitherPayload(msg.blocks[0], msg.spec.s, 0, msg.dim, out);
      return;
    case Scheme::kBlockDither: {
      if (msg.blocks.size() != msg.spec.block_sizes.size()) {
        Corrupt("block count does not match block sizes");
      }
      std::size_t offset = 0;
      for (std::size_t b = 0; b < msg.blocks.size(); ++b) {
        DecodeDitherPayload(msg.blocks[b], 1, offset, msg.spec.block_sizes[b], out);
        offset += msg.spec.block_sizes[b];
      }
      return;
    }
    case Scheme::kSparsify: {
      if (msg.sparse.size() != msg.spec.r) Corrupt("sparsify payload must have r entries");
      const double scale = static_cast<double>(msg.dim) / msg.spec.r;
      std::int64_t previous = -1;
      for (const SparseEntry& e : msg.sparse) {
        if (e.index >= msg.dim) Corrupt("sparsify index out of range");
        if (static_cast<std::int64_t>(e.index) <= previous) {
          Corrupt("sparsify indices must be strictly increasing");
        }
        previous = e.index;
        out[e.index] = e.value * scale;
      }
      return;
    }
  }
  Corrupt("unknown scheme");
}

Vector Decode(const QuantizedMessage& msg) {
  Vector out;
  DecodeInto(msg, out);
  return out;
}

// --- omega and bits ------------------------------------------------------------

double OmegaBound(const QuantizerSpec& spec, std::size_t dim) {
  spec.Validate(dim);
  const double d = static_cast<double>(dim);
  switch (spec.scheme) {
    case Scheme::kIdentity:
      return 0.0;
    case Scheme::kDither: {
      // Hoelder: ||x||_1 <= sqrt(d) ||x||_2 and
      // ||x||_p <= d^{max(1/p - 1/2, 0)} ||x||_2.
      const double inv_p = std::isinf(spec.p) ? 0.0 : 1.0 / spec.p;
      const double exponent = std::max(inv_p - 0.5, 0.0);
      return 2.0 + std::sqrt(d) * std::pow(d, exponent) / spec.s;
    }
    case Scheme::kSparsify:
      return d / spec.r - 1.0;
    case Scheme::kBlockDither: {
      const std::uint32_t largest =
          *std::max_element(spec.block_sizes.begin(), spec.block_sizes.end());
      return std::sqrt(static_cast<double>(largest)) + 1.0;
    }
  }
  Invalid("unknown quantizer scheme");
}

double DitherOmegaAt(const Vector& x, double p, std::uint32_t s) {
  const std::span<const double> view(x.data(), static_cast<std::size_t>(x.size()));
  const double l2 = LpNorm(view, 2.0);
  if (l2 == 0.0) return 0.0;
  return 2.0 + LpNorm(view, 1.0) * LpNorm(view, p) / (s * l2 * l2);
}

std::uint64_t BitCost(const QuantizedMessage& msg, const LedgerModel& ledger) {
  ledger.Validate();
  const auto w = static_cast<std::uint64_t>(ledger.float_bits);
  switch (msg.spec.scheme) {
    case Scheme::kIdentity:
      return std::uint64_t{msg.dim} * w;
    case Scheme::kDither: {
      std::uint64_t bits = 0;
      for (const auto& payload : msg.blocks) {
        bits += DitherPayloadBits(payload, msg.dim, msg.spec.s, ledger);
      }
      return bits;
    }
    case Scheme::kSparsify:
      return std::uint64_t{msg.spec.r} *
             (static_cast<std::uint64_t>(ledger.IndexWidth(msg.dim)) + w);
    case Scheme::kBlockDither: {
      std::uint64_t bits = 0;
      for (std::size_t b = 0; b < msg.blocks.size(); ++b) {
        bits += DitherPayloadBits(msg.blocks[b], msg.spec.block_sizes.at(b), 1, ledger);
      }
      return bits;
    }
  }
  return 0;
}

// --- wire format -----------------------------------------------------------------

std::vector<std::uint8_t> Serialize(const QuantizedMessage& msg) {
  Writer w;
  w.U8(static_cast<std::uint8_t>(msg.spec.scheme));
  w.U32(msg.dim);
  switch (msg.spec.scheme) {
    case Scheme::kIdentity:
      for (double v : msg.dense) w.F64(v);
      break;
    case Scheme::kDither:
      w.F64(msg.spec.p);
      w.U32(msg.spec.s);
      for (const auto& payload : msg.blocks) WriteDitherPayload(w, payload);
      break;
    case Scheme::kSparsify:
      w.U32(msg.spec.r);
      for (const SparseEntry& e : msg.sparse) {
        w.U32(e.index);
        w.F64(e.value);
      }
      break;
    case Scheme::kBlockDither:
      w.U32(static_cast<std::uint32_t>(msg.spec.block_sizes.size()));
      for (std::uint32_t b : msg.spec.block_sizes) w.U32(b);
      for (const auto& payload : msg.blocks) WriteDitherPayload(w, payload);
      break;
  }
  return w.Take();
}

QuantizedMessage Deserialize(std::span<const std::uint8_t> bytes,
                             const LedgerModel& ledger) {
  Reader r(bytes);
  QuantizedMessage msg;
  const std::uint8_t tag = r.U8();
  if (tag > static_cast<std::uint8_t>(Scheme::kBlockDither)) Corrupt("unknown scheme tag");
  msg.spec.scheme = static_cast<Scheme>(tag);
  msg.dim = r.U32();
  if (msg.dim == 0) Corrupt("dimension must be positive");
  switch (msg.spec.scheme) {
    case Scheme::kIdentity:
      msg.dense.reserve(msg.dim);
      for (std::uint32_t i = 0; i < msg.dim; ++i) msg.dense.push_back(r.F64());
      break;
    case Scheme::kDither:
      msg.spec.p = r.F64();
      msg.spec.s = r.U32();
      msg.blocks.push_back(ReadDitherPayload(r, msg.dim));
      break;
    case Scheme::kSparsify: {
      msg.spec.r = r.U32();
      if (msg.spec.r > msg.dim) Corrupt("r exceeds dimension");
      for (std::uint32_t k = 0; k < msg.spec.r; ++k) {
        SparseEntry e{};
        e.index = r.U32();
        e.value = r.F64();
        msg.sparse.push_back(e);
      }
      break;
    }
    case Scheme::kBlockDither: {
      const std::uint32_t t = r.U32();
      if (t == 0 || t > msg.dim) Corrupt("bad block count");
      for (std::uint32_t b = 0; b < t; ++b) msg.spec.block_sizes.push_back(r.U32());
      for (std::uint32_t b = 0; b < t; ++b) {
        msg.blocks.push_back(ReadDitherPayload(r, msg.spec.block_sizes[b]));
      }
      break;
    }
  }
  if (!r.AtEnd()) Corrupt("trailing bytes");
  // Full structural validation happens in decode.
  Vector scratch;
  DecodeInto(msg, scratch);
  msg.bit_cost = BitCost(msg, ledger);
  return msg;
}

}  // namespace qdiana
