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

#include <cmath>
#include <limits>
#include <map>

#include <gtest/gtest.h>

#include "qdiana/error.h"
#include "qdiana/verify.h"

namespace qdiana {
namespace {

const double kInf = std::numeric_limits<double>::infinity();

Vector Vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double x : values) v[k++] = x;
  return v;
}

TEST(DitherTest, ZeroVectorEncodesEmpty) {
  Rng rng(1);
  const QuantizedMessage msg = Dither(Vec({0, 0, 0}), 2.0, 3, rng);
  ASSERT_EQ(msg.blocks.size(), 1u);
  EXPECT_TRUE(msg.blocks[0].entries.empty());
  EXPECT_EQ(Decode(msg), Vec({0, 0, 0}));
  EXPECT_EQ(msg.bit_cost, 64u);
}

TEST(DitherTest, BoundaryLevelIsExact) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    EXPECT_EQ(Decode(Dither(Vec({-7}), 2.0, 4, rng)), Vec({-7}));
  }
}

TEST(DitherTest, RejectsNonFinite) {
  Rng rng(1);
  EXPECT_THROW(Dither(Vec({1, std::nan("")}), 2.0, 1, rng), Error);
  EXPECT_THROW(Dither(Vec({1, kInf}), 2.0, 1, rng), Error);
}

// (3, 4) with p = 2, s = 1: coordinates go to level 1 with probability 0.6 and
// 0.8, independently.
TEST(DitherTest, EnumeratedDistributionOfThreeFour) {
  const Vector x = Vec({3, 4});
  std::map<std::pair<double, double>, double> probs;
  const double up[2] = {0.6, 0.8};
  for (int mask = 0; mask < 4; ++mask) {
    std::vector<double> xi(2);
    double prob = 1.0;
    for (int k = 0; k < 2; ++k) {
      const bool hi = (mask >> k) & 1;
      xi[k] = hi ? 0.99 : 0.0;
      prob *= hi ? up[k] : 1.0 - up[k];
    }
    const Vector q = Decode(DitherWithNoise(x, 2.0, 1, xi));
    probs[{q[0], q[1]}] += prob;
  }
  EXPECT_NEAR((probs[{0.0, 0.0}]), 0.08, 1e-15);
  EXPECT_NEAR((probs[{5.0, 0.0}]), 0.12, 1e-15);
  EXPECT_NEAR((probs[{0.0, 5.0}]), 0.32, 1e-15);
  EXPECT_NEAR((probs[{5.0, 5.0}]), 0.48, 1e-15);

  const ExactMoments exact = ExactDitherMoments(x, 2.0, 1);
  EXPECT_NEAR(exact.mean[0], 3.0, 1e-12);
  EXPECT_NEAR(exact.mean[1], 4.0, 1e-12);
  EXPECT_NEAR(exact.second_moment, 35.0, 1e-12);
}

TEST(DitherTest, NoiseThresholdMatchesLevelRule) {
  // level = floor(s |x| / ||x|| + xi) on either side of 1 - frac.
  const Vector x = Vec({3, 4});
  const std::vector<double> below = {0.39, 0.19};
  const std::vector<double> at = {0.41, 0.21};
  EXPECT_EQ(Decode(DitherWithNoise(x, 2.0, 1, below)), Vec({0, 0}));
  EXPECT_EQ(Decode(DitherWithNoise(x, 2.0, 1, at)), Vec({5, 5}));
}

TEST(SparsifyTest, FullMaskIsExact) {
  Rng rng(3);
  const Vector x = Vec({1.5, -2, 0.25});
  EXPECT_EQ(Decode(Sparsify(x, 3, rng)), x);
}

TEST(SparsifyTest, OneOfTwoEnumeration) {
  const Vector x = Vec({1, 2});
  const std::uint32_t first[] = {0};
  const std::uint32_t second[] = {1};
  EXPECT_EQ(Decode(SparsifyOnto(x, first)), Vec({2, 0}));
  EXPECT_EQ(Decode(SparsifyOnto(x, second)), Vec({0, 4}));
  const ExactMoments exact = ExactSparsifyMoments(x, 1);
  EXPECT_EQ(exact.outcomes, 2u);
  EXPECT_DOUBLE_EQ(exact.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(exact.mean[1], 2.0);
  EXPECT_DOUBLE_EQ(exact.second_moment, 10.0);
}

TEST(SparsifyTest, ZeroVector) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    EXPECT_EQ(Decode(Sparsify(Vec({0, 0}), 1, rng)), Vec({0, 0}));
  }
}

TEST(SparsifyTest, RangeErrors) {
  Rng rng(1);
  EXPECT_THROW(Sparsify(Vec({1, 2}), 0, rng), Error);
  EXPECT_THROW(Sparsify(Vec({1, 2}), 3, rng), Error);
}

TEST(SparsifyTest, EntriesStrictlyIncreasing) {
  Rng rng(5);
  const Vector x = Vector::LinSpaced(50, 1.0, 50.0);
  for (int t = 0; t < 20; ++t) {
    const QuantizedMessage msg = Sparsify(x, 7, rng);
    ASSERT_EQ(msg.sparse.size(), 7u);
    for (std::size_t k = 1; k < msg.sparse.size(); ++k) {
      EXPECT_LT(msg.sparse[k - 1].index, msg.sparse[k].index);
    }
  }
}

TEST(BlockDitherTest, SingletonBlocksAreExact) {
  Rng rng(2);
  const Vector x = Vec({-1.5, 2, 0, 7});
  EXPECT_EQ(Decode(BlockDither(x, UniformBlocks(4, 1), rng)), x);
}

TEST(BlockDitherTest, OneBlockMatchesDither) {
  const Vector x = Vec({3, 4});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng a(seed), b(seed);
    const std::uint32_t blocks[] = {2};
    EXPECT_EQ(Decode(BlockDither(x, blocks, a)), Decode(Dither(x, 2.0, 1, b)));
  }
}

TEST(BlockDitherTest, SizeMismatch) {
  Rng rng(1);
  const std::uint32_t blocks[] = {1, 1};
  EXPECT_THROW(BlockDither(Vec({1, 2, 3}), blocks, rng), Error);
}

TEST(DecodeTest, IdentityRoundTrip) {
  EXPECT_EQ(Decode(IdentityEncode(Vec({1.5, -2}))), Vec({1.5, -2}));
}

TEST(DecodeTest, DirectFormula) {
  QuantizedMessage msg;
  msg.spec = QuantizerSpec::Dither(2.0, 1);
  msg.dim = 2;
  msg.blocks = {DitherPayload{5.0, {{0, false, 1}}}};
  EXPECT_EQ(Decode(msg), Vec({5, 0}));
  msg.blocks[0].entries.clear();
  EXPECT_EQ(Decode(msg), Vec({0, 0}));
}

TEST(DecodeTest, CorruptPayloads) {
  QuantizedMessage msg;
  msg.spec = QuantizerSpec::Dither(2.0, 1);
  msg.dim = 2;
  msg.blocks = {DitherPayload{5.0, {{2, false, 1}}}};
  try {
    Decode(msg);
    FAIL() << "index out of range accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCorruptMessage);
  }
  msg.blocks = {DitherPayload{5.0, {{0, false, 3}}}};
  EXPECT_THROW(Decode(msg), Error);
}

TEST(OmegaBoundTest, Examples) {
  EXPECT_EQ(OmegaBound(QuantizerSpec::Identity(), 10), 0.0);
  EXPECT_DOUBLE_EQ(OmegaBound(QuantizerSpec::Sparsify(10), 100), 9.0);
  EXPECT_DOUBLE_EQ(OmegaBound(QuantizerSpec::Dither(2.0, 1), 100), 12.0);
  EXPECT_DOUBLE_EQ(OmegaBound(QuantizerSpec::BlockDither(UniformBlocks(4, 2)), 4),
                   std::sqrt(2.0) + 1.0);
}

TEST(OmegaBoundTest, PositiveForEveryNonIdentityScheme) {
  EXPECT_GT(OmegaBound(QuantizerSpec::Dither(kInf, 4), 3), 0.0);
  EXPECT_GT(OmegaBound(QuantizerSpec::Dither(1.0, 1), 1), 0.0);
  EXPECT_GT(OmegaBound(QuantizerSpec::BlockDither({1, 1}), 2), 0.0);
}

// Worst-case vectors from the per-vector expression stay below the bound.
TEST(OmegaBoundTest, DominatesPerVectorValue) {
  Rng rng(9);
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    for (std::uint32_t s : {1u, 2u, 8u}) {
      const double bound = OmegaBound(QuantizerSpec::Dither(p, s), 30);
      for (int t = 0; t < 50; ++t) {
        Vector x(30);
        for (Eigen::Index k = 0; k < 30; ++k) x[k] = rng.Normal();
        EXPECT_LE(DitherOmegaAt(x, p, s), bound + 1e-12);
      }
      EXPECT_LE(DitherOmegaAt(Vector::Ones(30), p, s), bound + 1e-12);
    }
  }
}

TEST(BitCostTest, Examples) {
  const LedgerModel ledger;
  EXPECT_EQ(IdentityEncode(Vector::Ones(20), ledger).bit_cost, 1280u);

  QuantizedMessage msg;
  msg.spec = QuantizerSpec::Dither(2.0, 1);
  msg.dim = 100;
  msg.blocks = {DitherPayload{1.0, {{0, false, 1}, {5, true, 1}, {99, false, 2}}}};
  EXPECT_EQ(BitCost(msg, ledger), 91u);
  msg.blocks[0].entries.clear();
  EXPECT_EQ(BitCost(msg, ledger), 64u);
}

TEST(BitCostTest, SparsifyAndFloatWidth) {
  LedgerModel ledger;
  ledger.float_bits = 32;
  const std::uint32_t idx[] = {1, 4};
  const QuantizedMessage msg = SparsifyOnto(Vector::Ones(8), idx, ledger);
  EXPECT_EQ(msg.bit_cost, 2u * (3u + 32u));
  ledger.index_bits = 16;
  EXPECT_EQ(BitCost(msg, ledger), 2u * (16u + 32u));
}

TEST(BitCostTest, MessageCostMatchesRecomputation) {
  Rng rng(4);
  const Vector x = Vector::LinSpaced(40, -3.0, 5.0);
  for (const QuantizerSpec& spec :
       {QuantizerSpec::Identity(), QuantizerSpec::Dither(2.0, 3),
        QuantizerSpec::Sparsify(6), QuantizerSpec::BlockDither(UniformBlocks(40, 7))}) {
    const QuantizedMessage msg = Quantize(spec, x, rng);
    EXPECT_EQ(msg.bit_cost, BitCost(msg, LedgerModel{})) << spec.Describe();
  }
}

TEST(CeilLog2Test, Values) {
  EXPECT_EQ(CeilLog2(1), 0);
  EXPECT_EQ(CeilLog2(2), 1);
  EXPECT_EQ(CeilLog2(3), 2);
  EXPECT_EQ(CeilLog2(100), 7);
  EXPECT_EQ(CeilLog2(1024), 10);
}

TEST(SerializeTest, RoundTripsEveryScheme) {
  Rng rng(8);
  const Vector x = Vector::LinSpaced(17, -2.0, 3.0);
  for (const QuantizerSpec& spec :
       {QuantizerSpec::Identity(), QuantizerSpec::Dither(kInf, 2),
        QuantizerSpec::Dither(1.0, 1), QuantizerSpec::Sparsify(4),
        QuantizerSpec::BlockDither(UniformBlocks(17, 5))}) {
    const QuantizedMessage msg = Quantize(spec, x, rng);
    const QuantizedMessage back = Deserialize(Serialize(msg));
    EXPECT_EQ(back, msg) << spec.Describe();
  }
}

TEST(SerializeTest, TruncatedInputIsCorrupt) {
  Rng rng(8);
  std::vector<std::uint8_t> bytes = Serialize(Dither(Vector::Ones(5), 2.0, 1, rng));
  bytes.pop_back();
  EXPECT_THROW(Deserialize(bytes), Error);
}

TEST(SpecTest, Validation) {
  EXPECT_THROW(QuantizerSpec::Dither(0.5, 1).Validate(3), Error);
  EXPECT_THROW(QuantizerSpec::Dither(2.0, 0).Validate(3), Error);
  EXPECT_THROW(QuantizerSpec::BlockDither({2, 0}).Validate(2), Error);
  EXPECT_NO_THROW(QuantizerSpec::Dither(kInf, 1).Validate(3));
}

TEST(UniformBlocksTest, RemainderGoesLast) {
  EXPECT_EQ(UniformBlocks(10, 4), (std::vector<std::uint32_t>{4, 4, 2}));
  EXPECT_EQ(UniformBlocks(8, 4), (std::vector<std::uint32_t>{4, 4}));
}

}  // namespace
}  // namespace qdiana
