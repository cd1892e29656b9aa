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

#include "qdiana/config.h"

#include <cmath>

#include <gtest/gtest.h>

#include "qdiana/error.h"

namespace qdiana {
namespace {

const char* kBase = R"({
  "problem": {"type": "synthetic", "loss": "quadratic", "d": 5, "n": 2, "m": 3, "seed": 7},
  "method": {"name": "diana", "oracle": "full", "gamma": "auto:strongly_convex"},
  "quantizer": {"scheme": "dither", "p": 2, "s": 1},
  "run": {"iters": 5, "seed": 11}
})";

std::string PathOf(const char* text) {
  try {
    ParseExperiment(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

TEST(ParseExperimentTest, Base) {
  const ExperimentFile f = ParseExperiment(kBase);
  const auto& src = std::get<SyntheticSource>(f.run.problem);
  EXPECT_EQ(src.kind, LossKind::kQuadratic);
  EXPECT_EQ(src.dim, 5u);
  EXPECT_EQ(src.n, 2u);
  EXPECT_EQ(src.m, 3u);
  EXPECT_EQ(src.seed, 7u);
  EXPECT_EQ(f.run.method.method, Method::kDiana);
  EXPECT_EQ(f.run.method.oracle, DianaOracle::kFullGrad);
  EXPECT_TRUE(f.run.auto_alpha);
  EXPECT_TRUE(f.run.auto_gamma);
  EXPECT_EQ(f.run.auto_regime, Regime::kStronglyConvex);
  EXPECT_EQ(f.run.quantizer.scheme, Scheme::kDither);
  EXPECT_EQ(f.run.iters, 5u);
  EXPECT_EQ(f.run.seed, 11u);
  EXPECT_FALSE(f.output_path.has_value());
  EXPECT_TRUE(f.sweep.empty());
}

TEST(ParseExperimentTest, FullSchema) {
  const ExperimentFile f = ParseExperiment(R"({
    "problem": {"type": "synthetic", "loss": "logistic", "d": 20, "n": 4, "m": 50,
                "seed": 1, "lambda2": 0.01, "label_flip": 0.2,
                "regularizer": {"kind": "l1", "lambda": 0.001}},
    "method": {"name": "vr-diana", "variant": "saga", "alpha": 0.1, "gamma": 0.05,
               "shift_init": "gradient", "lyapunov_c": "statement"},
    "quantizer": {"scheme": "dither", "p": "inf", "s": 4},
    "run": {"iters": 100, "seed": 3, "cadence": 10, "threads": 2, "wall_time": true,
            "record_messages": true},
    "ledger": {"float_bits": 32, "index_bits": 12},
    "reference": {"tol": 1e-10, "max_iters": 1000},
    "output": {"path": "out.csv", "binary": "out.bin"},
    "sweep": {"alpha": [0.1, 0.05], "gamma": [0.01]}
  })", "/tmp/base");
  const auto& src = std::get<SyntheticSource>(f.run.problem);
  EXPECT_EQ(src.options.lambda2, 0.01);
  EXPECT_EQ(src.options.label_flip, 0.2);
  EXPECT_EQ(src.options.regularizer.kind, Regularizer::Kind::kL1);
  EXPECT_EQ(f.run.method.variant, VrVariant::kSaga);
  EXPECT_FALSE(f.run.auto_alpha);
  EXPECT_EQ(f.run.method.alpha, 0.1);
  EXPECT_EQ(f.run.method.gamma, 0.05);
  EXPECT_EQ(f.run.shift_init, ShiftInit::kGradient);
  EXPECT_TRUE(f.run.statement_c);
  EXPECT_TRUE(std::isinf(f.run.quantizer.p));
  EXPECT_EQ(f.run.quantizer.s, 4u);
  EXPECT_EQ(f.run.cadence, 10u);
  EXPECT_EQ(f.run.threads, 2);
  EXPECT_TRUE(f.run.record_wall_time);
  EXPECT_TRUE(f.run.record_messages);
  EXPECT_EQ(f.run.ledger.float_bits, 32);
  EXPECT_EQ(f.run.ledger.index_bits, 12);
  EXPECT_EQ(f.run.reference_tol, 1e-10);
  EXPECT_EQ(f.run.reference_max_iters, 1000u);
  ASSERT_TRUE(f.output_path.has_value());
  EXPECT_EQ(f.sweep.alpha, (std::vector<double>{0.1, 0.05}));
  EXPECT_EQ(f.sweep.gamma, (std::vector<double>{0.01}));
}

TEST(ParseExperimentTest, LibsvmPathResolvesAgainstBaseDir) {
  const ExperimentFile f = ParseExperiment(R"({
    "problem": {"type": "libsvm", "path": "data/a.txt", "n": 3, "seed": 2},
    "method": {"name": "diana", "gamma": 0.1},
    "quantizer": {"scheme": "identity"}
  })", "/base");
  const auto& src = std::get<FileSource>(f.run.problem);
  EXPECT_EQ(src.path, std::filesystem::path("/base/data/a.txt"));
  EXPECT_EQ(src.n, 3u);
}

TEST(ParseExperimentTest, ErrorsNameTheKeyPath) {
  EXPECT_EQ(PathOf(R"({"problem": {"type": "synthetic"}, "method": {"name": "diana", "gamma": 1},
                       "bogus": 1})"), "bogus");
  EXPECT_EQ(PathOf(R"({"problem": {"type": "synthetic", "dd": 3},
                       "method": {"name": "diana", "gamma": 1}})"), "problem.dd");
  EXPECT_EQ(PathOf(R"({"problem": {"type": "synthetic"},
                       "method": {"name": "diana", "gama": 1}})"), "method.gama");
  EXPECT_EQ(PathOf(R"({"problem": {"type": "synthetic"}, "method": {"name": "diana"}})"),
            "method.gamma");
  EXPECT_EQ(PathOf(R"({"problem": {"type": "synthetic"},
                       "method": {"name": "adam", "gamma": 1}})"), "method.name");
  EXPECT_EQ(PathOf(R"({"problem": {"type": "synthetic"},
                       "method": {"name": "diana", "gamma": "auto:flat"}})"), "method.gamma");
  EXPECT_EQ(PathOf(R"({"problem": {"type": "synthetic"}, "method": {"name": "diana", "gamma": 1},
                       "quantizer": {"scheme": "dither", "p": 0.5}})"), "quantizer.p");
  EXPECT_EQ(PathOf(R"({"problem": {"type": "synthetic"}, "method": {"name": "diana", "gamma": 1},
                       "ledger": {"float_bits": 16}})"), "ledger.float_bits");
  EXPECT_EQ(PathOf(R"({"problem": {"type": "synthetic"}, "method": {"name": "diana", "gamma": 1},
                       "run": {"iters": "ten"}})"), "run.iters");
  EXPECT_EQ(PathOf(R"({"problem": {"type": "synthetic"},
                       "method": {"name": "diana", "variant": "saga", "gamma": 1}})"),
            "method.variant");
  EXPECT_EQ(PathOf("{not json"), "<root>");
  EXPECT_EQ(PathOf(R"({"method": {"name": "diana", "gamma": 1}})"), "problem");
}

TEST(LoadExperimentTest, MissingFileIsIoError) {
  try {
    LoadExperiment("/nonexistent/missing.json");
    FAIL() << "missing file accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
    EXPECT_NE(std::string(e.what()).find("missing.json"), std::string::npos);
  }
}

TEST(LoadExperimentTest, TinyFixture) {
  const ExperimentFile f = LoadExperiment(QDIANA_TEST_DATA_DIR "/tiny.json");
  EXPECT_EQ(f.run.iters, 5u);
}

TEST(ParseRegimeTest, Names) {
  EXPECT_EQ(ParseRegime("strongly_convex"), Regime::kStronglyConvex);
  EXPECT_EQ(ParseRegime("convex"), Regime::kConvex);
  EXPECT_EQ(ParseRegime("nonconvex"), Regime::kNonconvex);
  EXPECT_THROW(ParseRegime("concave"), Error);
}

TEST(DescribeConfigTest, IsStable) {
  const ExperimentFile f = ParseExperiment(kBase);
  EXPECT_EQ(DescribeConfig(f.run), DescribeConfig(ParseExperiment(kBase).run));
  EXPECT_NE(DescribeConfig(f.run).find("diana"), std::string::npos);
}

}  // namespace
}  // namespace qdiana
