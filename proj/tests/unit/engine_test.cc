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

#include "qdiana/engine.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "qdiana/error.h"
#include "qdiana/report.h"

namespace qdiana {
namespace {

RunConfig SmallRun(Method method = Method::kDiana) {
  RunConfig c;
  SyntheticSource src;
  src.kind = LossKind::kLogistic;
  src.dim = 6;
  src.n = 3;
  src.m = 5;
  src.seed = 4;
  c.problem = src;
  c.method.method = method;
  c.method.epoch_length = method == Method::kSvrgDiana ? 5 : 0;
  if (method == Method::kSvrgDiana) c.method.p_weights = {0, 0, 0, 0, 1};
  c.auto_alpha = true;
  c.method.gamma = 0.5;
  c.quantizer.scheme = Scheme::kDither;
  c.iters = 10;
  c.seed = 3;
  return c;
}

TEST(SolveReferenceTest, QuadraticCenter) {
  Vector center(3);
  center << 1.0, -2.0, 0.5;
  const FiniteSumProblem p = FiniteSumProblem::Quadratic(
      3, 1, 1, {{Matrix::Identity(3, 3), center}}, 0.0);
  const ReferencePoint ref = SolveReference(p, 1e-12);
  EXPECT_LE((ref.x_star - center).norm(), 1e-12);
  EXPECT_LE(ref.residual, 1e-12);
  EXPECT_NEAR(ref.f_star, 0.0, 1e-24);
}

TEST(SolveReferenceTest, ResidualMeetsTolerance) {
  SynthOptions options;
  options.regularizer = Regularizer::L1(0.01);
  const FiniteSumProblem p = SynthProblem(LossKind::kLogistic, 8, 2, 10, 5, options);
  const ReferencePoint ref = SolveReference(p, 1e-12);
  const double L = p.constants().L;
  const Vector next = Prox(p.regularizer(), 1.0 / L, ref.x_star - p.Gradient(ref.x_star) / L);
  EXPECT_LE((ref.x_star - next).norm() * L, 1e-12);
}

TEST(SolveReferenceTest, BudgetExhausted) {
  const FiniteSumProblem p = SynthProblem(LossKind::kLogistic, 8, 2, 10, 5);
  try {
    SolveReference(p, 1e-14, 3);
    FAIL() << "converged in 3 iterations";
  } catch (const NoConvergenceError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNoConvergence);
    EXPECT_EQ(e.best().size(), 8);
    EXPECT_GT(e.residual(), 1e-14);
  }
}

TEST(RunTest, RecordsAtCadence) {
  RunConfig c = SmallRun();
  Trace t = RunExperiment(c);
  ASSERT_EQ(t.records.size(), 11u);
  for (std::size_t k = 0; k <= 10; ++k) EXPECT_EQ(t.records[k].k, k);
  c.cadence = 4;
  t = RunExperiment(c);
  std::vector<std::uint64_t> ks;
  for (const TraceRecord& r : t.records) ks.push_back(r.k);
  EXPECT_EQ(ks, (std::vector<std::uint64_t>{0, 4, 8, 10}));
}

TEST(RunTest, CumulativeBitsIncrease) {
  const Trace t = RunExperiment(SmallRun(Method::kVrDiana));
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    EXPECT_GT(t.records[k].bits_up_cum, t.records[k - 1].bits_up_cum);
    EXPECT_EQ(t.records[k].bits_down_cum - t.records[k - 1].bits_down_cum, 6u * 64u + 1u);
  }
  EXPECT_EQ(t.records.back().bits_up_cum, t.uplink_total);
  EXPECT_EQ(t.records.back().bits_down_cum, t.downlink_total);
}

TEST(RunTest, LedgerEqualsReplayedMessageCosts) {
  for (Method method : {Method::kDiana, Method::kVrDiana, Method::kSvrgDiana}) {
    RunConfig c = SmallRun(method);
    c.record_messages = true;
    const Trace t = RunExperiment(c);
    ASSERT_EQ(t.messages.size(), 10u);
    EXPECT_EQ(ReplayUplinkBits(t, c.ledger), t.uplink_total) << MethodName(method);
  }
}

TEST(RunTest, DeterministicAcrossRunsAndThreads) {
  for (Method method : {Method::kDiana, Method::kVrDiana, Method::kSvrgDiana}) {
    RunConfig c = SmallRun(method);
    const std::string a = ToCsv(RunExperiment(c).records);
    const std::string b = ToCsv(RunExperiment(c).records);
    c.threads = 4;
    const std::string d = ToCsv(RunExperiment(c).records);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, d);
  }
}

TEST(RunTest, DianaColumns) {
  const Trace t = RunExperiment(SmallRun());
  for (const TraceRecord& r : t.records) {
    EXPECT_TRUE(std::isnan(r.D));
    EXPECT_GE(r.f_gap, -1e-10);
    EXPECT_GE(r.H, 0.0);
    EXPECT_GE(r.lyapunov, r.dist_sq);
    EXPECT_EQ(r.wall_ms, 0.0);
  }
  EXPECT_DOUBLE_EQ(t.method.alpha, 1.0 / (t.omega + 1.0));
}

TEST(RunTest, NonconvexColumnIsRunningMeanOfGradNorm) {
  RunConfig c = SmallRun(Method::kVrDiana);
  c.auto_regime = Regime::kNonconvex;
  c.auto_gamma = true;
  const Trace t = RunExperiment(c);
  double sum = 0.0;
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    sum += t.records[k - 1].grad_norm_sq;
    EXPECT_NEAR(t.records[k].lyapunov, sum / static_cast<double>(k), 1e-15 * sum);
  }
}

TEST(RunTest, DivergenceCarriesTrace) {
  RunConfig c = SmallRun();
  c.method.gamma = 1e6;
  c.quantizer.scheme = Scheme::kIdentity;
  c.iters = 1000;
  SyntheticSource src = std::get<SyntheticSource>(c.problem);
  src.kind = LossKind::kQuadratic;
  c.problem = src;
  try {
    RunExperiment(c);
    FAIL() << "no divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDivergence);
    EXPECT_GT(e.k(), 0u);
    EXPECT_LT(e.k(), 1000u);
    EXPECT_FALSE(e.trace().records.empty());
  }
}

TEST(RunTest, GradientShiftInit) {
  RunConfig c = SmallRun();
  c.shift_init = ShiftInit::kGradient;
  const Trace t = RunExperiment(c);
  const FiniteSumProblem p = BuildProblem(c.problem);
  const ReferencePoint ref = SolveReference(p, 1e-12);
  double H = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) {
    H += (p.WorkerGradient(i, Vector::Zero(6)) - p.WorkerGradient(i, ref.x_star)).squaredNorm();
  }
  EXPECT_NEAR(t.records[0].H, H, 1e-12 * H);
}

TEST(RunTest, SigmaEstimateReported) {
  RunConfig c = SmallRun();
  c.estimate_sigma = true;
  const Trace t = RunExperiment(c);
  ASSERT_TRUE(t.sigma_sq.has_value());
  EXPECT_GT(*t.sigma_sq, 0.0);
}

TEST(RunConfigTest, Validation) {
  RunConfig c = SmallRun();
  c.iters = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SmallRun();
  c.cadence = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = SmallRun();
  c.auto_gamma = true;
  try {
    c.Validate();
    FAIL() << "auto gamma without regime";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "method.gamma");
  }
  c = SmallRun();
  c.method.alpha = 1.0;
  c.auto_alpha = false;
  try {
    RunExperiment(c);
    FAIL() << "alpha above 1 / (omega + 1)";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "method.alpha");
  }
}

TEST(QuantizerConfigTest, Resolve) {
  QuantizerConfig q;
  q.scheme = Scheme::kBlockDither;
  EXPECT_THROW(q.Resolve(10), ConfigError);
  q.block_size = 4;
  EXPECT_EQ(q.Resolve(10).block_sizes, (std::vector<std::uint32_t>{4, 4, 2}));
  q.scheme = Scheme::kSparsify;
  q.r = 11;
  EXPECT_THROW(q.Resolve(10), Error);
}

TEST(TraceBinaryTest, RoundTrip) {
  const Trace t = RunExperiment(SmallRun(Method::kVrDiana));
  std::stringstream buf;
  WriteTraceBinary(t, buf);
  const Trace back = ReadTraceBinary(buf);
  EXPECT_EQ(back.records, t.records);
  EXPECT_EQ(back.uplink_total, t.uplink_total);
  EXPECT_EQ(back.downlink_total, t.downlink_total);
  EXPECT_EQ(back.x_final, t.x_final);
}

TEST(TraceBinaryTest, BadMagic) {
  std::stringstream buf("QDXX....");
  EXPECT_THROW(ReadTraceBinary(buf), Error);
}

TEST(RunTest, FStarBelowObservedObjective) {
  const Trace t = RunExperiment(SmallRun(Method::kSvrgDiana));
  for (const TraceRecord& r : t.records) EXPECT_GE(r.f_gap, -1e-10);
}

}  // namespace
}  // namespace qdiana
