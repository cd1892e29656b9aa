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
#include <string>
#include <vector>

#include "qdiana/linalg.h"
#include "qdiana/parallel.h"
#include "qdiana/problems.h"
#include "qdiana/quantize.h"

namespace qdiana {

enum class Method { kDiana, kVrDiana, kSvrgDiana };
enum class DianaOracle { kFullGrad, kUniform1 };
enum class VrVariant { kLSvrg, kSaga };
enum class Regime { kStronglyConvex, kConvex, kNonconvex };

const char* MethodName(Method method);
const char* RegimeName(Regime regime);

struct MethodConfig {
  Method method = Method::kDiana;
  DianaOracle oracle = DianaOracle::kUniform1;  // DIANA only
  VrVariant variant = VrVariant::kLSvrg;        // VR-DIANA only
  std::size_t epoch_length = 0;                 // SVRG-DIANA: l
  std::vector<double> p_weights;                // SVRG-DIANA: l weights
  double alpha = 0.0;                           // shift step
  double gamma = 0.0;                           // step size

  // Throws ConfigError when alpha (omega + 1) > 1, gamma <= 0, or the
  // SVRG-DIANA weights are malformed.
  void Validate(double omega) const;
};

struct WorkerState {
  Vector h;
  // SAGA: gradients of each component at its last refresh point, and their sum.
  std::vector<Vector> table;
  Vector table_sum;
  // L-SVRG / SVRG: anchor point and (1/m) sum_j grad f_ij(anchor).
  Vector anchor;
  Vector anchor_grad;
};

struct MasterState {
  Vector x;
  Vector h_mean;
  std::vector<Vector> h_copies;
  std::uint64_t k = 0;
  std::uint64_t epoch = 0;  // SVRG-DIANA
  Vector z;                 // SVRG-DIANA anchor of the current epoch
  Vector z_accum;           // running sum_r p_r x^{sl + r}
};

struct RunState {
  MasterState master;
  std::vector<WorkerState> workers;
};

struct RoundLog {
  std::uint64_t k = 0;
  std::vector<std::uint64_t> uplink_bits;  // per worker
  std::uint64_t uplink_total = 0;
  std::uint64_t downlink_bits = 0;  // broadcast of x^k plus the coin bit
  bool coin = false;                // L-SVRG refresh
  bool epoch_start = false;         // SVRG-DIANA
  std::vector<QuantizedMessage> messages;  // only when requested
  Vector aggregate;                        // g^k as used by the master step
};

struct RoundContext {
  const FiniteSumProblem* problem = nullptr;
  QuantizerSpec quantizer;
  LedgerModel ledger;
  MethodConfig config;
  std::uint64_t seed = 0;
  const Executor* executor = nullptr;  // serial when null
  bool record_messages = false;
};

enum class ShiftInit { kZero, kGradient };

// x^0 given, h_i^0 = 0 or grad f_i(x^0); SAGA tables and anchors start at x^0.
RunState Initialize(const FiniteSumProblem& problem, const MethodConfig& config,
                    const Vector& x0, ShiftInit shift_init = ShiftInit::kZero,
                    const Executor* executor = nullptr);

RoundLog DianaRound(RunState& state, const RoundContext& ctx);
RoundLog VrDianaRound(RunState& state, const RoundContext& ctx);
RoundLog SvrgDianaRound(RunState& state, const RoundContext& ctx);

// Dispatches on ctx.config.method.
RoundLog Step(RunState& state, const RoundContext& ctx);

// alpha = 1 / (omega + 1) and the regime's step size (plus l and p_r for
// SVRG-DIANA). `base` supplies the method and its variant fields.
MethodConfig DefaultHyperparams(const MethodConfig& base, Regime regime,
                                const Constants& constants, double omega,
                                std::size_t n, std::size_t m);

// theta = min{mu gamma, alpha / 2}, the SVRG-DIANA strongly convex rate.
double SvrgTheta(double mu, double gamma, double alpha);

}  // namespace qdiana
