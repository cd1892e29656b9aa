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
#include <vector>

#include "qdiana/algos.h"
#include "qdiana/linalg.h"
#include "qdiana/problems.h"

namespace qdiana {

// Optimum of a problem with the gradients the Lyapunov functions need.
struct ReferenceSolution {
  Vector x_star;
  double f_star = 0.0;                  // objective f + R at x_star
  std::vector<Vector> worker_grads;     // grad f_i(x*)
  std::vector<Vector> component_grads;  // grad f_ij(x*), row-major n x m
};

ReferenceSolution MakeReference(const FiniteSumProblem& problem,
                                const Vector& x_star, double f_star);

struct LyapunovParams {
  double c_diana = 0.0;
  double b_vr = 0.0;
  double c_vr = 0.0;
  double b_bar_svrg = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double omega = 0.0;
  std::size_t n = 1;
  std::size_t m = 1;

  // Coefficients for `regime`. DIANA: c = 4 omega / (alpha n). VR-DIANA
  // strongly convex: b = 4 (omega + 1) / (alpha n^2), c = 16 (omega + 1) / n^2,
  // or c = 16 (omega + 1) / (alpha n^2) with `statement_c`; convex:
  // b = 2 (omega + 1) / (alpha n^2), c = 6 (omega + 1) / n^2. SVRG-DIANA:
  // b = 6 omega / (n^2 alpha), b_bar = b / (l (2 gamma - c_s)) with
  // c_s = L gamma^2 (6 omega / n + 2 + 4 / n + 4 b alpha n).
  static LyapunovParams Make(const MethodConfig& config, Regime regime,
                             double L, double omega, std::size_t n,
                             std::size_t m, bool statement_c = false);
};

// H = sum_i ||h_i - grad f_i(x*)||^2 over the workers' shifts.
double ShiftError(const RunState& state, const ReferenceSolution& ref);

// D = sum_ij ||grad f_ij(w_ij) - grad f_ij(x*)||^2 (SAGA tables or L-SVRG
// anchors).
double TableError(const FiniteSumProblem& problem, const RunState& state,
                  const MethodConfig& config, const ReferenceSolution& ref);

// ||x - x*||^2 + (c gamma^2 / n) H.
double LyapunovDiana(const RunState& state, const ReferenceSolution& ref,
                     const LyapunovParams& params);

struct VrLyapunov {
  double psi = 0.0;
  double H = 0.0;
  double D = 0.0;  // SVRG-DIANA: f(z^s) - f* instead
};

// VR-DIANA: psi = ||x - x*||^2 + b gamma^2 H + c gamma^2 D.
// SVRG-DIANA: psi^s = (f(z^s) - f*) + b_bar gamma^2 H at the current state,
// meaningful at epoch boundaries. Throws kWrongMethod for DIANA.
VrLyapunov LyapunovVr(const FiniteSumProblem& problem, const RunState& state,
                      const ReferenceSolution& ref, const LyapunovParams& params,
                      const MethodConfig& config);

double GradNormSq(const FiniteSumProblem& problem, const Vector& x);

// (1/n) sum_i E||grad f_ij(x) - grad f_i(x)||^2 for uniform j, estimated from
// `samples` draws per worker.
double EstimateSigmaSq(const FiniteSumProblem& problem, const Vector& x,
                       std::size_t samples = 10000, std::uint64_t seed = 0);

// min{mu / (L (1 + 36 (omega + 1) / n)), alpha / 2, 3 / (8 m)}.
double VrRate(double mu, double L, double omega, double alpha, std::size_t n,
              std::size_t m);

}  // namespace qdiana
