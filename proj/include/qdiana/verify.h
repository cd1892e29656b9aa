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
#include <string>
#include <vector>

#include "qdiana/algos.h"
#include "qdiana/metrics.h"
#include "qdiana/quantize.h"

namespace qdiana {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExactMoments {
  Vector mean;
  double second_moment = 0.0;
  std::size_t outcomes = 0;  // outcomes with nonzero probability
};

// Exact E Q(x) and E||Q(x)||^2 by enumerating every outcome of the
// implementation together with its probability. Requires d <= 20.
ExactMoments ExactDitherMoments(const Vector& x, double p, std::uint32_t s);
ExactMoments ExactSparsifyMoments(const Vector& x, std::uint32_t r);

struct MomentEstimate {
  Vector mean;
  Vector mean_se;
  double second_moment = 0.0;  // sample mean of ||Q(x)||^2
  double second_moment_se = 0.0;
  double mean_nonzeros = 0.0;
};

// Sample statistics of Q(x) over `samples` independent draws.
MomentEstimate EstimateMoments(const QuantizerSpec& spec, const Vector& x,
                               std::size_t samples, std::uint64_t seed);

struct ContractionEstimate {
  double current = 0.0;    // Lyapunov value at the frozen state
  double mean_next = 0.0;  // sample mean after one round
  double std_err = 0.0;    // standard error of mean_next
  std::size_t samples = 0;
};

// A state displaced from the optimum by Gaussian noise of size `scale` in the
// iterate, shifts, and variance-reduction memory.
RunState PerturbedState(const FiniteSumProblem& problem,
                        const MethodConfig& config, const ReferenceSolution& ref,
                        double scale, std::uint64_t seed);

// One round from a copy of `frozen` per sample (seed = base_seed + sample),
// measured with the method's Lyapunov function.
ContractionEstimate OneStepContraction(const FiniteSumProblem& problem,
                                       const RunState& frozen,
                                       const RoundContext& ctx,
                                       const ReferenceSolution& ref,
                                       const LyapunovParams& params,
                                       std::size_t samples,
                                       std::uint64_t base_seed);

struct VerifyOptions {
  std::uint64_t seed = 1;
  bool quick = false;  // fewer samples
};

// Unbiasedness, second-moment bound, exact enumeration, sparsity.
std::vector<PropertyResult> VerifyQuantizers(const VerifyOptions& options);

// One-step Lyapunov contraction for DIANA and both VR-DIANA variants.
std::vector<PropertyResult> VerifyContraction(const VerifyOptions& options);

}  // namespace qdiana
