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
#include "qdiana/problems.h"

namespace qdiana::testing {

// Plain single-machine-per-worker methods without quantization or shifts.
// They draw component indices and coins from the same streams as the
// distributed methods, so trajectories can be compared under shared seeds.
// Each returns x^0, x^1, ..., x^iters.

std::vector<Vector> ReferenceProxSgd(const FiniteSumProblem& problem,
                                     DianaOracle oracle, double gamma,
                                     std::uint64_t seed, std::size_t iters);

std::vector<Vector> ReferenceSaga(const FiniteSumProblem& problem, double gamma,
                                  std::uint64_t seed, std::size_t iters);

std::vector<Vector> ReferenceLSvrg(const FiniteSumProblem& problem,
                                   double gamma, std::uint64_t seed,
                                   std::size_t iters);

std::vector<Vector> ReferenceSvrg(const FiniteSumProblem& problem, double gamma,
                                  std::size_t epoch_length,
                                  const std::vector<double>& p_weights,
                                  std::uint64_t seed, std::size_t iters);

// Runs a distributed method with the identity quantizer and returns its
// iterates in the same layout.
std::vector<Vector> IdentityTrajectory(const FiniteSumProblem& problem,
                                       const MethodConfig& config,
                                       std::uint64_t seed, std::size_t iters);

struct TrajectoryDiff {
  std::size_t first_mismatch = 0;  // == size when bit-identical
  std::size_t mismatches = 0;
  double max_relative = 0.0;
  bool identical() const { return mismatches == 0; }
};

TrajectoryDiff CompareTrajectories(const std::vector<Vector>& a,
                                   const std::vector<Vector>& b);

}  // namespace qdiana::testing
