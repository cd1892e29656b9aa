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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "qdiana/algos.h"
#include "qdiana/dataio.h"
#include "qdiana/error.h"
#include "qdiana/metrics.h"
#include "qdiana/problems.h"
#include "qdiana/quantize.h"

namespace qdiana {

struct SyntheticSource {
  LossKind kind = LossKind::kQuadratic;
  std::size_t dim = 10;
  std::size_t n = 4;
  std::size_t m = 10;
  std::uint64_t seed = 0;
  SynthOptions options;
};

struct FileSource {
  std::filesystem::path path;
  std::size_t n = 4;
  std::uint64_t seed = 0;
  PartitionOptions options;
};

using ProblemSource = std::variant<SyntheticSource, FileSource>;

FiniteSumProblem BuildProblem(const ProblemSource& source);

struct QuantizerConfig {
  Scheme scheme = Scheme::kIdentity;
  double p = 2.0;
  std::uint32_t s = 1;
  std::uint32_t r = 1;
  std::optional<std::size_t> block_size;  // block dither: uniform blocks
  std::vector<std::uint32_t> block_sizes;  // block dither: explicit blocks

  QuantizerSpec Resolve(std::size_t dim) const;
};

struct RunConfig {
  ProblemSource problem = SyntheticSource{};
  MethodConfig method;
  // Regime for automatic gamma (and l, p_r) and for the reported Lyapunov
  // function; when unset the latter follows mu > 0.
  std::optional<Regime> auto_regime;
  bool auto_alpha = false;  // alpha = 1 / (omega + 1)
  bool auto_gamma = false;
  QuantizerConfig quantizer;
  std::size_t iters = 100;
  std::uint64_t seed = 0;
  std::size_t cadence = 1;
  LedgerModel ledger;
  double reference_tol = 1e-12;
  std::size_t reference_max_iters = 2'000'000;
  int threads = 1;
  ShiftInit shift_init = ShiftInit::kZero;
  bool statement_c = false;     // VR Lyapunov: c = 16 (omega + 1) / (alpha n^2)
  bool record_wall_time = false;
  bool record_messages = false;
  bool estimate_sigma = false;  // DIANA: sigma^2 at x^0 over 10^4 samples

  void Validate() const;
};

struct TraceRecord {
  std::uint64_t k = 0;
  double f_gap = 0.0;
  double dist_sq = 0.0;
  double lyapunov = 0.0;  // Psi, psi, psi^s, or the running mean of ||grad f||^2
  double H = 0.0;
  double D = 0.0;         // NaN for DIANA; f(z^s) - f* for SVRG-DIANA
  double grad_norm_sq = 0.0;
  std::uint64_t bits_up_cum = 0;
  std::uint64_t bits_down_cum = 0;
  double wall_ms = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

struct PhaseTimings {
  double build_ms = 0.0;
  double reference_ms = 0.0;
  double iterate_ms = 0.0;
};

struct Trace {
  std::vector<TraceRecord> records;
  Vector x_final;
  std::uint64_t uplink_total = 0;
  std::uint64_t downlink_total = 0;
  RunConfig config;          // as given
  MethodConfig method;       // resolved hyperparameters
  Regime regime = Regime::kStronglyConvex;
  double omega = 0.0;
  double f_star = 0.0;
  std::optional<double> sigma_sq;
  PhaseTimings timings;
  std::vector<std::vector<QuantizedMessage>> messages;  // per round, if recorded
};

class DivergenceError : public Error {
 public:
  DivergenceError(std::uint64_t k, Trace trace);
  std::uint64_t k() const noexcept { return k_; }
  const Trace& trace() const noexcept { return trace_; }

 private:
  std::uint64_t k_;
  Trace trace_;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(Vector best, double residual);
  const Vector& best() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  Vector best_;
  double residual_;
};

struct ReferencePoint {
  Vector x_star;
  double f_star = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

// Proximal gradient descent with step 1/L from x = 0 until
// ||x - prox(x - grad f(x) / L)|| L <= tol.
ReferencePoint SolveReference(const FiniteSumProblem& problem, double tol,
                              std::size_t max_iters = 2'000'000);

// Fills alpha / gamma / l / p_r per the config's auto settings.
MethodConfig ResolveMethod(const RunConfig& config,
                           const FiniteSumProblem& problem, double omega);

Trace RunExperiment(const RunConfig& config);

// Same as RunExperiment on a prebuilt problem, optionally with a known
// reference solution.
Trace RunOnProblem(const RunConfig& config, const FiniteSumProblem& problem,
                   const std::optional<ReferencePoint>& reference = std::nullopt);

// Versioned little-endian binary encoding of the records, totals and final
// iterate.
void WriteTraceBinary(const Trace& trace, std::ostream& out);
Trace ReadTraceBinary(std::istream& in);

// Sum over recorded messages of their bit cost recomputed under `ledger`.
std::uint64_t ReplayUplinkBits(const Trace& trace, const LedgerModel& ledger);

}  // namespace qdiana
