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

#include <spdlog/spdlog.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <type_traits>

#include "qdiana/parallel.h"

namespace qdiana {

namespace {

using Clock = std::chrono::steady_clock;

double MillisSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr double kDivergenceNorm = 1e300;
constexpr char kTraceMagic[4] = {'Q', 'D', 'T', 'R'};
constexpr std::uint32_t kTraceVersion = 1;

template <typename T>
void Put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T Get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw Error(ErrorKind::kIo, "truncated binary trace");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

Regime ReportedRegime(const RunConfig& config, const FiniteSumProblem& problem) {
  if (config.auto_regime) return *config.auto_regime;
  return problem.constants().mu > 0.0 ? Regime::kStronglyConvex : Regime::kConvex;
}

}  // namespace

DivergenceError::DivergenceError(std::uint64_t k, Trace trace)
    : Error(ErrorKind::kDivergence,
            "iterate norm exceeded 1e300 at iteration " + std::to_string(k)),
      k_(k),
      trace_(std::move(trace)) {}

NoConvergenceError::NoConvergenceError(Vector best, double residual)
    : Error(ErrorKind::kNoConvergence,
            "reference solve stopped with residual " + std::to_string(residual)),
      best_(std::move(best)),
      residual_(residual) {}

FiniteSumProblem BuildProblem(const ProblemSource& source) {
  if (const auto* synth = std::get_if<SyntheticSource>(&source)) {
    return SynthProblem(synth->kind, synth->dim, synth->n, synth->m, synth->seed,
                        synth->options);
  }
  const auto& file = std::get<FileSource>(source);
  return Partition(ReadLibsvmFile(file.path), file.n, file.seed, file.options);
}

QuantizerSpec QuantizerConfig::Resolve(std::size_t dim) const {
  QuantizerSpec spec;
  switch (scheme) {
    case Scheme::kIdentity:
      spec = QuantizerSpec::Identity();
      break;
    case Scheme::kDither:
      spec = QuantizerSpec::Dither(p, s);
      break;
    case Scheme::kSparsify:
      spec = QuantizerSpec::Sparsify(r);
      break;
    case Scheme::kBlockDither:
      if (!block_sizes.empty()) {
        spec = QuantizerSpec::BlockDither(block_sizes);
      } else if (block_size) {
        spec = QuantizerSpec::BlockDither(UniformBlocks(dim, *block_size));
      } else {
        throw ConfigError("quantizer.block_size", "block dither needs a block size");
      }
      break;
  }
  spec.Validate(dim);
  return spec;
}

void RunConfig::Validate() const {
  if (iters < 1) throw ConfigError("run.iters", "must be >= 1");
  if (cadence < 1) throw ConfigError("run.cadence", "must be >= 1");
  if (threads < 1) throw ConfigError("run.threads", "must be >= 1");
  if (!(reference_tol > 0.0)) throw ConfigError("reference.tol", "must be positive");
  if (auto_gamma && !auto_regime) {
    throw ConfigError("method.gamma", "an automatic step size needs a regime");
  }
  ledger.Validate();
}

ReferencePoint SolveReference(const FiniteSumProblem& problem, double tol,
                              std::size_t max_iters) {
  const double L = problem.constants().L;
  if (!(L > 0.0)) throw Error(ErrorKind::kInvalidInput, "L must be positive");
  const double step = 1.0 / L;
  Vector x = Vector::Zero(static_cast<Eigen::Index>(problem.dim()));
  Vector best = x;
  double best_residual = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t <= max_iters; ++t) {
    const Vector next =
        Prox(problem.regularizer(), step, x - step * problem.Gradient(x));
    const double residual = (x - next).norm() / step;
    if (residual < best_residual) {
      best_residual = residual;
      best = x;
    }
    if (residual <= tol) {
      return {x, problem.Objective(x), t, residual};
    }
    if (!next.allFinite()) break;
    x = next;
  }
  throw NoConvergenceError(best, best_residual);
}

MethodConfig ResolveMethod(const RunConfig& config,
                           const FiniteSumProblem& problem, double omega) {
  MethodConfig method = config.method;
  if (config.auto_alpha) method.alpha = 1.0 / (omega + 1.0);
  const bool need_epoch =
      method.method == Method::kSvrgDiana && method.epoch_length == 0;
  if (config.auto_gamma || need_epoch) {
    if (!config.auto_regime) {
      throw ConfigError("method.l", "SVRG-DIANA needs l or a regime for defaults");
    }
    const MethodConfig defaults =
        DefaultHyperparams(method, *config.auto_regime, problem.constants(),
                           omega, problem.n(), problem.m());
    if (config.auto_gamma) method.gamma = defaults.gamma;
    if (need_epoch) {
      method.epoch_length = defaults.epoch_length;
      method.p_weights = defaults.p_weights;
    }
  }
  method.Validate(omega);
  return method;
}

Trace RunExperiment(const RunConfig& config) {
  config.Validate();
  const auto start = Clock::now();
  const FiniteSumProblem problem = BuildProblem(config.problem);
  const double build_ms = MillisSince(start);
  Trace trace = RunOnProblem(config, problem);
  trace.timings.build_ms = build_ms;
  return trace;
}

Trace RunOnProblem(const RunConfig& config, const FiniteSumProblem& problem,
                   const std::optional<ReferencePoint>& reference) {
  config.Validate();
  const std::size_t dim = problem.dim();
  const QuantizerSpec spec = config.quantizer.Resolve(dim);
  const double omega = OmegaBound(spec, dim);

  Trace trace;
  trace.config = config;
  trace.omega = omega;
  trace.method = ResolveMethod(config, problem, omega);
  trace.regime = ReportedRegime(config, problem);

  auto phase = Clock::now();
  const ReferencePoint ref_point =
      reference ? *reference
                : SolveReference(problem, config.reference_tol,
                                 config.reference_max_iters);
  trace.timings.reference_ms = reference ? 0.0 : MillisSince(phase);
  trace.f_star = ref_point.f_star;
  const ReferenceSolution ref =
      MakeReference(problem, ref_point.x_star, ref_point.f_star);
  const LyapunovParams params =
      LyapunovParams::Make(trace.method, trace.regime, problem.constants().L,
                           omega, problem.n(), problem.m(), config.statement_c);

  const Vector x0 = Vector::Zero(static_cast<Eigen::Index>(dim));
  if (config.estimate_sigma && trace.method.method == Method::kDiana) {
    trace.sigma_sq = EstimateSigmaSq(problem, x0, 10000, config.seed);
  }

  Executor executor(config.threads);
  RunState state =
      Initialize(problem, trace.method, x0, config.shift_init, &executor);
  RoundContext ctx;
  ctx.problem = &problem;
  ctx.quantizer = spec;
  ctx.ledger = config.ledger;
  ctx.config = trace.method;
  ctx.seed = config.seed;
  ctx.executor = &executor;
  ctx.record_messages = config.record_messages;

  const bool nonconvex = trace.regime == Regime::kNonconvex;
  double grad_sq_sum = 0.0;
  std::uint64_t up = 0;
  std::uint64_t down = 0;
  phase = Clock::now();

  auto record = [&](std::uint64_t k, double current_grad_sq) {
    TraceRecord r;
    r.k = k;
    const Vector& x = state.master.x;
    r.f_gap = problem.Objective(x) - ref.f_star;
    r.dist_sq = (x - ref.x_star).squaredNorm();
    r.grad_norm_sq = current_grad_sq;
    if (trace.method.method == Method::kDiana) {
      r.H = ShiftError(state, ref);
      r.D = std::numeric_limits<double>::quiet_NaN();
      r.lyapunov = LyapunovDiana(state, ref, params);
    } else {
      const VrLyapunov v = LyapunovVr(problem, state, ref, params, trace.method);
      r.H = v.H;
      r.D = v.D;
      r.lyapunov = v.psi;
    }
    if (nonconvex) {
      r.lyapunov = k == 0 ? current_grad_sq : grad_sq_sum / static_cast<double>(k);
    }
    r.bits_up_cum = up;
    r.bits_down_cum = down;
    r.wall_ms = config.record_wall_time ? MillisSince(phase) : 0.0;
    trace.records.push_back(r);
  };

  double grad_sq = GradNormSq(problem, state.master.x);
  record(0, grad_sq);
  for (std::uint64_t k = 0; k < config.iters; ++k) {
    if (nonconvex) grad_sq_sum += grad_sq;
    RoundLog log = Step(state, ctx);
    up += log.uplink_total;
    down += log.downlink_bits;
    if (config.record_messages) trace.messages.push_back(std::move(log.messages));
    const std::uint64_t next = k + 1;
    const double norm = state.master.x.norm();
    if (!(norm <= kDivergenceNorm)) {
      trace.x_final = state.master.x;
      trace.uplink_total = up;
      trace.downlink_total = down;
      trace.timings.iterate_ms = MillisSince(phase);
      spdlog::error("divergence at iteration {} (|x| = {})", next, norm);
      throw DivergenceError(next, std::move(trace));
    }
    const bool due = next % config.cadence == 0 || next == config.iters;
    if (nonconvex || due) grad_sq = GradNormSq(problem, state.master.x);
    if (due) record(next, grad_sq);
  }
  trace.timings.iterate_ms = MillisSince(phase);
  trace.x_final = state.master.x;
  trace.uplink_total = up;
  trace.downlink_total = down;
  return trace;
}

void WriteTraceBinary(const Trace& trace, std::ostream& out) {
  out.write(kTraceMagic, sizeof(kTraceMagic));
  Put<std::uint32_t>(out, kTraceVersion);
  Put<std::uint64_t>(out, trace.records.size());
  for (const TraceRecord& r : trace.records) {
    Put<std::uint64_t>(out, r.k);
    Put<double>(out, r.f_gap);
    Put<double>(out, r.dist_sq);
    Put<double>(out, r.lyapunov);
    Put<double>(out, r.H);
    Put<double>(out, r.D);
    Put<double>(out, r.grad_norm_sq);
    Put<std::uint64_t>(out, r.bits_up_cum);
    Put<std::uint64_t>(out, r.bits_down_cum);
    Put<double>(out, r.wall_ms);
  }
  Put<std::uint64_t>(out, trace.uplink_total);
  Put<std::uint64_t>(out, trace.downlink_total);
  Put<double>(out, trace.omega);
  Put<double>(out, trace.f_star);
  Put<std::uint64_t>(out, static_cast<std::uint64_t>(trace.x_final.size()));
  for (Eigen::Index k = 0; k < trace.x_final.size(); ++k) {
    Put<double>(out, trace.x_final[k]);
  }
  if (!out) throw Error(ErrorKind::kIo, "failed to write binary trace");
}

Trace ReadTraceBinary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kTraceMagic, sizeof(magic)) != 0) {
    throw Error(ErrorKind::kIo, "not a binary trace");
  }
  const auto version = Get<std::uint32_t>(in);
  if (version != kTraceVersion) {
    throw Error(ErrorKind::kIo,
                "unsupported binary trace version " + std::to_string(version));
  }
  Trace trace;
  const auto count = Get<std::uint64_t>(in);
  for (std::uint64_t t = 0; t < count; ++t) {
    TraceRecord r;
    r.k = Get<std::uint64_t>(in);
    r.f_gap = Get<double>(in);
    r.dist_sq = Get<double>(in);
    r.lyapunov = Get<double>(in);
    r.H = Get<double>(in);
    r.D = Get<double>(in);
    r.grad_norm_sq = Get<double>(in);
    r.bits_up_cum = Get<std::uint64_t>(in);
    r.bits_down_cum = Get<std::uint64_t>(in);
    r.wall_ms = Get<double>(in);
    trace.records.push_back(r);
  }
  trace.uplink_total = Get<std::uint64_t>(in);
  trace.downlink_total = Get<std::uint64_t>(in);
  trace.omega = Get<double>(in);
  trace.f_star = Get<double>(in);
  const auto d = Get<std::uint64_t>(in);
  trace.x_final.resize(static_cast<Eigen::Index>(d));
  for (std::uint64_t k = 0; k < d; ++k) {
    trace.x_final[static_cast<Eigen::Index>(k)] = Get<double>(in);
  }
  return trace;
}

std::uint64_t ReplayUplinkBits(const Trace& trace, const LedgerModel& ledger) {
  std::uint64_t total = 0;
  for (const auto& round : trace.messages) {
    for (const QuantizedMessage& msg : round) total += BitCost(msg, ledger);
  }
  return total;
}

}  // namespace qdiana
