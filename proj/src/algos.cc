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

#include "qdiana/algos.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "qdiana/error.h"
#include "qdiana/rng.h"

namespace qdiana {

namespace {

constexpr double kAlphaSlack = 1e-12;

void ForEachWorker(const RoundContext& ctx, std::size_t n,
                   const std::function<void(std::size_t)>& body) {
  if (ctx.executor != nullptr) {
    ctx.executor->ParallelFor(n, body);
  } else {
    for (std::size_t i = 0; i < n; ++i) body(i);
  }
}

void CheckState(const RunState& state, const RoundContext& ctx) {
  if (ctx.problem == nullptr) {
    throw Error(ErrorKind::kInvalidState, "round context has no problem");
  }
  const auto d = static_cast<Eigen::Index>(ctx.problem->dim());
  const std::size_t n = ctx.problem->n();
  const MasterState& master = state.master;
  if (master.x.size() != d || master.h_mean.size() != d ||
      master.h_copies.size() != n || state.workers.size() != n) {
    throw Error(ErrorKind::kInvalidState,
                "run state does not match the problem dimensions");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (state.workers[i].h.size() != d || master.h_copies[i].size() != d) {
      throw Error(ErrorKind::kInvalidState,
                  "shift of worker " + std::to_string(i) + " has wrong dimension");
    }
  }
}

struct WorkerOutput {
  Vector decoded;
  QuantizedMessage message;
};

// Quantizes g - h for worker i, applies the worker-side shift update and
// returns the decoded message.
void Transmit(WorkerState& worker, std::size_t i, const Vector& g,
              const RoundContext& ctx, std::uint64_t k, WorkerOutput& out) {
  const Vector delta = g - worker.h;
  Rng rng = DeriveStream(ctx.seed, i, Purpose::kQuantize, k);
  out.message = Quantize(ctx.quantizer, delta, rng, ctx.ledger);
  DecodeInto(out.message, out.decoded);
  worker.h = worker.h + ctx.config.alpha * out.decoded;
}

// Master side of every method: aggregate (1/n) sum (h_i + dhat_i) from the
// master's shift copies, update the copies, and take the prox step.
RoundLog MasterStep(RunState& state, const RoundContext& ctx,
                    std::vector<WorkerOutput>& outputs) {
  MasterState& master = state.master;
  const std::size_t n = outputs.size();
  const double alpha = ctx.config.alpha;
  const double gamma = ctx.config.gamma;

  RoundLog log;
  log.k = master.k;
  log.uplink_bits.resize(n);
  std::vector<Vector> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    terms[i] = master.h_copies[i] + outputs[i].decoded;
    master.h_copies[i] = master.h_copies[i] + alpha * outputs[i].decoded;
    log.uplink_bits[i] = outputs[i].message.bit_cost;
    log.uplink_total += outputs[i].message.bit_cost;
  }
  log.aggregate = PairwiseMean(terms);
  master.h_mean = PairwiseMean(master.h_copies);
  log.downlink_bits = static_cast<std::uint64_t>(ctx.problem->dim()) *
                      static_cast<std::uint64_t>(ctx.ledger.float_bits);
  if (ctx.record_messages) {
    log.messages.reserve(n);
    for (auto& out : outputs) log.messages.push_back(std::move(out.message));
  }
  master.x = Prox(ctx.problem->regularizer(), gamma,
                  master.x - gamma * log.aggregate);
  ++master.k;
  return log;
}

double Sqr(double v) { return v * v; }

}  // namespace

const char* MethodName(Method method) {
  switch (method) {
    case Method::kDiana: return "diana";
    case Method::kVrDiana: return "vr-diana";
    case Method::kSvrgDiana: return "svrg-diana";
  }
  return "unknown";
}

const char* RegimeName(Regime regime) {
  switch (regime) {
    case Regime::kStronglyConvex: return "strongly_convex";
    case Regime::kConvex: return "convex";
    case Regime::kNonconvex: return "nonconvex";
  }
  return "unknown";
}

void MethodConfig::Validate(double omega) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("method.alpha", "must be positive");
  }
  if (alpha * (omega + 1.0) > 1.0 + kAlphaSlack) {
    throw ConfigError("method.alpha",
                      "alpha (omega + 1) must be <= 1 (alpha = " +
                          std::to_string(alpha) + ", omega = " +
                          std::to_string(omega) + ")");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("method.gamma", "must be positive");
  }
  if (method == Method::kSvrgDiana) {
    if (epoch_length == 0) throw ConfigError("method.l", "must be positive");
    if (p_weights.size() != epoch_length) {
      throw ConfigError("method.p_weights",
                        "expected " + std::to_string(epoch_length) +
                            " weights, got " + std::to_string(p_weights.size()));
    }
    double sum = 0.0;
    for (double p : p_weights) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ConfigError("method.p_weights", "weights must be nonnegative");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("method.p_weights", "weights must sum to 1");
    }
  }
}

RunState Initialize(const FiniteSumProblem& problem, const MethodConfig& config,
                    const Vector& x0, ShiftInit shift_init,
                    const Executor* executor) {
  const auto d = static_cast<Eigen::Index>(problem.dim());
  if (x0.size() != d) {
    throw Error(ErrorKind::kInvalidState, "x0 has wrong dimension");
  }
  const std::size_t n = problem.n();
  const std::size_t m = problem.m();
  RunState state;
  state.workers.resize(n);
  auto init_worker = [&](std::size_t i) {
    WorkerState& w = state.workers[i];
    w.h = shift_init == ShiftInit::kGradient ? problem.WorkerGradient(i, x0)
                                             : Vector::Zero(d);
    if (config.method == Method::kVrDiana && config.variant == VrVariant::kSaga) {
      w.table.resize(m);
      w.table_sum = Vector::Zero(d);
      for (std::size_t j = 0; j < m; ++j) {
        problem.ComponentGradient(i, j, x0, w.table[j]);
        w.table_sum += w.table[j];
      }
    }
    if (config.method == Method::kSvrgDiana ||
        (config.method == Method::kVrDiana && config.variant == VrVariant::kLSvrg)) {
      w.anchor = x0;
      w.anchor_grad = problem.WorkerGradient(i, x0);
    }
  };
  if (executor != nullptr) {
    executor->ParallelFor(n, init_worker);
  } else {
    for (std::size_t i = 0; i < n; ++i) init_worker(i);
  }
  MasterState& master = state.master;
  master.x = x0;
  master.h_copies.reserve(n);
  for (const WorkerState& w : state.workers) master.h_copies.push_back(w.h);
  master.h_mean = PairwiseMean(master.h_copies);
  if (config.method == Method::kSvrgDiana) {
    master.z = x0;
    master.z_accum = Vector::Zero(d);
  }
  return state;
}

RoundLog DianaRound(RunState& state, const RoundContext& ctx) {
  CheckState(state, ctx);
  const FiniteSumProblem& problem = *ctx.problem;
  const std::size_t n = problem.n();
  const std::uint64_t k = state.master.k;
  const Vector& x = state.master.x;
  std::vector<WorkerOutput> outputs(n);
  ForEachWorker(ctx, n, [&](std::size_t i) {
    Vector g;
    if (ctx.config.oracle == DianaOracle::kFullGrad) {
      g = problem.WorkerGradient(i, x);
    } else {
      Rng sample = DeriveStream(ctx.seed, i, Purpose::kSample, k);
      const auto j = static_cast<std::size_t>(sample.Below(problem.m()));
      problem.ComponentGradient(i, j, x, g);
    }
    Transmit(state.workers[i], i, g, ctx, k, outputs[i]);
  });
  return MasterStep(state, ctx, outputs);
}

RoundLog VrDianaRound(RunState& state, const RoundContext& ctx) {
  CheckState(state, ctx);
  const FiniteSumProblem& problem = *ctx.problem;
  const std::size_t n = problem.n();
  const std::size_t m = problem.m();
  const std::uint64_t k = state.master.k;
  const Vector& x = state.master.x;
  const bool lsvrg = ctx.config.variant == VrVariant::kLSvrg;

  bool coin = false;
  if (lsvrg) {
    Rng coin_rng = DeriveStream(ctx.seed, kMasterId, Purpose::kCoin, k);
    coin = coin_rng.Uniform() < 1.0 / static_cast<double>(m);
  }

  std::vector<WorkerOutput> outputs(n);
  ForEachWorker(ctx, n, [&](std::size_t i) {
    WorkerState& w = state.workers[i];
    Rng sample = DeriveStream(ctx.seed, i, Purpose::kSample, k);
    const auto j = static_cast<std::size_t>(sample.Below(m));
    Vector grad_x;
    problem.ComponentGradient(i, j, x, grad_x);
    Vector g;
    if (lsvrg) {
      Vector grad_w;
      problem.ComponentGradient(i, j, w.anchor, grad_w);
      g = grad_x - grad_w + w.anchor_grad;
    } else {
      if (w.table.size() != m) {
        throw Error(ErrorKind::kInvalidState, "SAGA table has wrong size");
      }
      g = grad_x - w.table[j] + w.table_sum / static_cast<double>(m);
    }
    Transmit(w, i, g, ctx, k, outputs[i]);
    if (lsvrg) {
      if (coin) {
        w.anchor = x;
        w.anchor_grad = problem.WorkerGradient(i, x);
      }
    } else {
      w.table_sum = w.table_sum - w.table[j] + grad_x;
      w.table[j] = std::move(grad_x);
    }
  });
  RoundLog log = MasterStep(state, ctx, outputs);
  if (lsvrg) {
    log.coin = coin;
    log.downlink_bits += 1;
  }
  return log;
}

RoundLog SvrgDianaRound(RunState& state, const RoundContext& ctx) {
  CheckState(state, ctx);
  const FiniteSumProblem& problem = *ctx.problem;
  const std::size_t n = problem.n();
  const std::size_t m = problem.m();
  const std::size_t l = ctx.config.epoch_length;
  if (l == 0 || ctx.config.p_weights.size() != l) {
    throw ConfigError("method.p_weights", "expected one weight per epoch round");
  }
  MasterState& master = state.master;
  const std::uint64_t k = master.k;
  bool epoch_start = false;
  if (k > 0 && k % l == 0) {
    epoch_start = true;
    ++master.epoch;
    master.z = master.z_accum;
    master.z_accum.setZero();
  }
  master.z_accum += ctx.config.p_weights[k % l] * master.x;

  const Vector& x = master.x;
  const Vector& z = master.z;
  std::vector<WorkerOutput> outputs(n);
  ForEachWorker(ctx, n, [&](std::size_t i) {
    WorkerState& w = state.workers[i];
    if (epoch_start) {
      w.anchor = z;
      w.anchor_grad = problem.WorkerGradient(i, z);
    }
    Rng sample = DeriveStream(ctx.seed, i, Purpose::kSample, k);
    const auto j = static_cast<std::size_t>(sample.Below(m));
    Vector grad_x, grad_z;
    problem.ComponentGradient(i, j, x, grad_x);
    problem.ComponentGradient(i, j, w.anchor, grad_z);
    const Vector g = grad_x - grad_z + w.anchor_grad;
    Transmit(w, i, g, ctx, k, outputs[i]);
  });
  RoundLog log = MasterStep(state, ctx, outputs);
  log.epoch_start = epoch_start;
  return log;
}

RoundLog Step(RunState& state, const RoundContext& ctx) {
  switch (ctx.config.method) {
    case Method::kDiana: return DianaRound(state, ctx);
    case Method::kVrDiana: return VrDianaRound(state, ctx);
    case Method::kSvrgDiana: return SvrgDianaRound(state, ctx);
  }
  throw Error(ErrorKind::kInvalidState, "unknown method");
}

double SvrgTheta(double mu, double gamma, double alpha) {
  return std::min(mu * gamma, alpha / 2.0);
}

MethodConfig DefaultHyperparams(const MethodConfig& base, Regime regime,
                                const Constants& constants, double omega,
                                std::size_t n, std::size_t m) {
  const double L = constants.L;
  const double mu = constants.mu;
  if (!(L > 0.0)) throw Error(ErrorKind::kInvalidInput, "L must be positive");
  if (regime == Regime::kStronglyConvex && !(mu > 0.0)) {
    throw Error(ErrorKind::kRegime,
                "strongly convex defaults need mu > 0 (got mu = " +
                    std::to_string(mu) + ")");
  }
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  MethodConfig out = base;
  out.alpha = 1.0 / (omega + 1.0);

  switch (base.method) {
    case Method::kDiana:
      if (regime != Regime::kStronglyConvex) {
        throw Error(ErrorKind::kRegime,
                    std::string("no default step size for DIANA in the ") +
                        RegimeName(regime) + " regime");
      }
      out.gamma = std::min(2.0 / ((mu + L) * (1.0 + 6.0 * omega / nd)),
                           1.0 / (2.0 * mu * (omega + 1.0)));
      break;

    case Method::kVrDiana:
      switch (regime) {
        case Regime::kStronglyConvex:
          out.gamma = 1.0 / (L * (1.0 + 36.0 * (omega + 1.0) / nd));
          break;
        case Regime::kConvex:
          out.gamma = 1.0 / (2.0 * L * std::sqrt(md) *
                             (1.0 + 36.0 * (omega + 1.0) / nd));
          break;
        case Regime::kNonconvex:
          out.gamma = 1.0 / (10.0 * L * std::sqrt(1.0 + omega / nd) *
                             (std::cbrt(Sqr(md)) + omega + 1.0));
          break;
      }
      break;

    case Method::kSvrgDiana:
      switch (regime) {
        case Regime::kStronglyConvex: {
          out.gamma = 1.0 / (10.0 * L * (2.0 + 4.0 / nd + 30.0 * omega / nd));
          const double theta = SvrgTheta(mu, out.gamma, out.alpha);
          out.epoch_length = static_cast<std::size_t>(std::ceil(2.0 / theta));
          out.p_weights.assign(out.epoch_length, 0.0);
          double total = 0.0;
          for (std::size_t r = 0; r < out.epoch_length; ++r) {
            out.p_weights[r] = std::pow(1.0 - theta,
                                        static_cast<double>(out.epoch_length - 1 - r));
            total += out.p_weights[r];
          }
          for (double& p : out.p_weights) p /= total;
          break;
        }
        case Regime::kConvex:
          out.gamma = 1.0 / (L * std::sqrt(md) * (2.0 + 4.0 / nd + 18.0 * omega / nd));
          out.epoch_length = m;
          out.p_weights.assign(m, 1.0 / md);
          break;
        case Regime::kNonconvex:
          out.gamma = 1.0 / (10.0 * L * std::sqrt(1.0 + omega / nd) *
                             (std::cbrt(Sqr(md)) + omega + 1.0));
          out.epoch_length = m;
          out.p_weights.assign(m, 0.0);
          out.p_weights[m - 1] = 1.0;
          break;
      }
      break;
  }
  return out;
}

}  // namespace qdiana
