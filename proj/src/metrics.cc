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

#include "qdiana/metrics.h"

#include <algorithm>
#include <cmath>

#include "qdiana/error.h"
#include "qdiana/rng.h"

namespace qdiana {

namespace {

void CheckReference(const FiniteSumProblem& problem, const RunState& state,
                    const ReferenceSolution& ref) {
  const auto d = static_cast<Eigen::Index>(problem.dim());
  if (ref.x_star.size() != d || state.master.x.size() != d ||
      ref.worker_grads.size() != problem.n() ||
      state.workers.size() != problem.n()) {
    throw Error(ErrorKind::kInvalidState,
                "reference solution does not match the run state");
  }
}

}  // namespace

ReferenceSolution MakeReference(const FiniteSumProblem& problem,
                                const Vector& x_star, double f_star) {
  ReferenceSolution ref;
  ref.x_star = x_star;
  ref.f_star = f_star;
  const std::size_t n = problem.n();
  const std::size_t m = problem.m();
  ref.worker_grads.reserve(n);
  ref.component_grads.resize(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    ref.worker_grads.push_back(problem.WorkerGradient(i, x_star));
    for (std::size_t j = 0; j < m; ++j) {
      problem.ComponentGradient(i, j, x_star, ref.component_grads[i * m + j]);
    }
  }
  return ref;
}

LyapunovParams LyapunovParams::Make(const MethodConfig& config, Regime regime,
                                    double L, double omega, std::size_t n,
                                    std::size_t m, bool statement_c) {
  LyapunovParams p;
  p.gamma = config.gamma;
  p.alpha = config.alpha;
  p.omega = omega;
  p.n = n;
  p.m = m;
  const double nd = static_cast<double>(n);
  const double a = config.alpha;
  p.c_diana = 4.0 * omega / (a * nd);
  if (regime == Regime::kConvex) {
    p.b_vr = 2.0 * (omega + 1.0) / (a * nd * nd);
    p.c_vr = 6.0 * (omega + 1.0) / (nd * nd);
  } else {
    p.b_vr = 4.0 * (omega + 1.0) / (a * nd * nd);
    p.c_vr = 16.0 * (omega + 1.0) / (nd * nd);
    if (statement_c) p.c_vr /= a;
  }
  if (config.method == Method::kSvrgDiana && config.epoch_length > 0) {
    const double b = 6.0 * omega / (nd * nd * a);
    const double g = config.gamma;
    const double c_s = L * g * g * (6.0 * omega / nd + 2.0 + 4.0 / nd + 4.0 * b * a * nd);
    p.b_bar_svrg = b / (static_cast<double>(config.epoch_length) * (2.0 * g - c_s));
  }
  return p;
}

double ShiftError(const RunState& state, const ReferenceSolution& ref) {
  if (state.workers.size() != ref.worker_grads.size()) {
    throw Error(ErrorKind::kInvalidState, "worker count mismatch");
  }
  std::vector<double> terms(state.workers.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i] = (state.workers[i].h - ref.worker_grads[i]).squaredNorm();
  }
  return PairwiseSum(terms);
}

double TableError(const FiniteSumProblem& problem, const RunState& state,
                  const MethodConfig& config, const ReferenceSolution& ref) {
  CheckReference(problem, state, ref);
  const std::size_t n = problem.n();
  const std::size_t m = problem.m();
  std::vector<double> terms(n * m);
  const bool saga = config.method == Method::kVrDiana &&
                    config.variant == VrVariant::kSaga;
  Vector g;
  for (std::size_t i = 0; i < n; ++i) {
    const WorkerState& w = state.workers[i];
    for (std::size_t j = 0; j < m; ++j) {
      if (saga) {
        g = w.table.at(j);
      } else {
        problem.ComponentGradient(i, j, w.anchor, g);
      }
      terms[i * m + j] = (g - ref.component_grads[i * m + j]).squaredNorm();
    }
  }
  return PairwiseSum(terms);
}

double LyapunovDiana(const RunState& state, const ReferenceSolution& ref,
                     const LyapunovParams& params) {
  if (state.master.x.size() != ref.x_star.size()) {
    throw Error(ErrorKind::kInvalidState, "dimension mismatch");
  }
  const double dist = (state.master.x - ref.x_star).squaredNorm();
  const double H = ShiftError(state, ref);
  return dist + params.c_diana * params.gamma * params.gamma /
                    static_cast<double>(params.n) * H;
}

VrLyapunov LyapunovVr(const FiniteSumProblem& problem, const RunState& state,
                      const ReferenceSolution& ref, const LyapunovParams& params,
                      const MethodConfig& config) {
  if (config.method == Method::kDiana) {
    throw Error(ErrorKind::kWrongMethod,
                "variance-reduced Lyapunov function requested for a DIANA run");
  }
  CheckReference(problem, state, ref);
  VrLyapunov out;
  out.H = ShiftError(state, ref);
  const double g2 = params.gamma * params.gamma;
  if (config.method == Method::kSvrgDiana) {
    out.D = problem.Objective(state.master.z) - ref.f_star;
    out.psi = out.D + params.b_bar_svrg * g2 * out.H;
    return out;
  }
  out.D = TableError(problem, state, config, ref);
  const double dist = (state.master.x - ref.x_star).squaredNorm();
  out.psi = dist + params.b_vr * g2 * out.H + params.c_vr * g2 * out.D;
  return out;
}

double GradNormSq(const FiniteSumProblem& problem, const Vector& x) {
  return problem.Gradient(x).squaredNorm();
}

double EstimateSigmaSq(const FiniteSumProblem& problem, const Vector& x,
                       std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw Error(ErrorKind::kInvalidInput, "samples must be positive");
  const std::size_t n = problem.n();
  std::vector<double> per_worker(n);
  Vector g;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector full = problem.WorkerGradient(i, x);
    Rng rng = DeriveStream(seed, i, Purpose::kSigma, 0);
    double acc = 0.0;
    for (std::size_t t = 0; t < samples; ++t) {
      const auto j = static_cast<std::size_t>(rng.Below(problem.m()));
      problem.ComponentGradient(i, j, x, g);
      acc += (g - full).squaredNorm();
    }
    per_worker[i] = acc / static_cast<double>(samples);
  }
  return PairwiseSum(per_worker) / static_cast<double>(n);
}

double VrRate(double mu, double L, double omega, double alpha, std::size_t n,
              std::size_t m) {
  const double nd = static_cast<double>(n);
  return std::min({mu / (L * (1.0 + 36.0 * (omega + 1.0) / nd)), alpha / 2.0,
                   3.0 / (8.0 * static_cast<double>(m))});
}

}  // namespace qdiana
