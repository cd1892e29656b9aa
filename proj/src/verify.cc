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

#include "qdiana/verify.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>

#include "qdiana/dataio.h"
#include "qdiana/engine.h"
#include "qdiana/error.h"
#include "qdiana/rng.h"

namespace qdiana {

namespace {

constexpr double kMeanSlack = 5.0;  // standard errors

template <typename... Args>
std::string Format(const char* fmt, Args... args) {
  char buf[200];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

Vector GaussianVector(Rng& rng, std::size_t d) {
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = rng.Normal();
  return v;
}

}  // namespace

ExactMoments ExactDitherMoments(const Vector& x, double p, std::uint32_t s) {
  const auto d = static_cast<std::size_t>(x.size());
  if (d > 20) throw Error(ErrorKind::kInvalidInput, "enumeration needs d <= 20");
  const double norm = LpNorm(std::span<const double>(x.data(), d), p);
  // Per coordinate: noise that yields the lower level, the upper level, and
  // the probability of the upper level.
  std::vector<double> xi_low(d, 0.0), xi_up(d, 0.0), up_prob(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    if (norm == 0.0) break;
    const double u = static_cast<double>(s) * std::abs(x[static_cast<Eigen::Index>(k)]) / norm;
    const double frac = u - std::floor(u);
    up_prob[k] = frac;
    xi_up[k] = 1.0 - frac / 2.0;
  }
  ExactMoments out;
  out.mean = Vector::Zero(x.size());
  std::vector<double> xi(d);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
    double prob = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      const bool up = (mask >> k) & 1u;
      prob *= up ? up_prob[k] : 1.0 - up_prob[k];
      xi[k] = up ? xi_up[k] : xi_low[k];
    }
    if (prob == 0.0) continue;
    const Vector q = Decode(DitherWithNoise(x, p, s, xi));
    out.mean += prob * q;
    out.second_moment += prob * q.squaredNorm();
    out.outcomes += 1;
  }
  return out;
}

ExactMoments ExactSparsifyMoments(const Vector& x, std::uint32_t r) {
  const auto d = static_cast<std::uint32_t>(x.size());
  if (d > 20) throw Error(ErrorKind::kInvalidInput, "enumeration needs d <= 20");
  ExactMoments out;
  out.mean = Vector::Zero(x.size());
  std::vector<std::vector<std::uint32_t>> subsets;
  std::vector<std::uint32_t> subset;
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    if (static_cast<std::uint32_t>(std::popcount(mask)) != r) continue;
    subset.clear();
    for (std::uint32_t k = 0; k < d; ++k) {
      if (mask & (1u << k)) subset.push_back(k);
    }
    subsets.push_back(subset);
  }
  const double prob = 1.0 / static_cast<double>(subsets.size());
  for (const auto& idx : subsets) {
    const Vector q = Decode(SparsifyOnto(x, idx));
    out.mean += prob * q;
    out.second_moment += prob * q.squaredNorm();
    out.outcomes += 1;
  }
  return out;
}

MomentEstimate EstimateMoments(const QuantizerSpec& spec, const Vector& x,
                               std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw Error(ErrorKind::kInvalidInput, "need at least 2 samples");
  const Eigen::Index d = x.size();
  Vector sum = Vector::Zero(d);
  Vector sum_sq = Vector::Zero(d);
  double norm_sum = 0.0;
  double norm_sum_sq = 0.0;
  double nnz = 0.0;
  Vector q;
  for (std::size_t t = 0; t < samples; ++t) {
    Rng rng = DeriveStream(seed, t, Purpose::kQuantize, 0);
    const QuantizedMessage msg = Quantize(spec, x, rng);
    DecodeInto(msg, q);
    sum += q;
    sum_sq += q.cwiseAbs2();
    const double sq = q.squaredNorm();
    norm_sum += sq;
    norm_sum_sq += sq * sq;
    nnz += static_cast<double>(msg.NonZeros());
  }
  const double N = static_cast<double>(samples);
  MomentEstimate est;
  est.mean = sum / N;
  const Vector var = ((sum_sq / N - est.mean.cwiseAbs2()) * (N / (N - 1.0))).cwiseMax(0.0);
  est.mean_se = (var / N).cwiseSqrt();
  est.second_moment = norm_sum / N;
  const double var_sq = std::max(0.0, (norm_sum_sq / N - est.second_moment * est.second_moment) *
                                          (N / (N - 1.0)));
  est.second_moment_se = std::sqrt(var_sq / N);
  est.mean_nonzeros = nnz / N;
  return est;
}

RunState PerturbedState(const FiniteSumProblem& problem,
                        const MethodConfig& config, const ReferenceSolution& ref,
                        double scale, std::uint64_t seed) {
  const std::size_t d = problem.dim();
  const std::size_t n = problem.n();
  const std::size_t m = problem.m();
  Rng rng = DeriveStream(seed, kMasterId, Purpose::kProbe, 0);
  RunState state = Initialize(problem, config, ref.x_star);
  state.master.x = ref.x_star + scale * GaussianVector(rng, d);
  for (std::size_t i = 0; i < n; ++i) {
    WorkerState& w = state.workers[i];
    w.h = ref.worker_grads[i] + scale * GaussianVector(rng, d);
    if (!w.table.empty()) {
      w.table_sum.setZero();
      for (std::size_t j = 0; j < m; ++j) {
        const Vector point = ref.x_star + scale * GaussianVector(rng, d);
        problem.ComponentGradient(i, j, point, w.table[j]);
        w.table_sum += w.table[j];
      }
    }
    if (w.anchor.size() > 0) {
      w.anchor = ref.x_star + scale * GaussianVector(rng, d);
      w.anchor_grad = problem.WorkerGradient(i, w.anchor);
    }
    state.master.h_copies[i] = w.h;
  }
  state.master.h_mean = PairwiseMean(state.master.h_copies);
  if (config.method == Method::kSvrgDiana) {
    state.master.z = state.workers[0].anchor;
  }
  return state;
}

ContractionEstimate OneStepContraction(const FiniteSumProblem& problem,
                                       const RunState& frozen,
                                       const RoundContext& ctx,
                                       const ReferenceSolution& ref,
                                       const LyapunovParams& params,
                                       std::size_t samples,
                                       std::uint64_t base_seed) {
  auto measure = [&](const RunState& state) {
    if (ctx.config.method == Method::kDiana) return LyapunovDiana(state, ref, params);
    return LyapunovVr(problem, state, ref, params, ctx.config).psi;
  };
  ContractionEstimate est;
  est.current = measure(frozen);
  est.samples = samples;
  std::vector<double> values(samples);
  for (std::size_t t = 0; t < samples; ++t) {
    RunState state = frozen;
    RoundContext local = ctx;
    local.seed = base_seed + t;
    Step(state, local);
    values[t] = measure(state);
  }
  const double N = static_cast<double>(samples);
  est.mean_next = PairwiseSum(values) / N;
  double var = 0.0;
  for (double v : values) var += (v - est.mean_next) * (v - est.mean_next);
  var /= std::max(1.0, N - 1.0);
  est.std_err = std::sqrt(var / N);
  return est;
}

std::vector<PropertyResult> VerifyQuantizers(const VerifyOptions& options) {
  std::vector<PropertyResult> results;
  const std::size_t d = 20;
  const std::size_t vectors = options.quick ? 3 : 10;
  const std::size_t samples = options.quick ? 20000 : 100000;
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<QuantizerSpec> specs;
  for (double p : {1.0, 2.0, inf}) {
    for (std::uint32_t s : {1u, 4u}) specs.push_back(QuantizerSpec::Dither(p, s));
  }
  for (std::uint32_t r : {1u, 5u, 20u}) specs.push_back(QuantizerSpec::Sparsify(r));
  specs.push_back(QuantizerSpec::BlockDither(UniformBlocks(d, 5)));

  Rng rng = DeriveStream(options.seed, kMasterId, Purpose::kProbe, 1);
  std::vector<Vector> xs;
  for (std::size_t v = 0; v < vectors; ++v) xs.push_back(GaussianVector(rng, d));

  for (std::size_t si = 0; si < specs.size(); ++si) {
    const QuantizerSpec& spec = specs[si];
    const double omega = OmegaBound(spec, d);
    double worst_z = 0.0;
    double worst_ratio = 0.0;
    bool unbiased = true;
    bool bounded = true;
    for (std::size_t v = 0; v < xs.size(); ++v) {
      const Vector& x = xs[v];
      const MomentEstimate est =
          EstimateMoments(spec, x, samples, options.seed * 1000003u + si * 101u + v);
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double err = std::abs(est.mean[k] - x[k]);
        if (est.mean_se[k] == 0.0) {
          if (err > 1e-12 * (1.0 + std::abs(x[k]))) unbiased = false;
          continue;
        }
        worst_z = std::max(worst_z, err / est.mean_se[k]);
        if (err > kMeanSlack * est.mean_se[k]) unbiased = false;
      }
      const double bound = (omega + 1.0) * x.squaredNorm();
      worst_ratio = std::max(worst_ratio, est.second_moment / bound);
      if (est.second_moment > bound * (1.0 + 1e-12) + kMeanSlack * est.second_moment_se) {
        bounded = false;
      }
    }
    results.push_back({"quantizer unbiased: " + spec.Describe(), unbiased,
                       Format("max |mean - x| / se = %.3g (limit %.1f)", worst_z, kMeanSlack)});
    results.push_back({"quantizer second moment: " + spec.Describe(), bounded,
                       Format("max E||Q||^2 / ((omega+1)||x||^2) = %.4g, omega = %.4g",
                              worst_ratio, omega)});
  }

  // Exact enumeration for tiny vectors.
  {
    bool ok = true;
    double worst = 0.0;
    for (std::size_t dim = 1; dim <= 3; ++dim) {
      for (int trial = 0; trial < 5; ++trial) {
        const Vector x = GaussianVector(rng, dim);
        for (double p : {1.0, 2.0, inf}) {
          const double err = (ExactDitherMoments(x, p, 1).mean - x).cwiseAbs().maxCoeff();
          worst = std::max(worst, err);
          if (err > 1e-12 * (1.0 + x.cwiseAbs().maxCoeff())) ok = false;
        }
        for (std::uint32_t r = 1; r <= dim; ++r) {
          const ExactMoments exact = ExactSparsifyMoments(x, r);
          const Vector& mean = exact.mean;
          const double second = exact.second_moment;
          const double expected = static_cast<double>(dim) / r * x.squaredNorm();
          worst = std::max(worst, (mean - x).cwiseAbs().maxCoeff());
          if ((mean - x).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + x.cwiseAbs().maxCoeff()) ||
              std::abs(second - expected) > 1e-12 * expected) {
            ok = false;
          }
        }
      }
    }
    results.push_back({"exact enumeration (d <= 3)", ok,
                       Format("max |E Q(x) - x| = %.3g", worst)});
  }

  // Expected sparsity of p = 2, s = 1 dithering in d = 100.
  {
    const Vector x = GaussianVector(rng, 100);
    const MomentEstimate est = EstimateMoments(QuantizerSpec::Dither(2.0, 1), x,
                                               options.quick ? 5000 : 20000,
                                               options.seed + 77);
    const double limit = 11.0 * 1.1;
    results.push_back({"dither sparsity (d = 100)", est.mean_nonzeros <= limit,
                       Format("mean nonzeros = %.4g (limit %.4g)", est.mean_nonzeros, limit)});
  }
  return results;
}

std::vector<PropertyResult> VerifyContraction(const VerifyOptions& options) {
  std::vector<PropertyResult> results;
  const std::size_t samples = options.quick ? 200 : 500;

  // DIANA, full gradients, strongly convex quadratic.
  {
    SynthOptions synth;
    synth.lambda2 = 0.0;
    synth.condition = 100.0;
    const FiniteSumProblem problem =
        SynthProblem(LossKind::kQuadratic, 10, 4, 1, options.seed, synth);
    const ReferencePoint point = SolveReference(problem, 1e-12);
    const ReferenceSolution ref = MakeReference(problem, point.x_star, point.f_star);
    const QuantizerSpec spec = QuantizerSpec::Dither(2.0, 1);
    const double omega = OmegaBound(spec, problem.dim());
    MethodConfig base;
    base.method = Method::kDiana;
    base.oracle = DianaOracle::kFullGrad;
    const MethodConfig config = DefaultHyperparams(
        base, Regime::kStronglyConvex, problem.constants(), omega, problem.n(), problem.m());
    const LyapunovParams params = LyapunovParams::Make(
        config, Regime::kStronglyConvex, problem.constants().L, omega, problem.n(), problem.m());
    RoundContext ctx;
    ctx.problem = &problem;
    ctx.quantizer = spec;
    ctx.config = config;
    const RunState frozen = PerturbedState(problem, config, ref, 1.0, options.seed);
    const ContractionEstimate est =
        OneStepContraction(problem, frozen, ctx, ref, params, samples, options.seed * 7919u);
    const double target = (1.0 - config.gamma * problem.constants().mu) * est.current;
    results.push_back({"DIANA one-step contraction", est.mean_next <= target + 3.0 * est.std_err,
                       Format("E Psi' / Psi = %.6g, bound %.6g", est.mean_next / est.current,
                              target / est.current)});
  }

  // VR-DIANA, both variants, synthetic logistic.
  {
    const std::size_t m = options.quick ? 10 : 50;
    const FiniteSumProblem problem =
        SynthProblem(LossKind::kLogistic, 20, 4, m, options.seed, SynthOptions{});
    const ReferencePoint point = SolveReference(problem, 1e-12);
    const ReferenceSolution ref = MakeReference(problem, point.x_star, point.f_star);
    const QuantizerSpec spec = QuantizerSpec::Dither(2.0, 1);
    const double omega = OmegaBound(spec, problem.dim());
    for (VrVariant variant : {VrVariant::kLSvrg, VrVariant::kSaga}) {
      MethodConfig base;
      base.method = Method::kVrDiana;
      base.variant = variant;
      const MethodConfig config = DefaultHyperparams(
          base, Regime::kStronglyConvex, problem.constants(), omega, problem.n(), m);
      const LyapunovParams params = LyapunovParams::Make(
          config, Regime::kStronglyConvex, problem.constants().L, omega, problem.n(), m);
      const double rho = VrRate(problem.constants().mu, problem.constants().L, omega,
                                config.alpha, problem.n(), m);
      RoundContext ctx;
      ctx.problem = &problem;
      ctx.quantizer = spec;
      ctx.config = config;
      const RunState frozen = PerturbedState(problem, config, ref, 1.0, options.seed + 1);
      const ContractionEstimate est =
          OneStepContraction(problem, frozen, ctx, ref, params, samples, options.seed * 104729u);
      const double target = (1.0 - rho) * est.current;
      results.push_back({std::string("VR-DIANA one-step contraction (") +
                             (variant == VrVariant::kLSvrg ? "L-SVRG" : "SAGA") + ")",
                         est.mean_next <= target + 3.0 * est.std_err,
                         Format("E psi' / psi = %.6g, bound %.6g", est.mean_next / est.current,
                                target / est.current)});
    }
  }
  return results;
}

}  // namespace qdiana
