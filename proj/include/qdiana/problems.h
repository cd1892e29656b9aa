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

#include "qdiana/linalg.h"

namespace qdiana {

enum class LossKind { kLogistic, kQuadratic };

const char* LossKindName(LossKind kind);

// Sparse feature row with strictly increasing indices.
struct SparseRow {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  double Dot(const Vector& x) const;
  void AddScaledTo(double scale, Vector& y) const;  // y += scale * row
  double SquaredNorm() const;

  bool operator==(const SparseRow&) const = default;
};

// ln(1 + exp(-label * <features, x>)).
struct LogisticComponent {
  SparseRow features;
  double label = 1.0;  // -1 or +1
};

// 0.5 (x - center)^T hessian (x - center), hessian symmetric PSD.
struct QuadraticComponent {
  Matrix hessian;
  Vector center;
};

// Closed convex regularizer R handled by the prox step. The smooth ridge term
// lambda2 lives inside every component instead.
struct Regularizer {
  enum class Kind { kNone, kL1, kL2 };
  Kind kind = Kind::kNone;
  double lambda = 0.0;

  static Regularizer None() { return {}; }
  static Regularizer L1(double lambda) { return {Kind::kL1, lambda}; }
  static Regularizer L2(double lambda) { return {Kind::kL2, lambda}; }

  double Value(const Vector& x) const;
};

// prox_{gamma R}(x) = argmin_y gamma R(y) + 0.5 ||y - x||^2, closed form.
Vector Prox(const Regularizer& reg, double gamma, const Vector& x);

struct Constants {
  double L = 0.0;
  double mu = 0.0;

  // (L + mu) / (2 mu); throws kNotStronglyConvex when mu == 0.
  double Kappa() const;
};

struct LossAndGradient {
  double loss;
  Vector gradient;
};

// f(x) = (1/n) sum_i f_i(x),  f_i(x) = (1/m) sum_j f_ij(x), plus R(x).
// Immutable after construction.
class FiniteSumProblem {
 public:
  static FiniteSumProblem Logistic(std::size_t dim, std::size_t n,
                                   std::size_t m,
                                   std::vector<LogisticComponent> components,
                                   double lambda2,
                                   Regularizer regularizer = {});
  static FiniteSumProblem Quadratic(std::size_t dim, std::size_t n,
                                    std::size_t m,
                                    std::vector<QuadraticComponent> components,
                                    double lambda2,
                                    Regularizer regularizer = {});

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t dim() const noexcept { return dim_; }
  LossKind kind() const noexcept { return kind_; }
  double lambda2() const noexcept { return lambda2_; }
  const Regularizer& regularizer() const noexcept { return regularizer_; }
  const Constants& constants() const noexcept { return constants_; }

  const LogisticComponent& logistic(std::size_t i, std::size_t j) const;
  const QuadraticComponent& quadratic(std::size_t i, std::size_t j) const;

  double ComponentLoss(std::size_t i, std::size_t j, const Vector& x) const;
  void ComponentGradient(std::size_t i, std::size_t j, const Vector& x,
                         Vector& out) const;
  Vector ComponentGradient(std::size_t i, std::size_t j, const Vector& x) const;
  LossAndGradient EvaluateComponent(std::size_t i, std::size_t j,
                                    const Vector& x) const;

  double WorkerLoss(std::size_t i, const Vector& x) const;
  Vector WorkerGradient(std::size_t i, const Vector& x) const;

  // Smooth part f; worker terms are combined pairwise in worker order.
  double Loss(const Vector& x) const;
  Vector Gradient(const Vector& x) const;
  // f(x) + R(x).
  double Objective(const Vector& x) const;

  // Stable byte encoding of the whole problem, used for equality checks.
  std::vector<std::uint8_t> Serialize() const;

 private:
  FiniteSumProblem() = default;
  void CheckIndex(std::size_t i, std::size_t j) const;
  void CheckPoint(const Vector& x) const;
  void ComputeConstants();

  LossKind kind_ = LossKind::kLogistic;
  std::size_t dim_ = 0;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  double lambda2_ = 0.0;
  Regularizer regularizer_;
  Constants constants_;
  std::vector<LogisticComponent> logistic_;    // row-major n x m
  std::vector<QuadraticComponent> quadratic_;  // row-major n x m
};

// Stable ln(1 + exp(z)).
double Softplus(double z);
// Stable 1 / (1 + exp(-z)).
double Sigmoid(double z);

struct GradCheckReport {
  double max_relative_error = 0.0;
  int probe_count = 0;
};

// Compares analytic component gradients against central differences at
// `probes` random (i, j, x) triples; probe 0 uses x itself, later probes
// perturb it. Per probe the error is ||fd - g|| / ||g||; when ||g|| <= 1e-8
// the absolute error is compared against 1e-8 instead.
GradCheckReport FdCheck(const FiniteSumProblem& problem, const Vector& x,
                        double h, int probes = 5, std::uint64_t seed = 0);

}  // namespace qdiana
