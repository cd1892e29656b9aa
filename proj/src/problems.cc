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

#include "qdiana/problems.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "qdiana/error.h"
#include "qdiana/rng.h"

namespace qdiana {

namespace {

[[noreturn]] void Invalid(const std::string& what) {
  throw Error(ErrorKind::kInvalidInput, what);
}

void ValidateRow(const SparseRow& row, std::size_t dim) {
  if (row.indices.size() != row.values.size()) {
    Invalid("sparse row has mismatched index/value counts");
  }
  std::int64_t previous = -1;
  for (std::size_t k = 0; k < row.indices.size(); ++k) {
    if (row.indices[k] >= dim) Invalid("feature index out of range");
    if (static_cast<std::int64_t>(row.indices[k]) <= previous) {
      Invalid("feature indices must be strictly increasing");
    }
    if (!std::isfinite(row.values[k])) Invalid("non-finite feature value");
    previous = row.indices[k];
  }
}

void PutU64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void PutF64(std::vector<std::uint8_t>& out, double v) {
  PutU64(out, std::bit_cast<std::uint64_t>(v));
}

}  // namespace

const char* LossKindName(LossKind kind) {
  return kind == LossKind::kLogistic ? "logistic" : "quadratic";
}

// --- SparseRow -----------------------------------------------------------------

double SparseRow::Dot(const Vector& x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < indices.size(); ++k) sum += values[k] * x[indices[k]];
  return sum;
}

void SparseRow::AddScaledTo(double scale, Vector& y) const {
  for (std::size_t k = 0; k < indices.size(); ++k) y[indices[k]] += scale * values[k];
}

double SparseRow::SquaredNorm() const {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return sum;
}

// --- regularizers ----------------------------------------------------------------

double Regularizer::Value(const Vector& x) const {
  switch (kind) {
    case Kind::kNone: return 0.0;
    case Kind::kL1: return lambda * x.lpNorm<1>();
    case Kind::kL2: return 0.5 * lambda * x.squaredNorm();
  }
  return 0.0;
}

Vector Prox(const Regularizer& reg, double gamma, const Vector& x) {
  switch (reg.kind) {
    case Regularizer::Kind::kNone:
      return x;
    case Regularizer::Kind::kL1: {
      const double t = gamma * reg.lambda;
      Vector y(x.size());
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double a = std::abs(x[k]) - t;
        y[k] = a > 0.0 ? std::copysign(a, x[k]) : 0.0;
      }
      return y;
    }
    case Regularizer::Kind::kL2:
      return x / (1.0 + gamma * reg.lambda);
  }
  return x;
}

double Constants::Kappa() const {
  if (!(mu > 0.0)) {
    throw Error(ErrorKind::kNotStronglyConvex,
                "condition number requires mu > 0");
  }
  return (L + mu) / (2.0 * mu);
}

// --- scalar helpers ---------------------------------------------------------------

double Softplus(double z) {
  if (z > 30.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// --- FiniteSumProblem ---------------------------------------------------------------

FiniteSumProblem FiniteSumProblem::Logistic(
    std::size_t dim, std::size_t n, std::size_t m,
    std::vector<LogisticComponent> components, double lambda2,
    Regularizer regularizer) {
  if (dim == 0 || n == 0 || m == 0) Invalid("d, n and m must be positive");
  if (components.size() != n * m) Invalid("expected n*m logistic components");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) Invalid("lambda2 must be >= 0");
  for (const auto& c : components) {
    ValidateRow(c.features, dim);
    if (c.label != 1.0 && c.label != -1.0) Invalid("labels must be -1 or +1");
  }
  FiniteSumProblem p;
  p.kind_ = LossKind::kLogistic;
  p.dim_ = dim;
  p.n_ = n;
  p.m_ = m;
  p.lambda2_ = lambda2;
  p.regularizer_ = regularizer;
  p.logistic_ = std::move(components);
  p.ComputeConstants();
  return p;
}

FiniteSumProblem FiniteSumProblem::Quadratic(
    std::size_t dim, std::size_t n, std::size_t m,
    std::vector<QuadraticComponent> components, double lambda2,
    Regularizer regularizer) {
  if (dim == 0 || n == 0 || m == 0) Invalid("d, n and m must be positive");
  if (components.size() != n * m) Invalid("expected n*m quadratic components");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) Invalid("lambda2 must be >= 0");
  const auto d = static_cast<Eigen::Index>(dim);
  for (const auto& c : components) {
    if (c.hessian.rows() != d || c.hessian.cols() != d || c.center.size() != d) {
      Invalid("quadratic component has wrong shape");
    }
    if (!c.hessian.allFinite() || !c.center.allFinite()) Invalid("non-finite quadratic data");
    if (!c.hessian.isApprox(c.hessian.transpose(), 1e-12)) {
      Invalid("quadratic hessian must be symmetric");
    }
  }
  FiniteSumProblem p;
  p.kind_ = LossKind::kQuadratic;
  p.dim_ = dim;
  p.n_ = n;
  p.m_ = m;
  p.lambda2_ = lambda2;
  p.regularizer_ = regularizer;
  p.quadratic_ = std::move(components);
  p.ComputeConstants();
  return p;
}

void FiniteSumProblem::ComputeConstants() {
  if (kind_ == LossKind::kLogistic) {
    // sigma' <= 1/4 bounds each Hessian by a a^T / 4 + lambda2 I.
    double max_sq = 0.0;
    for (const auto& c : logistic_) max_sq = std::max(max_sq, c.features.SquaredNorm());
    constants_.L = max_sq / 4.0 + lambda2_;
    constants_.mu = lambda2_;
    return;
  }
  double max_eig = 0.0;
  double min_worker_eig = std::numeric_limits<double>::infinity();
  const auto d = static_cast<Eigen::Index>(dim_);
  for (std::size_t i = 0; i < n_; ++i) {
    Matrix mean = Matrix::Zero(d, d);
    for (std::size_t j = 0; j < m_; ++j) {
      const Matrix& a = quadratic_[i * m_ + j].hessian;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
      max_eig = std::max(max_eig, eig.eigenvalues().maxCoeff());
      mean += a;
    }
    mean /= static_cast<double>(m_);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(mean, Eigen::EigenvaluesOnly);
    min_worker_eig = std::min(min_worker_eig, eig.eigenvalues().minCoeff());
  }
  if (min_worker_eig < -1e-10 * std::max(1.0, max_eig)) {
    Invalid("quadratic hessians must be positive semidefinite");
  }
  constants_.L = max_eig + lambda2_;
  constants_.mu = std::max(min_worker_eig, 0.0) + lambda2_;
}

void FiniteSumProblem::CheckIndex(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= m_) {
    Invalid("component index (" + std::to_string(i) + "," + std::to_string(j) +
            ") out of range for n=" + std::to_string(n_) +
            ", m=" + std::to_string(m_));
  }
}

void FiniteSumProblem::CheckPoint(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) {
    Invalid("point has dimension " + std::to_string(x.size()) + ", expected " +
            std::to_string(dim_));
  }
}

const LogisticComponent& FiniteSumProblem::logistic(std::size_t i,
                                                    std::size_t j) const {
  CheckIndex(i, j);
  if (kind_ != LossKind::kLogistic) Invalid("not a logistic problem");
  return logistic_[i * m_ + j];
}

const QuadraticComponent& FiniteSumProblem::quadratic(std::size_t i,
                                                      std::size_t j) const {
  CheckIndex(i, j);
  if (kind_ != LossKind::kQuadratic) Invalid("not a quadratic problem");
  return quadratic_[i * m_ + j];
}

double FiniteSumProblem::ComponentLoss(std::size_t i, std::size_t j,
                                       const Vector& x) const {
  CheckIndex(i, j);
  CheckPoint(x);
  const double ridge = 0.5 * lambda2_ * x.squaredNorm();
  if (kind_ == LossKind::kLogistic) {
    const auto& c = logistic_[i * m_ + j];
    return Softplus(-c.label * c.features.Dot(x)) + ridge;
  }
  const auto& c = quadratic_[i * m_ + j];
  const Vector diff = x - c.center;
  return 0.5 * diff.dot(c.hessian * diff) + ridge;
}

void FiniteSumProblem::ComponentGradient(std::size_t i, std::size_t j,
                                         const Vector& x, Vector& out) const {
  CheckIndex(i, j);
  CheckPoint(x);
  if (kind_ == LossKind::kLogistic) {
    const auto& c = logistic_[i * m_ + j];
    const double margin = c.label * c.features.Dot(x);
    out = lambda2_ * x;
    c.features.AddScaledTo(-c.label * Sigmoid(-margin), out);
    return;
  }
  const auto& c = quadratic_[i * m_ + j];
  out.noalias() = c.hessian * (x - c.center);
  out += lambda2_ * x;
}

Vector FiniteSumProblem::ComponentGradient(std::size_t i, std::size_t j,
                                           const Vector& x) const {
  Vector out;
  ComponentGradient(i, j, x, out);
  return out;
}

LossAndGradient FiniteSumProblem::EvaluateComponent(std::size_t i,
                                                    std::size_t j,
                                                    const Vector& x) const {
  return {ComponentLoss(i, j, x), ComponentGradient(i, j, x)};
}

double FiniteSumProblem::WorkerLoss(std::size_t i, const Vector& x) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < m_; ++j) sum += ComponentLoss(i, j, x);
  return sum / static_cast<double>(m_);
}

Vector FiniteSumProblem::WorkerGradient(std::size_t i, const Vector& x) const {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(dim_));
  Vector g;
  for (std::size_t j = 0; j < m_; ++j) {
    ComponentGradient(i, j, x, g);
    sum += g;
  }
  sum /= static_cast<double>(m_);
  return sum;
}

double FiniteSumProblem::Loss(const Vector& x) const {
  std::vector<double> losses(n_);
  for (std::size_t i = 0; i < n_; ++i) losses[i] = WorkerLoss(i, x);
  return PairwiseSum(losses) / static_cast<double>(n_);
}

Vector FiniteSumProblem::Gradient(const Vector& x) const {
  std::vector<Vector> grads(n_);
  for (std::size_t i = 0; i < n_; ++i) grads[i] = WorkerGradient(i, x);
  return PairwiseMean(grads);
}

double FiniteSumProblem::Objective(const Vector& x) const {
  return Loss(x) + regularizer_.Value(x);
}

std::vector<std::uint8_t> FiniteSumProblem::Serialize() const {
  std::vector<std::uint8_t> out;
  out.push_back(static_cast<std::uint8_t>(kind_));
  PutU64(out, dim_);
  PutU64(out, n_);
  PutU64(out, m_);
  PutF64(out, lambda2_);
  out.push_back(static_cast<std::uint8_t>(regularizer_.kind));
  PutF64(out, regularizer_.lambda);
  for (const auto& c : logistic_) {
    PutF64(out, c.label);
    PutU64(out, c.features.indices.size());
    for (std::size_t k = 0; k < c.features.indices.size(); ++k) {
      PutU64(out, c.features.indices[k]);
      PutF64(out, c.features.values[k]);
    }
  }
  for (const auto& c : quadratic_) {
    for (Eigen::Index k = 0; k < c.hessian.size(); ++k) PutF64(out, c.hessian.data()[k]);
    for (Eigen::Index k = 0; k < c.center.size(); ++k) PutF64(out, c.center[k]);
  }
  return out;
}

// --- finite differences ----------------------------------------------------------

GradCheckReport FdCheck(const FiniteSumProblem& problem, const Vector& x,
                        double h, int probes, std::uint64_t seed) {
  if (!(h > 0.0)) Invalid("finite-difference step must be positive");
  if (probes < 1) Invalid("need at least one probe");
  constexpr double kZeroGradient = 1e-8;
  GradCheckReport report;
  const auto d = static_cast<Eigen::Index>(problem.dim());
  for (int t = 0; t < probes; ++t) {
    Rng rng = DeriveStream(seed, 0, Purpose::kProbe, static_cast<std::uint64_t>(t));
    const auto i = static_cast<std::size_t>(rng.Below(problem.n()));
    const auto j = static_cast<std::size_t>(rng.Below(problem.m()));
    Vector point = x;
    if (t > 0) {
      for (Eigen::Index k = 0; k < d; ++k) point[k] += 0.5 * rng.Normal();
    }
    const Vector analytic = problem.ComponentGradient(i, j, point);
    Vector numeric(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      Vector plus = point;
      Vector minus = point;
      plus[k] += h;
      minus[k] -= h;
      numeric[k] = (problem.ComponentLoss(i, j, plus) -
                    problem.ComponentLoss(i, j, minus)) / (2.0 * h);
    }
    const double abs_err = (numeric - analytic).norm();
    const double scale = analytic.norm();
    double rel;
    if (scale > kZeroGradient) {
      rel = abs_err / scale;
    } else {
      rel = abs_err <= kZeroGradient ? 0.0 : abs_err / kZeroGradient;
    }
    report.max_relative_error = std::max(report.max_relative_error, rel);
    ++report.probe_count;
  }
  return report;
}

}  // namespace qdiana
