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

#include "qdiana/linalg.h"

#include "qdiana/error.h"

namespace qdiana {

namespace {

Vector SumRange(std::span<const Vector> vs) {
  if (vs.size() == 1) return vs[0];
  const std::size_t half = vs.size() / 2;
  Vector left = SumRange(vs.first(half));
  left += SumRange(vs.subspan(half));
  return left;
}

double SumRange(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum;
  }
  const std::size_t half = xs.size() / 2;
  return SumRange(xs.first(half)) + SumRange(xs.subspan(half));
}

}  // namespace

Vector PairwiseSum(std::span<const Vector> vs) {
  if (vs.empty()) throw Error(ErrorKind::kInvalidState, "sum of zero vectors");
  return SumRange(vs);
}

Vector PairwiseMean(std::span<const Vector> vs) {
  Vector sum = PairwiseSum(vs);
  sum /= static_cast<double>(vs.size());
  return sum;
}

double PairwiseSum(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return SumRange(xs);
}

}  // namespace qdiana
