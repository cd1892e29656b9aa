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

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace qdiana {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Pairwise (tree) sum in ascending index order; the result does not depend on
// which thread produced which input.
Vector PairwiseSum(std::span<const Vector> vs);

// PairwiseSum(vs) / vs.size().
Vector PairwiseMean(std::span<const Vector> vs);

double PairwiseSum(std::span<const double> xs);

inline bool AllFinite(const Vector& x) { return x.allFinite(); }

}  // namespace qdiana
