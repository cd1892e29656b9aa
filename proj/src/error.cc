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

#include "qdiana/error.h"

namespace qdiana {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kCorruptMessage: return "corrupt-message";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kEmptyDataset: return "empty-dataset";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kNotStronglyConvex: return "not-strongly-convex";
    case ErrorKind::kRegime: return "regime";
    case ErrorKind::kNoConvergence: return "no-convergence";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kInvalidState: return "invalid-state";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kWrongMethod: return "wrong-method";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace qdiana
