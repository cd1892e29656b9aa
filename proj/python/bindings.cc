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

// Python bindings: quantizers, experiment runs and the command-line entry.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qdiana/cli.h"
#include "qdiana/config.h"
#include "qdiana/engine.h"
#include "qdiana/error.h"
#include "qdiana/quantize.h"
#include "qdiana/rng.h"

namespace py = pybind11;

namespace qdiana {
namespace {

QuantizerSpec MakeSpec(const std::string& scheme, std::size_t dim, double p,
                       std::uint32_t s, std::uint32_t r,
                       std::optional<std::size_t> block_size) {
  if (scheme == "identity") return QuantizerSpec::Identity();
  if (scheme == "dither") return QuantizerSpec::Dither(p, s);
  if (scheme == "sparsify") return QuantizerSpec::Sparsify(r);
  if (scheme == "block_dither") {
    return QuantizerSpec::BlockDither(UniformBlocks(dim, block_size.value_or(dim)));
  }
  throw Error(ErrorKind::kInvalidInput, "unknown quantizer scheme: " + scheme);
}

py::tuple PyQuantize(const Vector& x, const std::string& scheme, std::uint64_t seed,
                     double p, std::uint32_t s, std::uint32_t r,
                     std::optional<std::size_t> block_size, int float_bits) {
  const auto dim = static_cast<std::size_t>(x.size());
  const QuantizerSpec spec = MakeSpec(scheme, dim, p, s, r, block_size);
  LedgerModel ledger;
  ledger.float_bits = float_bits;
  ledger.Validate();
  Rng rng(seed);
  const QuantizedMessage msg = Quantize(spec, x, rng, ledger);
  return py::make_tuple(Decode(msg), msg.bit_cost);
}

double PyOmegaBound(const std::string& scheme, std::size_t dim, double p,
                    std::uint32_t s, std::uint32_t r,
                    std::optional<std::size_t> block_size) {
  return OmegaBound(MakeSpec(scheme, dim, p, s, r, block_size), dim);
}

py::dict PyRun(const std::string& json_text, const std::string& base_dir) {
  const ExperimentFile file = ParseExperiment(json_text, base_dir);
  Trace trace;
  {
    py::gil_scoped_release release;
    trace = RunExperiment(file.run);
  }
  std::vector<std::uint64_t> k, up, down;
  std::vector<double> f_gap, dist_sq, lyapunov, H, D, grad_norm_sq;
  for (const TraceRecord& rec : trace.records) {
    k.push_back(rec.k);
    f_gap.push_back(rec.f_gap);
    dist_sq.push_back(rec.dist_sq);
    lyapunov.push_back(rec.lyapunov);
    H.push_back(rec.H);
    D.push_back(rec.D);
    grad_norm_sq.push_back(rec.grad_norm_sq);
    up.push_back(rec.bits_up_cum);
    down.push_back(rec.bits_down_cum);
  }
  py::dict out;
  out["k"] = k;
  out["f_gap"] = f_gap;
  out["dist_sq"] = dist_sq;
  out["lyapunov"] = lyapunov;
  out["H"] = H;
  out["D"] = D;
  out["grad_norm_sq"] = grad_norm_sq;
  out["bits_up_cum"] = up;
  out["bits_down_cum"] = down;
  out["x_final"] = trace.x_final;
  out["uplink_total"] = trace.uplink_total;
  out["downlink_total"] = trace.downlink_total;
  out["omega"] = trace.omega;
  out["f_star"] = trace.f_star;
  out["alpha"] = trace.method.alpha;
  out["gamma"] = trace.method.gamma;
  return out;
}

py::tuple PyCli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = CliMain(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace
}  // namespace qdiana

PYBIND11_MODULE(_qdiana, m) {
  using namespace qdiana;
  m.doc() = "Distributed learning with compressed gradient differences";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("quantize", &PyQuantize, py::arg("x"), py::arg("scheme") = "dither",
        py::arg("seed") = 0, py::arg("p") = 2.0, py::arg("s") = 1, py::arg("r") = 1,
        py::arg("block_size") = py::none(), py::arg("float_bits") = 64,
        "Quantizes x and returns (decoded vector, bit cost).");
  m.def("omega_bound", &PyOmegaBound, py::arg("scheme"), py::arg("dim"),
        py::arg("p") = 2.0, py::arg("s") = 1, py::arg("r") = 1,
        py::arg("block_size") = py::none(),
        "Worst-case variance parameter of a quantizer on vectors of size dim.");
  m.def("run", &PyRun, py::arg("config_json"), py::arg("base_dir") = "",
        "Runs a JSON experiment and returns its trace columns and totals.");
  m.def("cli", &PyCli, py::arg("args"),
        "Invokes the command-line tool and returns (exit code, stdout, stderr).");
}
