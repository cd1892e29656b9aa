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

#include "qdiana/cli.h"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "qdiana/config.h"
#include "qdiana/engine.h"
#include "qdiana/error.h"
#include "qdiana/report.h"
#include "qdiana/verify.h"

namespace qdiana {

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

std::string Real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void WriteFile(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw Error(ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

void Summarize(const Trace& trace, std::ostream& err) {
  const TraceRecord& last = trace.records.back();
  err << "method " << MethodName(trace.method.method) << ", alpha " << trace.method.alpha
      << ", gamma " << trace.method.gamma << ", omega " << trace.omega << "\n";
  err << "k = " << last.k << ": f - f* = " << last.f_gap << ", |x - x*|^2 = " << last.dist_sq
      << ", uplink bits = " << trace.uplink_total << ", downlink bits = "
      << trace.downlink_total << "\n";
  if (trace.sigma_sq) err << "estimated sigma^2 at x0 = " << *trace.sigma_sq << "\n";
}

int RunCommand(const std::string& config_path, const std::optional<std::string>& output,
               const std::optional<std::string>& binary, std::optional<int> threads,
               std::ostream& out, std::ostream& err) {
  ExperimentFile file = LoadExperiment(config_path);
  if (threads) file.run.threads = *threads;
  file.run.Validate();
  const Trace trace = RunExperiment(file.run);
  const std::string csv = ToCsv(trace.records);
  const std::optional<fs::path> csv_path =
      output ? std::optional<fs::path>(*output) : file.output_path;
  if (csv_path) {
    WriteFile(*csv_path, csv);
    err << "wrote " << csv_path->string() << "\n";
  } else {
    out << csv;
  }
  const std::optional<fs::path> bin_path =
      binary ? std::optional<fs::path>(*binary) : file.binary_path;
  if (bin_path) {
    std::ostringstream buf;
    WriteTraceBinary(trace, buf);
    WriteFile(*bin_path, buf.str());
  }
  Summarize(trace, err);
  return kOk;
}

int SweepCommand(const std::string& config_path, const std::string& output_dir,
                 std::ostream& err) {
  const ExperimentFile file = LoadExperiment(config_path);
  const SweepSpec& sweep = file.sweep;
  if (sweep.empty()) {
    throw ConfigError("sweep", "no sweep axes given (alpha, gamma, block_size)");
  }
  if (!sweep.block_size.empty() && file.run.quantizer.scheme != Scheme::kBlockDither) {
    throw ConfigError("sweep.block_size", "needs quantizer.scheme = block_dither");
  }
  auto axis = [](const auto& values) {
    using T = typename std::decay_t<decltype(values)>::value_type;
    std::vector<std::optional<T>> out;
    if (values.empty()) out.push_back(std::nullopt);
    for (const auto& v : values) out.push_back(v);
    return out;
  };
  const FiniteSumProblem problem = BuildProblem(file.run.problem);
  const ReferencePoint ref =
      SolveReference(problem, file.run.reference_tol, file.run.reference_max_iters);

  const fs::path dir(output_dir);
  fs::create_directories(dir);
  std::ostringstream summary;
  summary << "cell,alpha,gamma,block_size,status,final_f_gap,final_dist_sq,bits_up,bits_down\n";
  std::size_t cell = 0;
  for (const auto& block : axis(sweep.block_size)) {
    for (const auto& alpha : axis(sweep.alpha)) {
      for (const auto& gamma : axis(sweep.gamma)) {
        RunConfig run = file.run;
        if (block) {
          run.quantizer.block_size = *block;
          run.quantizer.block_sizes.clear();
        }
        if (alpha) {
          run.method.alpha = *alpha;
          run.auto_alpha = false;
        }
        if (gamma) {
          run.method.gamma = *gamma;
          run.auto_gamma = false;
        }
        const fs::path csv_path = dir / ("cell_" + std::to_string(cell) + ".csv");
        std::string status = "ok";
        Trace trace;
        try {
          trace = RunOnProblem(run, problem, ref);
        } catch (const DivergenceError& e) {
          status = "diverged";
          trace = e.trace();
        } catch (const ConfigError& e) {
          status = "invalid";
          err << "cell " << cell << ": " << e.what() << "\n";
        }
        if (!trace.records.empty()) WriteFile(csv_path, ToCsv(trace.records));
        const double a = trace.records.empty() ? run.method.alpha : trace.method.alpha;
        const double g = trace.records.empty() ? run.method.gamma : trace.method.gamma;
        summary << cell << ',' << Real(a) << ',' << Real(g) << ','
                << (block ? std::to_string(*block) : std::string()) << ',' << status << ',';
        if (trace.records.empty()) {
          summary << ",,,\n";
        } else {
          const TraceRecord& last = trace.records.back();
          summary << Real(last.f_gap) << ',' << Real(last.dist_sq) << ','
                  << last.bits_up_cum << ',' << last.bits_down_cum << '\n';
        }
        ++cell;
      }
    }
  }
  WriteFile(dir / "summary.csv", summary.str());
  err << "wrote " << cell << " cells to " << dir.string() << "\n";
  return kOk;
}

int VerifyCommand(bool quick, std::uint64_t seed, const std::string& suite,
                  std::ostream& out) {
  VerifyOptions options;
  options.quick = quick;
  options.seed = seed;
  std::vector<PropertyResult> results;
  if (suite == "all" || suite == "quantizers") {
    auto r = VerifyQuantizers(options);
    results.insert(results.end(), r.begin(), r.end());
  }
  if (suite == "all" || suite == "contraction") {
    auto r = VerifyContraction(options);
    results.insert(results.end(), r.begin(), r.end());
  }
  std::vector<std::string> failed;
  for (const PropertyResult& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
    if (!r.passed) failed.push_back(r.name);
  }
  if (failed.empty()) {
    out << "all " << results.size() << " properties passed\n";
    return kOk;
  }
  out << failed.size() << " of " << results.size() << " properties failed:\n";
  for (const std::string& name : failed) out << "  " << name << "\n";
  return kFailure;
}

int PlotCommand(const std::vector<std::string>& inputs, const std::string& output,
                std::ostream& err) {
  std::vector<PlotSeries> series;
  for (const std::string& path : inputs) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open trace '" + path + "'");
    series.push_back({fs::path(path).stem().string(), ReadCsv(in)});
  }
  WriteFile(output, RenderSvg(series));
  err << "wrote " << output << "\n";
  return kOk;
}

}  // namespace

int CliMain(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Distributed optimization with quantized gradient differences", "qdiana"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output;
  std::optional<std::string> binary;
  std::optional<int> threads;
  auto* run = app.add_subcommand("run", "Run one experiment and write its trace as CSV");
  run->add_option("config", config_path, "Experiment JSON file")->required();
  run->add_option("-o,--output", output, "CSV path (default: output.path, else stdout)");
  run->add_option("--binary", binary, "Also write a binary trace");
  run->add_option("-t,--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));

  std::string sweep_dir = "sweep_out";
  auto* sweep = app.add_subcommand("sweep", "Run a grid over alpha, gamma and block size");
  sweep->add_option("config", config_path, "Experiment JSON file with a sweep section")
      ->required();
  sweep->add_option("-d,--output-dir", sweep_dir, "Directory for per-cell CSVs and summary");

  bool quick = false;
  std::uint64_t seed = 1;
  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "Run the statistical property suites");
  verify->add_flag("--quick", quick, "Fewer Monte-Carlo samples");
  verify->add_option("--seed", seed, "Base seed");
  verify->add_option("--suite", suite, "Which suite to run")
      ->check(CLI::IsMember({"all", "quantizers", "contraction"}));

  std::vector<std::string> inputs;
  std::string svg_path = "plot.svg";
  auto* plot = app.add_subcommand("plot", "Render trace CSVs into an SVG figure");
  plot->add_option("traces", inputs, "Trace CSV files")->required();
  plot->add_option("-o,--output", svg_path, "SVG path");

  std::vector<std::string> argv;
  for (auto it = args.rbegin(); it != args.rend(); ++it) argv.push_back(*it);
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*run) return RunCommand(config_path, output, binary, threads, out, err);
    if (*sweep) return SweepCommand(config_path, sweep_dir, err);
    if (*verify) return VerifyCommand(quick, seed, suite, out);
    if (*plot) return PlotCommand(inputs, svg_path, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error (" << ErrorKindName(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::kIo ? kUsage : kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace qdiana
