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

#include "qdiana/config.h"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <limits>

#include "qdiana/error.h"

namespace qdiana {

namespace {

using Json = nlohmann::json;

std::string Join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void CheckKeys(const Json& obj, const std::string& path,
               std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (std::string_view a : allowed) known = known || it.key() == a;
    if (!known) throw ConfigError(Join(path, it.key()), "unknown key");
  }
}

const Json* Find(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double Number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
  return d;
}

std::uint64_t Unsigned(const Json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(path, "expected a nonnegative integer");
}

bool Bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
  return v.get<bool>();
}

std::string String(const Json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

template <typename T, typename F>
std::vector<T> List(const Json& v, const std::string& path, F convert) {
  if (!v.is_array()) throw ConfigError(path, "expected a list");
  std::vector<T> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(static_cast<T>(convert(v[k], path + "[" + std::to_string(k) + "]")));
  }
  return out;
}

Regularizer ParseRegularizer(const Json& v, const std::string& path) {
  CheckKeys(v, path, {"kind", "lambda"});
  Regularizer reg;
  const std::string kind = Find(v, "kind") ? String(v["kind"], Join(path, "kind")) : "none";
  const double lambda = Find(v, "lambda") ? Number(v["lambda"], Join(path, "lambda")) : 0.0;
  if (lambda < 0.0) throw ConfigError(Join(path, "lambda"), "must be nonnegative");
  if (kind == "none") return Regularizer::None();
  if (kind == "l1") return Regularizer::L1(lambda);
  if (kind == "l2") return Regularizer::L2(lambda);
  throw ConfigError(Join(path, "kind"), "expected none, l1 or l2");
}

ProblemSource ParseProblem(const Json& v, std::uint64_t default_seed,
                           const std::filesystem::path& base_dir) {
  const std::string path = "problem";
  CheckKeys(v, path, {"type", "loss", "d", "n", "m", "seed", "lambda2", "label_flip",
                      "condition", "path", "normalize", "shuffle", "regularizer"});
  const std::string type = Find(v, "type") ? String(v["type"], "problem.type") : "synthetic";
  const std::uint64_t seed = Find(v, "seed") ? Unsigned(v["seed"], "problem.seed") : default_seed;
  const Regularizer reg =
      Find(v, "regularizer") ? ParseRegularizer(v["regularizer"], "problem.regularizer")
                             : Regularizer::None();
  std::optional<double> lambda2;
  if (Find(v, "lambda2")) {
    lambda2 = Number(v["lambda2"], "problem.lambda2");
    if (*lambda2 < 0.0) throw ConfigError("problem.lambda2", "must be nonnegative");
  }
  auto positive = [&](const char* key, std::size_t fallback) -> std::size_t {
    if (!Find(v, key)) return fallback;
    const std::uint64_t value = Unsigned(v[key], Join(path, key));
    if (value == 0) throw ConfigError(Join(path, key), "must be positive");
    return static_cast<std::size_t>(value);
  };

  if (type == "synthetic") {
    for (const char* key : {"path", "normalize", "shuffle"}) {
      if (Find(v, key)) throw ConfigError(Join(path, key), "only valid for libsvm problems");
    }
    SyntheticSource src;
    const std::string loss = Find(v, "loss") ? String(v["loss"], "problem.loss") : "quadratic";
    if (loss == "logistic") {
      src.kind = LossKind::kLogistic;
    } else if (loss == "quadratic") {
      src.kind = LossKind::kQuadratic;
    } else {
      throw ConfigError("problem.loss", "expected logistic or quadratic");
    }
    src.dim = positive("d", src.dim);
    src.n = positive("n", src.n);
    src.m = positive("m", src.m);
    src.seed = seed;
    src.options.lambda2 = lambda2;
    src.options.regularizer = reg;
    if (Find(v, "label_flip")) {
      src.options.label_flip = Number(v["label_flip"], "problem.label_flip");
      if (src.options.label_flip < 0.0 || src.options.label_flip > 1.0) {
        throw ConfigError("problem.label_flip", "must lie in [0, 1]");
      }
    }
    if (Find(v, "condition")) {
      src.options.condition = Number(v["condition"], "problem.condition");
      if (src.options.condition < 1.0) throw ConfigError("problem.condition", "must be >= 1");
    }
    return src;
  }
  if (type == "libsvm") {
    for (const char* key : {"d", "m", "label_flip", "condition"}) {
      if (Find(v, key)) throw ConfigError(Join(path, key), "only valid for synthetic problems");
    }
    if (Find(v, "loss") && String(v["loss"], "problem.loss") != "logistic") {
      throw ConfigError("problem.loss", "libsvm problems are logistic");
    }
    if (!Find(v, "path")) throw ConfigError("problem.path", "required for libsvm problems");
    FileSource src;
    src.path = String(v["path"], "problem.path");
    if (src.path.is_relative() && !base_dir.empty()) src.path = base_dir / src.path;
    src.n = positive("n", src.n);
    src.seed = seed;
    src.options.lambda2 = lambda2;
    src.options.regularizer = reg;
    if (Find(v, "normalize")) src.options.normalize_rows = Bool(v["normalize"], "problem.normalize");
    if (Find(v, "shuffle")) src.options.shuffle = Bool(v["shuffle"], "problem.shuffle");
    return src;
  }
  throw ConfigError("problem.type", "expected synthetic or libsvm");
}

void ParseMethod(const Json& v, RunConfig& run) {
  CheckKeys(v, "method", {"name", "oracle", "variant", "alpha", "gamma", "regime", "l",
                          "p_weights", "shift_init", "lyapunov_c"});
  MethodConfig& m = run.method;
  if (!Find(v, "name")) throw ConfigError("method.name", "required");
  const std::string name = String(v["name"], "method.name");
  if (name == "diana") {
    m.method = Method::kDiana;
  } else if (name == "vr-diana") {
    m.method = Method::kVrDiana;
  } else if (name == "svrg-diana") {
    m.method = Method::kSvrgDiana;
  } else {
    throw ConfigError("method.name", "expected diana, vr-diana or svrg-diana");
  }
  if (Find(v, "oracle")) {
    if (m.method != Method::kDiana) throw ConfigError("method.oracle", "only valid for diana");
    const std::string oracle = String(v["oracle"], "method.oracle");
    if (oracle == "full") {
      m.oracle = DianaOracle::kFullGrad;
    } else if (oracle == "uniform1") {
      m.oracle = DianaOracle::kUniform1;
    } else {
      throw ConfigError("method.oracle", "expected full or uniform1");
    }
  }
  if (Find(v, "variant")) {
    if (m.method != Method::kVrDiana) throw ConfigError("method.variant", "only valid for vr-diana");
    const std::string variant = String(v["variant"], "method.variant");
    if (variant == "lsvrg") {
      m.variant = VrVariant::kLSvrg;
    } else if (variant == "saga") {
      m.variant = VrVariant::kSaga;
    } else {
      throw ConfigError("method.variant", "expected lsvrg or saga");
    }
  }
  if (Find(v, "regime")) {
    try {
      run.auto_regime = ParseRegime(String(v["regime"], "method.regime"));
    } catch (const Error&) {
      throw ConfigError("method.regime", "expected strongly_convex, convex or nonconvex");
    }
  }
  if (!Find(v, "gamma")) throw ConfigError("method.gamma", "required");
  const Json& gamma = v["gamma"];
  if (gamma.is_string()) {
    const std::string text = gamma.get<std::string>();
    if (text.rfind("auto:", 0) != 0) {
      throw ConfigError("method.gamma", "expected a number or \"auto:<regime>\"");
    }
    Regime regime;
    try {
      regime = ParseRegime(text.substr(5));
    } catch (const Error&) {
      throw ConfigError("method.gamma", "unknown regime '" + text.substr(5) + "'");
    }
    if (run.auto_regime && *run.auto_regime != regime) {
      throw ConfigError("method.gamma", "regime disagrees with method.regime");
    }
    run.auto_regime = regime;
    run.auto_gamma = true;
  } else {
    m.gamma = Number(gamma, "method.gamma");
  }
  const Json* alpha = Find(v, "alpha");
  if (alpha == nullptr || (alpha->is_string() && alpha->get<std::string>() == "auto")) {
    run.auto_alpha = true;
  } else {
    m.alpha = Number(*alpha, "method.alpha");
  }
  if (Find(v, "l")) {
    if (m.method != Method::kSvrgDiana) throw ConfigError("method.l", "only valid for svrg-diana");
    m.epoch_length = static_cast<std::size_t>(Unsigned(v["l"], "method.l"));
    if (m.epoch_length == 0) throw ConfigError("method.l", "must be positive");
  }
  if (Find(v, "p_weights")) {
    if (m.method != Method::kSvrgDiana) {
      throw ConfigError("method.p_weights", "only valid for svrg-diana");
    }
    m.p_weights = List<double>(v["p_weights"], "method.p_weights", Number);
    if (m.epoch_length == 0) m.epoch_length = m.p_weights.size();
  } else if (m.epoch_length > 0) {
    m.p_weights.assign(m.epoch_length, 0.0);
    m.p_weights.back() = 1.0;
  }
  if (Find(v, "shift_init")) {
    const std::string init = String(v["shift_init"], "method.shift_init");
    if (init == "zero") {
      run.shift_init = ShiftInit::kZero;
    } else if (init == "gradient") {
      run.shift_init = ShiftInit::kGradient;
    } else {
      throw ConfigError("method.shift_init", "expected zero or gradient");
    }
  }
  if (Find(v, "lyapunov_c")) {
    const std::string c = String(v["lyapunov_c"], "method.lyapunov_c");
    if (c == "proof") {
      run.statement_c = false;
    } else if (c == "statement") {
      run.statement_c = true;
    } else {
      throw ConfigError("method.lyapunov_c", "expected proof or statement");
    }
  }
}

void ParseQuantizer(const Json& v, QuantizerConfig& q) {
  CheckKeys(v, "quantizer", {"scheme", "p", "s", "r", "block_size", "block_sizes"});
  const std::string scheme = Find(v, "scheme") ? String(v["scheme"], "quantizer.scheme") : "identity";
  if (scheme == "identity") {
    q.scheme = Scheme::kIdentity;
  } else if (scheme == "dither") {
    q.scheme = Scheme::kDither;
  } else if (scheme == "sparsify") {
    q.scheme = Scheme::kSparsify;
  } else if (scheme == "block_dither") {
    q.scheme = Scheme::kBlockDither;
  } else {
    throw ConfigError("quantizer.scheme", "expected identity, dither, sparsify or block_dither");
  }
  if (Find(v, "p")) {
    const Json& p = v["p"];
    if (p.is_string() && (p.get<std::string>() == "inf" || p.get<std::string>() == "infinity")) {
      q.p = std::numeric_limits<double>::infinity();
    } else {
      q.p = Number(p, "quantizer.p");
    }
    if (!(q.p >= 1.0)) throw ConfigError("quantizer.p", "must be >= 1 or \"inf\"");
  }
  if (Find(v, "s")) {
    const std::uint64_t s = Unsigned(v["s"], "quantizer.s");
    if (s == 0 || s > std::numeric_limits<std::uint32_t>::max()) {
      throw ConfigError("quantizer.s", "must be a positive 32-bit integer");
    }
    q.s = static_cast<std::uint32_t>(s);
  }
  if (Find(v, "r")) {
    const std::uint64_t r = Unsigned(v["r"], "quantizer.r");
    if (r == 0 || r > std::numeric_limits<std::uint32_t>::max()) {
      throw ConfigError("quantizer.r", "must be a positive 32-bit integer");
    }
    q.r = static_cast<std::uint32_t>(r);
  }
  if (Find(v, "block_size")) {
    const std::uint64_t b = Unsigned(v["block_size"], "quantizer.block_size");
    if (b == 0) throw ConfigError("quantizer.block_size", "must be positive");
    q.block_size = static_cast<std::size_t>(b);
  }
  if (Find(v, "block_sizes")) {
    q.block_sizes = List<std::uint32_t>(v["block_sizes"], "quantizer.block_sizes", Unsigned);
  }
}

void ParseRun(const Json& v, RunConfig& run) {
  CheckKeys(v, "run", {"iters", "seed", "cadence", "threads", "wall_time", "record_messages",
                       "estimate_sigma"});
  if (Find(v, "iters")) run.iters = static_cast<std::size_t>(Unsigned(v["iters"], "run.iters"));
  if (Find(v, "seed")) run.seed = Unsigned(v["seed"], "run.seed");
  if (Find(v, "cadence")) {
    run.cadence = static_cast<std::size_t>(Unsigned(v["cadence"], "run.cadence"));
  }
  if (Find(v, "threads")) {
    const std::uint64_t t = Unsigned(v["threads"], "run.threads");
    if (t == 0 || t > 1024) throw ConfigError("run.threads", "must lie in [1, 1024]");
    run.threads = static_cast<int>(t);
  }
  if (Find(v, "wall_time")) run.record_wall_time = Bool(v["wall_time"], "run.wall_time");
  if (Find(v, "record_messages")) {
    run.record_messages = Bool(v["record_messages"], "run.record_messages");
  }
  if (Find(v, "estimate_sigma")) {
    run.estimate_sigma = Bool(v["estimate_sigma"], "run.estimate_sigma");
  }
}

void ParseLedger(const Json& v, LedgerModel& ledger) {
  CheckKeys(v, "ledger", {"float_bits", "index_bits"});
  if (Find(v, "float_bits")) {
    const std::uint64_t bits = Unsigned(v["float_bits"], "ledger.float_bits");
    if (bits != 32 && bits != 64) throw ConfigError("ledger.float_bits", "must be 32 or 64");
    ledger.float_bits = static_cast<int>(bits);
  }
  if (Find(v, "index_bits")) {
    const std::uint64_t bits = Unsigned(v["index_bits"], "ledger.index_bits");
    if (bits == 0 || bits > 64) throw ConfigError("ledger.index_bits", "must lie in [1, 64]");
    ledger.index_bits = static_cast<int>(bits);
  }
}

}  // namespace

Regime ParseRegime(std::string_view name) {
  if (name == "strongly_convex") return Regime::kStronglyConvex;
  if (name == "convex") return Regime::kConvex;
  if (name == "nonconvex") return Regime::kNonconvex;
  throw Error(ErrorKind::kConfig, "unknown regime '" + std::string(name) + "'");
}

ExperimentFile ParseExperiment(std::string_view json_text,
                               const std::filesystem::path& base_dir) {
  Json root;
  try {
    root = Json::parse(json_text.begin(), json_text.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  CheckKeys(root, "", {"problem", "method", "quantizer", "run", "ledger", "reference",
                       "output", "sweep"});
  ExperimentFile out;
  RunConfig& run = out.run;
  if (Find(root, "run")) ParseRun(root["run"], run);
  if (!Find(root, "problem")) throw ConfigError("problem", "required");
  run.problem = ParseProblem(root["problem"], run.seed, base_dir);
  if (!Find(root, "method")) throw ConfigError("method", "required");
  ParseMethod(root["method"], run);
  if (Find(root, "quantizer")) ParseQuantizer(root["quantizer"], run.quantizer);
  if (Find(root, "ledger")) ParseLedger(root["ledger"], run.ledger);
  if (Find(root, "reference")) {
    const Json& ref = root["reference"];
    CheckKeys(ref, "reference", {"tol", "max_iters"});
    if (Find(ref, "tol")) {
      run.reference_tol = Number(ref["tol"], "reference.tol");
      if (!(run.reference_tol > 0.0)) throw ConfigError("reference.tol", "must be positive");
    }
    if (Find(ref, "max_iters")) {
      run.reference_max_iters =
          static_cast<std::size_t>(Unsigned(ref["max_iters"], "reference.max_iters"));
    }
  }
  if (Find(root, "output")) {
    const Json& o = root["output"];
    CheckKeys(o, "output", {"path", "binary"});
    if (Find(o, "path")) out.output_path = String(o["path"], "output.path");
    if (Find(o, "binary")) out.binary_path = String(o["binary"], "output.binary");
  }
  if (Find(root, "sweep")) {
    const Json& s = root["sweep"];
    CheckKeys(s, "sweep", {"alpha", "gamma", "block_size"});
    if (Find(s, "alpha")) out.sweep.alpha = List<double>(s["alpha"], "sweep.alpha", Number);
    if (Find(s, "gamma")) out.sweep.gamma = List<double>(s["gamma"], "sweep.gamma", Number);
    if (Find(s, "block_size")) {
      out.sweep.block_size =
          List<std::size_t>(s["block_size"], "sweep.block_size", Unsigned);
    }
  }
  run.Validate();
  return out;
}

ExperimentFile LoadExperiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config file '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return ParseExperiment(text, path.parent_path());
}

std::string DescribeConfig(const RunConfig& config) {
  Json j;
  if (const auto* s = std::get_if<SyntheticSource>(&config.problem)) {
    j["problem"] = {{"type", "synthetic"},
                    {"loss", LossKindName(s->kind)},
                    {"d", s->dim},
                    {"n", s->n},
                    {"m", s->m},
                    {"seed", s->seed}};
    if (s->options.lambda2) j["problem"]["lambda2"] = *s->options.lambda2;
  } else {
    const auto& f = std::get<FileSource>(config.problem);
    j["problem"] = {{"type", "libsvm"}, {"path", f.path.string()}, {"n", f.n}, {"seed", f.seed}};
    if (f.options.lambda2) j["problem"]["lambda2"] = *f.options.lambda2;
  }
  j["method"] = {{"name", MethodName(config.method.method)},
                 {"alpha", config.auto_alpha ? Json("auto") : Json(config.method.alpha)}};
  if (config.auto_gamma) {
    j["method"]["gamma"] = std::string("auto:") + RegimeName(*config.auto_regime);
  } else {
    j["method"]["gamma"] = config.method.gamma;
  }
  j["quantizer"] = {{"scheme", SchemeName(config.quantizer.scheme)},
                    {"p", std::isinf(config.quantizer.p) ? Json("inf") : Json(config.quantizer.p)},
                    {"s", config.quantizer.s},
                    {"r", config.quantizer.r}};
  j["run"] = {{"iters", config.iters}, {"seed", config.seed}, {"cadence", config.cadence}};
  j["ledger"] = {{"float_bits", config.ledger.float_bits}};
  return j.dump();
}

}  // namespace qdiana
