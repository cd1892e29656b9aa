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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "qdiana/report.h"

namespace qdiana {
namespace {

namespace fs = std::filesystem;

const std::string kTiny = QDIANA_TEST_DATA_DIR "/tiny.json";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = CliMain(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("qdiana_cli_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path Write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

TEST_F(CliTest, Help) {
  const Result r = Invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("run"), std::string::npos);
  EXPECT_NE(r.out.find("verify"), std::string::npos);
}

TEST_F(CliTest, UnknownSubcommandAndFlag) {
  EXPECT_EQ(Invoke({"bogus"}).code, 2);
  EXPECT_EQ(Invoke({"run", kTiny, "--frobnicate"}).code, 2);
  EXPECT_EQ(Invoke({}).code, 2);
}

TEST_F(CliTest, RunMissingFile) {
  const Result r = Invoke({"run", "missing.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing.json"), std::string::npos);
}

TEST_F(CliTest, RunTinyWritesSixRows) {
  const Result r = Invoke({"run", kTiny});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, kCsvHeader);
  std::istringstream again(r.out);
  EXPECT_EQ(ReadCsv(again).size(), 6u);
}

TEST_F(CliTest, RunTwiceIsByteIdentical) {
  const fs::path a = dir_ / "a.csv";
  const fs::path b = dir_ / "b.csv";
  ASSERT_EQ(Invoke({"run", kTiny, "-o", a.string()}).code, 0);
  ASSERT_EQ(Invoke({"run", kTiny, "-o", b.string(), "--threads", "2"}).code, 0);
  EXPECT_EQ(Slurp(a), Slurp(b));
  EXPECT_FALSE(Slurp(a).empty());
}

TEST_F(CliTest, ConfigErrorNamesKey) {
  const fs::path cfg = Write("bad.json", R"({"problem": {"type": "synthetic"},
      "method": {"name": "diana", "gamma": 0.1, "gamme": 1}})");
  const Result r = Invoke({"run", cfg.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("method.gamme"), std::string::npos);
}

TEST_F(CliTest, SweepWritesCellsAndSummary) {
  const fs::path cfg = Write("sweep.json", R"({
    "problem": {"type": "synthetic", "loss": "logistic", "d": 8, "n": 2, "m": 4, "seed": 1},
    "method": {"name": "diana", "gamma": 0.5},
    "quantizer": {"scheme": "block_dither", "block_size": 4},
    "run": {"iters": 5, "seed": 2},
    "sweep": {"alpha": [0.1, 0.2], "block_size": [2, 8]}
  })");
  const fs::path out = dir_ / "grid";
  const Result r = Invoke({"sweep", cfg.string(), "-d", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (int cell = 0; cell < 4; ++cell) {
    EXPECT_TRUE(fs::exists(out / ("cell_" + std::to_string(cell) + ".csv")));
  }
  const std::string summary = Slurp(out / "summary.csv");
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 5);
  EXPECT_NE(summary.find(",ok,"), std::string::npos);
}

TEST_F(CliTest, SweepWithoutAxes) {
  const Result r = Invoke({"sweep", kTiny, "-d", (dir_ / "x").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("sweep"), std::string::npos);
}

TEST_F(CliTest, PlotWritesSvg) {
  const fs::path csv = dir_ / "t.csv";
  ASSERT_EQ(Invoke({"run", kTiny, "-o", csv.string()}).code, 0);
  const fs::path svg = dir_ / "t.svg";
  ASSERT_EQ(Invoke({"plot", csv.string(), "-o", svg.string()}).code, 0);
  EXPECT_NE(Slurp(svg).find("</svg>"), std::string::npos);
  EXPECT_EQ(Invoke({"plot", (dir_ / "none.csv").string()}).code, 2);
}

TEST_F(CliTest, VerifyQuantizerSuitePasses) {
  const Result r = Invoke({"verify", "--quick", "--suite", "quantizers"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

}  // namespace
}  // namespace qdiana
