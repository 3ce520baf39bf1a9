/*
 * Copyright 2026 The gil Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gil/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gil {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gil_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("GIL_SEED");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    unsetenv("GIL_SEED");
  }

  int Run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return RunCli(args, out_, err_);
  }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  // Small Hamiltonian dataset plus a trained run.
  void GenerateAndTrain(const std::string& rewire = "none",
                        const std::string& threshold = "0.05") {
    ASSERT_EQ(Run({"generate", "--particles", "6", "--steps", "40", "--systems", "2",
                   "--stride", "5", "--task", "hamiltonian", "--seed", "1", "--out",
                   Path("data.jsonl")}),
              kExitOk)
        << err_.str();
    ASSERT_EQ(Run({"train", "--data", Path("data.jsonl"), "--rewire", rewire, "--epochs", "4",
                   "--hidden", "8", "--depth", "2", "--k", "3", "--batch-size", "16",
                   "--isgr-interval", "2", "--isgr-budget", "4", "--isgr-batch", "3",
                   "--isgr-threshold", threshold, "--lr", "1e-3", "--out-dir",
                   Path("run_" + rewire)}),
              kExitOk)
        << err_.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

json ReadJson(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string ReadText(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t CountLines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

TEST_F(CliTest, GenerateWritesRequestedRecords) {
  ASSERT_EQ(Run({"generate", "--system", "spring", "--particles", "10", "--steps", "500",
                 "--task", "hamiltonian", "--seed", "0", "--out", Path("a.jsonl")}),
            kExitOk)
      << err_.str();
  EXPECT_EQ(CountLines(Path("a.jsonl")), 501u);  // Metadata line plus records.
  ASSERT_EQ(Run({"generate", "--particles", "10", "--steps", "500", "--task", "hamiltonian",
                 "--seed", "0", "--out", Path("b.jsonl")}),
            kExitOk);
  EXPECT_EQ(ReadText(Path("a.jsonl")), ReadText(Path("b.jsonl")));
  EXPECT_EQ(Sha256File(Path("a.jsonl")), Sha256File(Path("b.jsonl")));
}

TEST_F(CliTest, GenerateRejectsBadInput) {
  EXPECT_EQ(Run({"generate", "--particles", "0", "--out", Path("x.jsonl")}), kExitUsage);
  EXPECT_EQ(Run({"generate", "--system", "gravity", "--out", Path("x.jsonl")}), kExitUsage);
  EXPECT_EQ(Run({"generate", "--particles", "3"}), kExitUsage);
  EXPECT_NE(Run({"generate", "--particles", "3", "--steps", "5", "--out",
                 "/proc/definitely/not/here.jsonl"}),
            kExitOk);
  EXPECT_EQ(Run({"frobnicate"}), kExitUsage);
  EXPECT_EQ(Run({"--help"}), kExitOk);
}

TEST_F(CliTest, MissingOrBadDataset) {
  EXPECT_EQ(Run({"train", "--data", Path("missing.jsonl"), "--out-dir", Path("r")}), kExitUsage);
  std::ofstream(Path("bad.jsonl")) << "{\"metadata\": {}}\nnot json\n";
  EXPECT_EQ(Run({"train", "--data", Path("bad.jsonl"), "--out-dir", Path("r")}), kExitUsage);
  EXPECT_NE(err_.str().find(":2:"), std::string::npos) << err_.str();
  ASSERT_EQ(Run({"generate", "--particles", "4", "--steps", "6", "--out", Path("tiny.jsonl")}),
            kExitOk);
  EXPECT_EQ(Run({"train", "--data", Path("tiny.jsonl"), "--out-dir", Path("r")}), kExitUsage);
}

TEST_F(CliTest, TrainWritesArtifacts) {
  GenerateAndTrain("isgr", "0");
  const fs::path run = Path("run_isgr");
  for (const char* f : {"isgr_log.jsonl", "checkpoint.bin", "config.json", "metrics.json",
                        "manifest.json"}) {
    EXPECT_TRUE(fs::exists(run / f)) << f;
  }
  const json metrics = ReadJson(run / "metrics.json");
  EXPECT_TRUE(metrics["test_mae"].is_number());
  EXPECT_EQ(metrics["epochs"].size(), metrics["epochs_run"].get<std::size_t>());
  EXPECT_EQ(CountLines(run / "isgr_log.jsonl"), 2u);
  std::ifstream log(run / "isgr_log.jsonl");
  std::string line;
  std::getline(log, line);
  const json first = json::parse(line);
  EXPECT_EQ(first["epoch"], 0);
  EXPECT_TRUE(first["max_delta"].is_null());
  const auto j = first["J"].get<std::vector<double>>();
  EXPECT_NEAR(std::accumulate(j.begin(), j.end(), 0.0), 1.0, 1e-12);
  const json manifest = ReadJson(run / "manifest.json");
  EXPECT_EQ(manifest.dump().find("sha256") != std::string::npos, true);
}

TEST_F(CliTest, InfiniteThresholdMatchesNoRewiring) {
  GenerateAndTrain("none");
  GenerateAndTrain("isgr", "inf");
  EXPECT_EQ(ReadJson(Path("run_none/metrics.json"))["test_mae"],
            ReadJson(Path("run_isgr/metrics.json"))["test_mae"]);
  EXPECT_EQ(ReadText(Path("run_none/checkpoint.bin")),
            ReadText(Path("run_isgr/checkpoint.bin")));
}

TEST_F(CliTest, AnalyzeIsDeterministicAndNormalized) {
  GenerateAndTrain();
  const std::string ckpt = (fs::path(Path("run_none")) / "checkpoint.bin").string();
  const std::vector<std::string> base{"analyze", "--checkpoint", ckpt, "--data", Path("data.jsonl"),
                                      "--graphs", "2", "--budget", "8", "--seed", "3"};
  auto args = base;
  args.insert(args.end(), {"--out-dir", Path("an1")});
  ASSERT_EQ(Run(args), kExitOk) << err_.str();
  args = base;
  args.insert(args.end(), {"--out-dir", Path("an2"), "--workers", "2"});
  ASSERT_EQ(Run(args), kExitOk) << err_.str();
  EXPECT_EQ(ReadText(Path("an1/learned.csv")), ReadText(Path("an2/learned.csv")));
  EXPECT_EQ(ReadText(Path("an1/random_init.csv")), ReadText(Path("an2/random_init.csv")));

  std::ifstream csv(Path("an1/learned.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "m,m_over_n,J,stderr");
  std::vector<int> orders;
  double total = 0;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    orders.push_back(std::stoi(cell));
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    total += std::stod(cell);
  }
  EXPECT_EQ(orders, (std::vector<int>{3, 4, 5, 6}));
  EXPECT_NEAR(total, 1.0, 1e-12);
  const json s = ReadJson(Path("an1/strength.json"));
  EXPECT_GE(s["total_variation"].get<double>(), 0.0);
  EXPECT_EQ(s["level"], "graph");

  args = base;
  args.insert(args.end(), {"--out-dir", Path("an3"), "--level", "node"});
  EXPECT_EQ(Run(args), kExitUsage);
  args = base;
  args.insert(args.end(), {"--out-dir", Path("an4"), "--orders", "4,6"});
  ASSERT_EQ(Run(args), kExitOk) << err_.str();
  EXPECT_EQ(CountLines(Path("an4/learned.csv")), 3u);
  EXPECT_EQ(Run({"analyze", "--checkpoint", Path("nope.bin"), "--data", Path("data.jsonl"),
                 "--out-dir", Path("an5")}),
            kExitUsage);
}

TEST_F(CliTest, ReportAggregatesRuns) {
  GenerateAndTrain("none");
  GenerateAndTrain("isgr", "0");
  ASSERT_EQ(Run({"report", "--runs", Path("run_none"), Path("run_isgr"), "--out",
                 Path("table.csv")}),
            kExitOk)
      << err_.str();
  std::ifstream in(Path("table.csv"));
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "model,rewire,runs,test_mae_mean,test_mae_std,final_k_mean");
  EXPECT_EQ(CountLines(Path("table.csv")), 3u);
  EXPECT_EQ(Run({"report", "--runs", Path("missing")}), kExitUsage);
}

TEST_F(CliTest, SeedEnvironmentOverride) {
  setenv("GIL_SEED", "7", 1);
  ASSERT_EQ(Run({"generate", "--particles", "3", "--steps", "5", "--seed", "1", "--out",
                 Path("env.jsonl")}),
            kExitOk);
  unsetenv("GIL_SEED");
  ASSERT_EQ(Run({"generate", "--particles", "3", "--steps", "5", "--seed", "7", "--out",
                 Path("seven.jsonl")}),
            kExitOk);
  EXPECT_EQ(ReadText(Path("env.jsonl")), ReadText(Path("seven.jsonl")));
  setenv("GIL_SEED", "abc", 1);
  EXPECT_EQ(Run({"generate", "--particles", "3", "--steps", "5", "--out", Path("x.jsonl")}),
            kExitUsage);
}

TEST_F(CliTest, NumericFailureExitCode) {
  ASSERT_EQ(Run({"generate", "--particles", "5", "--steps", "30", "--seed", "2", "--out",
                 Path("d.jsonl")}),
            kExitOk);
  EXPECT_EQ(Run({"train", "--data", Path("d.jsonl"), "--epochs", "3", "--hidden", "8", "--lr",
                 "1e300", "--out-dir", Path("boom")}),
            kExitNumeric)
      << err_.str();
}

TEST(Sha256File, KnownDigest) {
  const fs::path p = fs::temp_directory_path() / "gil_sha.txt";
  std::ofstream(p, std::ios::binary) << "abc";
  EXPECT_EQ(Sha256File(p), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove(p);
}

}  // namespace
}  // namespace gil
