// Copyright 2026 nestmatch Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nestmatch/cli.h"
#include "nestmatch/io.h"

namespace nm {
namespace {

namespace fs = std::filesystem;

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "nestmatch");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
   protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("nestmatch_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

TEST_F(CliTest, SimulateIsDeterministic) {
    ASSERT_EQ(run({"simulate", "--size", "6", "--rounds", "6", "--p", "0.01", "--seed", "3", "--out", path("a")}), kExitOk);
    ASSERT_EQ(run({"simulate", "--size", "6", "--rounds", "6", "--p", "0.01", "--seed", "3", "--out", path("b")}), kExitOk);
    for (const char* f : {"config.json", "events.csv", "matching.csv", "duals.json", "certificate.txt"}) {
        EXPECT_FALSE(slurp(dir_ / "a" / f).empty()) << f;
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    }
    EXPECT_NE(slurp(dir_ / "a" / "certificate.txt").find("valid=true"), std::string::npos);
}

TEST_F(CliTest, ConfigFileReproducesRun) {
    ASSERT_EQ(run({"simulate", "--size", "5", "--rounds", "4", "--p", "0.02", "--seed", "8", "--out", path("a")}), kExitOk);
    ASSERT_EQ(run({"simulate", "--config", path("a/config.json"), "--out", path("b")}), kExitOk);
    EXPECT_EQ(slurp(dir_ / "a" / "matching.csv"), slurp(dir_ / "b" / "matching.csv"));
}

TEST_F(CliTest, VerifyAcceptsAndRejects) {
    ASSERT_EQ(run({"simulate", "--size", "6", "--rounds", "6", "--p", "0.02", "--seed", "1", "--out", path("a")}), kExitOk);
    std::vector<std::string> verify{"verify", "--size", "6", "--rounds", "6", "--p", "0.02",
                                    "--events", path("a/events.csv"), "--matching", path("a/matching.csv"),
                                    "--duals", path("a/duals.json")};
    EXPECT_EQ(run(verify), kExitOk);

    // Dropping one match breaks perfection.
    std::ifstream in(path("a/matching.csv"));
    Matching m = read_matching_csv(in);
    ASSERT_FALSE(m.pairs.empty() && m.boundary_matches.empty());
    if (!m.pairs.empty()) m.pairs.pop_back();
    else m.boundary_matches.pop_back();
    {
        std::ofstream out(path("a/matching.csv"));
        write_matching_csv(out, m);
    }
    EXPECT_EQ(run(verify), kExitInvariant);
}

TEST_F(CliTest, MatchReadsEventsFile) {
    ASSERT_EQ(run({"simulate", "--size", "6", "--rounds", "6", "--p", "0.02", "--seed", "2", "--out", path("a")}), kExitOk);
    ASSERT_EQ(run({"match", "--size", "6", "--rounds", "6", "--p", "0.02", "--events", path("a/events.csv"),
                   "--out", path("b")}),
              kExitOk);
    EXPECT_EQ(slurp(dir_ / "a" / "matching.csv"), slurp(dir_ / "b" / "matching.csv"));
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}), kExitUsage);
    EXPECT_EQ(run({"decode"}), kExitUsage);
    EXPECT_EQ(run({"simulate", "--size", "abc"}), kExitUsage);
    EXPECT_EQ(run({"verify", "--events", path("missing.csv")}), kExitUsage);
    EXPECT_EQ(run({"parallel-sim", "--patch-n", "15", "--rounds", "4", "--out", path("p")}), kExitUsage);
    {
        std::ofstream bad(path("bad.json"));
        bad << "{ not json";
    }
    EXPECT_EQ(run({"simulate", "--config", path("bad.json"), "--out", path("a")}), kExitUsage);
    {
        std::ofstream events(path("events.csv"));
        events << "ball_id,t\n999999,0\n";
    }
    EXPECT_EQ(run({"match", "--size", "4", "--rounds", "4", "--events", path("events.csv"), "--out", path("a")}),
              kExitUsage);
}

TEST_F(CliTest, EdgeCasesSucceed) {
    EXPECT_EQ(run({"simulate", "--size", "4", "--rounds", "0", "--out", path("zero")}), kExitOk);
    EXPECT_EQ(run({"simulate", "--size", "4", "--rounds", "4", "--p", "0", "--out", path("clean")}), kExitOk);
    EXPECT_NE(slurp(dir_ / "clean" / "certificate.txt").find("valid=true"), std::string::npos);
}

TEST_F(CliTest, ParallelSimMatchesSerial) {
    ASSERT_EQ(run({"parallel-sim", "--grid-l", "2", "--patch-n", "16", "--rounds", "30", "--p", "0.003", "--seed", "4",
                   "--out", path("p")}),
              kExitOk);
    std::string metrics = slurp(dir_ / "p" / "metrics.csv");
    EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 31);
    ASSERT_EQ(run({"simulate", "--size", "8", "--rounds", "30", "--p", "0.003", "--seed", "4", "--out", path("s")}),
              kExitOk);
    EXPECT_EQ(slurp(dir_ / "p" / "matching.csv"), slurp(dir_ / "s" / "matching.csv"));
}

TEST_F(CliTest, ParallelSimBurst) {
    EXPECT_EQ(run({"parallel-sim", "--grid-l", "2", "--rounds", "40", "--p", "0.002", "--burst-round", "20",
                   "--burst-width", "2", "--out", path("p")}),
              kExitOk);
    EXPECT_EQ(run({"parallel-sim", "--grid-l", "2", "--rounds", "40", "--burst-round", "39", "--burst-width", "2",
                   "--out", path("q")}),
              kExitUsage);
}

TEST_F(CliTest, AnalyzeAndBench) {
    EXPECT_EQ(run({"analyze", "--size", "8", "--rounds", "8", "--p", "0.01", "--trials", "200", "--out", path("a")}),
              kExitOk);
    EXPECT_TRUE(fs::exists(dir_ / "a" / "histogram.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "a" / "fit.json"));
    EXPECT_EQ(run({"bench", "--sizes", "4", "6", "--min-events", "100", "--out", path("b")}), kExitOk);
    EXPECT_TRUE(fs::exists(dir_ / "b" / "scaling.csv"));
}

}  // namespace
}  // namespace nm
