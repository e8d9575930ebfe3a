/*
 * Copyright 2026 The Semsteer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "semsteer/byte_io.h"
#include "semsteer/checkpoint.h"

namespace semsteer {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string err;
};

const fs::path& Work() {
  static const fs::path dir = fs::temp_directory_path() / "semsteer_cli_test";
  return dir;
}

RunResult RunCli(const std::string& args) {
  const fs::path err = Work() / "stderr.txt";
  const std::string cmd =
      std::string(SEMSTEER_CLI) + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = fs::exists(err) ? ReadFileBytes(err.string()) : "";
  return r;
}

std::string Read(const fs::path& p) { return ReadFileBytes(p.string()); }

std::vector<std::vector<std::string>> Csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(Read(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(Work());
    fs::create_directories(Work());
    const RunResult synth =
        RunCli("synth --out " + Data().string() +
            " --num-sequences 4 --frames-per-sequence 10 --points-per-frame 120 "
            "--min-segment-frames 3 --max-segment-frames 5");
    ASSERT_EQ(synth.exit_code, 0) << synth.err;
    const RunResult train =
        RunCli("train --out " + Model().string() + " --dataset " + Manifest() +
            " --preset gnn-ncp --max-epochs 2 --points-per-frame 32 --horizon 3");
    ASSERT_EQ(train.exit_code, 0) << train.err;
  }

  static fs::path Data() { return Work() / "data"; }
  static fs::path Model() { return Work() / "model"; }
  static std::string Manifest() { return (Data() / "manifest.txt").string(); }
  static std::string Scan() {
    return (Data() / "seq_00" / "velodyne_points" / "data" / "0000000000.bin").string();
  }
  static std::string Ckpt() { return (Model() / "checkpoint.bin").string(); }
};

TEST_F(CliTest, SynthWritesLayoutAndManifest) {
  EXPECT_TRUE(fs::exists(Data() / "seq_03" / "oxts" / "timestamps.txt"));
  const std::string m = Read(Data() / "run_manifest.txt");
  EXPECT_EQ(m.rfind("command = synth\n", 0), 0u);
  EXPECT_NE(m.find("num_sequences = 4\n"), std::string::npos);
  EXPECT_NE(m.find("max_curvature = 0.05\n"), std::string::npos);
}

TEST_F(CliTest, BuildGraphKeepAllLeavesEdgesUnchanged) {
  const fs::path out = Work() / "graph_keep_all";
  const RunResult r = RunCli("build-graph --out " + out.string() + " --frame " + Scan() +
                          " --keep-ratio 1");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(Read(out / "edges_pre.csv"), Read(out / "edges_post.csv"));
  const auto stats = Csv(out / "graph_stats.csv");
  ASSERT_EQ(stats.size(), 3u);
  EXPECT_EQ(stats[1][2], stats[2][2]);
}

TEST_F(CliTest, BuildGraphPrunesFloorOfKeepRatio) {
  const fs::path out = Work() / "graph_pruned";
  const RunResult r = RunCli("build-graph --out " + out.string() + " --frame " + Scan() +
                          " --keep-ratio 0.2 --k 8 --seed 3");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto pre = Csv(out / "edges_pre.csv");
  const auto post = Csv(out / "edges_post.csv");
  ASSERT_EQ(pre[0], (std::vector<std::string>{"i", "j", "same_class"}));
  size_t same = 0, inter = 0;
  std::set<std::pair<std::string, std::string>> pre_edges;
  for (size_t i = 1; i < pre.size(); ++i) {
    (pre[i][2] == "1" ? same : inter)++;
    pre_edges.insert({pre[i][0], pre[i][1]});
  }
  ASSERT_GT(inter, 0u);
  EXPECT_EQ(post.size() - 1, same + static_cast<size_t>(std::floor(0.2 * inter)));
  for (size_t i = 1; i < post.size(); ++i) {
    EXPECT_TRUE(pre_edges.count({post[i][0], post[i][1]}));
  }
  EXPECT_TRUE(fs::exists(out / "graph_post.dot"));
  EXPECT_NE(Read(out / "run_manifest.txt").find("keep_ratio = 0.2\n"), std::string::npos);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  const fs::path cfg = Work() / "graph.cfg";
  WriteFileBytes(cfg.string(), "k = 4\nkeep_ratio = 0.5\n");
  const fs::path out = Work() / "graph_cfg";
  const RunResult r = RunCli("build-graph --config " + cfg.string() + " --out " +
                          out.string() + " --frame " + Scan() + " --k 6");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const std::string m = Read(out / "run_manifest.txt");
  EXPECT_NE(m.find("k = 6\n"), std::string::npos);
  EXPECT_NE(m.find("keep_ratio = 0.5\n"), std::string::npos);

  WriteFileBytes(cfg.string(), "kk = 4\n");
  const RunResult bad = RunCli("build-graph --config " + cfg.string() + " --out " +
                            out.string() + " --frame " + Scan());
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_NE(bad.err.find("'kk'"), std::string::npos) << bad.err;
}

TEST_F(CliTest, RejectsUnsupportedPruneScopeAndUnknownFlags) {
  const RunResult scope = RunCli("build-graph --out " + (Work() / "x").string() +
                              " --frame " + Scan() + " --prune-scope local");
  EXPECT_EQ(scope.exit_code, 1);
  EXPECT_NE(scope.err.find("prune_scope"), std::string::npos) << scope.err;
  EXPECT_NE(RunCli("build-graph --no-such-flag 1").exit_code, 0);
  EXPECT_NE(RunCli("frobnicate").exit_code, 0);
}

TEST_F(CliTest, TrainWritesHistoryAndCheckpoint) {
  const auto hist = Csv(Model() / "history.csv");
  ASSERT_EQ(hist.size(), 3u);
  EXPECT_EQ(hist[0], (std::vector<std::string>{"epoch", "train_mse", "val_mse"}));
  const Checkpoint ckpt = LoadCheckpoint(Ckpt());
  EXPECT_EQ(ckpt.config.preset, "gnn-ncp");
  EXPECT_EQ(ckpt.config.points_per_frame, 32u);
  EXPECT_EQ(ckpt.config.horizon, 3u);
  ASSERT_TRUE(ckpt.train_state.has_value());
  EXPECT_EQ(ckpt.train_state->epoch, 2);
}

TEST_F(CliTest, EvalWritesSummaryAndPlot) {
  const fs::path out = Work() / "eval";
  const RunResult r = RunCli("eval --out " + out.string() + " --checkpoint " + Ckpt() +
                          " --dataset " + Manifest());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto summary = Csv(out / "eval_summary.csv");
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0], (std::vector<std::string>{"split", "frames", "mse"}));
  EXPECT_EQ(summary[1][0], "test");
  EXPECT_EQ(summary[1][1], "10");
  EXPECT_TRUE(std::isfinite(std::stod(summary[1][2])));
  EXPECT_NE(Read(out / "residuals.svg").find("</svg>"), std::string::npos);
}

TEST_F(CliTest, MissingCheckpointFails) {
  const RunResult r = RunCli("eval --out " + (Work() / "nope").string() +
                          " --checkpoint " + (Work() / "absent.bin").string() +
                          " --dataset " + Manifest());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("absent.bin"), std::string::npos) << r.err;
}

TEST_F(CliTest, PathModesDiffer) {
  const fs::path out = Work() / "path";
  const RunResult r = RunCli("path --out " + out.string() + " --checkpoint " + Ckpt() +
                          " --sequence " + (Data() / "seq_03").string() +
                          " --waypoints 0,5");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const std::string paper = Read(out / "trajectory_paper.csv");
  const std::string kin = Read(out / "trajectory_kinematic.csv");
  EXPECT_EQ(paper.rfind("t,x,y,heading,velocity\n", 0), 0u);
  EXPECT_NE(paper, kin);
  EXPECT_EQ(Csv(out / "truth_paper.csv").size(), 12u);  // header + 11 poses
  EXPECT_TRUE(fs::exists(out / "path_kinematic.svg"));
  EXPECT_NE(r.err.find("final position error"), std::string::npos) << r.err;

  const fs::path only = Work() / "path_kinematic_only";
  ASSERT_EQ(RunCli("path --out " + only.string() + " --checkpoint " + Ckpt() +
                " --sequence " + (Data() / "seq_03").string() + " --mode kinematic")
                .exit_code,
            0);
  EXPECT_FALSE(fs::exists(only / "trajectory_paper.csv"));
  EXPECT_TRUE(fs::exists(only / "trajectory_kinematic.csv"));
}

TEST_F(CliTest, GradcheckPassesOnFreshModel) {
  const fs::path out = Work() / "gradcheck";
  const RunResult r =
      RunCli("gradcheck --out " + out.string() + " --preset gnn-ncp --instances 2");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.err.find("PASS "), std::string::npos) << r.err;
  EXPECT_EQ(r.err.find("FAIL "), std::string::npos) << r.err;
  EXPECT_TRUE(fs::exists(out / "gradcheck.csv"));
}

TEST_F(CliTest, GradcheckNamesNonFiniteParameter) {
  Checkpoint ckpt = LoadCheckpoint(Ckpt());
  ckpt.values[1](0, 0) = std::nan("");
  const fs::path bad = Work() / "nan.bin";
  WriteFileBytes(bad.string(), EncodeCheckpoint(ckpt));
  const RunResult r = RunCli("gradcheck --out " + (Work() / "gradcheck_nan").string() +
                          " --checkpoint " + bad.string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("FAIL "), std::string::npos) << r.err;
  EXPECT_NE(r.err.find(ckpt.names[1]), std::string::npos) << r.err;
}

}  // namespace
}  // namespace semsteer
