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

// Command-line front end: dataset synthesis, graph inspection, training,
// evaluation, path reconstruction and gradient checking.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semsteer/byte_io.h"
#include "semsteer/checkpoint.h"
#include "semsteer/config.h"
#include "semsteer/dataset.h"
#include "semsteer/error.h"
#include "semsteer/gradcheck.h"
#include "semsteer/graph.h"
#include "semsteer/kitti.h"
#include "semsteer/model.h"
#include "semsteer/plot.h"
#include "semsteer/pointcloud.h"
#include "semsteer/synthetic.h"
#include "semsteer/training.h"
#include "semsteer/vehicle.h"

namespace semsteer {
namespace {

namespace fs = std::filesystem;

using Defaults = std::map<std::string, std::string>;

std::string FlagName(const std::string& key) {
  std::string out = key;
  for (char& c : out) {
    if (c == '_') c = '-';
  }
  return "--" + out;
}

std::string Num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// One subcommand: its defaults become both config keys and flags.
struct Command {
  std::string name;
  Defaults defaults;
  std::function<int(RunConfig&)> run;

  std::string config_file;
  std::map<std::string, std::string> flag_values;
  CLI::App* app = nullptr;
};

void WriteText(const fs::path& path, const std::string& text) {
  WriteFileBytes(path.string(), text);
}

// Inter-class retention is global over all inter-class edges; per
// class-pair retention is not implemented.
void CheckPruneScope(const RunConfig& cfg) {
  if (cfg.Get("prune_scope") != "global") {
    throw ConfigError("prune_scope '" + cfg.Get("prune_scope") +
                      "' is not supported (only 'global')");
  }
}

fs::path PrepareOut(const RunConfig& cfg) {
  const std::string& out = cfg.Get("out");
  if (out.empty()) throw ConfigError("--out is required");
  fs::create_directories(out);
  return fs::path(out);
}

void EchoManifest(const RunConfig& cfg, const fs::path& out) {
  WriteText(out / "run_manifest.txt", cfg.Manifest());
}

// ---------------------------------------------------------------- synth

int RunSynth(RunConfig& cfg) {
  SyntheticDatasetSpec spec;
  spec.seed = cfg.GetUint("seed");
  spec.num_sequences = cfg.GetUint("num_sequences");
  spec.frames_per_sequence = cfg.GetUint("frames_per_sequence");
  spec.points_per_frame = cfg.GetUint("points_per_frame");
  spec.max_curvature = cfg.GetDouble("max_curvature");
  spec.straight_probability = cfg.GetDouble("straight_probability");
  spec.min_segment_frames = cfg.GetUint("min_segment_frames");
  spec.max_segment_frames = cfg.GetUint("max_segment_frames");
  spec.min_speed = cfg.GetDouble("min_speed");
  spec.max_speed = cfg.GetDouble("max_speed");
  spec.noise_sigma = cfg.GetDouble("noise_sigma");
  spec.Validate();
  const fs::path out = PrepareOut(cfg);
  WriteSyntheticDataset(spec, out.string());
  EchoManifest(cfg, out);
  std::cerr << "wrote " << spec.num_sequences << " sequences and "
            << (out / "manifest.txt").string() << "\n";
  return 0;
}

Defaults SynthDefaults() {
  const SyntheticDatasetSpec d;
  return {{"out", ""},
          {"seed", std::to_string(d.seed)},
          {"num_sequences", std::to_string(d.num_sequences)},
          {"frames_per_sequence", std::to_string(d.frames_per_sequence)},
          {"points_per_frame", std::to_string(d.points_per_frame)},
          {"max_curvature", Num(d.max_curvature)},
          {"straight_probability", Num(d.straight_probability)},
          {"min_segment_frames", std::to_string(d.min_segment_frames)},
          {"max_segment_frames", std::to_string(d.max_segment_frames)},
          {"min_speed", Num(d.min_speed)},
          {"max_speed", Num(d.max_speed)},
          {"noise_sigma", Num(d.noise_sigma)}};
}

// ---------------------------------------------------------- build-graph

PointCloud LoadGraphFrame(const RunConfig& cfg) {
  const fs::path frame(cfg.Get("frame"));
  if (frame.empty()) throw ConfigError("--frame is required");
  if (!fs::exists(frame)) {
    throw Error("cannot read frame file " + frame.string());
  }
  if (frame.extension() == ".spdm") {
    const std::string& calib = cfg.Get("calib");
    if (calib.empty()) throw ConfigError("depth frames need --calib");
    const CameraIntrinsics intr =
        ParseCalib(ReadFileBytes(calib), cfg.Get("camera"));
    const DepthMap depth = DecodeDepthMap(ReadFileBytes(frame.string()));
    PointCloud cloud =
        BackProject(depth, intr, static_cast<int>(cfg.GetInt("stride")));
    const std::string& sem = cfg.Get("semantic");
    if (!sem.empty()) {
      cloud = AttachSemantics(cloud, DecodeSemanticMap(ReadFileBytes(sem)), true);
    }
    return cloud;
  }
  PointCloud cloud = ParseVelodyneBin(ReadFileBytes(frame.string()));
  fs::path labels(cfg.Get("labels"));
  if (labels.empty()) {
    // KITTI layout: velodyne_points/data/X.bin next to velodyne_points/labels.
    const fs::path guess = frame.parent_path().parent_path() / "labels" /
                           (frame.stem().string() + ".label");
    if (fs::exists(guess)) labels = guess;
  }
  if (!labels.empty()) {
    std::vector<ClassId> classes = ParseLabels(ReadFileBytes(labels.string()));
    if (classes.size() != cloud.size()) {
      throw DimensionError(labels.string() + " does not match the scan");
    }
    cloud.classes = std::move(classes);
  }
  return cloud;
}

int RunBuildGraph(RunConfig& cfg) {
  CheckPruneScope(cfg);
  PointCloud cloud = LoadGraphFrame(cfg);
  const size_t max_points = cfg.GetUint("max_points");
  if (max_points > 0) {
    cloud = RandomDownsample(cloud, max_points, cfg.GetUint("seed"));
  }
  GraphOptions opts;
  opts.k = cfg.GetUint("k");
  const SemanticGraph pre = BuildKnnGraph(cloud, opts);
  const double keep = cfg.GetDouble("keep_ratio");
  const SemanticGraph post =
      pre.has_classes() ? PruneInterClass(pre, keep, cfg.GetUint("seed")) : pre;
  if (!pre.has_classes()) {
    std::cerr << "frame has no semantic labels; pruning skipped\n";
  }
  const fs::path out = PrepareOut(cfg);
  std::ostringstream dot_pre, dot_post, edges_pre, edges_post, stats;
  WriteDot(pre, dot_pre);
  WriteDot(post, dot_post);
  WriteEdgeCsv(pre, edges_pre);
  WriteEdgeCsv(post, edges_post);
  const GraphStats s_pre = ComputeGraphStats(pre);
  const GraphStats s_post = ComputeGraphStats(post);
  WriteStatsCsv({{"pre", s_pre}, {"post", s_post}}, stats);
  WriteText(out / "graph_pre.dot", dot_pre.str());
  WriteText(out / "graph_post.dot", dot_post.str());
  WriteText(out / "edges_pre.csv", edges_pre.str());
  WriteText(out / "edges_post.csv", edges_post.str());
  WriteText(out / "graph_stats.csv", stats.str());
  EchoManifest(cfg, out);
  std::cerr << "edges " << s_pre.edge_count << " -> " << s_post.edge_count
            << " (same-class " << s_pre.same_class_edges << ", inter-class "
            << s_pre.inter_class_edges << " -> " << s_post.inter_class_edges
            << ")\n";
  return 0;
}

Defaults BuildGraphDefaults() {
  return {{"out", ""},          {"frame", ""},        {"labels", ""},
          {"calib", ""},        {"camera", "02"},     {"semantic", ""},
          {"stride", "1"},      {"max_points", "0"},  {"k", "8"},
          {"keep_ratio", "0.2"}, {"seed", "1"},      {"prune_scope", "global"}};
}

// ---------------------------------------------------------------- train

// Model settings that default to the preset's values.
const std::vector<std::string> kModelOverrides = {
    "horizon", "points_per_frame", "graph_k", "semantic_prune", "keep_ratio"};

ModelConfig ResolveModel(RunConfig& cfg) {
  ModelConfig model = FindPreset(cfg.Get("preset"));
  auto fill = [&](const std::string& key, const std::string& preset_value) {
    if (cfg.Get(key).empty()) cfg.Set(key, preset_value);
  };
  fill("horizon", std::to_string(model.horizon));
  fill("points_per_frame", std::to_string(model.points_per_frame));
  fill("graph_k", std::to_string(model.graph_k));
  fill("semantic_prune", model.semantic_prune ? "1" : "0");
  fill("keep_ratio", Num(model.keep_ratio));
  fill("init_seed", std::to_string(model.init_seed));
  model.horizon = cfg.GetUint("horizon");
  model.points_per_frame = cfg.GetUint("points_per_frame");
  model.graph_k = cfg.GetUint("graph_k");
  model.semantic_prune = cfg.GetBool("semantic_prune");
  model.keep_ratio = cfg.GetDouble("keep_ratio");
  model.init_seed = cfg.GetUint("init_seed");
  return model;
}

TrainConfig ReadTrainConfig(const RunConfig& cfg, const ModelConfig& model) {
  TrainConfig tc;
  tc.learning_rate = cfg.GetDouble("learning_rate");
  tc.max_epochs = static_cast<int>(cfg.GetInt("max_epochs"));
  tc.patience = static_cast<int>(cfg.GetInt("patience"));
  tc.horizon = model.horizon;
  tc.weight_alpha = cfg.GetDouble("weight_alpha");
  tc.seed = cfg.GetUint("seed");
  tc.points_per_frame = model.points_per_frame;
  tc.window_stride = cfg.GetUint("window_stride");
  tc.Validate();
  return tc;
}

int RunTrain(RunConfig& cfg) {
  CheckPruneScope(cfg);
  const std::string& dataset = cfg.Get("dataset");
  if (dataset.empty()) throw ConfigError("--dataset is required");
  std::optional<Checkpoint> resume;
  if (!cfg.Get("resume").empty()) {
    resume = LoadCheckpoint(cfg.Get("resume"));
    if (!resume->train_state) {
      throw ConfigError("checkpoint " + cfg.Get("resume") +
                        " holds no training state to resume");
    }
    cfg.Set("preset", resume->config.preset);
  }
  ModelConfig model_cfg = resume ? resume->config : ResolveModel(cfg);
  if (resume) {
    cfg.Set("horizon", std::to_string(model_cfg.horizon));
    cfg.Set("points_per_frame", std::to_string(model_cfg.points_per_frame));
    cfg.Set("graph_k", std::to_string(model_cfg.graph_k));
    cfg.Set("semantic_prune", model_cfg.semantic_prune ? "1" : "0");
    cfg.Set("keep_ratio", Num(model_cfg.keep_ratio));
    cfg.Set("init_seed", std::to_string(model_cfg.init_seed));
  }
  const TrainConfig tc = ReadTrainConfig(cfg, model_cfg);
  const fs::path out = PrepareOut(cfg);
  EchoManifest(cfg, out);

  const LoadedSplits splits = LoadManifest(dataset);
  const std::vector<SteeringSequence> train =
      PrepareSequences(splits.train, model_cfg, tc.seed);
  const std::vector<SteeringSequence> val =
      PrepareSequences(splits.val, model_cfg, tc.seed);
  SteeringModel model =
      resume ? RestoreModel(*resume) : SteeringModel(model_cfg);
  std::cerr << "training " << model_cfg.preset << " ("
            << model.ParameterCount() << " parameters) on " << train.size()
            << " sequences, validating on " << val.size() << "\n";
  const TrainResult result =
      Train(model, train, val, tc,
            resume ? &*resume->train_state : nullptr);
  SaveCheckpoint((out / "checkpoint.bin").string(), model, tc.seed,
                 &result.state);
  std::ostringstream hist;
  WriteHistoryCsv(result.state.history, hist);
  WriteText(out / "history.csv", hist.str());
  std::cerr << "best val_mse " << result.state.best_val << " at epoch "
            << result.state.best_epoch << " after " << result.state.epoch
            << " epochs" << (result.stopped_early ? " (early stop)" : "")
            << "\n";
  return 0;
}

Defaults TrainDefaults() {
  const TrainConfig d;
  return {{"out", ""},
          {"dataset", ""},
          {"preset", "gnn-ncp"},
          {"seed", std::to_string(d.seed)},
          {"learning_rate", Num(d.learning_rate)},
          {"max_epochs", std::to_string(d.max_epochs)},
          {"patience", std::to_string(d.patience)},
          {"weight_alpha", Num(d.weight_alpha)},
          {"window_stride", std::to_string(d.window_stride)},
          {"horizon", ""},
          {"points_per_frame", ""},
          {"graph_k", ""},
          {"semantic_prune", ""},
          {"keep_ratio", ""},
          {"init_seed", ""},
          {"prune_scope", "global"},
          {"resume", ""}};
}

// ----------------------------------------------------------------- eval

SteeringModel LoadModelOrThrow(const std::string& path, Checkpoint* ckpt_out) {
  if (path.empty()) throw ConfigError("--checkpoint is required");
  if (!fs::exists(path)) throw Error("checkpoint " + path + " does not exist");
  Checkpoint ckpt = LoadCheckpoint(path);
  SteeringModel model = RestoreModel(ckpt);
  if (ckpt_out) *ckpt_out = std::move(ckpt);
  return model;
}

int RunEval(RunConfig& cfg) {
  Checkpoint ckpt;
  SteeringModel model = LoadModelOrThrow(cfg.Get("checkpoint"), &ckpt);
  const std::string& dataset = cfg.Get("dataset");
  if (dataset.empty()) throw ConfigError("--dataset is required");
  const std::string& split = cfg.Get("split");
  const LoadedSplits splits = LoadManifest(dataset);
  const std::vector<RawSequence>* raw = nullptr;
  if (split == "train") raw = &splits.train;
  if (split == "val") raw = &splits.val;
  if (split == "test") raw = &splits.test;
  if (raw == nullptr) throw ConfigError("--split must be train, val or test");
  if (cfg.Get("seed").empty()) cfg.Set("seed", std::to_string(ckpt.seed));
  const fs::path out = PrepareOut(cfg);
  EchoManifest(cfg, out);
  const std::vector<SteeringSequence> seqs =
      PrepareSequences(*raw, model.config(), cfg.GetUint("seed"));
  const EvalReport report =
      Evaluate(model, seqs, model.config().horizon, split);
  std::ostringstream rows;
  WriteEvalCsv(report, rows);
  WriteText(out / "eval.csv", rows.str());
  WriteText(out / "eval_summary.csv", "split,frames,mse\n" + split + "," +
                                          std::to_string(report.residuals.size()) +
                                          "," + Num(report.mse) + "\n");
  PlotSeries residuals;
  residuals.label = "residual (rad)";
  for (size_t i = 0; i < report.residuals.size(); ++i) {
    residuals.x.push_back(static_cast<double>(i));
    residuals.y.push_back(report.residuals[i]);
  }
  PlotOptions opts;
  opts.title = "Steering residuals, " + split + " split";
  opts.x_label = "scored frame";
  opts.y_label = "prediction - truth (rad)";
  WriteText(out / "residuals.svg", RenderSvg({residuals}, opts));
  std::cerr << split << " mse " << report.mse << " over "
            << report.residuals.size() << " frames\n";
  return 0;
}

Defaults EvalDefaults() {
  return {{"out", ""},
          {"checkpoint", ""},
          {"dataset", ""},
          {"split", "test"},
          {"seed", ""}};
}

// ----------------------------------------------------------------- path

std::vector<size_t> ParseIndexList(const std::string& text) {
  std::vector<size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("bad waypoint index '" + item + "'");
    }
  }
  return out;
}

int RunPath(RunConfig& cfg) {
  Checkpoint ckpt;
  SteeringModel model = LoadModelOrThrow(cfg.Get("checkpoint"), &ckpt);
  const std::string& dir = cfg.Get("sequence");
  if (dir.empty()) throw ConfigError("--sequence is required");
  const std::string& mode = cfg.Get("mode");
  if (mode != "paper" && mode != "kinematic" && mode != "both") {
    throw ConfigError("--mode must be paper, kinematic or both");
  }
  if (cfg.Get("seed").empty()) cfg.Set("seed", std::to_string(ckpt.seed));
  const std::vector<size_t> waypoints = ParseIndexList(cfg.Get("waypoints"));
  const RawSequence raw = LoadRawSequence(dir, SequenceNameFromDirectory(dir));
  const fs::path out = PrepareOut(cfg);
  EchoManifest(cfg, out);
  const SteeringSequence seq =
      PrepareSequence(raw, model.config(), cfg.GetUint("seed"));
  const std::vector<double> pred =
      PredictSequence(model, seq, model.config().horizon);
  const double wheelbase = cfg.GetDouble("wheelbase");
  const EgoState start{};

  std::vector<std::pair<std::string, PathMode>> modes;
  if (mode != "kinematic") modes.emplace_back("paper", PathMode::kLiteral);
  if (mode != "paper") modes.emplace_back("kinematic", PathMode::kKinematic);
  for (const auto& [name, m] : modes) {
    const Trajectory truth =
        IntegratePath(m, raw.truth, raw.velocities, raw.dt, start, wheelbase);
    Trajectory predicted =
        IntegratePath(m, pred, raw.velocities, raw.dt, start, wheelbase);
    predicted = ResetAtWaypoints(predicted, truth, waypoints, m);
    std::ostringstream pred_csv, truth_csv;
    WriteTrajectoryCsv(predicted, pred_csv);
    WriteTrajectoryCsv(truth, truth_csv);
    WriteText(out / ("trajectory_" + name + ".csv"), pred_csv.str());
    WriteText(out / ("truth_" + name + ".csv"), truth_csv.str());
    PlotSeries t{"ground truth", {}, {}, "#2ca02c", {}};
    PlotSeries p{"predicted", {}, {}, "#d62728", waypoints};
    for (const EgoState& s : truth) {
      t.x.push_back(s.x);
      t.y.push_back(s.y);
    }
    for (const EgoState& s : predicted) {
      p.x.push_back(s.x);
      p.y.push_back(s.y);
    }
    PlotOptions opts;
    opts.title = "Reconstructed path (" + name + " integrator)";
    opts.x_label = "x (m)";
    opts.y_label = "y (m)";
    opts.equal_aspect = true;
    WriteText(out / ("path_" + name + ".svg"), RenderSvg({t, p}, opts));
    const EgoState& a = predicted.back();
    const EgoState& b = truth.back();
    std::cerr << name << ": final position error "
              << std::hypot(a.x - b.x, a.y - b.y) << " m\n";
  }
  return 0;
}

Defaults PathDefaults() {
  return {{"out", ""},       {"checkpoint", ""}, {"sequence", ""},
          {"waypoints", ""}, {"mode", "both"},   {"wheelbase", Num(kDefaultWheelbase)},
          {"seed", ""}};
}

// ------------------------------------------------------------ gradcheck

int RunGradcheck(RunConfig& cfg) {
  GradCheckOptions opts;
  opts.step = cfg.GetDouble("step");
  opts.tolerance = cfg.GetDouble("tolerance");
  const uint64_t seed = cfg.GetUint("seed");
  const int instances = static_cast<int>(cfg.GetInt("instances"));
  std::vector<GradCheckReport> reports;
  if (!cfg.Get("checkpoint").empty()) {
    Checkpoint ckpt;
    SteeringModel model = LoadModelOrThrow(cfg.Get("checkpoint"), &ckpt);
    cfg.Set("preset", model.config().preset);
    reports.push_back(CheckModelWeights(model, seed, opts));
  } else {
    reports = RunGradCheckSuite(FindPreset(cfg.Get("preset")), seed, instances,
                                opts);
  }
  const fs::path out = PrepareOut(cfg);
  EchoManifest(cfg, out);
  std::ostringstream csv;
  WriteGradCheckCsv(reports, csv);
  WriteText(out / "gradcheck.csv", csv.str());

  // Per-component worst case.
  std::map<std::string, const GradCheckReport*> worst;
  bool ok = true;
  for (const GradCheckReport& r : reports) {
    ok = ok && r.passed;
    const GradCheckReport*& w = worst[r.component];
    const bool worse = !r.nonfinite_param.empty() ||
                       (w != nullptr && w->nonfinite_param.empty() &&
                        r.max_rel_error > w->max_rel_error);
    if (w == nullptr || worse) w = &r;
  }
  for (const auto& [component, r] : worst) {
    if (!r->nonfinite_param.empty()) {
      std::cerr << "FAIL " << component << ": non-finite value in "
                << r->nonfinite_param << "\n";
      continue;
    }
    std::cerr << (r->passed ? "PASS " : "FAIL ") << component
              << ": max relative error " << r->max_rel_error << " at "
              << r->worst_param << "[" << r->worst_index << "] (seed "
              << r->seed << ")\n";
  }
  return ok ? 0 : 1;
}

Defaults GradcheckDefaults() {
  const GradCheckOptions d;
  return {{"out", ""},
          {"preset", "gnn-ncp"},
          {"seed", "1"},
          {"instances", "20"},
          {"checkpoint", ""},
          {"step", Num(d.step)},
          {"tolerance", Num(d.tolerance)}};
}

int Main(int argc, char** argv) {
  CLI::App app{"Point-cloud steering estimation toolkit"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& help,
                 Defaults defaults, std::function<int(RunConfig&)> run) {
    auto cmd = std::make_unique<Command>();
    cmd->name = name;
    cmd->defaults = std::move(defaults);
    cmd->run = std::move(run);
    cmd->app = app.add_subcommand(name, help);
    cmd->app->add_option("--config", cmd->config_file, "key=value config file");
    for (const auto& [key, value] : cmd->defaults) {
      const std::string desc =
          value.empty() ? std::string("config key ") + key
                        : "config key " + key + " (default " + value + ")";
      cmd->app->add_option(FlagName(key), cmd->flag_values[key], desc);
    }
    commands.push_back(std::move(cmd));
  };
  add("synth", "generate the synthetic corridor dataset", SynthDefaults(),
      RunSynth);
  add("build-graph", "build and prune the kNN graph of one frame",
      BuildGraphDefaults(), RunBuildGraph);
  add("train", "train a preset on a dataset manifest", TrainDefaults(),
      RunTrain);
  add("eval", "evaluate a checkpoint on one split", EvalDefaults(), RunEval);
  add("path", "reconstruct the driven path from predicted steering",
      PathDefaults(), RunPath);
  add("gradcheck", "compare analytic and numeric gradients",
      GradcheckDefaults(), RunGradcheck);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  for (const auto& cmd : commands) {
    if (!cmd->app->parsed()) continue;
    RunConfig cfg(cmd->name, cmd->defaults);
    if (!cmd->config_file.empty()) cfg.ApplyFile(cmd->config_file);
    std::map<std::string, std::string> flags;
    for (const auto& [key, unused] : cmd->defaults) {
      if (cmd->app->get_option(FlagName(key))->count() > 0) {
        flags[key] = cmd->flag_values[key];
      }
    }
    cfg.Apply(flags, "command line");
    return cmd->run(cfg);
  }
  return 1;
}

}  // namespace
}  // namespace semsteer

int main(int argc, char** argv) {
  try {
    return semsteer::Main(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
