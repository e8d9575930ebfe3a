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

#ifndef SEMSTEER_MODEL_H_
#define SEMSTEER_MODEL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "semsteer/autodiff.h"
#include "semsteer/graph.h"
#include "semsteer/layers.h"
#include "semsteer/pointcloud.h"

namespace semsteer {

enum class EncoderKind { kGcn, kPointNetPP };
enum class RecurrentKind { kLstm, kLtc };

struct SetAbstractionSpec {
  size_t m = 64;
  double radius = 2.0;
  size_t max_group = 16;
  std::vector<size_t> widths = {32, 32};
};

// Everything needed to rebuild a model (and to prepare its input frames).
struct ModelConfig {
  std::string preset = "gnn-ncp";
  EncoderKind encoder = EncoderKind::kGcn;
  RecurrentKind recurrent = RecurrentKind::kLtc;

  // Width of the one-hot class block in the node/point features.
  size_t num_classes = 3;

  std::vector<size_t> gcn_widths = {32, 32};
  std::vector<SetAbstractionSpec> sa_levels = {{64, 2.0, 16, {32, 32}},
                                               {16, 4.0, 16, {32, 32}}};

  size_t lstm_hidden = 32;

  size_t ltc_neurons = 19;
  int ltc_unfold_steps = 6;
  double ltc_dt = 0.1;
  double ltc_tau_min = 0.05;
  double ltc_tau_max = 20.0;
  double ltc_sparsity = 0.0;
  bool ltc_output_sigma = true;

  size_t readout_hidden = 32;
  uint64_t init_seed = 1;

  // Frame preparation.
  size_t points_per_frame = 256;
  size_t horizon = 4;
  size_t graph_k = 8;
  bool semantic_prune = false;
  double keep_ratio = 0.2;

  size_t embedding_dim() const;
  size_t recurrent_dim() const;
};

// Desk-scale presets mirroring the four hybrid architectures plus the
// semantic-pruned GNN-NCP variant. `full-<name>` returns the same network
// at the full per-frame input size and sequence length of the original
// experiments (documentation only; far too heavy for desk-scale runs).
ModelConfig FindPreset(const std::string& name);
std::vector<std::string> PresetNames();

std::map<std::string, std::string> ModelConfigToMap(const ModelConfig& cfg);
ModelConfig ModelConfigFromMap(const std::map<std::string, std::string>& kv);

// Graph-encoder input: node features plus the normalized adjacency.
struct GraphFrame {
  ad::Matrix features;
  NormalizedAdjacency adjacency;
};

// PointNet++ input: coordinates, per-point features (one-hot classes or
// zero-width) and the precomputed grouping for every level.
struct CloudFrame {
  std::vector<Point3> points;
  ad::Matrix features;
  size_t fps_seed = 0;
  std::vector<GroupingPlan> plans;
};

using FrameInput = std::variant<GraphFrame, CloudFrame>;

GraphFrame MakeGraphFrame(const SemanticGraph& graph);
// Builds the kNN graph (and optional semantic pruning) prescribed by `cfg`.
GraphFrame MakeGraphFrame(const PointCloud& cloud, const ModelConfig& cfg,
                          uint64_t prune_seed);
CloudFrame MakeCloudFrame(const PointCloud& cloud, const ModelConfig& cfg,
                          size_t fps_seed = 0);

// Counted work of a forward pass.
struct ForwardCounters {
  // Non-zeros of the normalized adjacency summed over GCN layer applications:
  // one multiply-add message per stored entry and feature row.
  uint64_t edge_messages = 0;
  uint64_t frames = 0;
};

class SteeringModel {
 public:
  explicit SteeringModel(ModelConfig cfg);

  SteeringModel(const SteeringModel&) = delete;
  SteeringModel& operator=(const SteeringModel&) = delete;
  SteeringModel(SteeringModel&&) = default;

  const ModelConfig& config() const { return cfg_; }

  // Stable order; names are unique.
  std::vector<ad::ParamTensor*> Parameters();
  std::vector<const ad::ParamTensor*> Parameters() const;
  size_t ParameterCount() const;

  // Per-frame scene embedding, 1 x embedding_dim.
  ad::Var Encode(ad::Tape& tape, const FrameInput& frame,
                 ForwardCounters* counters = nullptr);
  RecurrentState InitialState(ad::Tape& tape) const;
  // Consumes one embedding; returns the recurrent output features.
  ad::Var Step(ad::Tape& tape, ad::Var embedding, RecurrentState& state);
  // Maps recurrent output features to a 1x1 steering angle (radians).
  ad::Var Readout(ad::Tape& tape, ad::Var features);

  // Steering after each frame of the sequence, oldest first.
  std::vector<ad::Var> ForwardSequence(ad::Tape& tape,
                                       std::span<const FrameInput> frames,
                                       ForwardCounters* counters = nullptr);
  // Steering after the last frame.
  ad::Var Forward(ad::Tape& tape, std::span<const FrameInput> frames,
                  ForwardCounters* counters = nullptr);

  LtcCell* ltc() { return ltc_.has_value() ? &*ltc_ : nullptr; }
  LstmCell* lstm() { return lstm_.has_value() ? &*lstm_ : nullptr; }

 private:
  ModelConfig cfg_;
  std::vector<GcnLayer> gcn_;
  std::vector<SetAbstractionLevel> sa_;
  std::optional<LstmCell> lstm_;
  std::optional<LtcCell> ltc_;
  DenseLayer readout_hidden_;
  DenseLayer readout_out_;
};

// Steering angle in radians predicted after the last frame.
double ModelForward(SteeringModel& model, std::span<const FrameInput> frames);

}  // namespace semsteer

#endif  // SEMSTEER_MODEL_H_
