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

#include "semsteer/model.h"

#include <cstdio>
#include <sstream>

#include "semsteer/error.h"
#include "semsteer/random.h"

namespace semsteer {

using ad::Matrix;
using ad::Tape;
using ad::Var;

size_t ModelConfig::embedding_dim() const {
  if (encoder == EncoderKind::kGcn) {
    return gcn_widths.empty() ? 3 + num_classes : gcn_widths.back();
  }
  return sa_levels.back().widths.back();
}

size_t ModelConfig::recurrent_dim() const {
  return recurrent == RecurrentKind::kLstm ? lstm_hidden : ltc_neurons;
}

namespace {

struct FullScale {
  size_t points;
  size_t horizon;
};

// Per-frame input size and sequence length of the original experiments.
FullScale FullScaleFor(const std::string& base) {
  if (base == "pnpp-lstm" || base == "pnpp-ncp") return {45000, 6};
  if (base == "gnn-lstm") return {50000, 8};
  return {43000, 8};  // gnn-ncp and its semantic-pruned variant
}

ModelConfig BasePreset(const std::string& name) {
  ModelConfig cfg;
  cfg.preset = name;
  if (name == "gnn-lstm") {
    cfg.encoder = EncoderKind::kGcn;
    cfg.recurrent = RecurrentKind::kLstm;
  } else if (name == "gnn-ncp") {
    cfg.encoder = EncoderKind::kGcn;
    cfg.recurrent = RecurrentKind::kLtc;
  } else if (name == "sa-gnn-ncp") {
    cfg.encoder = EncoderKind::kGcn;
    cfg.recurrent = RecurrentKind::kLtc;
    cfg.semantic_prune = true;
  } else if (name == "pnpp-lstm") {
    cfg.encoder = EncoderKind::kPointNetPP;
    cfg.recurrent = RecurrentKind::kLstm;
  } else if (name == "pnpp-ncp") {
    cfg.encoder = EncoderKind::kPointNetPP;
    cfg.recurrent = RecurrentKind::kLtc;
  } else {
    std::string valid;
    for (const std::string& p : PresetNames()) valid += " " + p;
    throw ConfigError("unknown preset '" + name + "'; valid presets:" + valid);
  }
  return cfg;
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string JoinSizes(const std::vector<size_t>& v, char sep) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::vector<size_t> ParseSizes(const std::string& s, char sep) {
  std::vector<size_t> out;
  for (const std::string& item : Split(s, sep)) out.push_back(std::stoull(item));
  return out;
}

}  // namespace

std::vector<std::string> PresetNames() {
  return {"gnn-lstm",        "gnn-ncp",        "sa-gnn-ncp",
          "pnpp-lstm",       "pnpp-ncp",       "full-gnn-lstm",
          "full-gnn-ncp",   "full-sa-gnn-ncp", "full-pnpp-lstm",
          "full-pnpp-ncp"};
}

ModelConfig FindPreset(const std::string& name) {
  constexpr std::string_view kFullScalePrefix = "full-";
  if (name.starts_with(kFullScalePrefix)) {
    const std::string base = name.substr(kFullScalePrefix.size());
    ModelConfig cfg = BasePreset(base);
    const FullScale scale = FullScaleFor(base);
    cfg.preset = name;
    cfg.points_per_frame = scale.points;
    cfg.horizon = scale.horizon;
    return cfg;
  }
  return BasePreset(name);
}

std::map<std::string, std::string> ModelConfigToMap(const ModelConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["preset"] = cfg.preset;
  kv["encoder"] = cfg.encoder == EncoderKind::kGcn ? "gcn" : "pointnetpp";
  kv["recurrent"] = cfg.recurrent == RecurrentKind::kLstm ? "lstm" : "ltc";
  kv["num_classes"] = std::to_string(cfg.num_classes);
  kv["gcn_widths"] = JoinSizes(cfg.gcn_widths, ',');
  std::string levels;
  for (size_t i = 0; i < cfg.sa_levels.size(); ++i) {
    const SetAbstractionSpec& l = cfg.sa_levels[i];
    if (i) levels += ';';
    levels += std::to_string(l.m) + ":" + FormatDouble(l.radius) + ":" +
              std::to_string(l.max_group) + ":" + JoinSizes(l.widths, '/');
  }
  kv["sa_levels"] = levels;
  kv["lstm_hidden"] = std::to_string(cfg.lstm_hidden);
  kv["ltc_neurons"] = std::to_string(cfg.ltc_neurons);
  kv["ltc_unfold_steps"] = std::to_string(cfg.ltc_unfold_steps);
  kv["ltc_dt"] = FormatDouble(cfg.ltc_dt);
  kv["ltc_tau_min"] = FormatDouble(cfg.ltc_tau_min);
  kv["ltc_tau_max"] = FormatDouble(cfg.ltc_tau_max);
  kv["ltc_sparsity"] = FormatDouble(cfg.ltc_sparsity);
  kv["ltc_output_sigma"] = cfg.ltc_output_sigma ? "1" : "0";
  kv["readout_hidden"] = std::to_string(cfg.readout_hidden);
  kv["init_seed"] = std::to_string(cfg.init_seed);
  kv["points_per_frame"] = std::to_string(cfg.points_per_frame);
  kv["horizon"] = std::to_string(cfg.horizon);
  kv["graph_k"] = std::to_string(cfg.graph_k);
  kv["semantic_prune"] = cfg.semantic_prune ? "1" : "0";
  kv["keep_ratio"] = FormatDouble(cfg.keep_ratio);
  return kv;
}

ModelConfig ModelConfigFromMap(const std::map<std::string, std::string>& kv) {
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw FormatError(std::string("model config is missing '") + key + "'");
    }
    return it->second;
  };
  try {
    ModelConfig cfg;
    cfg.preset = get("preset");
    cfg.encoder =
        get("encoder") == "gcn" ? EncoderKind::kGcn : EncoderKind::kPointNetPP;
    cfg.recurrent =
        get("recurrent") == "lstm" ? RecurrentKind::kLstm : RecurrentKind::kLtc;
    cfg.num_classes = std::stoull(get("num_classes"));
    cfg.gcn_widths = ParseSizes(get("gcn_widths"), ',');
    cfg.sa_levels.clear();
    for (const std::string& level : Split(get("sa_levels"), ';')) {
      const std::vector<std::string> parts = Split(level, ':');
      if (parts.size() != 4) throw FormatError("bad sa_levels entry " + level);
      cfg.sa_levels.push_back({std::stoull(parts[0]), std::stod(parts[1]),
                               std::stoull(parts[2]),
                               ParseSizes(parts[3], '/')});
    }
    cfg.lstm_hidden = std::stoull(get("lstm_hidden"));
    cfg.ltc_neurons = std::stoull(get("ltc_neurons"));
    cfg.ltc_unfold_steps = std::stoi(get("ltc_unfold_steps"));
    cfg.ltc_dt = std::stod(get("ltc_dt"));
    cfg.ltc_tau_min = std::stod(get("ltc_tau_min"));
    cfg.ltc_tau_max = std::stod(get("ltc_tau_max"));
    cfg.ltc_sparsity = std::stod(get("ltc_sparsity"));
    cfg.ltc_output_sigma = get("ltc_output_sigma") == "1";
    cfg.readout_hidden = std::stoull(get("readout_hidden"));
    cfg.init_seed = std::stoull(get("init_seed"));
    cfg.points_per_frame = std::stoull(get("points_per_frame"));
    cfg.horizon = std::stoull(get("horizon"));
    cfg.graph_k = std::stoull(get("graph_k"));
    cfg.semantic_prune = get("semantic_prune") == "1";
    cfg.keep_ratio = std::stod(get("keep_ratio"));
    return cfg;
  } catch (const std::logic_error& e) {
    // std::stoull and friends report malformed numbers this way.
    throw FormatError(std::string("malformed model config value: ") + e.what());
  }
}

GraphFrame MakeGraphFrame(const SemanticGraph& graph) {
  GraphFrame frame;
  frame.features = graph.features;
  frame.adjacency = NormalizeAdjacency(graph);
  return frame;
}

GraphFrame MakeGraphFrame(const PointCloud& cloud, const ModelConfig& cfg,
                          uint64_t prune_seed) {
  GraphOptions opts;
  opts.k = cfg.graph_k;
  opts.num_classes = cfg.num_classes;
  SemanticGraph graph = BuildKnnGraph(cloud, opts);
  if (cfg.semantic_prune) {
    graph = PruneInterClass(graph, cfg.keep_ratio, prune_seed);
  }
  GraphFrame frame = MakeGraphFrame(graph);
  // Class-less clouds get an all-zero one-hot block so widths always chain.
  if (static_cast<size_t>(frame.features.cols()) < 3 + cfg.num_classes) {
    Matrix padded = Matrix::Zero(frame.features.rows(), 3 + cfg.num_classes);
    padded.leftCols(frame.features.cols()) = frame.features;
    frame.features = std::move(padded);
  }
  return frame;
}

CloudFrame MakeCloudFrame(const PointCloud& cloud, const ModelConfig& cfg,
                          size_t fps_seed) {
  cloud.Validate();
  if (cloud.empty()) throw EmptyCloudError("cannot encode an empty cloud");
  CloudFrame frame;
  frame.points = cloud.points;
  frame.fps_seed = fps_seed;
  frame.features = Matrix::Zero(cloud.size(), cfg.num_classes);
  if (cloud.classes) {
    for (size_t i = 0; i < cloud.size(); ++i) {
      const ClassId c = (*cloud.classes)[i];
      if (c >= cfg.num_classes) {
        throw ConfigError("class id " + std::to_string(c) +
                          " exceeds num_classes");
      }
      frame.features(i, c) = 1.0;
    }
  }
  std::vector<Point3> level_points = frame.points;
  size_t seed = fps_seed;
  for (const SetAbstractionSpec& spec : cfg.sa_levels) {
    SetAbstractionLevel level;
    level.m = spec.m;
    level.radius = spec.radius;
    level.max_group = spec.max_group;
    frame.plans.push_back(
        PlanGrouping(level, std::span<const Point3>(level_points), seed));
    level_points = frame.plans.back().centroid_points;
    // Deeper levels start from the first centroid, which is the same point
    // under any reordering of the input.
    seed = 0;
  }
  return frame;
}

SteeringModel::SteeringModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  Rng rng(cfg_.init_seed);
  const size_t input_dim = 3 + cfg_.num_classes;
  if (cfg_.encoder == EncoderKind::kGcn) {
    if (cfg_.gcn_widths.empty()) throw ConfigError("GCN needs >= 1 layer");
    size_t in = input_dim;
    for (size_t l = 0; l < cfg_.gcn_widths.size(); ++l) {
      gcn_.emplace_back("gcn." + std::to_string(l), in, cfg_.gcn_widths[l],
                        Activation::kRelu);
      InitUniform(gcn_.back().weight, in, rng);
      in = cfg_.gcn_widths[l];
    }
  } else {
    if (cfg_.sa_levels.empty()) throw ConfigError("PointNet++ needs >= 1 level");
    size_t in_features = cfg_.num_classes;
    for (size_t l = 0; l < cfg_.sa_levels.size(); ++l) {
      const SetAbstractionSpec& spec = cfg_.sa_levels[l];
      if (spec.widths.empty()) throw ConfigError("empty set abstraction MLP");
      SetAbstractionLevel level;
      level.m = spec.m;
      level.radius = spec.radius;
      level.max_group = spec.max_group;
      size_t in = 3 + in_features;
      for (size_t k = 0; k < spec.widths.size(); ++k) {
        level.mlp.emplace_back(
            "sa." + std::to_string(l) + ".mlp." + std::to_string(k), in,
            spec.widths[k], Activation::kRelu);
        level.mlp.back().Init(rng);
        in = spec.widths[k];
      }
      in_features = spec.widths.back();
      sa_.push_back(std::move(level));
    }
  }
  const size_t embedding = cfg_.embedding_dim();
  if (cfg_.recurrent == RecurrentKind::kLstm) {
    lstm_.emplace("lstm", embedding, cfg_.lstm_hidden);
    lstm_->Init(rng);
  } else {
    ltc_.emplace("ltc", embedding, cfg_.ltc_neurons);
    ltc_->unfold_steps = cfg_.ltc_unfold_steps;
    ltc_->dt = cfg_.ltc_dt;
    ltc_->tau_min = cfg_.ltc_tau_min;
    ltc_->tau_max = cfg_.ltc_tau_max;
    ltc_->output_sigma = cfg_.ltc_output_sigma;
    ltc_->Init(rng);
    if (cfg_.ltc_sparsity > 0.0) ltc_->SetSparsity(cfg_.ltc_sparsity, rng);
  }
  readout_hidden_ = DenseLayer("readout.0", cfg_.recurrent_dim(),
                               cfg_.readout_hidden, Activation::kRelu);
  readout_hidden_.Init(rng);
  readout_out_ =
      DenseLayer("readout.1", cfg_.readout_hidden, 1, Activation::kIdentity);
  readout_out_.Init(rng);
}

std::vector<ad::ParamTensor*> SteeringModel::Parameters() {
  std::vector<ad::ParamTensor*> out;
  for (GcnLayer& layer : gcn_) out.push_back(&layer.weight);
  for (SetAbstractionLevel& level : sa_) {
    for (DenseLayer& d : level.mlp) {
      out.push_back(&d.weight);
      out.push_back(&d.bias);
    }
  }
  if (lstm_) {
    out.push_back(&lstm_->weight);
    out.push_back(&lstm_->bias);
  }
  if (ltc_) {
    out.push_back(&ltc_->recurrent);
    out.push_back(&ltc_->input);
    out.push_back(&ltc_->bias);
    out.push_back(&ltc_->time_const);
  }
  out.push_back(&readout_hidden_.weight);
  out.push_back(&readout_hidden_.bias);
  out.push_back(&readout_out_.weight);
  out.push_back(&readout_out_.bias);
  return out;
}

std::vector<const ad::ParamTensor*> SteeringModel::Parameters() const {
  std::vector<const ad::ParamTensor*> out;
  for (ad::ParamTensor* p : const_cast<SteeringModel*>(this)->Parameters()) {
    out.push_back(p);
  }
  return out;
}

size_t SteeringModel::ParameterCount() const {
  size_t n = 0;
  for (const ad::ParamTensor* p : Parameters()) n += p->size();
  return n;
}

Var SteeringModel::Encode(Tape& tape, const FrameInput& frame,
                          ForwardCounters* counters) {
  if (counters) ++counters->frames;
  if (cfg_.encoder == EncoderKind::kGcn) {
    const GraphFrame* g = std::get_if<GraphFrame>(&frame);
    if (g == nullptr) throw ConfigError("GCN encoder needs graph frames");
    Var h = tape.Constant(g->features);
    for (GcnLayer& layer : gcn_) {
      h = GcnForward(tape, layer, g->adjacency, h);
      if (counters) counters->edge_messages += g->adjacency.nonzeros();
    }
    return ad::MeanRows(h);
  }
  const CloudFrame* c = std::get_if<CloudFrame>(&frame);
  if (c == nullptr) throw ConfigError("PointNet++ encoder needs cloud frames");
  if (c->plans.size() != sa_.size()) {
    throw DimensionError("cloud frame was prepared for a different model");
  }
  Var f = c->features.cols() > 0 ? tape.Constant(c->features) : Var();
  for (size_t l = 0; l < sa_.size(); ++l) {
    f = ApplySetAbstraction(tape, sa_[l], c->plans[l], f);
  }
  return ad::MaxRows(f);
}

RecurrentState SteeringModel::InitialState(Tape& tape) const {
  RecurrentState state;
  const auto n = static_cast<Eigen::Index>(cfg_.recurrent_dim());
  state.h = tape.Constant(Matrix::Zero(1, n));
  if (lstm_) state.c = tape.Constant(Matrix::Zero(1, n));
  return state;
}

Var SteeringModel::Step(Tape& tape, Var embedding, RecurrentState& state) {
  if (lstm_) {
    state = LstmStep(tape, *lstm_, embedding, state);
    return state.h;
  }
  state.h = LtcStep(tape, *ltc_, embedding, state.h);
  return LtcOutput(*ltc_, state.h);
}

Var SteeringModel::Readout(Tape& tape, Var features) {
  return readout_out_.Forward(tape, readout_hidden_.Forward(tape, features));
}

std::vector<Var> SteeringModel::ForwardSequence(
    Tape& tape, std::span<const FrameInput> frames, ForwardCounters* counters) {
  if (frames.empty()) throw ConfigError("model forward needs >= 1 frame");
  RecurrentState state = InitialState(tape);
  std::vector<Var> out;
  out.reserve(frames.size());
  for (const FrameInput& frame : frames) {
    Var y = Step(tape, Encode(tape, frame, counters), state);
    out.push_back(Readout(tape, y));
  }
  return out;
}

Var SteeringModel::Forward(Tape& tape, std::span<const FrameInput> frames,
                           ForwardCounters* counters) {
  return ForwardSequence(tape, frames, counters).back();
}

double ModelForward(SteeringModel& model, std::span<const FrameInput> frames) {
  Tape tape;
  return model.Forward(tape, frames).scalar();
}

}  // namespace semsteer
