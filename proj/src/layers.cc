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

#include "semsteer/layers.h"

#include <cmath>

#include "semsteer/error.h"
#include "semsteer/spatial_index.h"

namespace semsteer {

using ad::Matrix;
using ad::Tape;
using ad::Var;

Var Activate(Var x, Activation act) {
  switch (act) {
    case Activation::kIdentity:
      return x;
    case Activation::kRelu:
      return ad::Relu(x);
    case Activation::kTanh:
      return ad::Tanh(x);
    case Activation::kSigmoid:
      return ad::Sigmoid(x);
  }
  return x;
}

const char* ActivationName(Activation act) {
  switch (act) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kSigmoid:
      return "sigmoid";
  }
  return "?";
}

void InitUniform(ad::ParamTensor& p, size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix& v = p.value();
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      v(r, c) = rng.Uniform(-bound, bound);
    }
  }
}

DenseLayer::DenseLayer(const std::string& name, size_t in, size_t out,
                       Activation act)
    : weight(name + ".weight", in, out),
      bias(name + ".bias", 1, out),
      activation(act) {}

Var DenseLayer::Forward(Tape& tape, Var x) {
  if (static_cast<size_t>(x.cols()) != in_dim()) {
    throw DimensionError(weight.name() + ": input width " +
                         std::to_string(x.cols()) + ", expected " +
                         std::to_string(in_dim()));
  }
  Var y = ad::AddRow(ad::MatMul(x, tape.Param(weight)), tape.Param(bias));
  return Activate(y, activation);
}

GcnLayer::GcnLayer(const std::string& name, size_t in, size_t out,
                   Activation act)
    : weight(name + ".weight", in, out), activation(act) {}

Var GcnForward(Tape& tape, GcnLayer& layer, const NormalizedAdjacency& adj,
               Var features) {
  if (static_cast<size_t>(features.cols()) != layer.in_dim()) {
    throw DimensionError(layer.weight.name() + ": feature width " +
                         std::to_string(features.cols()) + ", expected " +
                         std::to_string(layer.in_dim()));
  }
  if (adj.dimension() != static_cast<size_t>(features.rows())) {
    throw DimensionError("adjacency dimension " +
                         std::to_string(adj.dimension()) + " vs " +
                         std::to_string(features.rows()) + " nodes");
  }
  // (A H) W costs fewer flops than A (H W) while the input is narrower.
  Var propagated =
      layer.in_dim() <= layer.out_dim()
          ? ad::MatMul(ad::SpMatMul(adj.matrix, features),
                       tape.Param(layer.weight))
          : ad::SpMatMul(adj.matrix,
                         ad::MatMul(features, tape.Param(layer.weight)));
  return Activate(propagated, layer.activation);
}

GroupingPlan PlanGrouping(const SetAbstractionLevel& level,
                          std::span<const Point3> points, size_t fps_seed) {
  if (level.m < 1 || level.m > points.size()) {
    throw ConfigError("set abstraction samples " + std::to_string(level.m) +
                      " centroids from " + std::to_string(points.size()) +
                      " points");
  }
  if (!(level.radius > 0.0) || level.max_group < 1) {
    throw ConfigError("set abstraction needs radius > 0 and max_group >= 1");
  }
  GroupingPlan plan;
  plan.centroids = FarthestPointSampling(points, level.m, fps_seed);
  const SpatialIndex index(points);
  plan.offsets.push_back(0);
  std::vector<double> rel;
  for (uint32_t c : plan.centroids) {
    const Point3& center = points[c];
    plan.centroid_points.push_back(center);
    std::vector<uint32_t> group =
        index.BallQuery(center, level.radius, level.max_group);
    if (group.empty()) group.push_back(c);
    for (uint32_t j : group) {
      plan.members.push_back(j);
      const Point3 d = points[j] - center;
      rel.insert(rel.end(), {d.x, d.y, d.z});
    }
    plan.offsets.push_back(static_cast<uint32_t>(plan.members.size()));
  }
  plan.relative = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3,
                                                 Eigen::RowMajor>>(
      rel.data(), static_cast<Eigen::Index>(plan.members.size()), 3);
  return plan;
}

Var ApplySetAbstraction(Tape& tape, SetAbstractionLevel& level,
                        const GroupingPlan& plan, Var features) {
  if (level.mlp.empty()) throw ConfigError("set abstraction MLP is empty");
  const size_t feature_dim = features.valid() ? features.cols() : 0;
  if (feature_dim != level.in_feature_dim()) {
    throw DimensionError("set abstraction expects " +
                         std::to_string(level.in_feature_dim()) +
                         " input features, got " +
                         std::to_string(feature_dim));
  }
  Var grouped = tape.Constant(plan.relative);
  if (features.valid()) {
    grouped = ad::ConcatCols(grouped, ad::GatherRows(features, plan.members));
  }
  for (DenseLayer& layer : level.mlp) grouped = layer.Forward(tape, grouped);
  return ad::SegmentMax(grouped, plan.offsets);
}

SetAbstractionOutput SetAbstraction(Tape& tape, SetAbstractionLevel& level,
                                    const PointCloud& cloud, Var features,
                                    size_t fps_seed) {
  const GroupingPlan plan =
      PlanGrouping(level, std::span<const Point3>(cloud.points), fps_seed);
  SetAbstractionOutput out;
  out.features = ApplySetAbstraction(tape, level, plan, features);
  out.sampled.points = plan.centroid_points;
  out.sampled.frame_index = cloud.frame_index;
  out.sampled.timestamp = cloud.timestamp;
  if (cloud.classes) {
    auto& classes = out.sampled.classes.emplace();
    for (uint32_t c : plan.centroids) classes.push_back((*cloud.classes)[c]);
  }
  return out;
}

LstmCell::LstmCell(const std::string& name, size_t in, size_t hidden)
    : weight(name + ".weight", in + hidden, 4 * hidden),
      bias(name + ".bias", 1, 4 * hidden),
      input_dim(in),
      hidden_dim(hidden) {}

void LstmCell::Init(Rng& rng) {
  InitUniform(weight, hidden_dim, rng);
  InitUniform(bias, hidden_dim, rng);
}

RecurrentState LstmStep(Tape& tape, LstmCell& cell, Var x,
                        const RecurrentState& state) {
  const auto h = static_cast<Eigen::Index>(cell.hidden_dim);
  if (x.rows() != 1 || static_cast<size_t>(x.cols()) != cell.input_dim ||
      state.h.cols() != h || state.c.cols() != h) {
    throw DimensionError("LSTM step: input width " + std::to_string(x.cols()) +
                         " (expected " + std::to_string(cell.input_dim) +
                         "), hidden " + std::to_string(state.h.cols()));
  }
  Var gates = ad::AddRow(
      ad::MatMul(ad::ConcatCols(x, state.h), tape.Param(cell.weight)),
      tape.Param(cell.bias));
  Var in_gate = ad::Sigmoid(ad::SliceCols(gates, 0, h));
  Var forget_gate = ad::Sigmoid(ad::SliceCols(gates, h, h));
  Var candidate = ad::Tanh(ad::SliceCols(gates, 2 * h, h));
  Var out_gate = ad::Sigmoid(ad::SliceCols(gates, 3 * h, h));
  RecurrentState next;
  next.c = ad::Add(ad::Mul(forget_gate, state.c), ad::Mul(in_gate, candidate));
  next.h = ad::Mul(out_gate, ad::Tanh(next.c));
  return next;
}

LtcCell::LtcCell(const std::string& name, size_t in, size_t n)
    : recurrent(name + ".recurrent", n, n),
      input(name + ".input", in, n),
      bias(name + ".bias", 1, n),
      time_const(name + ".time_const", in, n),
      mask(Matrix::Ones(n, n)),
      input_dim(in),
      neurons(n) {}

void LtcCell::Init(Rng& rng) {
  InitUniform(recurrent, neurons, rng);
  InitUniform(input, input_dim, rng);
  InitUniform(bias, input_dim, rng);
  InitUniform(time_const, input_dim, rng);
}

void LtcCell::SetSparsity(double fraction_zero, Rng& rng) {
  if (!(fraction_zero >= 0.0 && fraction_zero < 1.0)) {
    throw ConfigError("LTC sparsity must lie in [0, 1)");
  }
  for (Eigen::Index c = 0; c < mask.cols(); ++c) {
    for (Eigen::Index r = 0; r < mask.rows(); ++r) {
      mask(r, c) = rng.Uniform() < fraction_zero ? 0.0 : 1.0;
    }
  }
}

Var LtcStep(Tape& tape, LtcCell& cell, Var x, Var h) {
  if (x.rows() != 1 || static_cast<size_t>(x.cols()) != cell.input_dim ||
      h.rows() != 1 || static_cast<size_t>(h.cols()) != cell.neurons) {
    throw DimensionError("LTC step: input width " + std::to_string(x.cols()) +
                         " (expected " + std::to_string(cell.input_dim) +
                         "), state width " + std::to_string(h.cols()) +
                         " (expected " + std::to_string(cell.neurons) + ")");
  }
  if (cell.unfold_steps < 1 || !(cell.dt > 0.0)) {
    throw ConfigError("LTC needs unfold_steps >= 1 and dt > 0");
  }
  Var tau = ad::Clamp(ad::Exp(ad::MatMul(x, tape.Param(cell.time_const))),
                      cell.tau_min, cell.tau_max);
  if (!tau.value().allFinite()) {
    throw NumericError("LTC time constant is not finite after clamping");
  }
  Var rate = ad::Scale(ad::Reciprocal(tau), cell.dt);
  Var drive =
      ad::Add(ad::MatMul(x, tape.Param(cell.input)), tape.Param(cell.bias));
  Var synapses = ad::Mul(tape.Param(cell.recurrent), tape.Constant(cell.mask));
  for (int s = 0; s < cell.unfold_steps; ++s) {
    Var dh = ad::Add(ad::Sub(ad::MatMul(ad::Tanh(h), synapses), h), drive);
    h = ad::Add(h, ad::Mul(rate, dh));
  }
  return h;
}

Var LtcOutput(const LtcCell& cell, Var h) {
  return cell.output_sigma ? ad::Tanh(h) : h;
}

}  // namespace semsteer
