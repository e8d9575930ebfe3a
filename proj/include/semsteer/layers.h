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

#ifndef SEMSTEER_LAYERS_H_
#define SEMSTEER_LAYERS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semsteer/autodiff.h"
#include "semsteer/graph.h"
#include "semsteer/pointcloud.h"
#include "semsteer/random.h"

namespace semsteer {

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid };

ad::Var Activate(ad::Var x, Activation act);
const char* ActivationName(Activation act);

// Seeded uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
void InitUniform(ad::ParamTensor& p, size_t fan_in, Rng& rng);

// Row-batched affine map: Y = X W + b, W is in x out, b is 1 x out.
struct DenseLayer {
  ad::ParamTensor weight;
  ad::ParamTensor bias;
  Activation activation = Activation::kRelu;

  DenseLayer() = default;
  DenseLayer(const std::string& name, size_t in, size_t out, Activation act);

  size_t in_dim() const { return static_cast<size_t>(weight.rows()); }
  size_t out_dim() const { return static_cast<size_t>(weight.cols()); }
  void Init(Rng& rng) {
    InitUniform(weight, in_dim(), rng);
    InitUniform(bias, in_dim(), rng);
  }
  ad::Var Forward(ad::Tape& tape, ad::Var x);
};

// H' = act(A_hat H W). No bias term.
struct GcnLayer {
  ad::ParamTensor weight;  // in x out
  Activation activation = Activation::kRelu;

  GcnLayer() = default;
  GcnLayer(const std::string& name, size_t in, size_t out, Activation act);

  size_t in_dim() const { return static_cast<size_t>(weight.rows()); }
  size_t out_dim() const { return static_cast<size_t>(weight.cols()); }
};

ad::Var GcnForward(ad::Tape& tape, GcnLayer& layer,
                   const NormalizedAdjacency& adj, ad::Var features);

// Sampling and grouping of one abstraction level. Depends only on
// coordinates, so it is computed once per frame and reused across passes.
struct GroupingPlan {
  std::vector<uint32_t> centroids;  // indices into the input points
  std::vector<uint32_t> members;    // concatenated neighborhoods
  std::vector<uint32_t> offsets;    // group g: members[offsets[g]..offsets[g+1])
  ad::Matrix relative;              // member position minus its centroid
  std::vector<Point3> centroid_points;
};

struct SetAbstractionLevel {
  size_t m = 1;
  double radius = 1.0;
  size_t max_group = 16;
  // The shared function applied to (x_j - x_i, f_j); aggregation is max.
  std::vector<DenseLayer> mlp;

  size_t in_feature_dim() const { return mlp.front().in_dim() - 3; }
  size_t out_dim() const { return mlp.back().out_dim(); }
};

GroupingPlan PlanGrouping(const SetAbstractionLevel& level,
                          std::span<const Point3> points, size_t fps_seed);

// Shared MLP over grouped members followed by a per-group max. `features`
// may be empty (invalid Var) for levels with no input features.
ad::Var ApplySetAbstraction(ad::Tape& tape, SetAbstractionLevel& level,
                            const GroupingPlan& plan, ad::Var features);

struct SetAbstractionOutput {
  PointCloud sampled;
  ad::Var features;  // m x out_dim
};

SetAbstractionOutput SetAbstraction(ad::Tape& tape, SetAbstractionLevel& level,
                                    const PointCloud& cloud, ad::Var features,
                                    size_t fps_seed = 0);

struct RecurrentState {
  ad::Var h;
  ad::Var c;  // LSTM only
};

// Gate order within the 4h-wide blocks: input, forget, candidate, output.
struct LstmCell {
  ad::ParamTensor weight;  // (in + hidden) x 4*hidden
  ad::ParamTensor bias;    // 1 x 4*hidden
  size_t input_dim = 0;
  size_t hidden_dim = 0;

  LstmCell() = default;
  LstmCell(const std::string& name, size_t in, size_t hidden);
  void Init(Rng& rng);
};

RecurrentState LstmStep(ad::Tape& tape, LstmCell& cell, ad::Var x,
                        const RecurrentState& state);

// Liquid time-constant cell integrated by explicit Euler:
//   tau = clamp(exp(x Theta), tau_min, tau_max)
//   h  += (dt / tau) * (-h + tanh(h) (R .* mask) + x U + b)
// repeated `unfold_steps` times per input. Parameters use the row-vector
// convention: R(j, i) is the synapse from neuron j to neuron i.
struct LtcCell {
  ad::ParamTensor recurrent;   // n x n
  ad::ParamTensor input;       // d x n
  ad::ParamTensor bias;        // 1 x n
  ad::ParamTensor time_const;  // d x n
  ad::Matrix mask;             // n x n, binary
  size_t input_dim = 0;
  size_t neurons = 0;
  int unfold_steps = 6;
  double dt = 0.1;
  double tau_min = 0.05;
  double tau_max = 20.0;
  // Expose tanh(h) as the cell output (true) or h itself.
  bool output_sigma = true;

  LtcCell() = default;
  LtcCell(const std::string& name, size_t in, size_t neurons);
  void Init(Rng& rng);
  // Random binary mask with the given fraction of zeroed synapses.
  void SetSparsity(double fraction_zero, Rng& rng);
};

// Advances the hidden state by one input; returns the new h. Throws
// NumericError if a clamped time constant is not finite.
ad::Var LtcStep(ad::Tape& tape, LtcCell& cell, ad::Var x, ad::Var h);
ad::Var LtcOutput(const LtcCell& cell, ad::Var h);

}  // namespace semsteer

#endif  // SEMSTEER_LAYERS_H_
