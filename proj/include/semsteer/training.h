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

#ifndef SEMSTEER_TRAINING_H_
#define SEMSTEER_TRAINING_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "semsteer/autodiff.h"
#include "semsteer/model.h"

namespace semsteer {

// One driving sequence prepared for a particular model: encoder inputs plus
// the steering label of every frame. Frames with `valid[i] == 0` (low speed)
// are consumed by the recurrence but never scored.
struct SteeringSequence {
  std::string name;
  std::vector<FrameInput> frames;
  std::vector<double> truth;
  std::vector<uint8_t> valid;

  size_t size() const { return frames.size(); }
  size_t scored_frames() const;
  void Validate() const;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int max_epochs = 300;
  // Validation epochs without improvement tolerated before stopping.
  int patience = 20;
  size_t horizon = 4;
  double weight_alpha = 0.0;
  uint64_t seed = 1;
  size_t points_per_frame = 256;
  // Distance between the starts of consecutive training windows; 0 means
  // `horizon` (non-overlapping windows).
  size_t window_stride = 0;

  void Validate() const;
};

// w(theta) = 1 + alpha * |theta|.
double SampleWeight(double truth, double weight_alpha);

// Weighted mean of squared residuals; alpha = 0 is the plain MSE.
double WeightedMse(std::span<const double> pred, std::span<const double> truth,
                   double weight_alpha);

struct OptimizerState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint64_t step = 0;
  std::vector<ad::Matrix> m;
  std::vector<ad::Matrix> v;

  // Allocates zero moments shaped like `params`.
  void Reset(std::span<ad::ParamTensor* const> params);
};

// Bias-corrected adaptive-moment update, then zeroes every gradient.
void AdamStep(OptimizerState& opt, std::span<ad::ParamTensor* const> params,
              double learning_rate);

struct EvalReport {
  std::string split;
  double mse = 0.0;
  // One entry per scored frame, sequence order then frame order.
  std::vector<double> predictions;
  std::vector<double> truth;
  std::vector<double> residuals;
  std::vector<std::string> sequence_names;
  std::vector<size_t> frame_indices;
};

// Steering predicted for every frame of `seq` (scored or not); frame t sees
// the window [max(0, t - horizon + 1), t] from a zero recurrent state.
std::vector<double> PredictSequence(SteeringModel& model,
                                    const SteeringSequence& seq,
                                    size_t horizon);

// Prediction for frame t uses the window [max(0, t - horizon + 1), t]
// starting from a zero recurrent state, exactly as during training.
EvalReport Evaluate(SteeringModel& model,
                    std::span<const SteeringSequence> dataset, size_t horizon,
                    const std::string& split_name = "");

// MSE of predicting the mean of `reference` labels for every scored frame of
// `dataset`.
double ConstantMeanMse(std::span<const SteeringSequence> reference,
                       std::span<const SteeringSequence> dataset);

struct EpochRecord {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

// Mutable loop state; persisted in checkpoints so a run can resume.
struct TrainState {
  int epoch = 0;  // epochs completed
  double best_val = 0.0;
  int best_epoch = 0;
  int bad_epochs = 0;
  OptimizerState optimizer;
  std::vector<EpochRecord> history;
  // Weights after the last completed epoch. The model itself carries the
  // best-validation weights, so resuming needs both.
  std::vector<ad::Matrix> last_params;
};

struct TrainResult {
  TrainState state;
  bool stopped_early = false;
  // Parameter values of the best-validation epoch (already loaded into the
  // model on return).
  std::vector<ad::Matrix> best_params;
};

// Training windows of length `horizon` cut from every sequence.
struct Window {
  size_t sequence = 0;
  size_t start = 0;
  size_t length = 0;
};
std::vector<Window> MakeWindows(std::span<const SteeringSequence> dataset,
                                size_t horizon, size_t stride);

// Taped weighted-MSE loss of one window (all scored steps of the window).
// Returns an invalid Var when no step of the window is scored.
ad::Var WindowLoss(ad::Tape& tape, SteeringModel& model,
                   const SteeringSequence& seq, const Window& window,
                   double weight_alpha);

// Epoch loop with seeded shuffling, one window per optimizer step, and
// early stopping on validation MSE. `resume` continues a previous run.
TrainResult Train(SteeringModel& model,
                  std::span<const SteeringSequence> train_set,
                  std::span<const SteeringSequence> val_set,
                  const TrainConfig& cfg, const TrainState* resume = nullptr);

void WriteHistoryCsv(std::span<const EpochRecord> history, std::ostream& out);
void WriteEvalCsv(const EvalReport& report, std::ostream& out);

std::vector<ad::Matrix> SnapshotParams(const SteeringModel& model);
void RestoreParams(SteeringModel& model, std::span<const ad::Matrix> values);

}  // namespace semsteer

#endif  // SEMSTEER_TRAINING_H_
