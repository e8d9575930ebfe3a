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

#include "semsteer/training.h"

#include <cmath>
#include <limits>
#include <ostream>

#include "semsteer/error.h"
#include "semsteer/random.h"

namespace semsteer {

using ad::Matrix;
using ad::Tape;
using ad::Var;

size_t SteeringSequence::scored_frames() const {
  size_t n = 0;
  for (uint8_t v : valid) n += v != 0;
  return n;
}

void SteeringSequence::Validate() const {
  if (frames.empty()) throw ConfigError("sequence '" + name + "' is empty");
  if (truth.size() != frames.size() || valid.size() != frames.size()) {
    throw DimensionError("sequence '" + name + "': " +
                         std::to_string(frames.size()) + " frames, " +
                         std::to_string(truth.size()) + " labels, " +
                         std::to_string(valid.size()) + " validity flags");
  }
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 0) throw ConfigError("patience must be >= 0");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(weight_alpha >= 0.0)) throw ConfigError("weight_alpha must be >= 0");
  if (points_per_frame < 1) throw ConfigError("points_per_frame must be >= 1");
}

double SampleWeight(double truth, double weight_alpha) {
  return 1.0 + weight_alpha * std::abs(truth);
}

double WeightedMse(std::span<const double> pred, std::span<const double> truth,
                   double weight_alpha) {
  if (pred.size() != truth.size()) {
    throw DimensionError("weighted MSE: " + std::to_string(pred.size()) +
                         " predictions vs " + std::to_string(truth.size()) +
                         " labels");
  }
  if (pred.empty()) throw ConfigError("weighted MSE of an empty list");
  if (!(weight_alpha >= 0.0)) throw ConfigError("weight_alpha must be >= 0");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double w = SampleWeight(truth[i], weight_alpha);
    const double r = pred[i] - truth[i];
    num += w * r * r;
    den += w;
  }
  return num / den;
}

void OptimizerState::Reset(std::span<ad::ParamTensor* const> params) {
  step = 0;
  m.clear();
  v.clear();
  for (const ad::ParamTensor* p : params) {
    m.push_back(Matrix::Zero(p->rows(), p->cols()));
    v.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
}

void AdamStep(OptimizerState& opt, std::span<ad::ParamTensor* const> params,
              double learning_rate) {
  if (opt.m.size() != params.size() || opt.v.size() != params.size()) {
    throw DimensionError("optimizer holds " + std::to_string(opt.m.size()) +
                         " moment buffers for " +
                         std::to_string(params.size()) + " parameters");
  }
  ++opt.step;
  const double t = static_cast<double>(opt.step);
  const double c1 = 1.0 - std::pow(opt.beta1, t);
  const double c2 = 1.0 - std::pow(opt.beta2, t);
  for (size_t i = 0; i < params.size(); ++i) {
    ad::ParamTensor& p = *params[i];
    const Matrix& g = p.grad();
    if (g.rows() != p.rows() || g.cols() != p.cols() ||
        opt.m[i].rows() != p.rows() || opt.m[i].cols() != p.cols()) {
      throw DimensionError("gradient or moment buffer of " + p.name() +
                           " does not match its shape");
    }
    opt.m[i] = opt.beta1 * opt.m[i] + (1.0 - opt.beta1) * g;
    opt.v[i] = opt.beta2 * opt.v[i] + (1.0 - opt.beta2) * g.cwiseProduct(g);
    const Matrix m_hat = opt.m[i] / c1;
    const Matrix v_hat = opt.v[i] / c2;
    p.value().array() -=
        learning_rate * m_hat.array() / (v_hat.array().sqrt() + opt.epsilon);
    p.ZeroGrad();
  }
}

std::vector<Window> MakeWindows(std::span<const SteeringSequence> dataset,
                                size_t horizon, size_t stride) {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (stride == 0) stride = horizon;
  std::vector<Window> out;
  for (size_t s = 0; s < dataset.size(); ++s) {
    const size_t n = dataset[s].size();
    if (n <= horizon) {
      out.push_back({s, 0, n});
      continue;
    }
    size_t start = 0;
    for (; start + horizon <= n; start += stride) {
      out.push_back({s, start, horizon});
    }
    // Cover the tail so every frame is seen each epoch.
    if (start < n && start + horizon > n && out.back().start + horizon < n) {
      out.push_back({s, n - horizon, horizon});
    }
  }
  return out;
}

Var WindowLoss(Tape& tape, SteeringModel& model, const SteeringSequence& seq,
               const Window& window, double weight_alpha) {
  const std::span<const FrameInput> frames(seq.frames.data() + window.start,
                                           window.length);
  const std::vector<Var> preds = model.ForwardSequence(tape, frames);
  Var num;
  double den = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const size_t t = window.start + i;
    if (!seq.valid[t]) continue;
    const double w = SampleWeight(seq.truth[t], weight_alpha);
    Var r = ad::Sub(preds[i], tape.Constant(Matrix::Constant(1, 1, seq.truth[t])));
    Var term = ad::Scale(ad::Mul(r, r), w);
    num = num.valid() ? ad::Add(num, term) : term;
    den += w;
  }
  if (!num.valid()) return Var();
  return ad::Scale(num, 1.0 / den);
}

std::vector<double> PredictSequence(SteeringModel& model,
                                    const SteeringSequence& seq,
                                    size_t horizon) {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  seq.Validate();
  // Embeddings do not depend on the window, so encode every frame once.
  std::vector<Matrix> embeddings;
  embeddings.reserve(seq.size());
  for (const FrameInput& frame : seq.frames) {
    Tape tape;
    embeddings.push_back(model.Encode(tape, frame).value());
  }
  std::vector<double> out;
  out.reserve(seq.size());
  for (size_t t = 0; t < seq.size(); ++t) {
    const size_t start = t + 1 >= horizon ? t + 1 - horizon : 0;
    Tape tape;
    RecurrentState state = model.InitialState(tape);
    Var y;
    for (size_t i = start; i <= t; ++i) {
      y = model.Step(tape, tape.Constant(embeddings[i]), state);
    }
    out.push_back(model.Readout(tape, y).scalar());
  }
  return out;
}

EvalReport Evaluate(SteeringModel& model,
                    std::span<const SteeringSequence> dataset, size_t horizon,
                    const std::string& split_name) {
  if (dataset.empty()) throw ConfigError("evaluation dataset is empty");
  EvalReport report;
  report.split = split_name;
  for (const SteeringSequence& seq : dataset) {
    const std::vector<double> pred = PredictSequence(model, seq, horizon);
    for (size_t t = 0; t < seq.size(); ++t) {
      if (!seq.valid[t]) continue;
      report.predictions.push_back(pred[t]);
      report.truth.push_back(seq.truth[t]);
      report.residuals.push_back(pred[t] - seq.truth[t]);
      report.sequence_names.push_back(seq.name);
      report.frame_indices.push_back(t);
    }
  }
  if (report.residuals.empty()) {
    throw ConfigError("evaluation dataset has no scored frames");
  }
  report.mse = WeightedMse(report.predictions, report.truth, 0.0);
  return report;
}

double ConstantMeanMse(std::span<const SteeringSequence> reference,
                       std::span<const SteeringSequence> dataset) {
  double sum = 0.0;
  size_t n = 0;
  for (const SteeringSequence& seq : reference) {
    for (size_t t = 0; t < seq.size(); ++t) {
      if (seq.valid[t]) {
        sum += seq.truth[t];
        ++n;
      }
    }
  }
  if (n == 0) throw ConfigError("reference set has no scored frames");
  const double mean = sum / static_cast<double>(n);
  std::vector<double> pred, truth;
  for (const SteeringSequence& seq : dataset) {
    for (size_t t = 0; t < seq.size(); ++t) {
      if (seq.valid[t]) {
        pred.push_back(mean);
        truth.push_back(seq.truth[t]);
      }
    }
  }
  return WeightedMse(pred, truth, 0.0);
}

std::vector<Matrix> SnapshotParams(const SteeringModel& model) {
  std::vector<Matrix> out;
  for (const ad::ParamTensor* p : model.Parameters()) out.push_back(p->value());
  return out;
}

void RestoreParams(SteeringModel& model, std::span<const Matrix> values) {
  std::vector<ad::ParamTensor*> params = model.Parameters();
  if (params.size() != values.size()) {
    throw DimensionError("snapshot has " + std::to_string(values.size()) +
                         " tensors, model has " +
                         std::to_string(params.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (values[i].rows() != params[i]->rows() ||
        values[i].cols() != params[i]->cols()) {
      throw DimensionError("snapshot shape mismatch for " + params[i]->name());
    }
    params[i]->value() = values[i];
  }
}

TrainResult Train(SteeringModel& model,
                  std::span<const SteeringSequence> train_set,
                  std::span<const SteeringSequence> val_set,
                  const TrainConfig& cfg, const TrainState* resume) {
  cfg.Validate();
  if (train_set.empty()) throw ConfigError("training split is empty");
  if (val_set.empty()) throw ConfigError("validation split is empty");
  for (const SteeringSequence& s : train_set) s.Validate();
  for (const SteeringSequence& s : val_set) s.Validate();

  std::vector<ad::ParamTensor*> params = model.Parameters();
  TrainResult result;
  if (resume != nullptr) {
    result.state = *resume;
    if (result.state.optimizer.m.size() != params.size()) {
      throw DimensionError("resumed optimizer state does not match the model");
    }
  } else {
    result.state.optimizer.Reset(params);
    result.state.best_val = std::numeric_limits<double>::infinity();
  }
  for (ad::ParamTensor* p : params) p->ZeroGrad();
  result.best_params = SnapshotParams(model);
  if (!result.state.last_params.empty()) {
    RestoreParams(model, result.state.last_params);
  }
  TrainState& st = result.state;

  const std::vector<Window> windows =
      MakeWindows(train_set, cfg.horizon, cfg.window_stride);
  while (st.epoch < cfg.max_epochs) {
    const int epoch = st.epoch + 1;
    std::vector<size_t> order(windows.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(cfg.seed, static_cast<uint64_t>(epoch));
    rng.Shuffle(std::span<size_t>(order));

    double loss_sum = 0.0;
    size_t loss_count = 0;
    for (size_t idx : order) {
      const Window& w = windows[idx];
      Tape tape;
      Var loss = WindowLoss(tape, model, train_set[w.sequence], w,
                            cfg.weight_alpha);
      if (!loss.valid()) continue;
      const double value = loss.scalar();
      if (!std::isfinite(value)) {
        throw NumericError("non-finite training loss at epoch " +
                           std::to_string(epoch) + " on sequence '" +
                           train_set[w.sequence].name + "' frame " +
                           std::to_string(w.start));
      }
      const ad::BackwardReport report = tape.Backward(loss);
      if (!report.finite) {
        throw NumericError("non-finite gradient in " + report.first_nonfinite +
                           " at epoch " + std::to_string(epoch));
      }
      AdamStep(st.optimizer, params, cfg.learning_rate);
      loss_sum += value;
      ++loss_count;
    }
    if (loss_count == 0) throw ConfigError("training split has no scored frames");

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = loss_sum / static_cast<double>(loss_count);
    rec.val_mse = Evaluate(model, val_set, cfg.horizon, "val").mse;
    if (!std::isfinite(rec.val_mse)) {
      throw NumericError("non-finite validation MSE at epoch " +
                         std::to_string(epoch));
    }
    st.history.push_back(rec);
    st.epoch = epoch;
    st.last_params = SnapshotParams(model);
    if (rec.val_mse < st.best_val) {
      st.best_val = rec.val_mse;
      st.best_epoch = epoch;
      st.bad_epochs = 0;
      result.best_params = SnapshotParams(model);
    } else if (++st.bad_epochs > cfg.patience) {
      result.stopped_early = true;
      break;
    }
  }
  RestoreParams(model, result.best_params);
  return result;
}

void WriteHistoryCsv(std::span<const EpochRecord> history, std::ostream& out) {
  const auto old = out.precision(17);
  out << "epoch,train_mse,val_mse\n";
  for (const EpochRecord& r : history) {
    out << r.epoch << ',' << r.train_mse << ',' << r.val_mse << '\n';
  }
  out.precision(old);
}

void WriteEvalCsv(const EvalReport& report, std::ostream& out) {
  const auto old = out.precision(17);
  out << "sequence,frame,truth,prediction,residual\n";
  for (size_t i = 0; i < report.residuals.size(); ++i) {
    out << report.sequence_names[i] << ',' << report.frame_indices[i] << ','
        << report.truth[i] << ',' << report.predictions[i] << ','
        << report.residuals[i] << '\n';
  }
  out.precision(old);
}

}  // namespace semsteer
