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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "semsteer/dataset.h"
#include "semsteer/error.h"
#include "semsteer/random.h"

namespace semsteer {
namespace {

using ad::Matrix;
using ad::Tape;
using ad::Var;

TEST(WeightedMseTest, Examples) {
  const std::vector<double> t = {0.1, -0.2, 0.3};
  EXPECT_EQ(WeightedMse(t, t, 0.7), 0.0);
  EXPECT_EQ(WeightedMse(std::vector<double>{1, 2}, std::vector<double>{0, 1}, 0.0),
            1.0);
  // Truth (0, 2) with alpha 1 gives weights (1, 3); residuals (2, 0).
  EXPECT_EQ(WeightedMse(std::vector<double>{2, 2}, std::vector<double>{0, 2}, 1.0),
            1.0);
}

TEST(WeightedMseTest, Errors) {
  EXPECT_THROW(WeightedMse(std::vector<double>{1}, std::vector<double>{1, 2}, 0),
               DimensionError);
  EXPECT_THROW(WeightedMse(std::vector<double>{}, std::vector<double>{}, 0),
               ConfigError);
}

TEST(WeightedMseTest, NonNegativeAndPermutationInvariant) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const size_t n = 1 + rng.Below(20);
    std::vector<double> p(n), t(n);
    for (size_t i = 0; i < n; ++i) {
      p[i] = rng.Uniform(-1, 1);
      t[i] = rng.Uniform(-1, 1);
    }
    const double alpha = rng.Uniform(0, 3);
    const double base = WeightedMse(p, t, alpha);
    EXPECT_GT(base, 0.0);
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), size_t{0});
    rng.Shuffle(std::span<size_t>(perm));
    std::vector<double> pp(n), tp(n);
    for (size_t i = 0; i < n; ++i) {
      pp[i] = p[perm[i]];
      tp[i] = t[perm[i]];
    }
    EXPECT_NEAR(WeightedMse(pp, tp, alpha), base, 1e-15);
  }
}

TEST(AdamTest, ZeroGradientLeavesParameters) {
  ad::ParamTensor w("w", 2, 2);
  w.value() << 1, 2, 3, 4;
  const Matrix before = w.value();
  std::vector<ad::ParamTensor*> params = {&w};
  OptimizerState opt;
  opt.Reset(params);
  for (int i = 0; i < 10; ++i) AdamStep(opt, params, 0.1);
  EXPECT_EQ(w.value(), before);
}

TEST(AdamTest, ConstantGradientDescends) {
  ad::ParamTensor w("w", 1, 2);
  std::vector<ad::ParamTensor*> params = {&w};
  OptimizerState opt;
  opt.Reset(params);
  for (int i = 0; i < 25; ++i) {
    w.grad() << 0.5, -2.0;
    AdamStep(opt, params, 0.01);
    EXPECT_TRUE(w.grad().isZero(0.0));
  }
  EXPECT_LT(w.value()(0, 0), 0.0);
  EXPECT_GT(w.value()(0, 1), 0.0);
}

TEST(AdamTest, QuadraticBowlConverges) {
  ad::ParamTensor w("w", 1, 1);
  std::vector<ad::ParamTensor*> params = {&w};
  OptimizerState opt;
  opt.Reset(params);
  for (int step = 0; step < 2000; ++step) {
    Tape tape;
    Var d = ad::Sub(tape.Param(w), tape.Constant(Matrix::Constant(1, 1, 3.0)));
    tape.Backward(ad::Mul(d, d));
    AdamStep(opt, params, 0.01);
  }
  EXPECT_LE(std::abs(w.value()(0, 0) - 3.0), 1e-3);
}

// Small synthetic split prepared for one preset.
struct TinyData {
  std::vector<SteeringSequence> train;
  std::vector<SteeringSequence> val;
};

TinyData MakeTinyData(const ModelConfig& cfg, size_t sequences = 4,
                      size_t frames = 12) {
  SyntheticDatasetSpec spec;
  spec.num_sequences = sequences;
  spec.frames_per_sequence = frames;
  spec.points_per_frame = cfg.points_per_frame;
  spec.min_segment_frames = 4;
  spec.max_segment_frames = 6;
  const std::vector<RawSequence> raw = GenerateSyntheticDataset(spec);
  TinyData d;
  for (size_t i = 0; i < raw.size(); ++i) {
    (i + 1 < raw.size() ? d.train : d.val).push_back(PrepareSequence(raw[i], cfg, 1));
  }
  return d;
}

ModelConfig TinyConfig() {
  ModelConfig cfg = FindPreset("gnn-ncp");
  cfg.points_per_frame = 48;
  cfg.gcn_widths = {8};
  cfg.ltc_neurons = 6;
  cfg.readout_hidden = 8;
  return cfg;
}

TrainConfig TinyTrainConfig(int epochs) {
  TrainConfig tc;
  tc.max_epochs = epochs;
  tc.horizon = 4;
  tc.points_per_frame = 48;
  tc.learning_rate = 5e-3;
  return tc;
}

TEST(MakeWindowsTest, CoversEveryFrame) {
  const ModelConfig cfg = TinyConfig();
  const TinyData d = MakeTinyData(cfg, 3, 10);
  const auto windows = MakeWindows(d.train, 4, 0);
  // 10 frames: [0,4) [4,8) and the tail [6,10).
  ASSERT_EQ(windows.size(), 6u);
  EXPECT_EQ(windows[2].start, 6u);
  for (size_t s = 0; s < d.train.size(); ++s) {
    std::vector<int> seen(10, 0);
    for (const Window& w : windows) {
      if (w.sequence != s) continue;
      for (size_t f = w.start; f < w.start + w.length; ++f) seen[f] = 1;
    }
    EXPECT_EQ(std::accumulate(seen.begin(), seen.end(), 0), 10);
  }
}

TEST(EvaluateTest, PerfectAndZeroPredictors) {
  const ModelConfig cfg = TinyConfig();
  TinyData d = MakeTinyData(cfg);
  SteeringModel model(cfg);

  // Labels replaced by the model's own outputs: zero error.
  std::vector<SteeringSequence> own = d.val;
  for (SteeringSequence& s : own) s.truth = PredictSequence(model, s, 4);
  const EvalReport perfect = Evaluate(model, own, 4, "val");
  EXPECT_EQ(perfect.mse, 0.0);
  size_t scored = 0;
  for (const SteeringSequence& s : own) scored += s.scored_frames();
  EXPECT_EQ(perfect.residuals.size(), scored);

  // Zeroed readout predicts 0; MSE is the mean squared label.
  for (ad::ParamTensor* p : model.Parameters()) {
    if (p->name().rfind("readout", 0) == 0) p->value().setZero();
  }
  const EvalReport zero = Evaluate(model, d.train, 4, "train");
  double sum_sq = 0.0;
  size_t n = 0;
  for (const SteeringSequence& s : d.train) {
    for (size_t i = 0; i < s.size(); ++i) {
      if (!s.valid[i]) continue;
      sum_sq += s.truth[i] * s.truth[i];
      ++n;
    }
  }
  EXPECT_NEAR(zero.mse, sum_sq / n, 1e-15);
  EXPECT_EQ(zero.residuals.size(), n);
  EXPECT_THROW(Evaluate(model, std::vector<SteeringSequence>{}, 4), ConfigError);
}

TEST(ConstantMeanTest, MatchesHandComputation) {
  const ModelConfig cfg = TinyConfig();
  const TinyData d = MakeTinyData(cfg);
  double mean = 0.0;
  size_t n = 0;
  for (const SteeringSequence& s : d.train) {
    for (size_t i = 0; i < s.size(); ++i) {
      if (s.valid[i]) {
        mean += s.truth[i];
        ++n;
      }
    }
  }
  mean /= n;
  double err = 0.0;
  size_t m = 0;
  for (const SteeringSequence& s : d.val) {
    for (size_t i = 0; i < s.size(); ++i) {
      if (s.valid[i]) {
        err += (s.truth[i] - mean) * (s.truth[i] - mean);
        ++m;
      }
    }
  }
  EXPECT_NEAR(ConstantMeanMse(d.train, d.val), err / m, 1e-15);
}

TEST(TrainTest, DeterministicRerun) {
  const ModelConfig cfg = TinyConfig();
  const TinyData d = MakeTinyData(cfg);
  SteeringModel a(cfg);
  SteeringModel b(cfg);
  const TrainResult ra = Train(a, d.train, d.val, TinyTrainConfig(4));
  const TrainResult rb = Train(b, d.train, d.val, TinyTrainConfig(4));
  ASSERT_EQ(ra.state.history.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(ra.state.history[i].train_mse, rb.state.history[i].train_mse);
    EXPECT_EQ(ra.state.history[i].val_mse, rb.state.history[i].val_mse);
  }
  const auto pa = SnapshotParams(a);
  const auto pb = SnapshotParams(b);
  for (size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i], pb[i]);
}

TEST(TrainTest, ReturnsBestValidationWeights) {
  const ModelConfig cfg = TinyConfig();
  const TinyData d = MakeTinyData(cfg);
  SteeringModel model(cfg);
  const TrainResult r = Train(model, d.train, d.val, TinyTrainConfig(8));
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  for (const EpochRecord& e : r.state.history) {
    if (e.val_mse < best) {
      best = e.val_mse;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(r.state.best_val, best);
  EXPECT_EQ(r.state.best_epoch, best_epoch);
  EXPECT_EQ(Evaluate(model, d.val, 4).mse, best);
}

TEST(TrainTest, ZeroPatienceStopsAtFirstNonImprovement) {
  const ModelConfig cfg = TinyConfig();
  const TinyData d = MakeTinyData(cfg);
  SteeringModel model(cfg);
  TrainConfig tc = TinyTrainConfig(60);
  tc.patience = 0;
  tc.learning_rate = 0.05;
  const TrainResult r = Train(model, d.train, d.val, tc);
  const auto& h = r.state.history;
  ASSERT_TRUE(r.stopped_early);
  ASSERT_GE(h.size(), 2u);
  for (size_t i = 1; i + 1 < h.size(); ++i) {
    EXPECT_LT(h[i].val_mse, h[i - 1].val_mse);
  }
  EXPECT_GE(h.back().val_mse, h[h.size() - 2].val_mse);
}

TEST(TrainTest, ResumeMatchesUninterruptedRun) {
  const ModelConfig cfg = TinyConfig();
  const TinyData d = MakeTinyData(cfg);
  SteeringModel straight(cfg);
  const TrainResult full = Train(straight, d.train, d.val, TinyTrainConfig(5));

  SteeringModel split(cfg);
  const TrainResult first = Train(split, d.train, d.val, TinyTrainConfig(2));
  const TrainResult second =
      Train(split, d.train, d.val, TinyTrainConfig(5), &first.state);
  ASSERT_EQ(second.state.history.size(), full.state.history.size());
  for (size_t i = 0; i < full.state.history.size(); ++i) {
    EXPECT_EQ(second.state.history[i].val_mse, full.state.history[i].val_mse);
    EXPECT_EQ(second.state.history[i].train_mse, full.state.history[i].train_mse);
  }
  const auto pa = SnapshotParams(straight);
  const auto pb = SnapshotParams(split);
  for (size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i], pb[i]);
}

TEST(TrainTest, Errors) {
  const ModelConfig cfg = TinyConfig();
  const TinyData d = MakeTinyData(cfg);
  SteeringModel model(cfg);
  EXPECT_THROW(Train(model, std::vector<SteeringSequence>{}, d.val,
                     TinyTrainConfig(1)),
               ConfigError);
  EXPECT_THROW(Train(model, d.train, std::vector<SteeringSequence>{},
                     TinyTrainConfig(1)),
               ConfigError);
  model.Parameters()[0]->value()(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Train(model, d.train, d.val, TinyTrainConfig(1)), NumericError);
}

TEST(CsvTest, HistoryHeader) {
  std::ostringstream out;
  WriteHistoryCsv(std::vector<EpochRecord>{{1, 0.5, 0.25}}, out);
  EXPECT_EQ(out.str(), "epoch,train_mse,val_mse\n1,0.5,0.25\n");
}

}  // namespace
}  // namespace semsteer
