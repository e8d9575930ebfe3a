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

#include "semsteer/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "semsteer/error.h"
#include "semsteer/graph.h"
#include "semsteer/layers.h"
#include "semsteer/random.h"
#include "semsteer/training.h"

namespace semsteer {

using ad::Matrix;
using ad::ParamTensor;
using ad::Tape;
using ad::Var;

namespace {

void FillUniform(Matrix& m, Rng& rng, double lo, double hi) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.Uniform(lo, hi);
  }
}

ParamTensor RandomTensor(const std::string& name, Eigen::Index rows,
                         Eigen::Index cols, Rng& rng, double scale = 1.0) {
  ParamTensor p(name, rows, cols);
  FillUniform(p.value(), rng, -scale, scale);
  return p;
}

// Reduces any output to a scalar through fixed random weights so that every
// output entry contributes a distinct gradient.
Var Project(Tape& tape, Var out, const Matrix& weights) {
  return ad::Sum(ad::Mul(out, tape.Constant(weights)));
}

Matrix RandomMatrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  FillUniform(m, rng, -1.0, 1.0);
  return m;
}

std::vector<Point3> RandomPoints(size_t n, double extent, Rng& rng) {
  std::vector<Point3> pts(n);
  for (Point3& p : pts) {
    p.x = rng.Uniform(-extent, extent);
    p.y = rng.Uniform(-extent, extent);
    p.z = rng.Uniform(-extent, extent);
  }
  return pts;
}

PointCloud RandomClassCloud(size_t n, size_t num_classes, Rng& rng) {
  PointCloud cloud;
  cloud.points = RandomPoints(n, 2.0, rng);
  auto& classes = cloud.classes.emplace();
  for (size_t i = 0; i < n; ++i) {
    classes.push_back(static_cast<ClassId>(rng.Below(num_classes)));
  }
  return cloud;
}

}  // namespace

double RelativeError(double analytic, double numeric, double floor) {
  const double scale =
      std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

std::vector<Matrix> FiniteDifferenceGradient(
    const std::function<double()>& fn, std::span<ParamTensor* const> params,
    double step) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be > 0");
  std::vector<Matrix> out;
  for (ParamTensor* p : params) {
    Matrix g(p->rows(), p->cols());
    for (Eigen::Index c = 0; c < p->cols(); ++c) {
      for (Eigen::Index r = 0; r < p->rows(); ++r) {
        double& x = p->value()(r, c);
        const double saved = x;
        x = saved + step;
        const double plus = fn();
        x = saved - step;
        const double minus = fn();
        x = saved;
        g(r, c) = (plus - minus) / (2.0 * step);
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

GradCheckReport CheckGradients(const std::string& component,
                               const LossBuilder& loss,
                               std::span<ParamTensor* const> params,
                               const GradCheckOptions& opts) {
  GradCheckReport report;
  report.component = component;
  for (ParamTensor* p : params) {
    if (!p->ValuesFinite()) {
      report.nonfinite_param = p->name();
      return report;
    }
    p->ZeroGrad();
  }
  {
    Tape tape;
    const ad::BackwardReport back = tape.Backward(loss(tape));
    if (!back.finite) {
      report.nonfinite_param = back.first_nonfinite;
      return report;
    }
  }
  std::vector<Matrix> analytic;
  for (ParamTensor* p : params) {
    analytic.push_back(p->grad());
    p->ZeroGrad();
  }
  const std::vector<Matrix> numeric = FiniteDifferenceGradient(
      [&] {
        Tape tape;
        return loss(tape).scalar();
      },
      params, opts.step);
  const auto eval = [&] {
    Tape tape;
    return loss(tape).scalar();
  };
  const double base = eval();
  for (size_t i = 0; i < params.size(); ++i) {
    for (Eigen::Index k = 0; k < analytic[i].size(); ++k) {
      const double a = analytic[i](k);
      double n = numeric[i](k);
      ++report.checked_scalars;
      double err = std::isfinite(n) ? RelativeError(a, n, opts.floor)
                                    : std::numeric_limits<double>::infinity();
      if (err > opts.tolerance && std::isfinite(n)) {
        // A ReLU or max switch inside [x - h, x + h] makes the central
        // quotient average two slopes. The one-sided quotients then disagree;
        // the side whose quotient is stable under halving the step holds no
        // switch and is the valid reference.
        const auto one_sided = [&](double h) {
          double& x = params[i]->value()(k);
          const double saved = x;
          x = saved + h;
          const double f = eval();
          x = saved;
          return (f - base) / h;
        };
        const double fwd = one_sided(opts.step);
        const double bwd = one_sided(-opts.step);
        if (RelativeError(fwd, bwd, opts.floor) > opts.tolerance) {
          const bool fwd_smooth =
              RelativeError(fwd, one_sided(opts.step / 2), opts.floor) <= opts.tolerance;
          const bool bwd_smooth =
              RelativeError(bwd, one_sided(-opts.step / 2), opts.floor) <= opts.tolerance;
          if (fwd_smooth != bwd_smooth) {
            ++report.kink_coordinates;
            n = fwd_smooth ? fwd : bwd;
            err = RelativeError(a, n, opts.floor);
          }
        }
      }
      if (err > report.max_rel_error || report.worst_param.empty()) {
        report.max_rel_error = err;
        report.worst_param = params[i]->name();
        report.worst_index = static_cast<size_t>(k);
        report.worst_analytic = a;
        report.worst_numeric = n;
      }
    }
  }
  report.passed = report.max_rel_error <= opts.tolerance;
  return report;
}

GradCheckReport CheckGcnInstance(uint64_t seed, const GradCheckOptions& opts) {
  Rng rng(seed, 101);
  const size_t n = 6 + rng.Below(9);
  const size_t in = 2 + rng.Below(4);
  const size_t out = 2 + rng.Below(5);
  PointCloud cloud;
  cloud.points = RandomPoints(n, 1.0, rng);
  GraphOptions gopts;
  gopts.k = 3;
  const NormalizedAdjacency adj = NormalizeAdjacency(BuildKnnGraph(cloud, gopts));
  GcnLayer layer("gcn", in, out, Activation::kRelu);
  InitUniform(layer.weight, in, rng);
  ParamTensor features =
      RandomTensor("input.features", static_cast<Eigen::Index>(n),
                   static_cast<Eigen::Index>(in), rng);
  const Matrix proj = RandomMatrix(static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(out), rng);
  std::vector<ParamTensor*> params = {&layer.weight, &features};
  GradCheckReport r = CheckGradients(
      "gcn_layer",
      [&](Tape& tape) {
        return Project(tape, GcnForward(tape, layer, adj, tape.Param(features)),
                       proj);
      },
      params, opts);
  r.seed = seed;
  return r;
}

GradCheckReport CheckSetAbstractionInstance(uint64_t seed,
                                            const GradCheckOptions& opts) {
  Rng rng(seed, 102);
  const size_t n = 16 + rng.Below(17);
  const size_t feat = 1 + rng.Below(3);
  const std::vector<Point3> points = RandomPoints(n, 1.0, rng);
  SetAbstractionLevel level;
  level.m = 4 + rng.Below(5);
  level.radius = 0.9;
  level.max_group = 8;
  level.mlp.emplace_back("sa.mlp.0", 3 + feat, 8, Activation::kRelu);
  level.mlp.emplace_back("sa.mlp.1", 8, 5, Activation::kRelu);
  for (DenseLayer& d : level.mlp) d.Init(rng);
  const GroupingPlan plan =
      PlanGrouping(level, points, static_cast<size_t>(rng.Below(n)));
  ParamTensor features = RandomTensor("input.features",
                                      static_cast<Eigen::Index>(n),
                                      static_cast<Eigen::Index>(feat), rng);
  const Matrix proj =
      RandomMatrix(static_cast<Eigen::Index>(level.m), 5, rng);
  std::vector<ParamTensor*> params;
  for (DenseLayer& d : level.mlp) {
    params.push_back(&d.weight);
    params.push_back(&d.bias);
  }
  params.push_back(&features);
  GradCheckReport r = CheckGradients(
      "set_abstraction",
      [&](Tape& tape) {
        return Project(
            tape, ApplySetAbstraction(tape, level, plan, tape.Param(features)),
            proj);
      },
      params, opts);
  r.seed = seed;
  return r;
}

GradCheckReport CheckLstmInstance(uint64_t seed, const GradCheckOptions& opts) {
  Rng rng(seed, 103);
  const size_t in = 2 + rng.Below(5);
  const size_t hidden = 2 + rng.Below(6);
  const size_t steps = 1 + rng.Below(3);
  LstmCell cell("lstm", in, hidden);
  cell.Init(rng);
  const auto h = static_cast<Eigen::Index>(hidden);
  ParamTensor xs = RandomTensor("input.x", static_cast<Eigen::Index>(steps),
                                static_cast<Eigen::Index>(in), rng);
  ParamTensor h0 = RandomTensor("input.h0", 1, h, rng, 0.5);
  ParamTensor c0 = RandomTensor("input.c0", 1, h, rng, 0.5);
  const Matrix proj_h = RandomMatrix(1, h, rng);
  const Matrix proj_c = RandomMatrix(1, h, rng);
  std::vector<ParamTensor*> params = {&cell.weight, &cell.bias, &xs, &h0, &c0};
  GradCheckReport r = CheckGradients(
      "lstm_cell",
      [&](Tape& tape) {
        RecurrentState state{tape.Param(h0), tape.Param(c0)};
        Var x_all = tape.Param(xs);
        for (size_t s = 0; s < steps; ++s) {
          const uint32_t row = static_cast<uint32_t>(s);
          state = LstmStep(tape, cell,
                           ad::GatherRows(x_all, std::span(&row, 1)), state);
        }
        return ad::Add(Project(tape, state.h, proj_h),
                       Project(tape, state.c, proj_c));
      },
      params, opts);
  r.seed = seed;
  return r;
}

GradCheckReport CheckLtcInstance(uint64_t seed, const GradCheckOptions& opts) {
  Rng rng(seed, 104);
  const size_t in = 2 + rng.Below(4);
  const size_t neurons = 3 + rng.Below(6);
  const size_t steps = 1 + rng.Below(3);
  LtcCell cell("ltc", in, neurons);
  cell.unfold_steps = 1 + static_cast<int>(rng.Below(6));
  cell.Init(rng);
  cell.SetSparsity(0.3, rng);
  const auto n = static_cast<Eigen::Index>(neurons);
  ParamTensor xs = RandomTensor("input.x", static_cast<Eigen::Index>(steps),
                                static_cast<Eigen::Index>(in), rng);
  ParamTensor h0 = RandomTensor("input.h0", 1, n, rng, 0.5);
  const Matrix proj = RandomMatrix(1, n, rng);
  std::vector<ParamTensor*> params = {&cell.recurrent, &cell.input, &cell.bias,
                                      &cell.time_const, &xs, &h0};
  GradCheckReport r = CheckGradients(
      "ltc_cell",
      [&](Tape& tape) {
        Var hs = tape.Param(h0);
        Var x_all = tape.Param(xs);
        for (size_t s = 0; s < steps; ++s) {
          const uint32_t row = static_cast<uint32_t>(s);
          hs = LtcStep(tape, cell, ad::GatherRows(x_all, std::span(&row, 1)),
                       hs);
        }
        return Project(tape, LtcOutput(cell, hs), proj);
      },
      params, opts);
  r.seed = seed;
  return r;
}

GradCheckReport CheckModelWeights(SteeringModel& model, uint64_t seed,
                                  const GradCheckOptions& opts) {
  const ModelConfig& cfg = model.config();
  Rng rng(seed, 105);
  SteeringSequence seq;
  seq.name = "gradcheck";
  const size_t frames = 3;
  for (size_t f = 0; f < frames; ++f) {
    if (cfg.encoder == EncoderKind::kGcn) {
      const PointCloud cloud = RandomClassCloud(10, cfg.num_classes, rng);
      seq.frames.push_back(MakeGraphFrame(cloud, cfg, seed + f));
    } else {
      size_t need = 1;
      for (const SetAbstractionSpec& s : cfg.sa_levels) {
        need = std::max(need, s.m);
      }
      const PointCloud cloud = RandomClassCloud(need + 8, cfg.num_classes, rng);
      seq.frames.push_back(MakeCloudFrame(cloud, cfg, 0));
    }
    seq.truth.push_back(rng.Uniform(-0.3, 0.3));
    seq.valid.push_back(1);
  }
  const Window window{0, 0, frames};
  std::vector<ParamTensor*> params = model.Parameters();
  GradCheckReport r = CheckGradients(
      "model:" + cfg.preset,
      [&](Tape& tape) { return WindowLoss(tape, model, seq, window, 0.5); },
      params, opts);
  r.seed = seed;
  return r;
}

GradCheckReport CheckModelInstance(const ModelConfig& cfg, uint64_t seed,
                                   const GradCheckOptions& opts) {
  ModelConfig c = cfg;
  c.init_seed = seed;
  if (c.encoder == EncoderKind::kPointNetPP) {
    // Keep the groupings small enough for a per-scalar sweep.
    c.sa_levels = {{8, 1.5, 6, {8, 8}}, {3, 3.0, 6, {8}}};
  }
  SteeringModel model(c);
  return CheckModelWeights(model, seed, opts);
}

std::vector<GradCheckReport> RunGradCheckSuite(const ModelConfig& cfg,
                                               uint64_t seed, int instances,
                                               const GradCheckOptions& opts) {
  std::vector<GradCheckReport> out;
  for (int i = 0; i < instances; ++i) {
    const uint64_t s = seed + static_cast<uint64_t>(i);
    out.push_back(CheckGcnInstance(s, opts));
    out.push_back(CheckSetAbstractionInstance(s, opts));
    out.push_back(CheckLstmInstance(s, opts));
    out.push_back(CheckLtcInstance(s, opts));
    out.push_back(CheckModelInstance(cfg, s, opts));
  }
  return out;
}

void WriteGradCheckCsv(std::span<const GradCheckReport> reports,
                       std::ostream& out) {
  const auto old = out.precision(17);
  out << "component,seed,checked,kink_coordinates,max_rel_error,worst_param,"
         "worst_index,analytic,numeric,nonfinite_param,passed\n";
  for (const GradCheckReport& r : reports) {
    out << r.component << ',' << r.seed << ',' << r.checked_scalars << ','
        << r.kink_coordinates << ',' << r.max_rel_error << ','
        << r.worst_param << ',' << r.worst_index
        << ',' << r.worst_analytic << ',' << r.worst_numeric << ','
        << r.nonfinite_param << ',' << (r.passed ? 1 : 0) << '\n';
  }
  out.precision(old);
}

}  // namespace semsteer
