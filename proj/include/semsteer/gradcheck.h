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

#ifndef SEMSTEER_GRADCHECK_H_
#define SEMSTEER_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "semsteer/autodiff.h"
#include "semsteer/model.h"

namespace semsteer {

struct GradCheckOptions {
  double step = 1e-5;
  // Gradients smaller than this are compared in absolute terms.
  double floor = 1e-6;
  double tolerance = 1e-4;
};

// |a - n| / max(|a|, |n|, floor).
double RelativeError(double analytic, double numeric, double floor);

// Central differences of `fn` with respect to every scalar of `params`.
// Each entry is restored to its exact original value afterwards.
std::vector<ad::Matrix> FiniteDifferenceGradient(
    const std::function<double()>& fn, std::span<ad::ParamTensor* const> params,
    double step);

struct GradCheckReport {
  std::string component;
  uint64_t seed = 0;
  size_t checked_scalars = 0;
  // Coordinates whose central stencil straddled a non-differentiable point
  // and were judged against the one-sided quotient on the smooth side.
  size_t kink_coordinates = 0;
  double max_rel_error = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  // Set when a parameter value or analytic gradient is NaN/Inf.
  std::string nonfinite_param;
  bool passed = false;
};

using LossBuilder = std::function<ad::Var(ad::Tape&)>;

// Back-propagates `loss` once and compares every gradient entry against
// central differences. Where the central stencil straddles a kink (the
// forward and backward quotients disagree), the entry is compared against
// the one-sided quotient that stays stable when the step is halved.
GradCheckReport CheckGradients(const std::string& component,
                               const LossBuilder& loss,
                               std::span<ad::ParamTensor* const> params,
                               const GradCheckOptions& opts);

// Randomized single-component instances; inputs are perturbed along with the
// weights.
GradCheckReport CheckGcnInstance(uint64_t seed, const GradCheckOptions& opts);
GradCheckReport CheckSetAbstractionInstance(uint64_t seed,
                                            const GradCheckOptions& opts);
GradCheckReport CheckLstmInstance(uint64_t seed, const GradCheckOptions& opts);
GradCheckReport CheckLtcInstance(uint64_t seed, const GradCheckOptions& opts);

// End-to-end check of the model described by `cfg` on a short sequence of
// small random frames (10-node graphs for the GCN encoder). The weights are
// the seeded initialization of `cfg` re-drawn with `seed`.
GradCheckReport CheckModelInstance(const ModelConfig& cfg, uint64_t seed,
                                   const GradCheckOptions& opts);
// Same, with the weights of an existing model.
GradCheckReport CheckModelWeights(SteeringModel& model, uint64_t seed,
                                  const GradCheckOptions& opts);

// Runs `instances` seeded instances of every component plus the model.
std::vector<GradCheckReport> RunGradCheckSuite(const ModelConfig& cfg,
                                               uint64_t seed, int instances,
                                               const GradCheckOptions& opts);

void WriteGradCheckCsv(std::span<const GradCheckReport> reports,
                       std::ostream& out);

}  // namespace semsteer

#endif  // SEMSTEER_GRADCHECK_H_
