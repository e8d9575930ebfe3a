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

#ifndef SEMSTEER_SYNTHETIC_H_
#define SEMSTEER_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "semsteer/pointcloud.h"

namespace semsteer {

// A corridor drive: the ego vehicle follows a road centerline whose
// curvature is piecewise constant in time. Each frame observes road-surface,
// wall and obstacle points ahead of the vehicle, in the vehicle frame
// (x forward, y left, z up).
struct SyntheticSceneSpec {
  double corridor_width = 6.0;  // meters between the walls
  // (first frame, curvature 1/m); each entry holds until the next one.
  std::vector<std::pair<size_t, double>> curvature_schedule = {{0, 0.0}};
  // (first frame, speed m/s), same convention.
  std::vector<std::pair<size_t, double>> velocity_profile = {{0, 8.0}};
  size_t num_frames = 48;
  size_t points_per_frame = 256;
  double noise_sigma = 0.03;  // meters, per coordinate
  double lookahead = 24.0;    // meters of road observed ahead
  double wall_height = 2.0;
  size_t obstacle_count = 6;  // per sequence, placed along the road edges
  double dt = 0.1;
  double wheelbase = 2.7;
  ClassId road_class = kRoadClass;
  ClassId wall_class = kWallClass;
  ClassId obstacle_class = kObstacleClass;
  // Fractions of each frame's points drawn from road and walls; the rest go
  // to visible obstacles (or the walls when none is in range).
  double road_fraction = 0.5;
  double wall_fraction = 0.35;
  uint64_t seed = 1;

  void Validate() const;
  double CurvatureAt(size_t frame) const;
  double VelocityAt(size_t frame) const;
};

struct SyntheticSequence {
  std::vector<PointCloud> frames;
  std::vector<double> truth;       // steering, radians
  std::vector<double> velocities;  // m/s
  std::vector<double> yaw_rates;   // rad/s
  // 0 where the speed is below the steering cutoff (label left at zero).
  std::vector<uint8_t> valid;
  double dt = 0.1;
};

// Pure function of `spec`. Point coordinates are rounded to float32 so the
// in-memory clouds equal what the velodyne writer stores.
SyntheticSequence GenerateSyntheticSequence(const SyntheticSceneSpec& spec);

// Recipe for a whole dataset of independent drives.
struct SyntheticDatasetSpec {
  size_t num_sequences = 15;
  size_t frames_per_sequence = 48;
  size_t points_per_frame = 256;
  double max_curvature = 0.05;
  // Probability that a schedule segment drives straight.
  double straight_probability = 0.3;
  size_t min_segment_frames = 8;
  size_t max_segment_frames = 16;
  double min_speed = 7.0;
  double max_speed = 10.0;
  double noise_sigma = 0.03;
  uint64_t seed = 7;

  void Validate() const;
};

// Scene spec of drive `index`, drawn from an RNG stream keyed by
// (seed, index).
SyntheticSceneSpec MakeSequenceSpec(const SyntheticDatasetSpec& spec,
                                    size_t index);

std::string SequenceName(size_t index);

// Writes one drive in the KITTI raw layout (velodyne scans, per-point
// labels, oxts records with vf and wz filled in, timestamps).
void WriteKittiSequence(const SyntheticSequence& seq,
                        const std::string& directory);

}  // namespace semsteer

#endif  // SEMSTEER_SYNTHETIC_H_
