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

#include "semsteer/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "semsteer/byte_io.h"
#include "semsteer/error.h"
#include "semsteer/kitti.h"
#include "semsteer/random.h"
#include "semsteer/vehicle.h"

namespace semsteer {
namespace fs = std::filesystem;
namespace {

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

// Moves along a circular arc of curvature `kappa` for distance `d`.
Pose2 Advance(const Pose2& p, double kappa, double d) {
  Pose2 out;
  if (std::abs(kappa) < 1e-12) {
    out.x = p.x + d * std::cos(p.heading);
    out.y = p.y + d * std::sin(p.heading);
    out.heading = p.heading;
    return out;
  }
  out.heading = p.heading + kappa * d;
  out.x = p.x + (std::sin(out.heading) - std::sin(p.heading)) / kappa;
  out.y = p.y - (std::cos(out.heading) - std::cos(p.heading)) / kappa;
  return out;
}

template <typename T>
T ScheduleAt(const std::vector<std::pair<size_t, T>>& schedule, size_t frame) {
  T value = schedule.front().second;
  for (const auto& [start, v] : schedule) {
    if (start > frame) break;
    value = v;
  }
  return value;
}

// Road centerline parameterized by arc length, sampled every kStep meters.
class Centerline {
 public:
  static constexpr double kStep = 0.1;

  Centerline(std::vector<double> frame_starts, std::vector<double> curvatures,
             double length)
      : frame_starts_(std::move(frame_starts)),
        curvatures_(std::move(curvatures)) {
    const size_t n = static_cast<size_t>(std::ceil(length / kStep)) + 1;
    samples_.reserve(n);
    samples_.push_back(Pose2{});
    for (size_t k = 1; k < n; ++k) {
      const double s = static_cast<double>(k - 1) * kStep;
      samples_.push_back(Advance(samples_.back(), CurvatureAt(s), kStep));
    }
  }

  double CurvatureAt(double s) const {
    const auto it =
        std::upper_bound(frame_starts_.begin(), frame_starts_.end(), s);
    const size_t i =
        it == frame_starts_.begin() ? 0 : static_cast<size_t>(it - frame_starts_.begin()) - 1;
    return curvatures_[i];
  }

  Pose2 At(double s) const {
    s = std::clamp(s, 0.0, static_cast<double>(samples_.size() - 1) * kStep);
    const size_t k = std::min(static_cast<size_t>(s / kStep), samples_.size() - 1);
    const double base = static_cast<double>(k) * kStep;
    return Advance(samples_[k], CurvatureAt(base), s - base);
  }

 private:
  std::vector<double> frame_starts_;  // ego arc length at each frame
  std::vector<double> curvatures_;
  std::vector<Pose2> samples_;
};

struct Obstacle {
  double s = 0.0;
  double lateral = 0.0;
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
};

Point3 ToWorld(const Centerline& line, double s, double lateral, double z) {
  const Pose2 p = line.At(s);
  return {p.x - lateral * std::sin(p.heading),
          p.y + lateral * std::cos(p.heading), z};
}

double RoundToFloat(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

void SyntheticSceneSpec::Validate() const {
  if (!(corridor_width > 0.0)) throw ConfigError("corridor_width must be > 0");
  if (num_frames < 1) throw ConfigError("num_frames must be >= 1");
  if (points_per_frame < 1) throw ConfigError("points_per_frame must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (!(lookahead > 1.0)) throw ConfigError("lookahead must be > 1 m");
  if (!(wall_height > 0.0)) throw ConfigError("wall_height must be > 0");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (!(wheelbase > 0.0)) throw ConfigError("wheelbase must be > 0");
  if (!(road_fraction >= 0.0 && wall_fraction >= 0.0 &&
        road_fraction + wall_fraction <= 1.0)) {
    throw ConfigError("road_fraction + wall_fraction must lie in [0, 1]");
  }
  if (curvature_schedule.empty() || curvature_schedule.front().first != 0) {
    throw ConfigError("curvature schedule must start at frame 0");
  }
  if (velocity_profile.empty() || velocity_profile.front().first != 0) {
    throw ConfigError("velocity profile must start at frame 0");
  }
  for (size_t i = 1; i < curvature_schedule.size(); ++i) {
    if (curvature_schedule[i].first <= curvature_schedule[i - 1].first) {
      throw ConfigError("curvature schedule frames must increase");
    }
  }
  for (size_t i = 1; i < velocity_profile.size(); ++i) {
    if (velocity_profile[i].first <= velocity_profile[i - 1].first) {
      throw ConfigError("velocity profile frames must increase");
    }
  }
  for (const auto& [f, k] : curvature_schedule) {
    if (!std::isfinite(k) || std::abs(k) * wheelbase >= 1e6) {
      throw ConfigError("curvature at frame " + std::to_string(f) +
                        " is not usable");
    }
  }
  for (const auto& [f, v] : velocity_profile) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("velocity at frame " + std::to_string(f) +
                        " must be finite and >= 0");
    }
  }
}

double SyntheticSceneSpec::CurvatureAt(size_t frame) const {
  return ScheduleAt(curvature_schedule, frame);
}

double SyntheticSceneSpec::VelocityAt(size_t frame) const {
  return ScheduleAt(velocity_profile, frame);
}

SyntheticSequence GenerateSyntheticSequence(const SyntheticSceneSpec& spec) {
  spec.Validate();
  SyntheticSequence out;
  out.dt = spec.dt;

  std::vector<double> starts, curvatures;
  double s = 0.0;
  for (size_t f = 0; f < spec.num_frames; ++f) {
    starts.push_back(s);
    curvatures.push_back(spec.CurvatureAt(f));
    s += spec.VelocityAt(f) * spec.dt;
  }
  const double road_length = s + spec.lookahead + 1.0;
  const Centerline line(starts, curvatures, road_length);

  Rng scene_rng(spec.seed, 0);
  std::vector<Obstacle> obstacles(spec.obstacle_count);
  for (Obstacle& ob : obstacles) {
    ob.s = scene_rng.Uniform(2.0, road_length);
    const double side = scene_rng.Uniform() < 0.5 ? -1.0 : 1.0;
    ob.width = scene_rng.Uniform(0.5, 1.2);
    ob.length = scene_rng.Uniform(0.5, 2.5);
    ob.height = scene_rng.Uniform(0.8, 1.8);
    ob.lateral = side * (spec.corridor_width / 2 - ob.width / 2 - 0.1);
  }
  const double half = spec.corridor_width / 2;
  const double near = 0.5;

  for (size_t f = 0; f < spec.num_frames; ++f) {
    Rng rng(spec.seed, f + 1);
    const double s0 = starts[f];
    const Pose2 ego = line.At(s0);
    std::vector<const Obstacle*> visible;
    for (const Obstacle& ob : obstacles) {
      if (ob.s >= s0 + near && ob.s <= s0 + spec.lookahead) visible.push_back(&ob);
    }
    const size_t n = spec.points_per_frame;
    const size_t n_road =
        static_cast<size_t>(std::floor(spec.road_fraction * static_cast<double>(n)));
    size_t n_wall =
        static_cast<size_t>(std::floor(spec.wall_fraction * static_cast<double>(n)));
    if (visible.empty()) n_wall = n - n_road;
    PointCloud cloud;
    auto& classes = cloud.classes.emplace();
    cloud.points.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      Point3 w;
      ClassId c;
      if (i < n_road) {
        const double ss = rng.Uniform(s0 + near, s0 + spec.lookahead);
        w = ToWorld(line, ss, rng.Uniform(-half, half), 0.0);
        c = spec.road_class;
      } else if (i < n_road + n_wall) {
        const double ss = rng.Uniform(s0 + near, s0 + spec.lookahead);
        const double side = rng.Uniform() < 0.5 ? -half : half;
        w = ToWorld(line, ss, side, rng.Uniform(0.0, spec.wall_height));
        c = spec.wall_class;
      } else {
        const Obstacle& ob = *visible[rng.Below(visible.size())];
        const double ss = ob.s + rng.Uniform(-ob.length / 2, ob.length / 2);
        const double lat = ob.lateral + rng.Uniform(-ob.width / 2, ob.width / 2);
        w = ToWorld(line, ss, lat, rng.Uniform(0.0, ob.height));
        c = spec.obstacle_class;
      }
      const double dx = w.x - ego.x;
      const double dy = w.y - ego.y;
      const double ch = std::cos(ego.heading), sh = std::sin(ego.heading);
      Point3 p;
      p.x = RoundToFloat(ch * dx + sh * dy + rng.Normal(0.0, spec.noise_sigma));
      p.y = RoundToFloat(-sh * dx + ch * dy + rng.Normal(0.0, spec.noise_sigma));
      p.z = RoundToFloat(w.z + rng.Normal(0.0, spec.noise_sigma));
      cloud.points.push_back(p);
      classes.push_back(c);
    }
    // Interleave the classes so point order carries no label information.
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    rng.Shuffle(std::span<size_t>(order));
    PointCloud shuffled;
    auto& shuffled_classes = shuffled.classes.emplace();
    for (size_t i : order) {
      shuffled.points.push_back(cloud.points[i]);
      shuffled_classes.push_back(classes[i]);
    }
    shuffled.frame_index = static_cast<int64_t>(f);
    shuffled.timestamp = static_cast<double>(f) * spec.dt;

    const double v = spec.VelocityAt(f);
    const double yaw_rate = v * spec.CurvatureAt(f);
    double steering = 0.0;
    uint8_t valid = 1;
    try {
      steering = SteeringFromYaw(v, yaw_rate, spec.wheelbase);
    } catch (const LowSpeedError&) {
      valid = 0;
    }
    out.frames.push_back(std::move(shuffled));
    out.truth.push_back(steering);
    out.velocities.push_back(v);
    out.yaw_rates.push_back(yaw_rate);
    out.valid.push_back(valid);
  }
  return out;
}

void SyntheticDatasetSpec::Validate() const {
  if (num_sequences < 1) throw ConfigError("num_sequences must be >= 1");
  if (frames_per_sequence < 1) {
    throw ConfigError("frames_per_sequence must be >= 1");
  }
  if (points_per_frame < 1) throw ConfigError("points_per_frame must be >= 1");
  if (!(max_curvature >= 0.0)) throw ConfigError("max_curvature must be >= 0");
  if (!(straight_probability >= 0.0 && straight_probability <= 1.0)) {
    throw ConfigError("straight_probability must lie in [0, 1]");
  }
  if (min_segment_frames < 1 || max_segment_frames < min_segment_frames) {
    throw ConfigError("need 1 <= min_segment_frames <= max_segment_frames");
  }
  if (!(min_speed > 0.0 && max_speed >= min_speed)) {
    throw ConfigError("need 0 < min_speed <= max_speed");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
}

SyntheticSceneSpec MakeSequenceSpec(const SyntheticDatasetSpec& spec,
                                    size_t index) {
  spec.Validate();
  Rng rng(spec.seed, 1000 + index);
  SyntheticSceneSpec scene;
  scene.num_frames = spec.frames_per_sequence;
  scene.points_per_frame = spec.points_per_frame;
  scene.noise_sigma = spec.noise_sigma;
  scene.seed = rng.NextU64();
  scene.velocity_profile = {{0, rng.Uniform(spec.min_speed, spec.max_speed)}};
  scene.curvature_schedule.clear();
  size_t frame = 0;
  const size_t span = spec.max_segment_frames - spec.min_segment_frames + 1;
  while (frame < spec.frames_per_sequence) {
    const double kappa = rng.Uniform() < spec.straight_probability
                             ? 0.0
                             : rng.Uniform(-spec.max_curvature, spec.max_curvature);
    scene.curvature_schedule.emplace_back(frame, kappa);
    frame += spec.min_segment_frames + rng.Below(span);
  }
  return scene;
}

std::string SequenceName(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "seq_%02zu", index);
  return buf;
}

void WriteKittiSequence(const SyntheticSequence& seq,
                        const std::string& directory) {
  const fs::path root(directory);
  const fs::path velo = root / "velodyne_points";
  const fs::path oxts = root / "oxts";
  fs::create_directories(velo / "data");
  fs::create_directories(velo / "labels");
  fs::create_directories(oxts / "data");
  // Fixed epoch so the files depend on the sequence alone.
  constexpr int64_t kStartNanos = 1317042000LL * 1000000000LL;
  const auto dt_nanos = static_cast<int64_t>(std::llround(seq.dt * 1e9));
  std::string times;
  for (size_t f = 0; f < seq.frames.size(); ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "%010zu", f);
    WriteFileBytes((velo / "data" / (std::string(name) + ".bin")).string(),
                   EncodeVelodyneBin(seq.frames[f]));
    if (seq.frames[f].classes) {
      WriteFileBytes((velo / "labels" / (std::string(name) + ".label")).string(),
                     EncodeLabels(*seq.frames[f].classes));
    }
    OxtsRecord rec;
    rec.fields[OxtsRecord::kForwardVelocityField] = seq.velocities[f];
    rec.fields[OxtsRecord::kYawRateField] = seq.yaw_rates[f];
    WriteFileBytes((oxts / "data" / (std::string(name) + ".txt")).string(),
                   FormatOxts(rec) + "\n");
    times += FormatKittiTimestamp(kStartNanos + static_cast<int64_t>(f) * dt_nanos);
    times += '\n';
  }
  WriteFileBytes((velo / "timestamps.txt").string(), times);
  WriteFileBytes((oxts / "timestamps.txt").string(), times);
}

}  // namespace semsteer
