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

#ifndef SEMSTEER_KITTI_H_
#define SEMSTEER_KITTI_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semsteer/pointcloud.h"

namespace semsteer {

// One line of a KITTI raw oxts file: 30 whitespace-separated numbers.
struct OxtsRecord {
  static constexpr size_t kFieldCount = 30;
  // 0-based positions in the oxts dataformat listing.
  static constexpr size_t kForwardVelocityField = 8;  // vf, m/s
  static constexpr size_t kYawRateField = 19;         // wz, rad/s

  std::array<double, kFieldCount> fields{};

  double forward_velocity() const { return fields[kForwardVelocityField]; }
  double yaw_rate() const { return fields[kYawRateField]; }
};

OxtsRecord ParseOxts(std::string_view line);
// Shortest round-trip decimal form of every field, single-space separated.
std::string FormatOxts(const OxtsRecord& record);

// Velodyne scans: 16-byte groups of little-endian float32 (x, y, z,
// reflectance). Reflectance is dropped on parse and written as zero.
PointCloud ParseVelodyneBin(std::string_view bytes);
std::string EncodeVelodyneBin(const PointCloud& cloud);

// Per-point labels: one little-endian uint32 per point, semantic class in
// the low 16 bits.
std::vector<ClassId> ParseLabels(std::string_view bytes);
std::string EncodeLabels(const std::vector<ClassId>& classes);

// Intrinsics of camera `camera` ("02", ...) from calibration text holding
// either `K_<camera>: fx 0 cx 0 fy cy 0 0 1` or `P_rect_<camera>: ...`.
CameraIntrinsics ParseCalib(std::string_view text, const std::string& camera);

// "YYYY-MM-DD HH:MM:SS.fffffffff" to seconds since the Unix epoch (UTC).
double ParseKittiTimestamp(std::string_view text);
std::string FormatKittiTimestamp(int64_t epoch_nanoseconds);

struct FrameRecord {
  size_t frame_index = 0;
  std::string cloud_path;
  std::optional<std::string> label_path;
  std::optional<std::string> depth_path;
  std::optional<std::string> semantic_path;
  // Seconds since the first frame of the sequence.
  double timestamp = 0.0;
  OxtsRecord oxts;
  double velocity = 0.0;
  double yaw_rate = 0.0;
  // Bicycle-model label; zero and flagged when the vehicle is too slow.
  double steering = 0.0;
  bool low_speed = false;
};

struct KittiLoadOptions {
  double wheelbase = 2.7;
  double min_speed = 0.5;
};

// Reads a KITTI raw drive directory:
//   velodyne_points/data/NNNNNNNNNN.bin, velodyne_points/timestamps.txt,
//   oxts/data/NNNNNNNNNN.txt, oxts/timestamps.txt,
//   optional velodyne_points/labels/NNNNNNNNNN.label,
//   optional depth/data/NNNNNNNNNN.spdm and semantic/data/NNNNNNNNNN.spdm.
// When both timestamp lists have the same length the oxts records are paired
// by index; otherwise every scan takes the oxts record nearest in time.
std::vector<FrameRecord> LoadKittiSequence(const std::string& directory,
                                           const KittiLoadOptions& opts = {});

// Point cloud of one frame, with labels attached when present.
PointCloud LoadFrameCloud(const FrameRecord& frame);

}  // namespace semsteer

#endif  // SEMSTEER_KITTI_H_
