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

#include "semsteer/pointcloud.h"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "semsteer/byte_io.h"
#include "semsteer/error.h"
#include "semsteer/random.h"

namespace semsteer {

std::vector<SemanticClass> DefaultClassTable() {
  return {{kRoadClass, "road"}, {kWallClass, "wall"},
          {kObstacleClass, "obstacle"}};
}

void PointCloud::Validate() const {
  if (classes && classes->size() != points.size()) {
    throw DimensionError("class count " + std::to_string(classes->size()) +
                         " does not match point count " +
                         std::to_string(points.size()));
  }
  if (pixels && pixels->size() != points.size()) {
    throw DimensionError("pixel provenance count does not match point count");
  }
}

void CameraIntrinsics::Validate() const {
  if (!(std::isfinite(fx) && std::isfinite(fy) && fx > 0.0 && fy > 0.0) ||
      !std::isfinite(cx) || !std::isfinite(cy)) {
    throw ConfigError("camera intrinsics are not invertible (fx=" +
                      std::to_string(fx) + ", fy=" + std::to_string(fy) + ")");
  }
}

DepthMap DepthMap::FromDepths(uint32_t width, uint32_t height,
                              std::vector<float> depth) {
  if (depth.size() != static_cast<size_t>(width) * height) {
    throw DimensionError("depth payload does not match width*height");
  }
  DepthMap map;
  map.width = width;
  map.height = height;
  map.valid.resize(depth.size());
  for (size_t i = 0; i < depth.size(); ++i) {
    map.valid[i] = std::isfinite(depth[i]) && depth[i] > 0.0f;
  }
  map.depth = std::move(depth);
  return map;
}

PointCloud BackProject(const DepthMap& depth, const CameraIntrinsics& intr,
                       int stride) {
  if (stride < 1) throw ConfigError("stride must be >= 1");
  intr.Validate();
  const size_t n = static_cast<size_t>(depth.width) * depth.height;
  if (depth.depth.size() != n || depth.valid.size() != n) {
    throw DimensionError("depth map payload does not match its dimensions");
  }

  PointCloud cloud;
  cloud.pixels.emplace();
  cloud.source_width = depth.width;
  cloud.source_height = depth.height;
  // K^-1 (u, v, 1) = ((u - cx) / fx, (v - cy) / fy, 1).
  for (uint32_t v = 0; v < depth.height; v += stride) {
    for (uint32_t u = 0; u < depth.width; u += stride) {
      if (!depth.IsValid(u, v)) continue;
      const double d = depth.At(u, v);
      cloud.points.push_back({d * (u - intr.cx) / intr.fx,
                              d * (v - intr.cy) / intr.fy, d});
      cloud.pixels->push_back({u, v});
    }
  }
  if (cloud.empty()) {
    throw EmptyCloudError("depth map has no valid pixels at stride " +
                          std::to_string(stride));
  }
  return cloud;
}

ImagePoint Project(const Point3& p, const CameraIntrinsics& intr) {
  return {intr.fx * p.x / p.z + intr.cx, intr.fy * p.y / p.z + intr.cy, p.z};
}

PointCloud AttachSemantics(const PointCloud& cloud, const SemanticMap& sem,
                           bool with_semantics) {
  PointCloud out = cloud;
  if (!with_semantics) {
    out.classes.reset();
    return out;
  }
  if (!cloud.pixels) {
    throw ConfigError("cloud has no pixel provenance; semantics can only be "
                      "attached to back-projected clouds");
  }
  if (sem.width != cloud.source_width || sem.height != cloud.source_height ||
      sem.class_id.size() != static_cast<size_t>(sem.width) * sem.height) {
    throw DimensionError(
        "semantic map " + std::to_string(sem.width) + "x" +
        std::to_string(sem.height) + " does not match depth map " +
        std::to_string(cloud.source_width) + "x" +
        std::to_string(cloud.source_height));
  }
  std::vector<ClassId> classes;
  classes.reserve(cloud.size());
  for (const PixelCoord& px : *cloud.pixels) {
    classes.push_back(sem.At(px.u, px.v));
  }
  out.classes = std::move(classes);
  return out;
}

PointCloud RandomDownsample(const PointCloud& cloud, size_t target_n,
                            uint64_t seed) {
  if (target_n < 1) throw ConfigError("target_n must be >= 1");
  if (cloud.size() <= target_n) return cloud;

  std::vector<size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  rng.Shuffle(std::span<size_t>(order));
  order.resize(target_n);
  std::sort(order.begin(), order.end());

  PointCloud out;
  out.frame_index = cloud.frame_index;
  out.timestamp = cloud.timestamp;
  out.source_width = cloud.source_width;
  out.source_height = cloud.source_height;
  out.points.reserve(target_n);
  if (cloud.classes) out.classes.emplace().reserve(target_n);
  if (cloud.pixels) out.pixels.emplace().reserve(target_n);
  for (size_t i : order) {
    out.points.push_back(cloud.points[i]);
    if (cloud.classes) out.classes->push_back((*cloud.classes)[i]);
    if (cloud.pixels) out.pixels->push_back((*cloud.pixels)[i]);
  }
  return out;
}

namespace {

constexpr std::string_view kSpdmMagic = "SPDM";

void PutSpdmHeader(ByteWriter& w, uint32_t width, uint32_t height,
                   SpdmChannel channel) {
  w.PutBytes(kSpdmMagic);
  w.PutU32(width);
  w.PutU32(height);
  w.PutU32(static_cast<uint32_t>(channel));
}

void ReadSpdmHeader(ByteReader& r, SpdmChannel expected, uint32_t& width,
                    uint32_t& height) {
  if (r.GetBytes(4) != kSpdmMagic) {
    throw FormatError("not an SPDM container (bad magic)");
  }
  width = r.GetU32();
  height = r.GetU32();
  const uint32_t channel = r.GetU32();
  if (channel != static_cast<uint32_t>(expected)) {
    throw FormatError("SPDM channel code " + std::to_string(channel) +
                      ", expected " +
                      std::to_string(static_cast<uint32_t>(expected)));
  }
  const size_t elem = expected == SpdmChannel::kDepthF32 ? 4 : 2;
  const size_t want = static_cast<size_t>(width) * height * elem;
  if (r.remaining() != want) {
    throw FormatError("SPDM payload is " + std::to_string(r.remaining()) +
                      " bytes, expected " + std::to_string(want));
  }
}

}  // namespace

std::string EncodeDepthMap(const DepthMap& map) {
  ByteWriter w;
  PutSpdmHeader(w, map.width, map.height, SpdmChannel::kDepthF32);
  for (float d : map.depth) w.PutF32(d);
  return w.Take();
}

std::string EncodeSemanticMap(const SemanticMap& map) {
  ByteWriter w;
  PutSpdmHeader(w, map.width, map.height, SpdmChannel::kClassU16);
  for (ClassId c : map.class_id) w.PutU16(c);
  return w.Take();
}

DepthMap DecodeDepthMap(const std::string& bytes) {
  ByteReader r(bytes);
  uint32_t width = 0, height = 0;
  ReadSpdmHeader(r, SpdmChannel::kDepthF32, width, height);
  std::vector<float> depth(static_cast<size_t>(width) * height);
  for (float& d : depth) d = r.GetF32();
  return DepthMap::FromDepths(width, height, std::move(depth));
}

SemanticMap DecodeSemanticMap(const std::string& bytes) {
  ByteReader r(bytes);
  SemanticMap map;
  ReadSpdmHeader(r, SpdmChannel::kClassU16, map.width, map.height);
  map.class_id.resize(static_cast<size_t>(map.width) * map.height);
  for (ClassId& c : map.class_id) c = r.GetU16();
  return map;
}

void WritePointCloudCsv(const PointCloud& cloud, std::ostream& out) {
  cloud.Validate();
  out << (cloud.classes ? "x,y,z,class\n" : "x,y,z\n");
  const auto old_precision = out.precision(17);
  for (size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    out << p.x << ',' << p.y << ',' << p.z;
    if (cloud.classes) out << ',' << (*cloud.classes)[i];
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace semsteer
