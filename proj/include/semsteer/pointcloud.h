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

#ifndef SEMSTEER_POINTCLOUD_H_
#define SEMSTEER_POINTCLOUD_H_

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace semsteer {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool IsFinite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
  friend bool operator==(const Point3&, const Point3&) = default;
};

inline Point3 operator-(const Point3& a, const Point3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}

// Squared distance. Every exact spatial query (and its brute-force oracle)
// compares this exact expression so that ties resolve identically.
inline double SquaredDistance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

inline double Distance(const Point3& a, const Point3& b) {
  return std::sqrt(SquaredDistance(a, b));
}

using ClassId = uint16_t;

struct SemanticClass {
  ClassId id = 0;
  std::string label;
};

// Three-class layout used by the synthetic corridor scenes.
inline constexpr ClassId kRoadClass = 0;
inline constexpr ClassId kWallClass = 1;
inline constexpr ClassId kObstacleClass = 2;
std::vector<SemanticClass> DefaultClassTable();

struct PixelCoord {
  uint32_t u = 0;
  uint32_t v = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

// A single frame of 3D points. Classes are all-or-none; pixel provenance is
// only present for clouds lifted from a depth map.
struct PointCloud {
  std::vector<Point3> points;
  std::optional<std::vector<ClassId>> classes;
  int64_t frame_index = 0;
  double timestamp = 0.0;

  // Source pixel of each point, recorded by BackProject.
  std::optional<std::vector<PixelCoord>> pixels;
  // Dimensions of the depth map the pixels refer to.
  uint32_t source_width = 0;
  uint32_t source_height = 0;

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_classes() const { return classes.has_value(); }

  // Throws DimensionError if classes/pixels are not parallel to points.
  void Validate() const;
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  // Throws ConfigError unless fx, fy are finite and positive.
  void Validate() const;
};

struct DepthMap {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<float> depth;  // row-major, meters
  std::vector<bool> valid;   // row-major

  // Builds a map whose validity mask marks finite, positive depths.
  static DepthMap FromDepths(uint32_t width, uint32_t height,
                             std::vector<float> depth);

  double At(uint32_t u, uint32_t v) const { return depth[v * width + u]; }
  bool IsValid(uint32_t u, uint32_t v) const {
    const size_t i = static_cast<size_t>(v) * width + u;
    return valid[i] && std::isfinite(depth[i]) && depth[i] > 0.0f;
  }
};

struct SemanticMap {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<ClassId> class_id;  // row-major

  ClassId At(uint32_t u, uint32_t v) const { return class_id[v * width + u]; }
};

// (X, Y, Z) = depth(u, v) * K^-1 (u, v, 1) for every valid pixel on the
// stride grid, emitted in row-major scan order with pixel provenance.
PointCloud BackProject(const DepthMap& depth, const CameraIntrinsics& intr,
                       int stride = 1);

struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

// Pinhole projection, the inverse of BackProject for a single point.
ImagePoint Project(const Point3& p, const CameraIntrinsics& intr);

// Copies per-pixel class ids onto a back-projected cloud. With
// `with_semantics` false the returned cloud carries no classes.
PointCloud AttachSemantics(const PointCloud& cloud, const SemanticMap& sem,
                           bool with_semantics);

// Returns exactly `target_n` points drawn without replacement by a seeded
// permutation, kept in their original relative order. Clouds that are
// already small enough come back unchanged.
PointCloud RandomDownsample(const PointCloud& cloud, size_t target_n,
                            uint64_t seed);

// SPDM container: "SPDM", u32 width, u32 height, u32 channel code, then a
// row-major payload (f32 depth or u16 class ids), all little-endian.
enum class SpdmChannel : uint32_t { kDepthF32 = 1, kClassU16 = 2 };

std::string EncodeDepthMap(const DepthMap& map);
std::string EncodeSemanticMap(const SemanticMap& map);
DepthMap DecodeDepthMap(const std::string& bytes);
SemanticMap DecodeSemanticMap(const std::string& bytes);

// One line per point: `x,y,z[,class]` with a header row.
void WritePointCloudCsv(const PointCloud& cloud, std::ostream& out);

}  // namespace semsteer

#endif  // SEMSTEER_POINTCLOUD_H_
