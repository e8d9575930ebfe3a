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

#ifndef SEMSTEER_SPATIAL_INDEX_H_
#define SEMSTEER_SPATIAL_INDEX_H_

#include <cstdint>
#include <span>
#include <vector>

#include "semsteer/pointcloud.h"

namespace semsteer {

struct Neighbor {
  uint32_t index = 0;
  double distance = 0.0;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Static kd-tree over a point set. Queries are exact; results are ordered by
// (distance, original index), so answers do not depend on the input order
// beyond that tie rule. Immutable after construction, so concurrent queries
// are safe.
class SpatialIndex {
 public:
  static constexpr uint32_t kLeafSize = 8;

  explicit SpatialIndex(std::span<const Point3> points);
  explicit SpatialIndex(const PointCloud& cloud)
      : SpatialIndex(std::span<const Point3>(cloud.points)) {}

  size_t size() const { return points_.size(); }
  size_t node_count() const { return nodes_.size(); }
  const std::vector<Point3>& points() const { return points_; }

  // The min(k, N) nearest points sorted by ascending distance.
  std::vector<Neighbor> Knn(const Point3& query, size_t k) const;

  // Indices within `radius` (inclusive), nearest first, truncated to
  // `max_count`.
  std::vector<uint32_t> BallQuery(const Point3& center, double radius,
                                  size_t max_count) const;

 private:
  struct Node {
    // Bounding box of everything below this node.
    Point3 lo;
    Point3 hi;
    uint32_t begin = 0;  // range into order_
    uint32_t end = 0;
    int32_t left = -1;
    int32_t right = -1;
    bool leaf() const { return left < 0; }
  };

  int32_t Build(uint32_t begin, uint32_t end);
  static double BoxSquaredDistance(const Node& node, const Point3& q);

  std::vector<Point3> points_;
  std::vector<uint32_t> order_;
  std::vector<Node> nodes_;
};

// Greedy farthest point sampling starting at `seed_index`. Each pick
// maximizes the minimum distance to the points already picked, ties going to
// the smaller index. Returns indices in selection order.
std::vector<uint32_t> FarthestPointSampling(std::span<const Point3> points,
                                            size_t m, size_t seed_index);

inline std::vector<uint32_t> FarthestPointSampling(const PointCloud& cloud,
                                                   size_t m,
                                                   size_t seed_index) {
  return FarthestPointSampling(std::span<const Point3>(cloud.points), m,
                               seed_index);
}

}  // namespace semsteer

#endif  // SEMSTEER_SPATIAL_INDEX_H_
