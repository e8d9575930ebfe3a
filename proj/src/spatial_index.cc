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

#include "semsteer/spatial_index.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "semsteer/error.h"

namespace semsteer {
namespace {

double Coord(const Point3& p, int axis) {
  return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
}

// Orders candidates by (squared distance, index). The heap keeps the worst
// candidate on top.
struct Candidate {
  double d2;
  uint32_t index;
  bool operator<(const Candidate& o) const {
    return d2 < o.d2 || (d2 == o.d2 && index < o.index);
  }
};

}  // namespace

SpatialIndex::SpatialIndex(std::span<const Point3> points)
    : points_(points.begin(), points.end()) {
  if (points_.empty()) throw EmptyCloudError("cannot index an empty cloud");
  if (points_.size() > std::numeric_limits<uint32_t>::max()) {
    throw ConfigError("cloud too large for a 32-bit index");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  Build(0, static_cast<uint32_t>(points_.size()));
}

int32_t SpatialIndex::Build(uint32_t begin, uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = node.hi = points_[order_[begin]];
  for (uint32_t i = begin; i < end; ++i) {
    const Point3& p = points_[order_[i]];
    node.lo = {std::min(node.lo.x, p.x), std::min(node.lo.y, p.y),
               std::min(node.lo.z, p.z)};
    node.hi = {std::max(node.hi.x, p.x), std::max(node.hi.y, p.y),
               std::max(node.hi.z, p.z)};
  }
  const int32_t id = static_cast<int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  const Point3 extent = node.hi - node.lo;
  int axis = 0;
  if (extent.y > extent.x) axis = 1;
  if (extent.z > Coord(extent, axis)) axis = 2;
  if (Coord(extent, axis) == 0.0) return id;  // all points coincide

  // Median split; ties on the coordinate are broken by index so that the
  // structure is a deterministic function of the input.
  const uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](uint32_t a, uint32_t b) {
                     const double ca = Coord(points_[a], axis);
                     const double cb = Coord(points_[b], axis);
                     return ca < cb || (ca == cb && a < b);
                   });
  const int32_t left = Build(begin, mid);
  const int32_t right = Build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double SpatialIndex::BoxSquaredDistance(const Node& node, const Point3& q) {
  auto gap = [](double v, double lo, double hi) {
    return v < lo ? lo - v : (v > hi ? v - hi : 0.0);
  };
  const double dx = gap(q.x, node.lo.x, node.hi.x);
  const double dy = gap(q.y, node.lo.y, node.hi.y);
  const double dz = gap(q.z, node.lo.z, node.hi.z);
  return dx * dx + dy * dy + dz * dz;
}

std::vector<Neighbor> SpatialIndex::Knn(const Point3& query, size_t k) const {
  if (k < 1) throw ConfigError("knn query needs k >= 1");
  k = std::min(k, points_.size());

  std::priority_queue<Candidate> best;
  std::vector<int32_t> stack = {0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    // Only strictly farther boxes are skipped: an equally distant point
    // with a smaller index could still displace the current worst.
    if (best.size() == k && BoxSquaredDistance(node, query) > best.top().d2) {
      continue;
    }
    if (node.leaf()) {
      for (uint32_t i = node.begin; i < node.end; ++i) {
        const Candidate c{SquaredDistance(points_[order_[i]], query),
                          order_[i]};
        if (best.size() < k) {
          best.push(c);
        } else if (c < best.top()) {
          best.pop();
          best.push(c);
        }
      }
      continue;
    }
    // Visit the nearer child first.
    const double dl = BoxSquaredDistance(nodes_[node.left], query);
    const double dr = BoxSquaredDistance(nodes_[node.right], query);
    if (dl <= dr) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }

  std::vector<Neighbor> out(best.size());
  for (size_t i = out.size(); i-- > 0;) {
    out[i] = {best.top().index, std::sqrt(best.top().d2)};
    best.pop();
  }
  return out;
}

std::vector<uint32_t> SpatialIndex::BallQuery(const Point3& center,
                                              double radius,
                                              size_t max_count) const {
  if (!(radius > 0.0)) throw ConfigError("ball query radius must be > 0");
  const double r2 = radius * radius;
  std::vector<Candidate> hits;
  std::vector<int32_t> stack = {0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (BoxSquaredDistance(node, center) > r2) continue;
    if (node.leaf()) {
      for (uint32_t i = node.begin; i < node.end; ++i) {
        const double d2 = SquaredDistance(points_[order_[i]], center);
        if (d2 <= r2) hits.push_back({d2, order_[i]});
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort(hits.begin(), hits.end());
  if (hits.size() > max_count) hits.resize(max_count);
  std::vector<uint32_t> out;
  out.reserve(hits.size());
  for (const Candidate& c : hits) out.push_back(c.index);
  return out;
}

std::vector<uint32_t> FarthestPointSampling(std::span<const Point3> points,
                                            size_t m, size_t seed_index) {
  const size_t n = points.size();
  if (m < 1 || m > n) {
    throw ConfigError("farthest point sampling needs 1 <= m <= N (m=" +
                      std::to_string(m) + ", N=" + std::to_string(n) + ")");
  }
  if (seed_index >= n) throw ConfigError("FPS seed index out of range");

  std::vector<uint32_t> picks;
  picks.reserve(m);
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  // Picked points are excluded explicitly so duplicates still yield a
  // permutation when m == N.
  std::vector<bool> picked(n, false);
  size_t current = seed_index;
  for (size_t step = 0; step < m; ++step) {
    picks.push_back(static_cast<uint32_t>(current));
    picked[current] = true;
    const Point3& c = points[current];
    size_t next = 0;
    double next_d2 = -1.0;
    for (size_t i = 0; i < n; ++i) {
      min_d2[i] = std::min(min_d2[i], SquaredDistance(points[i], c));
      if (!picked[i] && min_d2[i] > next_d2) {
        next_d2 = min_d2[i];
        next = i;
      }
    }
    current = next;
  }
  return picks;
}

}  // namespace semsteer
