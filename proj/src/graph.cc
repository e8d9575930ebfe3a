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

#include "semsteer/graph.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "semsteer/error.h"
#include "semsteer/random.h"
#include "semsteer/spatial_index.h"

namespace semsteer {

bool SemanticGraph::has_classes() const {
  return !nodes.empty() && std::all_of(nodes.begin(), nodes.end(),
                                       [](const GraphNode& n) {
                                         return n.class_id.has_value();
                                       });
}

void SemanticGraph::RebuildCsr() {
  const size_t n = nodes.size();
  csr_offsets.assign(n + 1, 0);
  for (const Edge& e : edges) {
    ++csr_offsets[e.first + 1];
    ++csr_offsets[e.second + 1];
  }
  for (size_t i = 0; i < n; ++i) csr_offsets[i + 1] += csr_offsets[i];
  csr_neighbors.assign(csr_offsets[n], 0);
  std::vector<uint32_t> fill(csr_offsets.begin(), csr_offsets.end() - 1);
  for (const Edge& e : edges) {
    csr_neighbors[fill[e.first]++] = e.second;
    csr_neighbors[fill[e.second]++] = e.first;
  }
  for (size_t i = 0; i < n; ++i) {
    std::sort(csr_neighbors.begin() + csr_offsets[i],
              csr_neighbors.begin() + csr_offsets[i + 1]);
  }
}

void SemanticGraph::Validate() const {
  const size_t n = nodes.size();
  for (size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    if (edge.first >= edge.second) {
      throw DimensionError("edge " + std::to_string(e) +
                           " is a self-edge or not canonical");
    }
    if (edge.second >= n) {
      throw DimensionError("edge " + std::to_string(e) + " endpoint out of range");
    }
    if (e > 0 && !(edges[e - 1] < edge)) {
      throw DimensionError("edge list not sorted or has duplicates at " +
                           std::to_string(e));
    }
  }
  if (csr_offsets.size() != n + 1 || csr_neighbors.size() != 2 * edges.size()) {
    throw DimensionError("CSR adjacency inconsistent with the edge list");
  }
  for (size_t i = 0; i < n; ++i) {
    for (uint32_t p = csr_offsets[i]; p < csr_offsets[i + 1]; ++p) {
      const uint32_t j = csr_neighbors[p];
      const Edge key{std::min<uint32_t>(i, j), std::max<uint32_t>(i, j)};
      if (!std::binary_search(edges.begin(), edges.end(), key)) {
        throw DimensionError("CSR entry (" + std::to_string(i) + "," +
                             std::to_string(j) + ") missing from edge list");
      }
    }
  }
  if (features.rows() != static_cast<Eigen::Index>(n)) {
    throw DimensionError("feature rows do not match node count");
  }
}

SemanticGraph BuildKnnGraph(const PointCloud& cloud, const GraphOptions& opts) {
  cloud.Validate();
  const size_t n = cloud.size();
  if (n < 2) throw EmptyCloudError("a kNN graph needs at least 2 points");
  if (opts.k < 1) throw ConfigError("graph k must be >= 1");

  SemanticGraph graph;
  graph.knn_saturated = opts.k >= n;
  size_t num_classes = 0;
  if (cloud.classes) {
    const ClassId max_id =
        *std::max_element(cloud.classes->begin(), cloud.classes->end());
    num_classes = opts.num_classes ? opts.num_classes : max_id + size_t{1};
    if (max_id >= num_classes) {
      throw ConfigError("class id " + std::to_string(max_id) +
                        " exceeds one-hot width " +
                        std::to_string(num_classes));
    }
  }
  graph.num_classes = num_classes;
  graph.nodes.resize(n);
  graph.features = Eigen::MatrixXd::Zero(n, 3 + num_classes);
  for (size_t i = 0; i < n; ++i) {
    const Point3& p = cloud.points[i];
    graph.nodes[i].point_index = static_cast<uint32_t>(i);
    graph.nodes[i].position = p;
    graph.features(i, 0) = p.x;
    graph.features(i, 1) = p.y;
    graph.features(i, 2) = p.z;
    if (cloud.classes) {
      const ClassId c = (*cloud.classes)[i];
      graph.nodes[i].class_id = c;
      graph.features(i, 3 + c) = 1.0;
    }
  }

  const SpatialIndex index(cloud);
  const size_t k = std::min(opts.k, n - 1);
  std::vector<Edge> directed;
  directed.reserve(n * k);
  for (size_t i = 0; i < n; ++i) {
    // One extra neighbor so the query point itself can be dropped.
    size_t taken = 0;
    for (const Neighbor& nb : index.Knn(cloud.points[i], k + 1)) {
      if (nb.index == i) continue;
      if (taken++ == k) break;
      directed.push_back({std::min<uint32_t>(i, nb.index),
                          std::max<uint32_t>(i, nb.index)});
    }
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
  graph.edges = std::move(directed);
  graph.RebuildCsr();
  return graph;
}

size_t InterClassKeepCount(size_t inter_edges, double keep_ratio) {
  // The epsilon absorbs representation error in products such as 0.2 * 35.
  return static_cast<size_t>(
      std::floor(keep_ratio * static_cast<double>(inter_edges) + 1e-9));
}

SemanticGraph PruneInterClass(const SemanticGraph& graph, double keep_ratio,
                              uint64_t seed) {
  if (!(keep_ratio >= 0.0 && keep_ratio <= 1.0)) {
    throw ConfigError("keep_ratio must lie in [0, 1]");
  }
  if (!graph.has_classes()) {
    throw ConfigError("semantic pruning needs a class id on every node");
  }
  std::vector<Edge> kept;
  std::vector<Edge> inter;
  for (const Edge& e : graph.edges) {
    if (graph.nodes[e.first].class_id == graph.nodes[e.second].class_id) {
      kept.push_back(e);
    } else {
      inter.push_back(e);
    }
  }
  // `graph.edges` is canonical-sorted, so `inter` is too before shuffling.
  Rng rng(seed);
  rng.Shuffle(std::span<Edge>(inter));
  inter.resize(InterClassKeepCount(inter.size(), keep_ratio));
  kept.insert(kept.end(), inter.begin(), inter.end());
  std::sort(kept.begin(), kept.end());

  SemanticGraph out;
  out.nodes = graph.nodes;
  out.features = graph.features;
  out.num_classes = graph.num_classes;
  out.knn_saturated = graph.knn_saturated;
  out.edges = std::move(kept);
  out.RebuildCsr();
  return out;
}

NormalizedAdjacency NormalizeAdjacency(const SemanticGraph& graph) {
  const size_t n = graph.node_count();
  if (n == 0) throw EmptyCloudError("cannot normalize an empty graph");
  if (graph.csr_offsets.size() != n + 1) {
    throw DimensionError("graph CSR is not built");
  }
  std::vector<double> degree(n);
  for (size_t i = 0; i < n; ++i) {
    degree[i] = 1.0 + (graph.csr_offsets[i + 1] - graph.csr_offsets[i]);
  }
  // 1 / sqrt(d_i d_j): symmetric bit for bit, exact for square products.
  auto entry = [&](size_t i, size_t j) {
    return 1.0 / std::sqrt(degree[i] * degree[j]);
  };
  NormalizedAdjacency adj;
  adj.matrix.resize(n, n);
  Eigen::VectorXi per_row(n);
  for (size_t i = 0; i < n; ++i) {
    per_row[i] = 1 + static_cast<int>(graph.csr_offsets[i + 1] -
                                      graph.csr_offsets[i]);
  }
  adj.matrix.reserve(per_row);
  for (size_t i = 0; i < n; ++i) {
    // Neighbors are sorted; the diagonal is slotted in order.
    bool diagonal_done = false;
    for (uint32_t p = graph.csr_offsets[i]; p < graph.csr_offsets[i + 1]; ++p) {
      const uint32_t j = graph.csr_neighbors[p];
      if (!diagonal_done && j > i) {
        adj.matrix.insert(i, i) = entry(i, i);
        diagonal_done = true;
      }
      adj.matrix.insert(i, j) = entry(i, j);
    }
    if (!diagonal_done) {
      adj.matrix.insert(i, i) = entry(i, i);
    }
  }
  adj.matrix.makeCompressed();
  return adj;
}

GraphStats ComputeGraphStats(const SemanticGraph& graph) {
  GraphStats stats;
  stats.node_count = graph.node_count();
  stats.edge_count = graph.edge_count();
  stats.knn_saturated = graph.knn_saturated;
  stats.mean_degree =
      stats.node_count == 0
          ? 0.0
          : 2.0 * static_cast<double>(stats.edge_count) / stats.node_count;
  if (graph.has_classes()) {
    for (const Edge& e : graph.edges) {
      const ClassId a = *graph.nodes[e.first].class_id;
      const ClassId b = *graph.nodes[e.second].class_id;
      ++stats.class_pair_edges[{std::min(a, b), std::max(a, b)}];
      if (a == b) {
        ++stats.same_class_edges;
      } else {
        ++stats.inter_class_edges;
      }
    }
  }
  return stats;
}

void WriteDot(const SemanticGraph& graph, std::ostream& out) {
  out << "graph semantic {\n";
  for (size_t i = 0; i < graph.node_count(); ++i) {
    out << "  n" << i << " [label=\"";
    if (graph.nodes[i].class_id) {
      out << *graph.nodes[i].class_id;
    } else {
      out << "-";
    }
    out << "\"];\n";
  }
  for (const Edge& e : graph.edges) {
    out << "  n" << e.first << " -- n" << e.second << ";\n";
  }
  out << "}\n";
}

void WriteEdgeCsv(const SemanticGraph& graph, std::ostream& out) {
  out << "i,j,same_class\n";
  for (const Edge& e : graph.edges) {
    const bool same =
        graph.nodes[e.first].class_id == graph.nodes[e.second].class_id;
    out << e.first << ',' << e.second << ',' << (same ? 1 : 0) << '\n';
  }
}

void WriteStatsCsv(const std::vector<std::pair<std::string, GraphStats>>& rows,
                   std::ostream& out) {
  out << "stage,node_count,edge_count,same_class_edges,inter_class_edges,"
         "mean_degree,knn_saturated\n";
  for (const auto& [stage, s] : rows) {
    out << stage << ',' << s.node_count << ',' << s.edge_count << ','
        << s.same_class_edges << ',' << s.inter_class_edges << ','
        << s.mean_degree << ',' << (s.knn_saturated ? 1 : 0) << '\n';
  }
}

}  // namespace semsteer
