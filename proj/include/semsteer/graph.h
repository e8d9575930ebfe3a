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

#ifndef SEMSTEER_GRAPH_H_
#define SEMSTEER_GRAPH_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "semsteer/pointcloud.h"

namespace semsteer {

struct GraphNode {
  uint32_t point_index = 0;
  Point3 position;
  std::optional<ClassId> class_id;
};

// Undirected edge stored canonically with first < second.
struct Edge {
  uint32_t first = 0;
  uint32_t second = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Point-cloud graph: nodes with features, a sorted canonical edge list and
// the CSR adjacency derived from it.
struct SemanticGraph {
  std::vector<GraphNode> nodes;
  // One row per node: (x, y, z) followed by a one-hot class block of width
  // `num_classes` (zero width when the cloud carries no classes).
  Eigen::MatrixXd features;
  size_t num_classes = 0;
  std::vector<Edge> edges;
  // Symmetric CSR: neighbors of node i are csr_neighbors[csr_offsets[i] ..
  // csr_offsets[i + 1]), ascending.
  std::vector<uint32_t> csr_offsets;
  std::vector<uint32_t> csr_neighbors;
  // Set when k >= N forced an all-pairs graph.
  bool knn_saturated = false;

  size_t node_count() const { return nodes.size(); }
  size_t edge_count() const { return edges.size(); }
  bool has_classes() const;

  // Sorts/deduplicates nothing; rebuilds CSR from `edges`.
  void RebuildCsr();
  // Throws unless the invariants hold (canonical, sorted, unique, in-range
  // edges and a CSR consistent with them).
  void Validate() const;
};

struct GraphOptions {
  size_t k = 8;
  // One-hot width. 0 infers max class id + 1 from the cloud.
  size_t num_classes = 0;
};

// kNN graph (self excluded) symmetrized by union.
SemanticGraph BuildKnnGraph(const PointCloud& cloud, const GraphOptions& opts);

// Keeps every same-class edge and exactly floor(keep_ratio * m_inter) of the
// m_inter inter-class edges, picked by a seeded shuffle of the canonically
// sorted inter-class list. Retention is global over all inter-class edges.
SemanticGraph PruneInterClass(const SemanticGraph& graph, double keep_ratio,
                              uint64_t seed);

// Number of inter-class edges kept for a given ratio.
size_t InterClassKeepCount(size_t inter_edges, double keep_ratio);

// D^-1/2 (A + I) D^-1/2 as a row-major sparse matrix.
struct NormalizedAdjacency {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  size_t dimension() const { return static_cast<size_t>(matrix.rows()); }
  // Stored entries, i.e. messages exchanged per propagation.
  size_t nonzeros() const { return static_cast<size_t>(matrix.nonZeros()); }
};

NormalizedAdjacency NormalizeAdjacency(const SemanticGraph& graph);

struct GraphStats {
  size_t node_count = 0;
  size_t edge_count = 0;
  size_t same_class_edges = 0;
  size_t inter_class_edges = 0;
  // Keyed by (min class, max class); empty for class-less graphs.
  std::map<std::pair<ClassId, ClassId>, size_t> class_pair_edges;
  double mean_degree = 0.0;
  bool knn_saturated = false;
};

GraphStats ComputeGraphStats(const SemanticGraph& graph);

// DOT export with the class id as node label.
void WriteDot(const SemanticGraph& graph, std::ostream& out);
// `i,j,same_class` rows with a header.
void WriteEdgeCsv(const SemanticGraph& graph, std::ostream& out);
// `node_count,edge_count,same_class_edges,inter_class_edges,mean_degree`.
void WriteStatsCsv(const std::vector<std::pair<std::string, GraphStats>>& rows,
                   std::ostream& out);

}  // namespace semsteer

#endif  // SEMSTEER_GRAPH_H_
