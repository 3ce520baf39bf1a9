/*
 * Copyright 2026 The gil Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Geometric graphs over points in 3D space: the KNN / fully-connected /
// r-ball construction policies, node removal with connectivity rebuild, and
// the +FA and DIGL structural rewiring baselines.

#ifndef GIL_GRAPH_HPP_
#define GIL_GRAPH_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gil {

using Vec3 = Eigen::Vector3d;

// Directed edge (source position, target position). The source is the node
// that aggregates: a KNN edge (i, j) means "j is one of i's neighbors".
using Edge = std::pair<int, int>;

struct Construction {
  enum class Kind { kKnn, kFullyConnected, kRBall, kExplicit };

  Kind kind = Kind::kExplicit;
  int k = 0;          // kKnn only.
  double radius = 0;  // kRBall only.

  static Construction Knn(int k) { return {Kind::kKnn, k, 0.0}; }
  static Construction FullyConnected() { return {Kind::kFullyConnected, 0, 0.0}; }
  static Construction RBall(double r) { return {Kind::kRBall, 0, r}; }
  static Construction Explicit() { return {Kind::kExplicit, 0, 0.0}; }

  std::string ToString() const;
  bool operator==(const Construction&) const = default;
};

// Node payload shared by every construction policy.
struct NodeData {
  std::vector<int> ids;         // Empty means 0..n-1.
  std::vector<Vec3> coords;
  Eigen::MatrixXd features;     // n x F, F may be 0.
};

// Immutable after construction. Edges are kept sorted and refer to node
// positions (0..n-1); `node_ids()` maps a position to its id in the graph the
// nodes originally came from.
class GeometricGraph {
 public:
  GeometricGraph() = default;

  // Validates ids, coordinates, feature rows and edges. Throws
  // std::invalid_argument on self-loops or out-of-range endpoints.
  GeometricGraph(NodeData nodes, std::vector<Edge> edges,
                 Construction construction);

  int num_nodes() const { return static_cast<int>(coords_.size()); }
  int num_features() const { return static_cast<int>(features_.cols()); }
  const std::vector<int>& node_ids() const { return ids_; }
  const std::vector<Vec3>& coords() const { return coords_; }
  const Eigen::MatrixXd& features() const { return features_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Construction& construction() const { return construction_; }

  // Position of `id`, or -1.
  int position_of(int id) const;
  // Ids of the targets of edges leaving the node with id `id`.
  std::vector<int> neighbor_ids(int id) const;
  std::vector<int> out_degrees() const;

  NodeData node_data() const { return {ids_, coords_, features_}; }

 private:
  std::vector<int> ids_;
  std::vector<Vec3> coords_;
  Eigen::MatrixXd features_;
  std::vector<Edge> edges_;
  Construction construction_;
};

// Builds edges over `nodes` following `construction`. kExplicit yields no
// edges. Throws std::invalid_argument("empty graph") when there are no nodes.
GeometricGraph BuildGraph(NodeData nodes, const Construction& construction);

// Each node points at its min(k, n-1) nearest neighbors; among equidistant
// candidates the lower position wins.
GeometricGraph BuildKnn(std::span<const Vec3> coords, int k);
GeometricGraph BuildFullyConnected(std::span<const Vec3> coords);
// Edge iff distance <= r. The result may be disconnected.
GeometricGraph BuildRBall(std::span<const Vec3> coords, double r);

// Survivors of a node removal, with connectivity re-established by the
// parent's construction policy. Holds a non-owning pointer to the parent,
// which must outlive the subgraph.
class Subgraph {
 public:
  Subgraph(const GeometricGraph* parent, std::vector<int> kept_nodes,
           GeometricGraph graph)
      : parent_(parent), kept_(std::move(kept_nodes)), graph_(std::move(graph)) {}

  const GeometricGraph& parent() const { return *parent_; }
  // Kept node ids in parent order.
  const std::vector<int>& kept_nodes() const { return kept_; }
  const std::vector<Edge>& rebuilt_edges() const { return graph_.edges(); }
  // Self-contained graph over the kept nodes (ids preserved).
  const GeometricGraph& graph() const { return graph_; }

 private:
  const GeometricGraph* parent_;
  std::vector<int> kept_;
  GeometricGraph graph_;
};

// Drops the nodes with the given ids and their edges. KNN parents are re-KNN'd
// over the survivors, FC parents recompleted, r-ball parents re-thresholded,
// explicit parents keep their induced edges. Features are carried over
// untouched. Throws std::invalid_argument("empty subgraph") if nothing is left
// and on unknown ids.
Subgraph RemoveNodes(const GeometricGraph& graph, const std::set<int>& drop);

// Same as RemoveNodes but addressed by positions through a bitmask
// (bit p set = keep position p). Requires num_nodes() <= 64.
GeometricGraph KeepPositions(const GeometricGraph& graph, std::uint64_t keep);

// Fully-connected version of `graph` (same nodes and features). Used as the
// final message-passing layer's connectivity in the +FA baseline.
GeometricGraph RewireFullyAdjacent(const GeometricGraph& graph);

struct DiglOptions {
  double alpha = 0.05;
  std::optional<int> top_k;
  std::optional<double> eps;
};

// Personalized-PageRank diffusion S = alpha (I - (1 - alpha) T)^-1, with T the
// row-stochastic transition matrix of the symmetrized adjacency plus
// self-loops. S is sparsified per row (top_k positive entries, or entries >=
// eps), self-loops are dropped and the remaining entries become directed
// edges. Throws std::invalid_argument for bad options and std::runtime_error
// ("diffusion failed") when the system is singular or n > 512.
GeometricGraph RewireDigl(const GeometricGraph& graph, const DiglOptions& options);

// Dense diffusion matrix used by RewireDigl, exposed for verification.
Eigen::MatrixXd DiglDiffusion(const GeometricGraph& graph, double alpha);

// True when the undirected version of the graph has a single component.
bool IsConnected(const GeometricGraph& graph);

std::vector<Edge> CompleteDigraph(int n);

}  // namespace gil

#endif  // GIL_GRAPH_HPP_
