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

#include "gil/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace gil {
namespace {

constexpr int kMaxDiglNodes = 512;

void CheckNonEmpty(std::size_t n) {
  if (n == 0) throw std::invalid_argument("empty graph");
}

std::vector<Edge> KnnEdges(const std::vector<Vec3>& coords, int k) {
  const int n = static_cast<int>(coords.size());
  const int kk = std::min(k, n - 1);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * std::max(kk, 0));
  std::vector<std::pair<double, int>> candidates;
  for (int i = 0; i < n; ++i) {
    candidates.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) candidates.emplace_back((coords[i] - coords[j]).squaredNorm(), j);
    }
    // Pair ordering breaks distance ties on the lower position.
    std::partial_sort(candidates.begin(), candidates.begin() + kk,
                      candidates.end());
    for (int t = 0; t < kk; ++t) edges.emplace_back(i, candidates[t].second);
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

std::vector<Edge> RBallEdges(const std::vector<Vec3>& coords, double r) {
  const int n = static_cast<int>(coords.size());
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && (coords[i] - coords[j]).norm() <= r) edges.emplace_back(i, j);
    }
  }
  return edges;
}

std::vector<Edge> EdgesFor(const std::vector<Vec3>& coords,
                           const Construction& c) {
  switch (c.kind) {
    case Construction::Kind::kKnn:
      if (c.k < 1) throw std::invalid_argument("knn: k must be >= 1");
      return KnnEdges(coords, c.k);
    case Construction::Kind::kFullyConnected:
      return CompleteDigraph(static_cast<int>(coords.size()));
    case Construction::Kind::kRBall:
      if (!(c.radius > 0)) throw std::invalid_argument("rball: r must be > 0");
      return RBallEdges(coords, c.radius);
    case Construction::Kind::kExplicit:
      return {};
  }
  return {};
}

NodeData DefaultNodes(std::span<const Vec3> coords) {
  NodeData nodes;
  nodes.coords.assign(coords.begin(), coords.end());
  return nodes;
}

}  // namespace

std::string Construction::ToString() const {
  switch (kind) {
    case Kind::kKnn:
      return "knn(" + std::to_string(k) + ")";
    case Kind::kFullyConnected:
      return "fc";
    case Kind::kRBall:
      return "rball(" + std::to_string(radius) + ")";
    case Kind::kExplicit:
      return "explicit";
  }
  return "unknown";
}

std::vector<Edge> CompleteDigraph(int n) {
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) edges.emplace_back(i, j);
    }
  }
  return edges;
}

GeometricGraph::GeometricGraph(NodeData nodes, std::vector<Edge> edges,
                               Construction construction)
    : ids_(std::move(nodes.ids)),
      coords_(std::move(nodes.coords)),
      features_(std::move(nodes.features)),
      edges_(std::move(edges)),
      construction_(construction) {
  const int n = static_cast<int>(coords_.size());
  if (ids_.empty()) {
    ids_.resize(n);
    std::iota(ids_.begin(), ids_.end(), 0);
  }
  if (static_cast<int>(ids_.size()) != n) {
    throw std::invalid_argument("node id count does not match coordinates");
  }
  if (features_.size() == 0) features_.resize(n, 0);
  if (features_.rows() != n) {
    throw std::invalid_argument("feature rows do not match node count");
  }
  {
    std::vector<int> sorted = ids_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("duplicate node id");
    }
  }
  for (const auto& c : coords_) {
    if (!c.allFinite()) throw std::invalid_argument("non-finite coordinate");
  }
  for (const auto& [a, b] : edges_) {
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (a == b) throw std::invalid_argument("self-loop");
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

int GeometricGraph::position_of(int id) const {
  for (int p = 0; p < num_nodes(); ++p) {
    if (ids_[p] == id) return p;
  }
  return -1;
}

std::vector<int> GeometricGraph::neighbor_ids(int id) const {
  const int p = position_of(id);
  std::vector<int> out;
  for (const auto& [a, b] : edges_) {
    if (a == p) out.push_back(ids_[b]);
  }
  return out;
}

std::vector<int> GeometricGraph::out_degrees() const {
  std::vector<int> deg(num_nodes(), 0);
  for (const auto& e : edges_) ++deg[e.first];
  return deg;
}

GeometricGraph BuildGraph(NodeData nodes, const Construction& construction) {
  CheckNonEmpty(nodes.coords.size());
  auto edges = EdgesFor(nodes.coords, construction);
  return GeometricGraph(std::move(nodes), std::move(edges), construction);
}

GeometricGraph BuildKnn(std::span<const Vec3> coords, int k) {
  return BuildGraph(DefaultNodes(coords), Construction::Knn(k));
}

GeometricGraph BuildFullyConnected(std::span<const Vec3> coords) {
  return BuildGraph(DefaultNodes(coords), Construction::FullyConnected());
}

GeometricGraph BuildRBall(std::span<const Vec3> coords, double r) {
  if (!(r > 0)) throw std::invalid_argument("rball: r must be > 0");
  return BuildGraph(DefaultNodes(coords), Construction::RBall(r));
}

namespace {

GeometricGraph Restrict(const GeometricGraph& graph,
                        const std::vector<int>& keep_positions) {
  if (keep_positions.empty()) throw std::invalid_argument("empty subgraph");
  NodeData nodes;
  const int kept = static_cast<int>(keep_positions.size());
  nodes.features.resize(kept, graph.num_features());
  std::vector<int> new_pos(graph.num_nodes(), -1);
  for (int t = 0; t < kept; ++t) {
    const int p = keep_positions[t];
    new_pos[p] = t;
    nodes.ids.push_back(graph.node_ids()[p]);
    nodes.coords.push_back(graph.coords()[p]);
    nodes.features.row(t) = graph.features().row(p);
  }
  const Construction& c = graph.construction();
  if (c.kind != Construction::Kind::kExplicit) {
    return BuildGraph(std::move(nodes), c);
  }
  std::vector<Edge> induced;
  for (const auto& [a, b] : graph.edges()) {
    if (new_pos[a] >= 0 && new_pos[b] >= 0) induced.emplace_back(new_pos[a], new_pos[b]);
  }
  return GeometricGraph(std::move(nodes), std::move(induced), c);
}

}  // namespace

Subgraph RemoveNodes(const GeometricGraph& graph, const std::set<int>& drop) {
  std::vector<int> keep_positions;
  std::vector<int> kept_ids;
  for (int id : drop) {
    if (graph.position_of(id) < 0) {
      throw std::invalid_argument("unknown node id " + std::to_string(id));
    }
  }
  for (int p = 0; p < graph.num_nodes(); ++p) {
    if (!drop.contains(graph.node_ids()[p])) {
      keep_positions.push_back(p);
      kept_ids.push_back(graph.node_ids()[p]);
    }
  }
  if (keep_positions.empty()) throw std::invalid_argument("empty subgraph");
  if (drop.empty()) return Subgraph(&graph, std::move(kept_ids), graph);
  return Subgraph(&graph, std::move(kept_ids), Restrict(graph, keep_positions));
}

GeometricGraph KeepPositions(const GeometricGraph& graph, std::uint64_t keep) {
  if (graph.num_nodes() > 64) {
    throw std::invalid_argument("KeepPositions supports at most 64 nodes");
  }
  std::vector<int> positions;
  for (int p = 0; p < graph.num_nodes(); ++p) {
    if ((keep >> p) & 1u) positions.push_back(p);
  }
  if (static_cast<int>(positions.size()) == graph.num_nodes()) return graph;
  return Restrict(graph, positions);
}

GeometricGraph RewireFullyAdjacent(const GeometricGraph& graph) {
  CheckNonEmpty(graph.num_nodes());
  return GeometricGraph(graph.node_data(), CompleteDigraph(graph.num_nodes()),
                        Construction::FullyConnected());
}

Eigen::MatrixXd DiglDiffusion(const GeometricGraph& graph, double alpha) {
  const int n = graph.num_nodes();
  CheckNonEmpty(n);
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("digl: alpha must be in (0, 1]");
  }
  if (n > kMaxDiglNodes) throw std::runtime_error("diffusion failed: graph too large");
  Eigen::MatrixXd adj = Eigen::MatrixXd::Identity(n, n);
  for (const auto& [a, b] : graph.edges()) {
    adj(a, b) = 1.0;
    adj(b, a) = 1.0;
  }
  const Eigen::VectorXd deg = adj.rowwise().sum();
  const Eigen::MatrixXd transition = deg.cwiseInverse().asDiagonal() * adj;
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(n, n) - (1.0 - alpha) * transition;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw std::runtime_error("diffusion failed");
  Eigen::MatrixXd s = alpha * lu.inverse();
  if (!s.allFinite()) throw std::runtime_error("diffusion failed");
  return s;
}

GeometricGraph RewireDigl(const GeometricGraph& graph, const DiglOptions& options) {
  if (options.top_k.has_value() == options.eps.has_value()) {
    throw std::invalid_argument("digl: exactly one of top_k / eps is required");
  }
  if (options.top_k && *options.top_k < 1) {
    throw std::invalid_argument("digl: top_k must be >= 1");
  }
  if (options.eps && !(*options.eps > 0)) {
    throw std::invalid_argument("digl: eps must be > 0");
  }
  const Eigen::MatrixXd s = DiglDiffusion(graph, options.alpha);
  const int n = graph.num_nodes();
  std::vector<Edge> edges;
  std::vector<std::pair<double, int>> row;
  for (int i = 0; i < n; ++i) {
    row.clear();
    for (int j = 0; j < n; ++j) {
      if (s(i, j) > 0.0) row.emplace_back(-s(i, j), j);
    }
    if (options.top_k) {
      const std::size_t keep = std::min<std::size_t>(*options.top_k, row.size());
      std::partial_sort(row.begin(), row.begin() + keep, row.end());
      row.resize(keep);
    } else {
      std::erase_if(row, [&](const auto& e) { return -e.first < *options.eps; });
    }
    for (const auto& [neg, j] : row) {
      if (j != i) edges.emplace_back(i, j);
    }
  }
  return GeometricGraph(graph.node_data(), std::move(edges), Construction::Explicit());
}

bool IsConnected(const GeometricGraph& graph) {
  const int n = graph.num_nodes();
  if (n <= 1) return true;
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : graph.edges()) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

}  // namespace gil
