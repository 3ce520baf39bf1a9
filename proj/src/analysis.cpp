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

#include "gil/analysis.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

namespace gil {
namespace {

void CheckGraph(const GeometricGraph& graph) {
  if (graph.num_nodes() == 0) throw std::invalid_argument("empty graph");
  if (graph.num_nodes() > 64) throw std::invalid_argument("games support at most 64 nodes");
}

// Runs the model on the subgraphs selected by each mask.
ad::Matrix ForwardSubsets(const Model& model, const GeometricGraph& graph,
                          std::span<const NodeSet> sets, bool fa,
                          std::vector<int>* offsets) {
  std::vector<GeometricGraph> parts;
  parts.reserve(sets.size());
  for (NodeSet s : sets) parts.push_back(KeepPositions(graph, s));
  std::vector<const GeometricGraph*> ptrs;
  for (const GeometricGraph& g : parts) ptrs.push_back(&g);
  const GraphBatch batch = GraphBatch::FromGraphs(ptrs, fa);
  if (offsets) *offsets = batch.graph_offset;
  ad::NoGradGuard no_grad;
  return model.Forward(batch).data();
}

}  // namespace

Level HeadLevel(Head head) {
  return head == Head::kGraphScalar ? Level::kGraph : Level::kNode;
}

SetFunction GraphGame(const Model& model, const GeometricGraph& graph,
                      const GameOptions& options) {
  if (model.config().head != Head::kGraphScalar) {
    throw std::invalid_argument("graph game needs a graph-scalar head");
  }
  CheckGraph(graph);
  auto shared = std::make_shared<const GeometricGraph>(graph);
  const bool fa = options.fully_connect_last_layer;
  SetFunction::BatchEvaluator eval = [&model, shared, fa](std::span<const NodeSet> sets) {
    const ad::Matrix out = ForwardSubsets(model, *shared, sets, fa, nullptr);
    std::vector<double> values(sets.size());
    for (std::size_t t = 0; t < sets.size(); ++t) values[t] = out(t, 0);
    return values;
  };
  return SetFunction(graph.num_nodes(), std::move(eval), false, true,
                     options.batch_size);
}

NodeSetFunction NodeGame(const Model& model, const GeometricGraph& graph,
                         const GameOptions& options) {
  if (model.config().head != Head::kNodeVector) {
    throw std::invalid_argument("node game needs a node-vector head");
  }
  CheckGraph(graph);
  auto shared = std::make_shared<const GeometricGraph>(graph);
  const bool fa = options.fully_connect_last_layer;
  const int n = graph.num_nodes();
  NodeSetFunction::BatchEvaluator eval = [&model, shared, fa,
                                          n](std::span<const NodeSet> sets) {
    std::vector<int> offsets;
    const ad::Matrix out = ForwardSubsets(model, *shared, sets, fa, &offsets);
    std::vector<Eigen::MatrixXd> values;
    values.reserve(sets.size());
    for (std::size_t t = 0; t < sets.size(); ++t) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, out.cols());
      int row = offsets[t];
      for (int p = 0; p < n; ++p) {
        if (sets[t] & Bit(p)) m.row(p) = out.row(row++);
      }
      values.push_back(std::move(m));
    }
    return values;
  };
  return NodeSetFunction(n, std::move(eval), false, true, options.batch_size);
}

StrengthProfile ModelStrengthProfile(const Model& model,
                                     std::span<const GeometricGraph> graphs,
                                     const ProfileOptions& profile,
                                     const GameOptions& options) {
  if (HeadLevel(model.config().head) == Level::kGraph) {
    std::vector<SetFunction> games;
    for (const GeometricGraph& g : graphs) games.push_back(GraphGame(model, g, options));
    return GraphStrengthProfile(games, profile);
  }
  std::vector<NodeSetFunction> games;
  for (const GeometricGraph& g : graphs) games.push_back(NodeGame(model, g, options));
  return NodeStrengthProfile(games, profile);
}

}  // namespace gil
