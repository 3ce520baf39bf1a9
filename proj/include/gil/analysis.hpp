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

// Set-function views of a trained predictor on one graph: f(S) is the
// model's output on the subgraph that keeps the node positions in S, with
// connectivity rebuilt by the graph's construction policy.

#ifndef GIL_ANALYSIS_HPP_
#define GIL_ANALYSIS_HPP_

#include <span>

#include "gil/graph.hpp"
#include "gil/interactions.hpp"
#include "gil/models.hpp"

namespace gil {

struct GameOptions {
  // Subgraphs evaluated per forward pass.
  int batch_size = 64;
  // Evaluate with the +FA last layer.
  bool fully_connect_last_layer = false;
};

// Memoized graph-level game. The model must have a graph-scalar head and
// outlive the returned function; the graph is copied. n <= 64.
SetFunction GraphGame(const Model& model, const GeometricGraph& graph,
                      const GameOptions& options = {});

// Memoized node-level game returning an n x 3 matrix (rows of absent nodes
// are zero). Requires a node-vector head.
NodeSetFunction NodeGame(const Model& model, const GeometricGraph& graph,
                         const GameOptions& options = {});

// Strength profile of `model` over `graphs` at the level matching its head.
StrengthProfile ModelStrengthProfile(const Model& model,
                                     std::span<const GeometricGraph> graphs,
                                     const ProfileOptions& profile,
                                     const GameOptions& options = {});

Level HeadLevel(Head head);

}  // namespace gil

#endif  // GIL_ANALYSIS_HPP_
