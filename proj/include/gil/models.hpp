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

// Geometric predictors over GeometricGraph inputs:
//
//  * EquivariantMpn: E(n)-equivariant message passing (edge, node and
//    coordinate MLPs per layer). Scalar graph readouts are invariant to
//    rotations/translations; per-node vector readouts (final minus initial
//    coordinates) rotate with the input and ignore translations.
//  * AttentionMpn: multi-head attention over each node's incoming edges
//    (plus itself) with a learned per-head pairwise-distance bias, residual
//    feed-forward blocks and optional multi-scale distance masks.
//
// Both take a GraphBatch, so several graphs (or subgraphs) are evaluated in
// one pass. Forward passes in inference mode are deterministic and safe to
// run concurrently on a shared model.

#ifndef GIL_MODELS_HPP_
#define GIL_MODELS_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gil/autodiff.hpp"
#include "gil/graph.hpp"

namespace gil {

enum class Architecture : std::uint32_t { kEquivariant = 1, kAttention = 2 };
enum class Head : std::uint32_t { kGraphScalar = 0, kNodeVector = 1 };
enum class Activation : std::uint32_t { kSilu = 0, kRelu = 1 };

std::string ArchitectureName(Architecture a);
Architecture ParseArchitecture(const std::string& name);
std::string ActivationName(Activation a);
Activation ParseActivation(const std::string& name);

struct ModelConfig {
  Architecture architecture = Architecture::kEquivariant;
  Head head = Head::kGraphScalar;
  int in_features = 0;
  int hidden = 32;
  int depth = 3;
  int heads = 4;          // Attention only.
  int ffn = 128;          // Attention only.
  double dropout = 0.1;   // Attention only, training mode only.
  bool multiscale = false;
  std::vector<double> distance_bars = {0.8, 1.6, 3.0};
  Activation activation = Activation::kSilu;
  std::uint64_t seed = 0;
  // Affine map applied to the raw output: y = scale * raw + shift. Shift is
  // only used by scalar heads (a vector shift would break equivariance).
  double output_scale = 1.0;
  double output_shift = 0.0;
  // Graph construction the model was trained on, recorded for analysis.
  Construction construction = Construction::Knn(8);
};

// Several graphs flattened into one node/edge list.
struct GraphBatch {
  ad::Matrix coords;            // N x 3
  ad::Matrix features;          // N x F
  std::vector<int> edge_src;    // Aggregating endpoint.
  std::vector<int> edge_dst;    // Neighbor endpoint.
  // Connectivity used by the last message-passing layer (+FA). Equal to the
  // main edge list when no override was requested.
  std::vector<int> final_src;
  std::vector<int> final_dst;
  std::vector<int> node_graph;  // Graph index per node.
  std::vector<int> graph_offset;  // First node of each graph, plus N at the end.
  int num_graphs = 0;

  int num_nodes() const { return static_cast<int>(coords.rows()); }

  // Throws std::invalid_argument("empty graph") for node-less graphs and on
  // mismatched feature widths.
  static GraphBatch FromGraphs(std::span<const GeometricGraph* const> graphs,
                               bool fully_connect_last_layer = false);
  static GraphBatch FromGraph(const GeometricGraph& graph,
                              bool fully_connect_last_layer = false);
};

struct ForwardOptions {
  bool training = false;
  std::mt19937_64* rng = nullptr;  // Dropout noise; required when training.
};

struct Linear {
  ad::Value weight;  // in x out
  ad::Value bias;    // 1 x out
  ad::Value operator()(const ad::Value& x) const;
};

class Model {
 public:
  explicit Model(ModelConfig config) : config_(std::move(config)) {}
  virtual ~Model() = default;

  // Graph-scalar heads return num_graphs x 1, node-vector heads N x 3.
  virtual ad::Value Forward(const GraphBatch& batch,
                            const ForwardOptions& options = {}) const = 0;

  const ModelConfig& config() const { return config_; }
  ModelConfig& mutable_config() { return config_; }
  const std::vector<ad::Value>& parameters() const { return params_; }
  std::size_t num_parameters() const;

  // Parameter values in registration order.
  std::vector<double> FlatParameters() const;
  void SetFlatParameters(std::span<const double> values);

 protected:
  Linear MakeLinear(int in, int out, std::mt19937_64& rng);
  ad::Value Act(const ad::Value& x) const;
  ad::Value ApplyOutput(const ad::Value& raw) const;
  // Mean over each graph's nodes followed by a two-layer MLP.
  ad::Value GraphReadout(const ad::Value& h, const GraphBatch& batch) const;
  void MakeReadout(std::mt19937_64& rng);
  ad::Value Embed(const GraphBatch& batch) const;

  ModelConfig config_;
  std::vector<ad::Value> params_;
  Linear embed_;
  Linear readout1_;
  Linear readout2_;
};

struct EgnnLayer {
  Linear edge1, edge2;    // phi_e
  Linear coord1, coord2;  // phi_x
  Linear node1, node2;    // phi_h
};

class EquivariantMpn final : public Model {
 public:
  explicit EquivariantMpn(ModelConfig config);

  ad::Value Forward(const GraphBatch& batch,
                    const ForwardOptions& options = {}) const override;

  // One message-passing layer over an explicit edge list:
  //   m_ij = phi_e(h_i, h_j, |x_i - x_j|^2)
  //   x'_i = x_i + sum_j (x_i - x_j) phi_x(m_ij) / max(deg_i, 1)
  //   h'_i = phi_h(h_i, sum_j m_ij)
  struct LayerOutput {
    ad::Value h;
    ad::Value x;
  };
  LayerOutput ApplyLayer(int layer, const ad::Value& h, const ad::Value& x,
                         std::span<const int> src, std::span<const int> dst) const;

  const std::vector<EgnnLayer>& layers() const { return layers_; }
  std::vector<EgnnLayer>& mutable_layers() { return layers_; }

 private:
  std::vector<EgnnLayer> layers_;
};

struct AttentionLayer {
  Linear query, key, value, out;
  ad::Value distance_gain;  // 1 x heads; bias = -softplus(gain) * distance.
  Linear ff1, ff2;
};

class AttentionMpn final : public Model {
 public:
  explicit AttentionMpn(ModelConfig config);

  ad::Value Forward(const GraphBatch& batch,
                    const ForwardOptions& options = {}) const override;

  // Attention weights of `layer` for every (query, key) pair in the
  // attention edge list (graph edges plus self-loops), E x heads, together
  // with the query index of each row.
  struct AttentionMap {
    ad::Matrix weights;
    std::vector<int> query;
    std::vector<int> key;
  };
  AttentionMap AttentionWeights(const GraphBatch& batch, int layer) const;

 private:
  struct EdgeLists {
    std::vector<int> query, key;
    ad::Matrix distance;  // E x 1
    ad::Matrix mask;      // E x heads, 0 or a large negative number.
  };
  EdgeLists AttentionEdges(const GraphBatch& batch, bool final_layer) const;
  ad::Value AttentionLogits(int layer, const ad::Value& h, const EdgeLists& e) const;
  ad::Value Block(int layer, const ad::Value& h, const EdgeLists& e,
                  const ForwardOptions& options) const;

  std::vector<AttentionLayer> layers_;
  ad::Matrix head_sum_;  // hidden x heads indicator.
  Linear vector1_, vector2_;
};

std::unique_ptr<Model> MakeModel(const ModelConfig& config);

// Inference-mode helpers. Throw std::invalid_argument on empty graphs and on
// a head mismatch.
double PredictGraph(const Model& model, const GeometricGraph& graph);
double PredictGraph(const Model& model, const Subgraph& subgraph);
std::vector<Vec3> PredictNode(const Model& model, const GeometricGraph& graph);

// Checkpoint layout (all integers and floats little-endian):
//   bytes 0..7    magic "GILCKPT1"
//   u32 version (1), u32 architecture, u32 head, u32 activation,
//   u32 in_features, u32 hidden, u32 depth, u32 heads, u32 ffn,
//   u32 multiscale, u32 construction kind, u32 construction k,
//   f64 construction radius, f64 dropout, f64 output_scale,
//   f64 output_shift, u64 seed, u32 bar count, f64 x bar count,
//   u64 parameter count, f64 x parameter count.
void SaveCheckpoint(const Model& model, const std::filesystem::path& path);
std::unique_ptr<Model> LoadCheckpoint(const std::filesystem::path& path);

}  // namespace gil

#endif  // GIL_MODELS_HPP_
