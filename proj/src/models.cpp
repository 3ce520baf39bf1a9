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

#include "gil/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace gil {
namespace {

using ad::Matrix;
using ad::Value;

constexpr double kMasked = -1e30;
constexpr char kMagic[8] = {'G', 'I', 'L', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

Value InverseDegree(std::span<const int> src, int num_nodes) {
  Matrix inv = Matrix::Zero(num_nodes, 1);
  for (int s : src) inv(s, 0) += 1.0;
  for (int i = 0; i < num_nodes; ++i) inv(i, 0) = 1.0 / std::max(inv(i, 0), 1.0);
  return Value::Constant(std::move(inv));
}

Value Dropout(const Value& x, double rate, const ForwardOptions& options) {
  if (!options.training || rate <= 0.0) return x;
  if (options.rng == nullptr) throw std::invalid_argument("dropout needs an rng");
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix mask(x.rows(), x.cols());
  for (ad::Index t = 0; t < mask.size(); ++t) {
    mask.data()[t] = keep(*options.rng) ? 1.0 / (1.0 - rate) : 0.0;
  }
  return ad::Mul(x, Value::Constant(std::move(mask)));
}

// Relative vectors x_i - x_j and squared distances for an edge list.
struct EdgeGeometry {
  Value diff;  // E x 3
  Value dist2;  // E x 1
};

EdgeGeometry Geometry(const Value& x, std::span<const int> src,
                      std::span<const int> dst) {
  Value diff = ad::Sub(ad::GatherRows(x, src), ad::GatherRows(x, dst));
  return {diff, ad::RowSum(ad::Square(diff))};
}

}  // namespace

std::string ArchitectureName(Architecture a) {
  return a == Architecture::kEquivariant ? "egnn" : "attention";
}

Architecture ParseArchitecture(const std::string& name) {
  if (name == "egnn") return Architecture::kEquivariant;
  if (name == "attention") return Architecture::kAttention;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

std::string ActivationName(Activation a) {
  return a == Activation::kSilu ? "silu" : "relu";
}

Activation ParseActivation(const std::string& name) {
  if (name == "silu") return Activation::kSilu;
  if (name == "relu") return Activation::kRelu;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

GraphBatch GraphBatch::FromGraphs(std::span<const GeometricGraph* const> graphs,
                                  bool fully_connect_last_layer) {
  GraphBatch batch;
  int total = 0;
  std::size_t total_edges = 0;
  const int features = graphs.empty() ? 0 : graphs[0]->num_features();
  for (const GeometricGraph* g : graphs) {
    if (g->num_nodes() == 0) throw std::invalid_argument("empty graph");
    if (g->num_features() != features) {
      throw std::invalid_argument("feature width differs across batch");
    }
    total += g->num_nodes();
    total_edges += g->edges().size();
  }
  batch.coords.resize(total, 3);
  batch.features.resize(total, features);
  batch.edge_src.reserve(total_edges);
  batch.edge_dst.reserve(total_edges);
  batch.num_graphs = static_cast<int>(graphs.size());
  int offset = 0;
  for (int gi = 0; gi < batch.num_graphs; ++gi) {
    const GeometricGraph& g = *graphs[gi];
    batch.graph_offset.push_back(offset);
    for (int p = 0; p < g.num_nodes(); ++p) {
      batch.coords.row(offset + p) = g.coords()[p].transpose();
      if (features > 0) batch.features.row(offset + p) = g.features().row(p);
      batch.node_graph.push_back(gi);
    }
    for (const auto& [a, b] : g.edges()) {
      batch.edge_src.push_back(offset + a);
      batch.edge_dst.push_back(offset + b);
    }
    if (fully_connect_last_layer) {
      for (const auto& [a, b] : CompleteDigraph(g.num_nodes())) {
        batch.final_src.push_back(offset + a);
        batch.final_dst.push_back(offset + b);
      }
    }
    offset += g.num_nodes();
  }
  batch.graph_offset.push_back(offset);
  if (!fully_connect_last_layer) {
    batch.final_src = batch.edge_src;
    batch.final_dst = batch.edge_dst;
  }
  return batch;
}

GraphBatch GraphBatch::FromGraph(const GeometricGraph& graph,
                                 bool fully_connect_last_layer) {
  const GeometricGraph* one[] = {&graph};
  return FromGraphs(one, fully_connect_last_layer);
}

Value Linear::operator()(const Value& x) const {
  return ad::Add(ad::MatMul(x, weight), bias);
}

std::size_t Model::num_parameters() const {
  std::size_t count = 0;
  for (const Value& p : params_) count += static_cast<std::size_t>(p.data().size());
  return count;
}

std::vector<double> Model::FlatParameters() const {
  std::vector<double> flat;
  flat.reserve(num_parameters());
  for (const Value& p : params_) {
    flat.insert(flat.end(), p.data().data(), p.data().data() + p.data().size());
  }
  return flat;
}

void Model::SetFlatParameters(std::span<const double> values) {
  if (values.size() != num_parameters()) {
    throw std::invalid_argument("parameter count mismatch");
  }
  std::size_t at = 0;
  for (Value& p : params_) {
    const auto size = static_cast<std::size_t>(p.data().size());
    std::copy_n(values.begin() + at, size, p.mutable_data().data());
    at += size;
  }
}

Linear Model::MakeLinear(int in, int out, std::mt19937_64& rng) {
  // Fan-in scaled uniform initialization.
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(in, 1)));
  std::uniform_real_distribution<double> u(-bound, bound);
  Matrix w(in, out);
  for (ad::Index t = 0; t < w.size(); ++t) w.data()[t] = u(rng);
  Matrix b(1, out);
  for (ad::Index t = 0; t < b.size(); ++t) b.data()[t] = u(rng);
  Linear layer{Value(std::move(w), true), Value(std::move(b), true)};
  params_.push_back(layer.weight);
  params_.push_back(layer.bias);
  return layer;
}

Value Model::Act(const Value& x) const {
  return config_.activation == Activation::kSilu ? ad::Silu(x) : ad::Relu(x);
}

Value Model::ApplyOutput(const Value& raw) const {
  Value y = ad::Scale(raw, config_.output_scale);
  if (config_.head == Head::kGraphScalar && config_.output_shift != 0.0) {
    y = ad::AddScalar(y, config_.output_shift);
  }
  return y;
}

void Model::MakeReadout(std::mt19937_64& rng) {
  readout1_ = MakeLinear(config_.hidden, config_.hidden, rng);
  readout2_ = MakeLinear(config_.hidden, 1, rng);
}

Value Model::GraphReadout(const Value& h, const GraphBatch& batch) const {
  Matrix inv_count(batch.num_graphs, 1);
  for (int g = 0; g < batch.num_graphs; ++g) {
    inv_count(g, 0) = 1.0 / (batch.graph_offset[g + 1] - batch.graph_offset[g]);
  }
  Value pooled = ad::MulColumn(ad::ScatterAddRows(h, batch.node_graph, batch.num_graphs),
                               Value::Constant(std::move(inv_count)));
  return readout2_(Act(readout1_(pooled)));
}

Value Model::Embed(const GraphBatch& batch) const {
  if (batch.features.cols() != config_.in_features) {
    throw std::invalid_argument("model expects " + std::to_string(config_.in_features) +
                                " node features, got " +
                                std::to_string(batch.features.cols()));
  }
  if (config_.in_features == 0) {
    return embed_(Value::Constant(Matrix::Ones(batch.num_nodes(), 1)));
  }
  return embed_(Value::Constant(batch.features));
}

// ---- EquivariantMpn ---------------------------------------------------------

EquivariantMpn::EquivariantMpn(ModelConfig config) : Model(std::move(config)) {
  std::mt19937_64 rng(config_.seed);
  const int hd = config_.hidden;
  embed_ = MakeLinear(std::max(config_.in_features, 1), hd, rng);
  for (int l = 0; l < config_.depth; ++l) {
    EgnnLayer layer;
    layer.edge1 = MakeLinear(2 * hd + 1, hd, rng);
    layer.edge2 = MakeLinear(hd, hd, rng);
    layer.coord1 = MakeLinear(hd, hd, rng);
    layer.coord2 = MakeLinear(hd, 1, rng);
    layer.node1 = MakeLinear(2 * hd, hd, rng);
    layer.node2 = MakeLinear(hd, hd, rng);
    layers_.push_back(std::move(layer));
  }
  MakeReadout(rng);
}

EquivariantMpn::LayerOutput EquivariantMpn::ApplyLayer(
    int layer, const Value& h, const Value& x, std::span<const int> src,
    std::span<const int> dst) const {
  const EgnnLayer& L = layers_.at(layer);
  const int n = static_cast<int>(h.rows());
  EdgeGeometry geo = Geometry(x, src, dst);
  const Value parts[] = {ad::GatherRows(h, src), ad::GatherRows(h, dst), geo.dist2};
  Value m = Act(L.edge2(Act(L.edge1(ad::ConcatColumns(parts)))));
  Value w = L.coord2(Act(L.coord1(m)));
  Value update = ad::ScatterAddRows(ad::MulColumn(geo.diff, w), src, n);
  Value x_next = ad::Add(x, ad::MulColumn(update, InverseDegree(src, n)));
  const Value node_parts[] = {h, ad::ScatterAddRows(m, src, n)};
  Value h_next = L.node2(Act(L.node1(ad::ConcatColumns(node_parts))));
  return {h_next, x_next};
}

Value EquivariantMpn::Forward(const GraphBatch& batch,
                              const ForwardOptions& options) const {
  (void)options;
  if (batch.num_nodes() == 0) throw std::invalid_argument("empty graph");
  Value h = Embed(batch);
  const Value x0 = Value::Constant(batch.coords);
  Value x = x0;
  for (int l = 0; l < config_.depth; ++l) {
    const bool last = l == config_.depth - 1;
    auto out = ApplyLayer(l, h, x, last ? batch.final_src : batch.edge_src,
                          last ? batch.final_dst : batch.edge_dst);
    h = out.h;
    x = out.x;
  }
  if (config_.head == Head::kGraphScalar) return ApplyOutput(GraphReadout(h, batch));
  return ApplyOutput(ad::Sub(x, x0));
}

// ---- AttentionMpn -----------------------------------------------------------

AttentionMpn::AttentionMpn(ModelConfig config) : Model(std::move(config)) {
  if (config_.heads < 1 || config_.hidden % config_.heads != 0) {
    throw std::invalid_argument("attention: hidden width must be divisible by heads");
  }
  std::mt19937_64 rng(config_.seed);
  const int hd = config_.hidden;
  embed_ = MakeLinear(std::max(config_.in_features, 1), hd, rng);
  for (int l = 0; l < config_.depth; ++l) {
    AttentionLayer layer;
    layer.query = MakeLinear(hd, hd, rng);
    layer.key = MakeLinear(hd, hd, rng);
    layer.value = MakeLinear(hd, hd, rng);
    layer.out = MakeLinear(hd, hd, rng);
    layer.distance_gain = Value(Matrix::Zero(1, config_.heads), true);
    params_.push_back(layer.distance_gain);
    layer.ff1 = MakeLinear(hd, config_.ffn, rng);
    layer.ff2 = MakeLinear(config_.ffn, hd, rng);
    layers_.push_back(std::move(layer));
  }
  MakeReadout(rng);
  vector1_ = MakeLinear(2 * hd + 1, hd, rng);
  vector2_ = MakeLinear(hd, 1, rng);
  const int head_dim = hd / config_.heads;
  head_sum_ = Matrix::Zero(hd, config_.heads);
  for (int c = 0; c < hd; ++c) head_sum_(c, c / head_dim) = 1.0;
}

AttentionMpn::EdgeLists AttentionMpn::AttentionEdges(const GraphBatch& batch,
                                                     bool final_layer) const {
  EdgeLists e;
  const auto& src = final_layer ? batch.final_src : batch.edge_src;
  const auto& dst = final_layer ? batch.final_dst : batch.edge_dst;
  e.query = src;
  e.key = dst;
  for (int i = 0; i < batch.num_nodes(); ++i) {
    e.query.push_back(i);
    e.key.push_back(i);
  }
  const auto count = static_cast<ad::Index>(e.query.size());
  e.distance.resize(count, 1);
  e.mask = Matrix::Zero(count, config_.heads);
  for (ad::Index t = 0; t < count; ++t) {
    const double d = (batch.coords.row(e.query[t]) - batch.coords.row(e.key[t])).norm();
    e.distance(t, 0) = d;
    if (config_.multiscale) {
      const int bars = std::min<int>(config_.heads, config_.distance_bars.size());
      for (int h = 0; h < bars; ++h) {
        if (d > config_.distance_bars[h]) e.mask(t, h) = kMasked;
      }
    }
  }
  return e;
}

Value AttentionMpn::AttentionLogits(int layer, const Value& h,
                                    const EdgeLists& e) const {
  const AttentionLayer& L = layers_.at(layer);
  const double inv_sqrt_dim = 1.0 / std::sqrt(static_cast<double>(config_.hidden / config_.heads));
  Value q = ad::GatherRows(L.query(h), e.query);
  Value k = ad::GatherRows(L.key(h), e.key);
  Value logits = ad::Scale(ad::MatMul(ad::Mul(q, k), Value::Constant(head_sum_)), inv_sqrt_dim);
  Value bias = ad::MatMul(Value::Constant(e.distance), ad::Softplus(L.distance_gain));
  logits = ad::Sub(logits, bias);
  if (config_.multiscale) logits = ad::Add(logits, Value::Constant(e.mask));
  return logits;
}

Value AttentionMpn::Block(int layer, const Value& h, const EdgeLists& e,
                          const ForwardOptions& options) const {
  const AttentionLayer& L = layers_.at(layer);
  const auto n = h.rows();
  Value alpha = ad::SegmentSoftmax(AttentionLogits(layer, h, e), e.query, n);
  Value spread = ad::MatMul(alpha, Value::Constant(head_sum_.transpose()));
  Value messages = ad::Mul(spread, ad::GatherRows(L.value(h), e.key));
  Value attended = L.out(ad::ScatterAddRows(messages, e.query, n));
  Value x = ad::Add(h, Dropout(attended, config_.dropout, options));
  Value ff = L.ff2(Act(L.ff1(x)));
  return ad::Add(x, Dropout(ff, config_.dropout, options));
}

Value AttentionMpn::Forward(const GraphBatch& batch, const ForwardOptions& options) const {
  if (batch.num_nodes() == 0) throw std::invalid_argument("empty graph");
  Value h = Embed(batch);
  const EdgeLists main = AttentionEdges(batch, false);
  const EdgeLists last = AttentionEdges(batch, true);
  for (int l = 0; l < config_.depth; ++l) {
    h = Block(l, h, l == config_.depth - 1 ? last : main, options);
  }
  if (config_.head == Head::kGraphScalar) return ApplyOutput(GraphReadout(h, batch));
  const int n = batch.num_nodes();
  const Value x = Value::Constant(batch.coords);
  EdgeGeometry geo = Geometry(x, batch.final_src, batch.final_dst);
  const Value parts[] = {ad::GatherRows(h, batch.final_src),
                         ad::GatherRows(h, batch.final_dst), geo.dist2};
  Value w = vector2_(Act(vector1_(ad::ConcatColumns(parts))));
  Value v = ad::ScatterAddRows(ad::MulColumn(geo.diff, w), batch.final_src, n);
  return ApplyOutput(ad::MulColumn(v, InverseDegree(batch.final_src, n)));
}

AttentionMpn::AttentionMap AttentionMpn::AttentionWeights(const GraphBatch& batch,
                                                          int layer) const {
  ad::NoGradGuard no_grad;
  Value h = Embed(batch);
  const EdgeLists main = AttentionEdges(batch, false);
  const EdgeLists last = AttentionEdges(batch, true);
  for (int l = 0; l < layer; ++l) {
    h = Block(l, h, l == config_.depth - 1 ? last : main, {});
  }
  const EdgeLists& e = layer == config_.depth - 1 ? last : main;
  Value alpha = ad::SegmentSoftmax(AttentionLogits(layer, h, e), e.query, h.rows());
  return {alpha.data(), e.query, e.key};
}

// ---- Factory and inference ----------------------------------------------------

std::unique_ptr<Model> MakeModel(const ModelConfig& config) {
  if (config.hidden < 1 || config.depth < 1 || config.in_features < 0) {
    throw std::invalid_argument("invalid model dimensions");
  }
  switch (config.architecture) {
    case Architecture::kEquivariant:
      return std::make_unique<EquivariantMpn>(config);
    case Architecture::kAttention:
      return std::make_unique<AttentionMpn>(config);
  }
  throw std::invalid_argument("unknown architecture");
}

double PredictGraph(const Model& model, const GeometricGraph& graph) {
  if (model.config().head != Head::kGraphScalar) {
    throw std::invalid_argument("model head is not graph-scalar");
  }
  if (graph.num_nodes() == 0) throw std::invalid_argument("empty graph");
  ad::NoGradGuard no_grad;
  return model.Forward(GraphBatch::FromGraph(graph)).item();
}

double PredictGraph(const Model& model, const Subgraph& subgraph) {
  return PredictGraph(model, subgraph.graph());
}

std::vector<Vec3> PredictNode(const Model& model, const GeometricGraph& graph) {
  if (model.config().head != Head::kNodeVector) {
    throw std::invalid_argument("model head is not per-node-vector");
  }
  if (graph.num_nodes() == 0) throw std::invalid_argument("empty graph");
  ad::NoGradGuard no_grad;
  const Matrix out = model.Forward(GraphBatch::FromGraph(graph)).data();
  std::vector<Vec3> result(out.rows());
  for (ad::Index i = 0; i < out.rows(); ++i) result[i] = out.row(i).transpose();
  return result;
}

// ---- Checkpoints --------------------------------------------------------------

namespace {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void U32(std::uint32_t v) { Bytes(v, 4); }
  void U64(std::uint64_t v) { Bytes(v, 8); }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }

 private:
  void Bytes(std::uint64_t v, int count) {
    char buf[8];
    for (int b = 0; b < count; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xff);
    out_.write(buf, count);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint32_t U32() { return static_cast<std::uint32_t>(Bytes(4)); }
  std::uint64_t U64() { return Bytes(8); }
  double F64() { return std::bit_cast<double>(U64()); }

 private:
  std::uint64_t Bytes(int count) {
    unsigned char buf[8];
    in_.read(reinterpret_cast<char*>(buf), count);
    if (!in_) throw std::runtime_error("checkpoint truncated");
    std::uint64_t v = 0;
    for (int b = 0; b < count; ++b) v |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    return v;
  }
  std::istream& in_;
};

}  // namespace

void SaveCheckpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  const ModelConfig& c = model.config();
  out.write(kMagic, sizeof(kMagic));
  Writer w(out);
  w.U32(kCheckpointVersion);
  w.U32(static_cast<std::uint32_t>(c.architecture));
  w.U32(static_cast<std::uint32_t>(c.head));
  w.U32(static_cast<std::uint32_t>(c.activation));
  w.U32(static_cast<std::uint32_t>(c.in_features));
  w.U32(static_cast<std::uint32_t>(c.hidden));
  w.U32(static_cast<std::uint32_t>(c.depth));
  w.U32(static_cast<std::uint32_t>(c.heads));
  w.U32(static_cast<std::uint32_t>(c.ffn));
  w.U32(c.multiscale ? 1u : 0u);
  w.U32(static_cast<std::uint32_t>(c.construction.kind));
  w.U32(static_cast<std::uint32_t>(c.construction.k));
  w.F64(c.construction.radius);
  w.F64(c.dropout);
  w.F64(c.output_scale);
  w.F64(c.output_shift);
  w.U64(c.seed);
  w.U32(static_cast<std::uint32_t>(c.distance_bars.size()));
  for (double bar : c.distance_bars) w.F64(bar);
  const std::vector<double> flat = model.FlatParameters();
  w.U64(flat.size());
  for (double v : flat) w.F64(v);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

std::unique_ptr<Model> LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint: " + path.string());
  }
  Reader r(in);
  if (r.U32() != kCheckpointVersion) throw std::runtime_error("unsupported checkpoint version");
  ModelConfig c;
  c.architecture = static_cast<Architecture>(r.U32());
  c.head = static_cast<Head>(r.U32());
  c.activation = static_cast<Activation>(r.U32());
  c.in_features = static_cast<int>(r.U32());
  c.hidden = static_cast<int>(r.U32());
  c.depth = static_cast<int>(r.U32());
  c.heads = static_cast<int>(r.U32());
  c.ffn = static_cast<int>(r.U32());
  c.multiscale = r.U32() != 0;
  c.construction.kind = static_cast<Construction::Kind>(r.U32());
  c.construction.k = static_cast<int>(r.U32());
  c.construction.radius = r.F64();
  c.dropout = r.F64();
  c.output_scale = r.F64();
  c.output_shift = r.F64();
  c.seed = r.U64();
  c.distance_bars.resize(r.U32());
  for (double& bar : c.distance_bars) bar = r.F64();
  auto model = MakeModel(c);
  const std::uint64_t count = r.U64();
  if (count != model->num_parameters()) {
    throw std::runtime_error("checkpoint parameter count does not match architecture");
  }
  std::vector<double> flat(count);
  for (double& v : flat) v = r.F64();
  model->SetFlatParameters(flat);
  return model;
}

}  // namespace gil
