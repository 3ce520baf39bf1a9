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

#include "gil/isgr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gil/analysis.hpp"
#include "gil/parallel.hpp"

namespace gil {

std::string BaselineName(Baseline baseline) {
  return baseline == Baseline::kPrevious ? "previous" : "initial";
}

Baseline ParseBaseline(const std::string& name) {
  if (name == "previous") return Baseline::kPrevious;
  if (name == "initial") return Baseline::kInitial;
  throw std::invalid_argument("unknown ISGR baseline '" + name + "'");
}

int MoveToward(int k, int m_star) {
  const int sum = k + m_star;
  if (sum % 2 == 0) return sum / 2;
  return m_star > k ? (sum + 1) / 2 : (sum - 1) / 2;
}

IsgrState::IsgrState(int n, int k0, double threshold, int interval, Baseline baseline)
    : n_(n), threshold_(threshold), interval_(interval), baseline_(baseline) {
  if (n < 2) throw std::invalid_argument("ISGR needs graphs with at least two nodes");
  if (interval < 1) throw std::invalid_argument("ISGR interval must be >= 1");
  if (std::isnan(threshold)) throw std::invalid_argument("ISGR threshold is NaN");
  k_ = std::clamp(k0, 1, n - 1);
}

bool IsgrState::Step(int epoch, const StrengthProfile& profile) {
  if (!history_.empty() && epoch <= history_.back().epoch) {
    throw std::invalid_argument("ISGR epochs must increase");
  }
  IsgrRecord record;
  record.epoch = epoch;
  record.profile = profile;
  if (last_) {
    if (last_->orders != profile.orders || last_->level != profile.level) {
      throw std::invalid_argument("ISGR profile order grids differ");
    }
    int best = 0;
    double best_delta = -std::numeric_limits<double>::infinity();
    for (std::size_t o = 0; o < profile.orders.size(); ++o) {
      const double delta = profile.strength[o] - last_->strength[o];
      if (delta > best_delta) {
        best_delta = delta;
        best = static_cast<int>(o);
      }
    }
    record.compared = true;
    record.max_delta = best_delta;
    if (best_delta >= threshold_) {
      record.m_star = profile.orders[best];
      record.fired = true;
      k_ = std::clamp(MoveToward(k_, record.m_star), 1, n_ - 1);
    }
  }
  if (!last_ || baseline_ == Baseline::kPrevious) last_ = profile;
  record.k = k_;
  history_.push_back(std::move(record));
  return history_.back().fired;
}

std::string RewireName(Rewire rewire) {
  switch (rewire) {
    case Rewire::kNone: return "none";
    case Rewire::kIsgr: return "isgr";
    case Rewire::kFullyAdjacent: return "fa";
    case Rewire::kDigl: return "digl";
  }
  return "none";
}

Rewire ParseRewire(const std::string& name) {
  if (name == "none") return Rewire::kNone;
  if (name == "isgr") return Rewire::kIsgr;
  if (name == "fa") return Rewire::kFullyAdjacent;
  if (name == "digl") return Rewire::kDigl;
  throw std::invalid_argument("unknown rewiring '" + name + "'");
}

ModelConfig ResolveModelConfig(const ModelConfig& base,
                               std::span<const DatasetRecord> train) {
  if (train.empty()) throw std::invalid_argument("training split is empty");
  ModelConfig cfg = base;
  const DatasetRecord& first = train.front();
  cfg.head = first.graph_target ? Head::kGraphScalar : Head::kNodeVector;
  cfg.in_features = first.node_features.empty()
                        ? 0
                        : static_cast<int>(first.node_features[0].size());
  double sum = 0, sum_sq = 0;
  std::int64_t count = 0;
  for (const DatasetRecord& r : train) {
    if (r.graph_target.has_value() != (cfg.head == Head::kGraphScalar)) {
      throw std::invalid_argument("records mix graph and node targets");
    }
    if (r.graph_target) {
      sum += *r.graph_target;
      sum_sq += *r.graph_target * *r.graph_target;
      ++count;
    } else {
      for (const Vec3& v : *r.node_targets) {
        sum_sq += v.squaredNorm();
        count += 3;
      }
    }
  }
  if (cfg.head == Head::kGraphScalar) {
    const double mean = sum / count;
    const double var = std::max(sum_sq / count - mean * mean, 0.0);
    cfg.output_shift = mean;
    cfg.output_scale = var > 0 ? std::sqrt(var) : 1.0;
  } else {
    const double rms = std::sqrt(sum_sq / count);
    cfg.output_shift = 0;
    cfg.output_scale = rms > 0 ? rms : 1.0;
  }
  return cfg;
}

namespace {

ad::Matrix Targets(std::span<const DatasetRecord* const> records) {
  if (records.front()->graph_target) {
    ad::Matrix t(records.size(), 1);
    for (std::size_t r = 0; r < records.size(); ++r) t(r, 0) = *records[r]->graph_target;
    return t;
  }
  std::size_t rows = 0;
  for (const DatasetRecord* r : records) rows += r->node_targets->size();
  ad::Matrix t(rows, 3);
  std::size_t row = 0;
  for (const DatasetRecord* r : records) {
    for (const Vec3& v : *r->node_targets) t.row(row++) = v.transpose();
  }
  return t;
}

class GraphSet {
 public:
  GraphSet(std::span<const DatasetRecord> records, const TrainConfig& config)
      : records_(records), config_(config) {}

  void Build(const Construction& construction) {
    graphs_.clear();
    graphs_.reserve(records_.size());
    for (const DatasetRecord& r : records_) {
      GeometricGraph g = RecordGraph(r, construction);
      if (config_.rewire == Rewire::kDigl) g = RewireDigl(g, config_.digl);
      graphs_.push_back(std::move(g));
    }
  }

  const std::vector<GeometricGraph>& graphs() const { return graphs_; }

 private:
  std::span<const DatasetRecord> records_;
  const TrainConfig& config_;
  std::vector<GeometricGraph> graphs_;
};

void CheckFinite(const ad::Matrix& m, const char* what, int epoch) {
  if (!m.allFinite()) {
    throw NumericFailure(std::string("non-finite ") + what + " at epoch " +
                         std::to_string(epoch));
  }
}

}  // namespace

double MeanAbsoluteError(const Model& model, std::span<const GeometricGraph> graphs,
                         std::span<const DatasetRecord> records,
                         bool fully_connect_last_layer) {
  if (graphs.size() != records.size()) {
    throw std::invalid_argument("graph and record counts differ");
  }
  if (graphs.empty()) throw std::invalid_argument("no graphs to evaluate");
  constexpr std::size_t kChunk = 256;
  double total = 0;
  std::int64_t count = 0;
  ad::NoGradGuard no_grad;
  for (std::size_t start = 0; start < graphs.size(); start += kChunk) {
    const std::size_t end = std::min(graphs.size(), start + kChunk);
    std::vector<const GeometricGraph*> ptrs;
    std::vector<const DatasetRecord*> recs;
    for (std::size_t t = start; t < end; ++t) {
      ptrs.push_back(&graphs[t]);
      recs.push_back(&records[t]);
    }
    const GraphBatch batch = GraphBatch::FromGraphs(ptrs, fully_connect_last_layer);
    const ad::Matrix pred = model.Forward(batch).data();
    const ad::Matrix target = Targets(recs);
    total += (pred - target).cwiseAbs().sum();
    count += pred.size();
  }
  return total / static_cast<double>(count);
}

TrainResult Train(const DatasetSplit& data, const TrainConfig& config,
                  const std::function<void(const IsgrRecord&)>& on_checkpoint) {
  if (data.train.empty()) throw std::invalid_argument("training split is empty");
  if (data.val.empty()) throw std::invalid_argument("validation split is empty");
  if (data.test.empty()) throw std::invalid_argument("test split is empty");
  if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (config.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");

  const bool fa = config.rewire == Rewire::kFullyAdjacent;
  const bool isgr = config.rewire == Rewire::kIsgr;
  Construction construction = config.graph;
  std::optional<IsgrState> state;
  if (isgr) {
    const int n = static_cast<int>(data.train.front().positions.size());
    for (const auto* split : {&data.train, &data.val, &data.test}) {
      for (const DatasetRecord& r : *split) {
        if (static_cast<int>(r.positions.size()) != n) {
          throw std::invalid_argument("ISGR needs equally sized graphs");
        }
        if (r.edges) throw std::invalid_argument("ISGR cannot rewire explicit edges");
      }
    }
    int k0 = construction.k;
    if (construction.kind == Construction::Kind::kFullyConnected &&
        config.isgr_fully_connected) {
      k0 = n - 1;
    } else if (construction.kind != Construction::Kind::kKnn) {
      throw std::invalid_argument("ISGR rewires KNN graphs only");
    }
    state.emplace(n, k0, config.isgr_threshold, config.isgr_interval, config.isgr_baseline);
    construction = Construction::Knn(state->k());
  }

  TrainResult result;
  const ModelConfig model_config = [&] {
    ModelConfig c = ResolveModelConfig(config.model, data.train);
    c.construction = construction;
    return c;
  }();
  std::unique_ptr<Model> model = MakeModel(model_config);
  result.initial_model = MakeModel(model_config);

  GraphSet train(data.train, config), val(data.val, config), test(data.test, config);
  train.Build(construction);
  val.Build(construction);

  std::vector<ad::Matrix> train_targets;
  train_targets.reserve(data.train.size());
  for (const DatasetRecord& r : data.train) {
    const DatasetRecord* p = &r;
    train_targets.push_back(Targets(std::span<const DatasetRecord* const>(&p, 1)));
  }

  ad::AdamConfig adam_config = config.adam;
  ad::Adam adam(model->parameters(), adam_config);
  ad::PlateauScheduler scheduler(adam_config.lr, config.plateau);
  ad::EarlyStopping stopper(config.early_stopping);
  std::mt19937_64 train_rng(MixSeed(config.seed, 1));
  std::mt19937_64 isgr_rng(MixSeed(config.seed, 2));

  std::vector<double> best_params = model->FlatParameters();
  result.best_k = isgr ? state->k() : construction.k;
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (isgr && epoch % config.isgr_interval == 0) {
      std::vector<std::size_t> pick(data.train.size());
      std::iota(pick.begin(), pick.end(), 0);
      std::shuffle(pick.begin(), pick.end(), isgr_rng);
      pick.resize(std::min<std::size_t>(pick.size(), std::max(config.isgr_batch, 1)));
      std::sort(pick.begin(), pick.end());
      std::vector<GeometricGraph> sample;
      for (std::size_t t : pick) sample.push_back(train.graphs()[t]);
      ProfileOptions po;
      po.context_budget = config.isgr_context_budget;
      po.pair_budget = config.isgr_pair_budget;
      po.seed = MixSeed(config.seed, 1000 + epoch);
      po.workers = config.workers;
      GameOptions game;
      game.fully_connect_last_layer = fa;
      const StrengthProfile profile = ModelStrengthProfile(*model, sample, po, game);
      const int old_k = state->k();
      state->Step(epoch, profile);
      if (state->k() != old_k) {
        construction = Construction::Knn(state->k());
        train.Build(construction);
        val.Build(construction);
      }
      if (on_checkpoint) on_checkpoint(state->history().back());
    }

    std::shuffle(order.begin(), order.end(), train_rng);
    double loss_sum = 0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const GeometricGraph*> ptrs;
      std::vector<const DatasetRecord*> recs;
      for (std::size_t t = start; t < end; ++t) {
        ptrs.push_back(&train.graphs()[order[t]]);
        recs.push_back(&data.train[order[t]]);
      }
      const GraphBatch batch = GraphBatch::FromGraphs(ptrs, fa);
      ForwardOptions fo;
      fo.training = true;
      fo.rng = &train_rng;
      const ad::Value pred = model->Forward(batch, fo);
      const ad::Value target = ad::Value::Constant(Targets(recs));
      const ad::Value loss = ad::Mean(ad::Square(ad::Sub(pred, target)));
      CheckFinite(loss.data(), "loss", epoch);
      std::vector<ad::Matrix> grads = ad::Grad(loss, model->parameters());
      for (const ad::Matrix& g : grads) CheckFinite(g, "gradient", epoch);
      adam.Step(grads);
      loss_sum += loss.item() * static_cast<double>(end - start);
      seen += end - start;
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(seen);
    log.val_mae = MeanAbsoluteError(*model, val.graphs(), data.val, fa);
    log.lr = adam.lr();
    log.k = isgr ? state->k() : construction.k;
    if (!std::isfinite(log.val_mae)) {
      throw NumericFailure("non-finite validation error at epoch " + std::to_string(epoch));
    }
    result.epochs.push_back(log);
    const bool stop = stopper.Update(log.val_mae);
    if (stopper.improved()) {
      best_params = model->FlatParameters();
      result.best_val_mae = log.val_mae;
      result.best_epoch = epoch;
      result.best_k = log.k;
    }
    adam.set_lr(scheduler.Step(log.val_mae));
    if (stop) {
      result.stopped_early = true;
      break;
    }
  }

  model->SetFlatParameters(best_params);
  ModelConfig final_config = model->config();
  if (isgr) final_config.construction = Construction::Knn(result.best_k);
  model->mutable_config() = final_config;
  test.Build(final_config.construction);
  result.test_mae = MeanAbsoluteError(*model, test.graphs(), data.test, fa);
  result.final_k = isgr ? state->k() : construction.k;
  if (isgr) result.isgr = state->history();
  result.model = std::move(model);
  return result;
}

}  // namespace gil
