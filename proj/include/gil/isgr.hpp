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

// Interaction-strength-based graph rewiring and the training loop that hosts
// it.
//
// Every `interval` epochs the controller measures the strength profile of
// the current model on a small batch of training graphs and compares it with
// the previous measurement. When the largest per-order increase reaches the
// threshold, the KNN neighbor count moves halfway toward the order that grew
// the most and every graph is rebuilt.

#ifndef GIL_ISGR_HPP_
#define GIL_ISGR_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gil/data.hpp"
#include "gil/graph.hpp"
#include "gil/interactions.hpp"
#include "gil/models.hpp"
#include "gil/optim.hpp"

namespace gil {

enum class Baseline { kPrevious, kInitial };
std::string BaselineName(Baseline baseline);
Baseline ParseBaseline(const std::string& name);

// (k + m*) / 2 rounded, with halves going toward m*.
int MoveToward(int k, int m_star);

struct IsgrRecord {
  int epoch = 0;
  int k = 0;           // Neighbor count after this checkpoint.
  bool compared = false;  // False for the first checkpoint.
  int m_star = -1;        // Set when fired.
  bool fired = false;
  double max_delta = 0;   // Largest per-order increase.
  StrengthProfile profile;
};

class IsgrState {
 public:
  // n = nodes per graph; k is clamped into [1, n - 1].
  IsgrState(int n, int k0, double threshold, int interval,
            Baseline baseline = Baseline::kPrevious);

  int k() const { return k_; }
  int n() const { return n_; }
  double threshold() const { return threshold_; }
  int interval() const { return interval_; }
  const std::optional<StrengthProfile>& last_profile() const { return last_; }
  const std::vector<IsgrRecord>& history() const { return history_; }

  // Records `profile` and returns true when k was reset. The first call only
  // stores the profile. Throws std::invalid_argument on a different order
  // grid or level, and when epochs do not increase.
  bool Step(int epoch, const StrengthProfile& profile);

 private:
  int n_;
  int k_;
  double threshold_;
  int interval_;
  Baseline baseline_;
  std::optional<StrengthProfile> last_;
  std::vector<IsgrRecord> history_;
};

enum class Rewire { kNone, kIsgr, kFullyAdjacent, kDigl };
std::string RewireName(Rewire rewire);
Rewire ParseRewire(const std::string& name);

struct TrainConfig {
  ModelConfig model;   // in_features, head and output affine are filled in.
  Rewire rewire = Rewire::kNone;
  int epochs = 200;
  int batch_size = 32;
  ad::AdamConfig adam;
  ad::PlateauConfig plateau;
  int early_stopping = 30;
  // Base connectivity; ISGR requires KNN (or fully connected with
  // isgr_fully_connected).
  Construction graph = Construction::Knn(8);
  double isgr_threshold = 0.05;
  int isgr_interval = 10;
  Baseline isgr_baseline = Baseline::kPrevious;
  bool isgr_fully_connected = false;
  int isgr_batch = 8;
  std::int64_t isgr_context_budget = 16;
  std::int64_t isgr_pair_budget = std::int64_t{1} << 40;
  DiglOptions digl{0.0259, 32, std::nullopt};
  std::uint64_t seed = 0;
  int workers = 1;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0;
  double val_mae = 0;
  double lr = 0;
  int k = 0;
};

struct TrainResult {
  std::unique_ptr<Model> model;  // Parameters of the best validation epoch.
  std::unique_ptr<Model> initial_model;
  std::vector<EpochLog> epochs;
  std::vector<IsgrRecord> isgr;
  double best_val_mae = std::numeric_limits<double>::infinity();
  double test_mae = 0;
  int best_epoch = -1;
  int best_k = 0;
  int final_k = 0;
  bool stopped_early = false;
};

class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mean absolute error: over graphs (scalar targets) or over every node
// coordinate (vector targets).
double MeanAbsoluteError(const Model& model, std::span<const GeometricGraph> graphs,
                         std::span<const DatasetRecord> records, bool fully_connect_last_layer);

// Trains with MSE loss, Adam, plateau decay and early stopping on validation
// MAE. Throws NumericFailure on a non-finite loss and std::invalid_argument
// when the split lacks validation or test records or node counts differ
// under ISGR. `on_checkpoint` sees each ISGR record as it is produced.
TrainResult Train(const DatasetSplit& data, const TrainConfig& config,
                  const std::function<void(const IsgrRecord&)>& on_checkpoint = {});

// Head and output affine from the training targets.
ModelConfig ResolveModelConfig(const ModelConfig& base, std::span<const DatasetRecord> train);

}  // namespace gil

#endif  // GIL_ISGR_HPP_
