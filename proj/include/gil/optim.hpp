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

#ifndef GIL_OPTIM_HPP_
#define GIL_OPTIM_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "gil/autodiff.hpp"

namespace gil::ad {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Adam with bias correction. Moments are shaped like the parameters they
// track; the step counter increases by one per Step().
class Adam {
 public:
  Adam(std::vector<Value> params, AdamConfig config);

  // Updates the parameters in place. Throws std::invalid_argument when the
  // gradient list does not line up with the parameters.
  void Step(std::span<const Matrix> grads);

  double lr() const { return config_.lr; }
  void set_lr(double lr) { config_.lr = lr; }
  std::int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  std::vector<Value> params_;
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t step_ = 0;
};

struct PlateauConfig {
  double factor = 0.6;
  int patience = 10;
  double min_lr = 5e-6;
};

// Multiplies the learning rate by `factor` once `patience` consecutive
// epochs have failed to improve (strictly decrease) the metric, never going
// below `min_lr`. The wait counter restarts after each reduction.
class PlateauScheduler {
 public:
  PlateauScheduler(double initial_lr, PlateauConfig config = {});

  // Returns the learning rate to use next. Throws std::invalid_argument on
  // a NaN metric.
  double Step(double metric);

  double lr() const { return lr_; }
  double best() const { return best_; }
  int wait() const { return wait_; }

 private:
  PlateauConfig config_;
  double lr_;
  double best_ = std::numeric_limits<double>::infinity();
  int wait_ = 0;
};

// Signals a stop after `patience` consecutive non-improving epochs.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience = 30) : patience_(patience) {}

  // Returns true when training should stop.
  bool Update(double metric);
  bool improved() const { return improved_; }
  double best() const { return best_; }

 private:
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int wait_ = 0;
  bool improved_ = false;
};

}  // namespace gil::ad

#endif  // GIL_OPTIM_HPP_
