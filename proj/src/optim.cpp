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

#include "gil/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gil::ad {

Adam::Adam(std::vector<Value> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (const Value& p : params_) {
    m_.push_back(Matrix::Zero(p.rows(), p.cols()));
    v_.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void Adam::Step(std::span<const Matrix> grads) {
  if (grads.size() != params_.size()) {
    throw std::invalid_argument("adam: gradient count does not match parameters");
  }
  for (std::size_t t = 0; t < grads.size(); ++t) {
    if (grads[t].rows() != params_[t].rows() || grads[t].cols() != params_[t].cols()) {
      throw std::invalid_argument("adam: gradient shape mismatch at parameter " +
                                  std::to_string(t));
    }
  }
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t t = 0; t < grads.size(); ++t) {
    Matrix& w = params_[t].mutable_data();
    Matrix g = grads[t];
    if (config_.weight_decay != 0.0) g += config_.weight_decay * w;
    m_[t] = b1 * m_[t] + (1.0 - b1) * g;
    v_[t] = b2 * v_[t] + (1.0 - b2) * g.cwiseAbs2();
    w.array() -= config_.lr * (m_[t].array() / correction1) /
                 ((v_[t].array() / correction2).sqrt() + config_.eps);
  }
}

PlateauScheduler::PlateauScheduler(double initial_lr, PlateauConfig config)
    : config_(config), lr_(std::max(initial_lr, config.min_lr)) {}

double PlateauScheduler::Step(double metric) {
  if (std::isnan(metric)) throw std::invalid_argument("plateau: NaN metric");
  if (metric < best_) {
    best_ = metric;
    wait_ = 0;
    return lr_;
  }
  if (++wait_ >= config_.patience) {
    lr_ = std::max(lr_ * config_.factor, config_.min_lr);
    wait_ = 0;
  }
  return lr_;
}

bool EarlyStopping::Update(double metric) {
  if (metric < best_) {
    best_ = metric;
    wait_ = 0;
    improved_ = true;
    return false;
  }
  improved_ = false;
  return ++wait_ >= patience_;
}

}  // namespace gil::ad
