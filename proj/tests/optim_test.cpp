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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gil::ad {
namespace {

TEST(Adam, MatchesHandComputedSteps) {
  Value w(Matrix::Constant(1, 2, 1.0), true);
  AdamConfig cfg;
  cfg.lr = 0.1;
  Adam adam({w}, cfg);
  const double g1[] = {0.5, -2.0}, g2[] = {1.0, 1.0};
  Matrix m = Matrix::Zero(1, 2), v = Matrix::Zero(1, 2), x = Matrix::Constant(1, 2, 1.0);
  for (int step = 1; step <= 2; ++step) {
    Matrix g(1, 2);
    g << (step == 1 ? g1[0] : g2[0]), (step == 1 ? g1[1] : g2[1]);
    const Matrix grads[] = {g};
    adam.Step(grads);
    for (int c = 0; c < 2; ++c) {
      m(0, c) = 0.9 * m(0, c) + 0.1 * g(0, c);
      v(0, c) = 0.999 * v(0, c) + 0.001 * g(0, c) * g(0, c);
      const double mh = m(0, c) / (1 - std::pow(0.9, step));
      const double vh = v(0, c) / (1 - std::pow(0.999, step));
      x(0, c) -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    }
    EXPECT_NEAR(w.data()(0, 0), x(0, 0), 1e-15);
    EXPECT_NEAR(w.data()(0, 1), x(0, 1), 1e-15);
  }
  EXPECT_EQ(adam.step_count(), 2);
  // First step moves each weight by about lr against the gradient sign.
  Value u(Matrix::Zero(1, 1), true);
  Adam fresh({u}, cfg);
  const Matrix g[] = {Matrix::Constant(1, 1, 3.0)};
  fresh.Step(g);
  EXPECT_NEAR(u.data()(0, 0), -0.1, 1e-8);
}

TEST(Adam, Defaults) {
  const AdamConfig cfg;
  EXPECT_EQ(cfg.lr, 1e-4);
  EXPECT_EQ(cfg.beta1, 0.9);
  EXPECT_EQ(cfg.beta2, 0.999);
  EXPECT_EQ(cfg.eps, 1e-8);
}

TEST(Adam, RejectsMismatchedGradients) {
  Value w(Matrix::Zero(2, 2), true);
  Adam adam({w}, {});
  const Matrix wrong[] = {Matrix::Zero(2, 3)};
  EXPECT_THROW(adam.Step(wrong), std::invalid_argument);
  EXPECT_THROW(adam.Step({}), std::invalid_argument);
}

TEST(PlateauScheduler, DecaysAfterPatienceAndClamps) {
  PlateauScheduler s(1e-4);
  EXPECT_EQ(s.Step(1.0), 1e-4);
  for (int t = 0; t < 9; ++t) EXPECT_EQ(s.Step(1.0), 1e-4);
  EXPECT_NEAR(s.Step(1.0), 6e-5, 1e-18);
  EXPECT_NEAR(s.Step(0.5), 6e-5, 1e-18);
  for (int t = 0; t < 200; ++t) s.Step(2.0);
  EXPECT_EQ(s.lr(), 5e-6);
  EXPECT_THROW(s.Step(std::nan("")), std::invalid_argument);
}

TEST(EarlyStopping, StopsAfterPatience) {
  EarlyStopping stop(3);
  EXPECT_FALSE(stop.Update(1.0));
  EXPECT_TRUE(stop.improved());
  EXPECT_FALSE(stop.Update(1.0));
  EXPECT_FALSE(stop.improved());
  EXPECT_FALSE(stop.Update(0.9));
  EXPECT_FALSE(stop.Update(1.0));
  EXPECT_FALSE(stop.Update(1.0));
  EXPECT_TRUE(stop.Update(1.0));
  EXPECT_EQ(stop.best(), 0.9);
}

}  // namespace
}  // namespace gil::ad
