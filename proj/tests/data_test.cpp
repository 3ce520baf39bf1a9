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

#include "gil/data.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

namespace gil {
namespace {

ParticleSystem AtRest(std::vector<Vec3> positions) {
  ParticleSystem s;
  s.velocities.assign(positions.size(), Vec3::Zero());
  s.masses.assign(positions.size(), 1.0);
  s.positions = std::move(positions);
  return s;
}

TEST(SpringForces, RestLengthGivesZeroForce) {
  const auto f = SpringForces(AtRest({Vec3(0, 0, 0), Vec3(1, 0, 0)}));
  EXPECT_EQ(f[0].norm(), 0.0);
  EXPECT_EQ(f[1].norm(), 0.0);
}

TEST(SpringForces, StretchedSpringPullsTogether) {
  const auto f = SpringForces(AtRest({Vec3(0, 0, 0), Vec3(2, 0, 0)}));
  EXPECT_NEAR((f[0] - Vec3(2, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((f[1] - Vec3(-2, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(SpringForces, SumToZeroAndMatchPotentialGradient) {
  const ParticleSystem s = RandomSpringSystem(10, 3);
  const auto f = SpringForces(s);
  Vec3 total = Vec3::Zero();
  for (const Vec3& v : f) total += v;
  EXPECT_LT(total.norm(), 1e-12);
  const double h = 1e-6;
  for (int i = 0; i < 10; ++i) {
    Vec3 grad;
    for (int c = 0; c < 3; ++c) {
      std::vector<Vec3> up = s.positions, down = s.positions;
      up[i][c] += h;
      down[i][c] -= h;
      grad[c] = (SpringPotential(up) - SpringPotential(down)) / (2 * h);
    }
    EXPECT_LE((f[i] + grad).norm(), 1e-6 * std::max(1.0, f[i].norm()));
  }
}

TEST(SpringForces, CoincidentParticlesRaise) {
  try {
    SpringForces(AtRest({Vec3(1, 1, 1), Vec3(1, 1, 1)}));
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "singular separation");
  }
}

TEST(Hamiltonian, Examples) {
  EXPECT_DOUBLE_EQ(Hamiltonian(AtRest({Vec3(0, 0, 0), Vec3(2, 0, 0)})), 1.0);
  // Regular tetrahedron with unit edges.
  const std::vector<Vec3> tet{Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
  std::vector<Vec3> unit;
  for (const Vec3& v : tet) unit.push_back(v / std::sqrt(8.0));
  EXPECT_NEAR(Hamiltonian(AtRest(unit)), 0.0, 1e-15);
  const ParticleSystem s = RandomSpringSystem(7, 4);
  double oracle = 0;
  for (int i = 0; i < 7; ++i) {
    oracle += 0.5 * s.velocities[i].dot(s.velocities[i]);
    for (int j = i + 1; j < 7; ++j) {
      const double r = std::sqrt((s.positions[i] - s.positions[j]).array().square().sum());
      oracle += (r - 1) * (r - 1);
    }
  }
  EXPECT_NEAR(Hamiltonian(s), oracle, 1e-12);
}

TEST(Simulate, EquilibriumIsFixed) {
  const std::vector<Vec3> tet{Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
  std::vector<Vec3> unit;
  for (const Vec3& v : tet) unit.push_back(v / std::sqrt(8.0));
  const auto traj = Simulate(AtRest(unit), 0.01, 100);
  ASSERT_EQ(traj.size(), 101u);
  for (int i = 0; i < 4; ++i) EXPECT_LT((traj.back().positions[i] - unit[i]).norm(), 1e-12);
}

TEST(Simulate, EnergyDriftAndMomentum) {
  const auto traj = Simulate(AtRest({Vec3(0, 0, 0), Vec3(1.5, 0, 0)}), 0.01, 10000);
  const double h0 = Hamiltonian(traj.front());
  double worst = 0;
  for (const auto& s : traj) worst = std::max(worst, std::abs(Hamiltonian(s) - h0) / h0);
  EXPECT_LE(worst, 1e-3);
  const auto many = Simulate(RandomSpringSystem(10, 5), 0.005, 2000);
  auto momentum = [](const ParticleSystem& s) {
    Vec3 p = Vec3::Zero();
    for (int i = 0; i < s.size(); ++i) p += s.masses[i] * s.velocities[i];
    return p;
  };
  const Vec3 p0 = momentum(many.front());
  for (const auto& s : many) EXPECT_LT((momentum(s) - p0).norm(), 1e-10);
}

// Relative coordinate of two unit masses obeys r'' = -4 (r - 1).
double PeriodError(double dt) {
  const double r0 = 1.5;
  const int steps = static_cast<int>(std::lround(std::numbers::pi / (4 * dt)));
  const auto traj = Simulate(AtRest({Vec3(0, 0, 0), Vec3(r0, 0, 0)}), dt, steps);
  const double t = steps * dt;
  const double exact = 1 + (r0 - 1) * std::cos(2 * t);
  return std::abs((traj.back().positions[1] - traj.back().positions[0]).norm() - exact);
}

TEST(Simulate, SecondOrderConvergence) {
  const double e1 = PeriodError(std::numbers::pi / 200);
  const double e2 = PeriodError(std::numbers::pi / 400);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.5);
}

TEST(Simulate, DivergenceAborts) {
  ParticleSystem s = AtRest({Vec3(0, 0, 0), Vec3(1, 0, 0)});
  s.velocities[0] = Vec3(1e9, 0, 0);
  try {
    Simulate(s, 0.01, 10);
    FAIL();
  } catch (const SimulationDiverged& e) {
    EXPECT_EQ(e.step(), 1);
  }
  EXPECT_THROW(Simulate(s, 0.0, 10), std::invalid_argument);
  EXPECT_THROW(Simulate(s, 0.01, 0), std::invalid_argument);
}

TEST(Dataset, GenerateIsDeterministicAndShaped) {
  GenerateOptions o;
  o.particles = 5;
  o.systems = 3;
  o.steps = 20;
  o.stride = 2;
  o.task = Task::kNewtonian;
  o.seed = 11;
  const Dataset a = GenerateSpringDataset(o);
  o.workers = 3;
  const Dataset b = GenerateSpringDataset(o);
  ASSERT_EQ(a.records.size(), 60u);
  EXPECT_EQ(a.records, b.records);
  const DatasetRecord& r = a.records[7];
  EXPECT_FALSE(r.graph_target.has_value());
  ASSERT_TRUE(r.node_targets.has_value());
  EXPECT_EQ(r.node_features[2][0], 1.0);
  EXPECT_DOUBLE_EQ(r.node_features[2][1], r.velocities[2].norm());
}

TEST(Dataset, WriteLoadRoundTrip) {
  GenerateOptions o;
  o.particles = 4;
  o.steps = 15;
  o.seed = 2;
  const Dataset d = GenerateSpringDataset(o);
  const auto path = std::filesystem::temp_directory_path() / "gil_data_test.jsonl";
  WriteDataset(d, path);
  const Dataset back = LoadDataset(path);
  EXPECT_EQ(back.records, d.records);
  EXPECT_EQ(back.metadata, d.metadata);
  std::filesystem::remove(path);
}

TEST(Dataset, MalformedLineReportsLineNumber) {
  const auto path = std::filesystem::temp_directory_path() / "gil_bad_data.jsonl";
  {
    std::ofstream out(path);
    out << "{\"metadata\": {}}\n";
    out << RecordToJson(MakeRecord(0, RandomSpringSystem(3, 1), Task::kHamiltonian)).dump() << "\n";
    out << "{\"id\": 1, \"positions\": [[0, 0]]}\n";
  }
  try {
    LoadDataset(path);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(Dataset, RecordNeedsExactlyOneTarget) {
  DatasetRecord r = MakeRecord(0, RandomSpringSystem(3, 1), Task::kHamiltonian);
  r.node_targets = std::vector<Vec3>(3, Vec3::Zero());
  EXPECT_THROW(r.Validate(), std::invalid_argument);
}

TEST(SplitDataset, EightyTenTen) {
  GenerateOptions o;
  o.particles = 3;
  o.steps = 105;
  const Dataset d = GenerateSpringDataset(o);
  const DatasetSplit s = SplitDataset(d.records, 4);
  EXPECT_EQ(s.train.size(), 85u);
  EXPECT_EQ(s.val.size(), 10u);
  EXPECT_EQ(s.test.size(), 10u);
  std::set<std::int64_t> ids;
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    for (const auto& r : *part) ids.insert(r.id);
  }
  EXPECT_EQ(ids.size(), 105u);
  const DatasetSplit hundred = SplitDataset(std::span(d.records).first(100), 4);
  EXPECT_EQ(hundred.train.size(), 80u);
  EXPECT_EQ(SplitDataset(d.records, 4).val, s.val);
}

TEST(SplitDataset, SmallDatasetsGoToTraining) {
  GenerateOptions o;
  o.particles = 3;
  o.steps = 7;
  const Dataset d = GenerateSpringDataset(o);
  const DatasetSplit s = SplitDataset(d.records, 1);
  EXPECT_TRUE(s.all_train_fallback);
  EXPECT_EQ(s.train.size(), 7u);
  EXPECT_TRUE(s.val.empty());
  EXPECT_TRUE(s.test.empty());
}

TEST(RecordGraph, UsesFeaturesAndExplicitEdges) {
  DatasetRecord r = MakeRecord(0, RandomSpringSystem(5, 1), Task::kHamiltonian);
  const GeometricGraph g = RecordGraph(r, Construction::Knn(2));
  EXPECT_EQ(g.num_features(), 2);
  EXPECT_EQ(g.edges().size(), 10u);
  r.edges = std::vector<Edge>{{0, 1}, {1, 0}};
  EXPECT_EQ(RecordGraph(r, Construction::Knn(2)).edges().size(), 2u);
}

}  // namespace
}  // namespace gil
