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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "gil/parallel.hpp"

namespace gil {
namespace {

constexpr double kDivergenceBound = 1e6;

bool FiniteVec(const Vec3& v) { return v.allFinite(); }

void SpringAccumulate(const std::vector<Vec3>& x, std::vector<Vec3>* forces) {
  const int n = static_cast<int>(x.size());
  forces->assign(n, Vec3::Zero());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec3 d = x[i] - x[j];
      const double r = d.norm();
      if (r == 0) throw std::domain_error("singular separation");
      const Vec3 f = (-2.0 * (r - 1.0) / r) * d;
      (*forces)[i] += f;
      (*forces)[j] -= f;
    }
  }
}

nlohmann::json VecList(const std::vector<Vec3>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (const Vec3& p : v) out.push_back({p.x(), p.y(), p.z()});
  return out;
}

std::vector<Vec3> ParseVecList(const nlohmann::json& j, const char* field) {
  if (!j.is_array()) throw std::invalid_argument(std::string(field) + " must be an array");
  std::vector<Vec3> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3) {
      throw std::invalid_argument(std::string(field) + " entries must be 3-vectors");
    }
    out.emplace_back(e[0].get<double>(), e[1].get<double>(), e[2].get<double>());
  }
  return out;
}

}  // namespace

void ParticleSystem::Validate() const {
  if (velocities.size() != positions.size() || masses.size() != positions.size()) {
    throw std::invalid_argument("particle arrays differ in length");
  }
  for (double m : masses) {
    if (!(m > 0) || !std::isfinite(m)) throw std::invalid_argument("masses must be positive");
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!FiniteVec(positions[i]) || !FiniteVec(velocities[i])) {
      throw std::invalid_argument("non-finite particle state");
    }
  }
}

ParticleSystem RandomSpringSystem(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("need at least one particle");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  std::normal_distribution<double> vel(0.0, 0.5);
  ParticleSystem s;
  for (int i = 0; i < n; ++i) {
    const double x = pos(rng), y = pos(rng), z = pos(rng);
    s.positions.emplace_back(x, y, z);
  }
  for (int i = 0; i < n; ++i) {
    const double x = vel(rng), y = vel(rng), z = vel(rng);
    s.velocities.emplace_back(x, y, z);
  }
  s.masses.assign(n, 1.0);
  return s;
}

std::vector<Vec3> SpringForces(const ParticleSystem& system) {
  system.Validate();
  std::vector<Vec3> forces;
  SpringAccumulate(system.positions, &forces);
  return forces;
}

double SpringPotential(std::span<const Vec3> positions) {
  double u = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      const double r = (positions[i] - positions[j]).norm();
      if (r == 0) throw std::domain_error("singular separation");
      u += (r - 1.0) * (r - 1.0);
    }
  }
  return u;
}

double Hamiltonian(const ParticleSystem& system) {
  system.Validate();
  double kinetic = 0;
  for (int i = 0; i < system.size(); ++i) {
    kinetic += 0.5 * system.masses[i] * system.velocities[i].squaredNorm();
  }
  return kinetic + SpringPotential(system.positions);
}

std::vector<ParticleSystem> Simulate(const ParticleSystem& initial, double dt, int steps,
                                     Integrator integrator) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (integrator != Integrator::kVelocityVerlet) {
    throw std::invalid_argument("unknown integrator");
  }
  initial.Validate();
  const int n = initial.size();
  std::vector<ParticleSystem> out;
  out.reserve(steps + 1);
  out.push_back(initial);
  ParticleSystem s = initial;
  std::vector<Vec3> force, next_force;
  SpringAccumulate(s.positions, &force);
  for (int step = 1; step <= steps; ++step) {
    for (int i = 0; i < n; ++i) {
      s.velocities[i] += (0.5 * dt / s.masses[i]) * force[i];
      s.positions[i] += dt * s.velocities[i];
      if (!FiniteVec(s.positions[i]) ||
          s.positions[i].cwiseAbs().maxCoeff() > kDivergenceBound) {
        throw SimulationDiverged(step, "simulation diverged at step " + std::to_string(step));
      }
    }
    SpringAccumulate(s.positions, &next_force);
    for (int i = 0; i < n; ++i) {
      s.velocities[i] += (0.5 * dt / s.masses[i]) * next_force[i];
    }
    force.swap(next_force);
    out.push_back(s);
  }
  return out;
}

std::string TaskName(Task task) {
  return task == Task::kNewtonian ? "newtonian" : "hamiltonian";
}

Task ParseTask(const std::string& name) {
  if (name == "newtonian") return Task::kNewtonian;
  if (name == "hamiltonian") return Task::kHamiltonian;
  throw std::invalid_argument("unknown task '" + name + "'");
}

bool DatasetRecord::operator==(const DatasetRecord& o) const {
  return id == o.id && positions == o.positions && velocities == o.velocities &&
         masses == o.masses && node_features == o.node_features &&
         graph_target == o.graph_target && node_targets == o.node_targets &&
         edges == o.edges;
}

void DatasetRecord::Validate() const {
  const std::size_t n = positions.size();
  if (n == 0) throw std::invalid_argument("record has no particles");
  if (velocities.size() != n || masses.size() != n || node_features.size() != n) {
    throw std::invalid_argument("record arrays differ in length");
  }
  for (const auto& row : node_features) {
    if (row.size() != node_features[0].size()) {
      throw std::invalid_argument("ragged node features");
    }
  }
  if (graph_target.has_value() == node_targets.has_value()) {
    throw std::invalid_argument("record needs exactly one of graph_target, node_targets");
  }
  if (node_targets && node_targets->size() != n) {
    throw std::invalid_argument("node_targets length differs from particle count");
  }
  if (edges) {
    for (const Edge& e : *edges) {
      if (e.first < 0 || e.second < 0 || e.first >= static_cast<int>(n) ||
          e.second >= static_cast<int>(n)) {
        throw std::invalid_argument("edge endpoint out of range");
      }
    }
  }
}

DatasetRecord MakeRecord(std::int64_t id, const ParticleSystem& system, Task task) {
  DatasetRecord r;
  r.id = id;
  r.positions = system.positions;
  r.velocities = system.velocities;
  r.masses = system.masses;
  for (int i = 0; i < system.size(); ++i) {
    r.node_features.push_back({system.masses[i], system.velocities[i].norm()});
  }
  if (task == Task::kHamiltonian) {
    r.graph_target = Hamiltonian(system);
  } else {
    r.node_targets = SpringForces(system);
  }
  return r;
}

Dataset GenerateSpringDataset(const GenerateOptions& o) {
  if (o.particles < 1) throw std::invalid_argument("particles must be >= 1");
  if (o.systems < 1) throw std::invalid_argument("systems must be >= 1");
  if (o.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (o.stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (!(o.dt > 0)) throw std::invalid_argument("dt must be positive");
  std::vector<std::vector<DatasetRecord>> per_system(o.systems);
  ParallelFor(o.systems, o.workers, [&](std::size_t s) {
    const ParticleSystem start = RandomSpringSystem(o.particles, MixSeed(o.seed, s));
    std::vector<ParticleSystem> states{start};
    if (o.steps > 1) states = Simulate(start, o.dt, (o.steps - 1) * o.stride);
    auto& out = per_system[s];
    for (int t = 0; t < o.steps; ++t) {
      const auto id = static_cast<std::int64_t>(s) * o.steps + t;
      out.push_back(MakeRecord(id, states[static_cast<std::size_t>(t) * o.stride], o.task));
    }
  });
  Dataset d;
  d.metadata = {{"generator", "gil-spring"},
                {"version", 1},
                {"system", "spring"},
                {"task", TaskName(o.task)},
                {"particles", o.particles},
                {"systems", o.systems},
                {"steps", o.steps},
                {"stride", o.stride},
                {"dt", o.dt},
                {"seed", o.seed},
                {"integrator", "velocity_verlet"},
                {"initial_positions", "uniform cube [-1, 1]^3"},
                {"initial_velocities", "normal sigma 0.5"},
                {"masses", 1.0}};
  for (auto& part : per_system) {
    for (auto& r : part) d.records.push_back(std::move(r));
  }
  return d;
}

nlohmann::json RecordToJson(const DatasetRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["positions"] = VecList(r.positions);
  j["velocities"] = VecList(r.velocities);
  j["masses"] = r.masses;
  j["node_features"] = r.node_features;
  if (r.graph_target) j["graph_target"] = *r.graph_target;
  if (r.node_targets) j["node_targets"] = VecList(*r.node_targets);
  if (r.edges) {
    nlohmann::json e = nlohmann::json::array();
    for (const Edge& edge : *r.edges) e.push_back({edge.first, edge.second});
    j["edges"] = e;
  }
  return j;
}

DatasetRecord RecordFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  DatasetRecord r;
  r.id = j.at("id").get<std::int64_t>();
  r.positions = ParseVecList(j.at("positions"), "positions");
  r.velocities = j.contains("velocities")
                     ? ParseVecList(j.at("velocities"), "velocities")
                     : std::vector<Vec3>(r.positions.size(), Vec3::Zero());
  r.masses = j.contains("masses") ? j.at("masses").get<std::vector<double>>()
                                  : std::vector<double>(r.positions.size(), 1.0);
  if (j.contains("node_features")) {
    r.node_features = j.at("node_features").get<std::vector<std::vector<double>>>();
  } else {
    r.node_features.assign(r.positions.size(), {});
  }
  if (j.contains("graph_target")) r.graph_target = j.at("graph_target").get<double>();
  if (j.contains("node_targets")) {
    r.node_targets = ParseVecList(j.at("node_targets"), "node_targets");
  }
  if (j.contains("edges")) {
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw std::invalid_argument("edges must be pairs");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    r.edges = std::move(edges);
  }
  r.Validate();
  return r;
}

void WriteDataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << nlohmann::json{{"metadata", dataset.metadata}}.dump() << '\n';
  for (const DatasetRecord& r : dataset.records) out << RecordToJson(r).dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Dataset LoadDataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Dataset d;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      if (j.is_object() && j.contains("metadata") && !j.contains("positions")) {
        d.metadata = j.at("metadata");
        continue;
      }
      d.records.push_back(RecordFromJson(j));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return d;
}

DatasetSplit SplitDataset(std::span<const DatasetRecord> records, std::uint64_t seed) {
  DatasetSplit split;
  if (records.size() < 10) {
    split.train.assign(records.begin(), records.end());
    split.all_train_fallback = true;
    return split;
  }
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t tenth = records.size() / 10;
  for (std::size_t t = 0; t < order.size(); ++t) {
    const DatasetRecord& r = records[order[t]];
    if (t < tenth) {
      split.val.push_back(r);
    } else if (t < 2 * tenth) {
      split.test.push_back(r);
    } else {
      split.train.push_back(r);
    }
  }
  return split;
}

GeometricGraph RecordGraph(const DatasetRecord& record, const Construction& construction) {
  NodeData nodes;
  nodes.coords = record.positions;
  const int n = static_cast<int>(record.positions.size());
  const int f = record.node_features.empty() ? 0
                                              : static_cast<int>(record.node_features[0].size());
  nodes.features = Eigen::MatrixXd::Zero(n, f);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < f; ++c) nodes.features(i, c) = record.node_features[i][c];
  }
  if (record.edges) {
    std::vector<Edge> edges = *record.edges;
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return GeometricGraph(std::move(nodes), std::move(edges), Construction::Explicit());
  }
  return BuildGraph(std::move(nodes), construction);
}

}  // namespace gil
