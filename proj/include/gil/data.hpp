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

// Spring N-body systems: forces, energy, velocity-Verlet trajectories and
// JSON-lines datasets of (positions, velocities) with either the total energy
// (graph target) or the per-particle force (node target).
//
// Every pair of particles is joined by a spring with rest length 1 and
// potential (r - 1)^2.

#ifndef GIL_DATA_HPP_
#define GIL_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gil/graph.hpp"
#include "json.hpp"

namespace gil {

struct ParticleSystem {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<double> masses;

  int size() const { return static_cast<int>(positions.size()); }
  // Throws std::invalid_argument on length mismatches, non-positive masses
  // and non-finite coordinates.
  void Validate() const;
};

// Positions uniform in the cube [-1, 1]^3, velocities N(0, 0.5^2) per
// component, unit masses.
ParticleSystem RandomSpringSystem(int n, std::uint64_t seed);

// Force on i: sum over j of -2 (r_ij - 1) * unit(x_i - x_j). Throws
// std::domain_error("singular separation") for coincident particles.
std::vector<Vec3> SpringForces(const ParticleSystem& system);
double SpringPotential(std::span<const Vec3> positions);
// Kinetic plus spring potential energy.
double Hamiltonian(const ParticleSystem& system);

enum class Integrator { kVelocityVerlet };

class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(int step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// Returns steps + 1 states, the first being the input. Aborts with
// SimulationDiverged once any |coordinate| exceeds 1e6.
std::vector<ParticleSystem> Simulate(const ParticleSystem& initial, double dt,
                                     int steps,
                                     Integrator integrator = Integrator::kVelocityVerlet);

enum class Task { kNewtonian, kHamiltonian };
std::string TaskName(Task task);
Task ParseTask(const std::string& name);

struct DatasetRecord {
  std::int64_t id = 0;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<double> masses;
  // One row per particle: (mass, |velocity|) for generated data.
  std::vector<std::vector<double>> node_features;
  std::optional<double> graph_target;
  std::optional<std::vector<Vec3>> node_targets;
  // Explicit connectivity for pre-converted external data.
  std::optional<std::vector<Edge>> edges;

  bool operator==(const DatasetRecord& other) const;
  // Throws std::invalid_argument when lengths disagree or when the number of
  // targets present is not exactly one.
  void Validate() const;
};

DatasetRecord MakeRecord(std::int64_t id, const ParticleSystem& system, Task task);

struct Dataset {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<DatasetRecord> records;
};

struct GenerateOptions {
  int particles = 10;
  int systems = 1;
  int steps = 500;        // Records per system.
  int stride = 1;         // Integration steps between records.
  double dt = 0.01;
  Task task = Task::kHamiltonian;
  std::uint64_t seed = 0;
  int workers = 1;
};

// systems x steps records; deterministic per seed and independent of the
// worker count.
Dataset GenerateSpringDataset(const GenerateOptions& options);

// First line: {"metadata": {...}}; then one record per line.
void WriteDataset(const Dataset& dataset, const std::filesystem::path& path);
// Throws std::runtime_error("<path>:<line>: ...") on malformed input.
Dataset LoadDataset(const std::filesystem::path& path);
nlohmann::json RecordToJson(const DatasetRecord& record);
DatasetRecord RecordFromJson(const nlohmann::json& json);

struct DatasetSplit {
  std::vector<DatasetRecord> train;
  std::vector<DatasetRecord> val;
  std::vector<DatasetRecord> test;
  // Set when fewer than 10 records forced everything into train.
  bool all_train_fallback = false;
};

// Seeded shuffle, then floor(10%) validation, floor(10%) test, rest train.
DatasetSplit SplitDataset(std::span<const DatasetRecord> records, std::uint64_t seed);

// Graph over the record's particles with its node features. Records with
// explicit edges ignore `construction`.
GeometricGraph RecordGraph(const DatasetRecord& record, const Construction& construction);

}  // namespace gil

#endif  // GIL_DATA_HPP_
