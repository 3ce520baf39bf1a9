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

// Multi-order pairwise interactions of set functions.
//
// A set function maps a subset S of the n players (graph nodes) to a real
// number (graph level) or to one vector per player (node level). For a pair
// (i, j) and an order m, the graph-level interaction averages
//
//   delta f(i, j, S) = f(S) - f(S \ i) - f(S \ j) + f(S \ {i, j})
//
// over every context S of size m that contains both i and j (3 <= m <= n, so
// no evaluation ever sees the empty set). The node-level interaction of j on
// i averages || f_i(S) - f_i(S \ j) ||_p over contexts of size m holding both
// (2 <= m <= n). The classic form, where contexts exclude i and j and have
// size m in [0, n - 2], is available for functions defined on the empty set;
// the two forms agree under the shift m -> m + 2.
//
// Strength profiles average |I^(m)| over graphs and pairs and normalize the
// result across orders to sum to one.

#ifndef GIL_INTERACTIONS_HPP_
#define GIL_INTERACTIONS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gil {

// Bit p set = player p present. Supports up to 64 players.
using NodeSet = std::uint64_t;

constexpr NodeSet FullSet(int n) {
  return n >= 64 ? ~NodeSet{0} : (NodeSet{1} << n) - 1;
}
constexpr NodeSet Bit(int p) { return NodeSet{1} << p; }
int SetSize(NodeSet s);

template <typename Output>
class EvaluationCache;

// Deterministic set function of a fixed arity. Evaluations may run in
// parallel (the evaluator must tolerate concurrent calls); with memoization
// each subset is computed at most once.
template <typename Output>
class BasicSetFunction {
 public:
  // Evaluates a batch of subsets; returns one output per subset.
  using BatchEvaluator = std::function<std::vector<Output>(std::span<const NodeSet>)>;
  using Evaluator = std::function<Output(NodeSet)>;

  BasicSetFunction(int arity, Evaluator evaluator, bool defined_on_empty = false,
                   bool memoize = false);
  BasicSetFunction(int arity, BatchEvaluator evaluator, bool defined_on_empty,
                   bool memoize, int batch_size);

  int arity() const { return arity_; }
  bool defined_on_empty() const { return defined_on_empty_; }

  // Throws std::invalid_argument for the empty set (unless defined) and for
  // players outside [0, arity).
  Output operator()(NodeSet s) const;

  // Evaluates every subset not yet cached, spread over `workers` threads.
  // No-op without memoization.
  void Prefetch(std::span<const NodeSet> sets, int workers) const;

  std::size_t cached_count() const;

 private:
  void Check(NodeSet s) const;

  int arity_;
  bool defined_on_empty_;
  BatchEvaluator batch_;
  int batch_size_ = 1;
  std::shared_ptr<EvaluationCache<Output>> cache_;
};

using SetFunction = BasicSetFunction<double>;
// Row p holds player p's output; rows of absent players are ignored.
using NodeSetFunction = BasicSetFunction<Eigen::MatrixXd>;

// Tabulated game over all 2^n subsets (index = NodeSet), defined on the
// empty set. n <= 20.
SetFunction TabulatedGame(std::vector<double> values);

struct PairInteractionEstimate {
  int i = 0;
  int j = 0;
  int m = 0;
  double value = 0;
  double std_error = 0;
  std::int64_t samples = 0;
  bool exact = false;
};

// Graph-level I^(m)(i, j) by enumerating all C(n-2, m-2) contexts.
// Requires n <= 14 (std::length_error "use mc_interaction" otherwise),
// 3 <= m <= n and i != j (std::out_of_range / std::invalid_argument).
double ExactInteraction(const SetFunction& f, int i, int j, int m);

// Monte-Carlo graph-level interaction: mean of delta f over `budget`
// uniformly drawn contexts (with replacement) with its standard error.
// Enumerates exactly when C(n-2, m-2) <= budget.
PairInteractionEstimate McInteractionGraph(const SetFunction& f, int i, int j,
                                           int m, std::int64_t budget,
                                           std::uint64_t seed);

// Monte-Carlo node-level interaction of j on i with p-norm `p`
// (2 <= m <= n); exact when C(n-2, m-2) <= budget.
PairInteractionEstimate McInteractionNode(const NodeSetFunction& f, int i, int j,
                                          int m, double p, std::int64_t budget,
                                          std::uint64_t seed);

enum class Level { kGraph, kNode };
std::string LevelName(Level level);

struct StrengthProfile {
  std::vector<int> orders;
  std::vector<double> strength;  // J^(m), sums to one.
  std::vector<double> std_error;
  // Mean |I^(m)| before normalization.
  std::vector<double> raw;
  Level level = Level::kGraph;
  int n = 0;

  // Index of the largest entry.
  int ArgMax() const;
};

struct ProfileOptions {
  // Orders to measure; empty = every valid order for the level.
  std::vector<int> orders;
  // Pairs per graph; all pairs when at least the number of pairs.
  std::int64_t pair_budget = std::int64_t{1} << 40;
  std::int64_t context_budget = 64;
  double p = 2.0;  // Node level norm.
  std::uint64_t seed = 0;
  int workers = 1;
};

// Every valid order for the level: [3, n] (graph) or [2, n] (node).
std::vector<int> DefaultOrders(Level level, int n);
// Orders round(r * n) for each ratio, clamped to the level's valid range,
// deduplicated and sorted.
std::vector<int> OrdersFromRatios(std::span<const double> ratios, Level level, int n);

// All functions must share the same arity. Throws std::domain_error
// ("degenerate profile") when every |I^(m)| is zero.
StrengthProfile GraphStrengthProfile(std::span<const SetFunction> functions,
                                     const ProfileOptions& options);
StrengthProfile NodeStrengthProfile(std::span<const NodeSetFunction> functions,
                                    const ProfileOptions& options);

// Half the L1 distance; throws on mismatched order grids.
double TotalVariation(const StrengthProfile& a, const StrengthProfile& b);

// CSV with header "m,m_over_n,J,stderr".
std::string ProfileCsv(const StrengthProfile& profile);

struct CurvePoint {
  int m = 0;
  double value = 0;
};

// Per-order learning-strength factor. Without the empty set, for m in [2, n]:
//   F(m) = (n - m + 1) / (n (n - 1)) / sqrt(C(n - 2, m - 2)).
// With the empty set allowed, orders count the context without the pair,
// m in [0, n - 2]:
//   F(m) = (n - m - 1) / (n (n - 1)) / sqrt(C(n - 2, m)).
// Requires n >= 3.
std::vector<CurvePoint> LearningStrengthCurve(int n, bool include_empty);

// Classic interaction over contexts S of size m excluding i and j,
// 0 <= m <= n - 2. Needs f(empty) when m = 0.
double ExcludedFormInteraction(const SetFunction& f, int i, int j, int m);

// |f(N) - f(empty) - sum_i mu_i - sum_{i != j} sum_m w(m) I(m)(i, j)| with
// mu_i = f({i}) - f(empty) and w(m) = (n - 1 - m) / (n (n - 1)). n <= 10.
double EfficiencyResidual(const SetFunction& f);
double EfficiencyWeight(int n, int m);

// (classic I^(m)(i, j), context-inclusive I^(m+2)(i, j)). n <= 12 and
// m + 2 <= n (std::out_of_range).
std::pair<double, double> EquivalenceCheck(const SetFunction& f, int i, int j, int m);

struct NormalityResult {
  double statistic = 0;
  double p_value = 0;
  double skew_z = 0;
  double kurtosis_z = 0;
};

// D'Agostino-Pearson omnibus test (skewness and kurtosis z-scores combined,
// p from chi-square with two degrees of freedom). Needs at least 20 samples
// (std::invalid_argument); zero-variance input throws std::domain_error.
NormalityResult NormalityTest(std::span<const double> samples);

std::int64_t Binomial(int n, int k);

}  // namespace gil

#endif  // GIL_INTERACTIONS_HPP_
