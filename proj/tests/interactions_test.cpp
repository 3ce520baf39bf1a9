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

#include "gil/interactions.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

namespace gil {
namespace {

std::vector<double> RandomTable(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> t(std::size_t{1} << n);
  for (double& v : t) v = d(rng);
  return t;
}

// Brute force over every mask: contexts of size m holding both i and j.
double OracleInteraction(const std::vector<double>& t, int n, int i, int j, int m) {
  const NodeSet both = Bit(i) | Bit(j);
  double sum = 0;
  int count = 0;
  for (NodeSet s = 0; s < (NodeSet{1} << n); ++s) {
    if ((s & both) != both || std::popcount(s) != m) continue;
    sum += t[s] - t[s ^ Bit(i)] - t[s ^ Bit(j)] + t[s ^ both];
    ++count;
  }
  return sum / count;
}

TEST(SetFunction, RejectsEmptySetAndForeignPlayers) {
  SetFunction f(3, SetFunction::Evaluator([](NodeSet s) { return double(SetSize(s)); }));
  EXPECT_THROW(f(0), std::invalid_argument);
  EXPECT_THROW(f(Bit(3)), std::invalid_argument);
  EXPECT_DOUBLE_EQ(f(0b101), 2.0);
}

TEST(SetFunction, MemoizesAcrossPrefetchAndCalls) {
  std::atomic<int> calls{0};
  SetFunction f(
      6,
      SetFunction::BatchEvaluator([&](std::span<const NodeSet> sets) {
        calls += static_cast<int>(sets.size());
        std::vector<double> out;
        for (NodeSet s : sets) out.push_back(double(s));
        return out;
      }),
      false, true, 5);
  std::vector<NodeSet> sets;
  for (NodeSet s = 1; s < 64; ++s) sets.push_back(s);
  sets.push_back(7);
  f.Prefetch(sets, 4);
  EXPECT_EQ(calls.load(), 63);
  EXPECT_EQ(f.cached_count(), 63u);
  EXPECT_DOUBLE_EQ(f(42), 42.0);
  EXPECT_EQ(calls.load(), 63);
}

TEST(TabulatedGame, ValidatesSize) {
  EXPECT_THROW(TabulatedGame({1.0, 2.0, 3.0}), std::invalid_argument);
  const SetFunction f = TabulatedGame({0, 1, 2, 3});
  EXPECT_EQ(f.arity(), 2);
  EXPECT_TRUE(f.defined_on_empty());
}

TEST(ExactInteraction, MatchesBruteForce) {
  for (int n = 4; n <= 8; ++n) {
    const auto t = RandomTable(n, 100 + n);
    const SetFunction f = TabulatedGame(t);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        for (int m = 3; m <= n; ++m) {
          EXPECT_NEAR(ExactInteraction(f, i, j, m), OracleInteraction(t, n, i, j, m), 1e-12);
        }
      }
    }
  }
}

TEST(ExactInteraction, SquareOfSizeGivesTwo) {
  std::vector<double> t(1 << 6);
  for (NodeSet s = 0; s < t.size(); ++s) t[s] = std::pow(SetSize(s), 2);
  const SetFunction f = TabulatedGame(t);
  for (int m = 3; m <= 6; ++m) EXPECT_NEAR(ExactInteraction(f, 0, 4, m), 2.0, 1e-12);
  const auto [excluded, included] = EquivalenceCheck(f, 1, 2, 2);
  EXPECT_NEAR(excluded, 2.0, 1e-12);
  EXPECT_NEAR(included, 2.0, 1e-12);
}

TEST(ExactInteraction, Errors) {
  const SetFunction f = TabulatedGame(RandomTable(5, 1));
  EXPECT_THROW(ExactInteraction(f, 0, 1, 2), std::out_of_range);
  EXPECT_THROW(ExactInteraction(f, 0, 1, 6), std::out_of_range);
  EXPECT_THROW(ExactInteraction(f, 2, 2, 3), std::invalid_argument);
  EXPECT_THROW(ExactInteraction(f, 0, 5, 3), std::out_of_range);
  SetFunction big(15, SetFunction::Evaluator([](NodeSet) { return 0.0; }));
  EXPECT_THROW(ExactInteraction(big, 0, 1, 3), std::length_error);
}

TEST(ExactInteraction, GameTheoreticProperties) {
  const int n = 6;
  const auto a = RandomTable(n, 7), b = RandomTable(n, 8);
  std::vector<double> sum(a.size());
  for (std::size_t s = 0; s < a.size(); ++s) sum[s] = a[s] + b[s];
  const SetFunction fa = TabulatedGame(a), fb = TabulatedGame(b), fs = TabulatedGame(sum);
  // Player 5 is a dummy in g; players 1 and 2 are interchangeable in h.
  std::vector<double> g(a.size()), h(a.size());
  for (NodeSet s = 0; s < a.size(); ++s) {
    g[s] = a[s & ~Bit(5)] + ((s & Bit(5)) ? 0.7 : 0.0);
    NodeSet swapped = s & ~(Bit(1) | Bit(2));
    if (s & Bit(1)) swapped |= Bit(2);
    if (s & Bit(2)) swapped |= Bit(1);
    h[s] = a[s] + a[swapped];
  }
  const SetFunction fg = TabulatedGame(g), fh = TabulatedGame(h);
  for (int m = 3; m <= n; ++m) {
    EXPECT_EQ(ExactInteraction(fa, 0, 3, m), ExactInteraction(fa, 3, 0, m));
    EXPECT_NEAR(ExactInteraction(fs, 1, 4, m),
                ExactInteraction(fa, 1, 4, m) + ExactInteraction(fb, 1, 4, m), 1e-12);
    EXPECT_NEAR(ExactInteraction(fg, 5, 2, m), 0.0, 1e-12);
    EXPECT_NEAR(ExactInteraction(fh, 1, 4, m), ExactInteraction(fh, 2, 4, m), 1e-12);
  }
}

TEST(McInteraction, FallsBackToEnumeration) {
  const SetFunction f = TabulatedGame(RandomTable(8, 3));
  const PairInteractionEstimate e = McInteractionGraph(f, 1, 6, 5, 20, 9);
  EXPECT_TRUE(e.exact);
  EXPECT_EQ(e.samples, 20);  // C(6, 3)
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_NEAR(e.value, ExactInteraction(f, 1, 6, 5), 1e-12);
}

TEST(McInteraction, SampledEstimatesCoverTheExactValue) {
  const int n = 12;
  const SetFunction f = TabulatedGame(RandomTable(n, 11));
  int covered = 0, cells = 0;
  for (int i = 0; i < n; i += 2) {
    for (int m = 6; m <= 8; ++m) {
      const PairInteractionEstimate e = McInteractionGraph(f, i, i + 1, m, 100, 1000 + i * 17 + m);
      ASSERT_FALSE(e.exact);
      ASSERT_GT(e.std_error, 0.0);
      covered += std::abs(e.value - ExactInteraction(f, i, i + 1, m)) <= 3 * e.std_error;
      ++cells;
    }
  }
  EXPECT_GE(covered, cells * 9 / 10);
}

TEST(McInteraction, DeterministicPerSeed) {
  const SetFunction f = TabulatedGame(RandomTable(12, 4));
  const auto a = McInteractionGraph(f, 0, 1, 7, 50, 5);
  const auto b = McInteractionGraph(f, 0, 1, 7, 50, 5);
  const auto c = McInteractionGraph(f, 0, 1, 7, 50, 6);
  EXPECT_EQ(a.value, b.value);
  EXPECT_NE(a.value, c.value);
}

// Node game whose output on i is the sum of w_ij v_j over present j: the
// interaction of j on i is |w_ij| * |v| at every order.
NodeSetFunction LinearNodeGame(int n, const Eigen::MatrixXd& w) {
  return NodeSetFunction(n, NodeSetFunction::Evaluator([n, w](NodeSet s) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, 3);
    for (int i = 0; i < n; ++i) {
      if (!(s & Bit(i))) continue;
      for (int j = 0; j < n; ++j) {
        if (s & Bit(j)) out.row(i) += w(i, j) * Eigen::RowVector3d(1, 2, 2);
      }
    }
    return out;
  }));
}

TEST(McInteractionNode, LinearGameIsConstantAcrossOrders) {
  const int n = 6;
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(n, n);
  const NodeSetFunction f = LinearNodeGame(n, w);
  for (int m = 2; m <= n; ++m) {
    const auto e = McInteractionNode(f, 1, 3, m, 2.0, 64, 0);
    EXPECT_NEAR(e.value, std::abs(w(1, 3)) * 3.0, 1e-12);
  }
  EXPECT_THROW(McInteractionNode(f, 1, 3, 1, 2.0, 64, 0), std::out_of_range);
}

TEST(StrengthProfile, NormalizedAndDeterministic) {
  std::vector<SetFunction> fs;
  for (int g = 0; g < 3; ++g) fs.push_back(TabulatedGame(RandomTable(9, 50 + g)));
  ProfileOptions o;
  o.context_budget = 8;
  o.seed = 3;
  const StrengthProfile p = GraphStrengthProfile(fs, o);
  ASSERT_EQ(p.orders, DefaultOrders(Level::kGraph, 9));
  double sum = 0;
  for (double v : p.strength) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  o.workers = 3;
  const StrengthProfile q = GraphStrengthProfile(fs, o);
  for (std::size_t t = 0; t < p.strength.size(); ++t) EXPECT_EQ(p.strength[t], q.strength[t]);
  EXPECT_EQ(TotalVariation(p, q), 0.0);
  EXPECT_EQ(ProfileCsv(p).substr(0, 19), "m,m_over_n,J,stderr");
}

TEST(StrengthProfile, PairBudgetSubsamples) {
  std::vector<SetFunction> fs{TabulatedGame(RandomTable(7, 2))};
  ProfileOptions o;
  o.pair_budget = 3;
  o.orders = {3, 5, 7};
  const StrengthProfile p = GraphStrengthProfile(fs, o);
  EXPECT_EQ(p.strength.size(), 3u);
}

TEST(StrengthProfile, DegenerateRaises) {
  std::vector<double> additive(1 << 5);
  for (NodeSet s = 0; s < additive.size(); ++s) additive[s] = SetSize(s) * 1.5;
  std::vector<SetFunction> fs{TabulatedGame(additive)};
  EXPECT_THROW(GraphStrengthProfile(fs, {}), std::domain_error);
}

TEST(StrengthProfile, NodeLevelOnLinearGame) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Random(5, 5);
  std::vector<NodeSetFunction> fs{LinearNodeGame(5, w)};
  const StrengthProfile p = NodeStrengthProfile(fs, {});
  ASSERT_EQ(p.orders.size(), 4u);
  for (double v : p.strength) EXPECT_NEAR(v, 0.25, 1e-12);
}

TEST(Orders, FromRatios) {
  const std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  EXPECT_EQ(OrdersFromRatios(ratios, Level::kGraph, 10),
            (std::vector<int>{3, 4, 5, 6, 7, 8, 9, 10}));
  EXPECT_EQ(OrdersFromRatios(ratios, Level::kNode, 50),
            (std::vector<int>{5, 10, 15, 20, 25, 30, 35, 40, 45, 50}));
}

TEST(LearningStrengthCurve, ClosedForm) {
  const auto c = LearningStrengthCurve(10, false);
  ASSERT_EQ(c.size(), 9u);
  EXPECT_EQ(c.front().m, 2);
  EXPECT_NEAR(c.front().value, 0.1, 1e-12);
  EXPECT_NEAR(c.back().value, 1.0 / 90, 1e-12);
  EXPECT_NEAR(c[4].value, 5.0 / 90 / std::sqrt(70.0), 1e-12);
  EXPECT_NEAR(c[4].value, 0.006641, 1e-6);
  const auto e = LearningStrengthCurve(10, true);
  EXPECT_EQ(e.front().m, 0);
  EXPECT_EQ(e.back().m, 8);
  EXPECT_NEAR(e.front().value, 0.1, 1e-12);
  EXPECT_THROW(LearningStrengthCurve(2, false), std::invalid_argument);
}

TEST(LearningStrengthCurve, EndpointsDominateForLargeN) {
  const auto c = LearningStrengthCurve(50, false);
  double lo = c.front().value;
  for (const auto& p : c) lo = std::min(lo, p.value);
  EXPECT_GT(std::min(c.front().value, c.back().value), 10 * lo);
}

TEST(Efficiency, ResidualVanishes) {
  EXPECT_DOUBLE_EQ(EfficiencyWeight(5, 0), 0.2);
  EXPECT_LE(EfficiencyResidual(TabulatedGame(RandomTable(5, 77))), 1e-9);
  std::vector<double> additive(1 << 4);
  for (NodeSet s = 0; s < additive.size(); ++s) {
    for (int p = 0; p < 4; ++p) additive[s] += (s & Bit(p)) ? p + 0.5 : 0.0;
  }
  EXPECT_LE(EfficiencyResidual(TabulatedGame(additive)), 1e-12);
  SetFunction no_empty(3, SetFunction::Evaluator([](NodeSet s) { return double(s); }));
  EXPECT_THROW(EfficiencyResidual(no_empty), std::invalid_argument);
}

TEST(Equivalence, BothFormsAgree) {
  const SetFunction f = TabulatedGame(RandomTable(8, 5));
  for (int m = 0; m <= 6; ++m) {
    const auto [x, y] = EquivalenceCheck(f, 2, 7, m);
    EXPECT_NEAR(x, y, 1e-12);
  }
  EXPECT_THROW(EquivalenceCheck(f, 2, 7, 7), std::out_of_range);
}

TEST(NormalityTest, MatchesReferenceValues) {
  std::vector<double> a, b;
  for (int i = 0; i < 40; ++i) {
    a.push_back(std::sin(i * 1.3) + 0.1 * i);
    b.push_back(std::exp(0.1 * i));
  }
  const NormalityResult ra = NormalityTest(a);
  EXPECT_NEAR(ra.statistic, 2.0251566594083763, 1e-9);
  EXPECT_NEAR(ra.p_value, 0.3632811125424362, 1e-9);
  EXPECT_NEAR(ra.skew_z, 0.07716356362999752, 1e-9);
  EXPECT_NEAR(ra.kurtosis_z, -1.4209864333822106, 1e-9);
  const NormalityResult rb = NormalityTest(b);
  EXPECT_NEAR(rb.statistic, 11.167669395647312, 1e-9);
  EXPECT_NEAR(rb.p_value, 0.003758126572199838, 1e-9);
}

TEST(NormalityTest, Errors) {
  EXPECT_THROW(NormalityTest(std::vector<double>(19, 1.0)), std::invalid_argument);
  EXPECT_THROW(NormalityTest(std::vector<double>(50, 1.0)), std::domain_error);
}

TEST(Binomial, SmallValues) {
  EXPECT_EQ(Binomial(8, 6), 28);
  EXPECT_EQ(Binomial(48, 24), 32247603683100LL);
  EXPECT_EQ(Binomial(3, 5), 0);
}

}  // namespace
}  // namespace gil
