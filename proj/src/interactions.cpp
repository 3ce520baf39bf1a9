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

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "gil/parallel.hpp"

namespace gil {

int SetSize(NodeSet s) { return std::popcount(s); }

template <typename Output>
class EvaluationCache {
 public:
  bool Lookup(NodeSet s, Output* out) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = values_.find(s);
    if (it == values_.end()) return false;
    *out = it->second;
    return true;
  }
  bool Contains(NodeSet s) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return values_.count(s) > 0;
  }
  void Insert(NodeSet s, const Output& value) {
    std::lock_guard<std::mutex> lock(mutex_);
    values_.emplace(s, value);
  }
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return values_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::unordered_map<NodeSet, Output> values_;
};

template <typename Output>
BasicSetFunction<Output>::BasicSetFunction(int arity, Evaluator evaluator,
                                           bool defined_on_empty, bool memoize)
    : arity_(arity), defined_on_empty_(defined_on_empty) {
  if (arity < 1 || arity > 64) throw std::invalid_argument("arity must be in [1, 64]");
  if (!evaluator) throw std::invalid_argument("null evaluator");
  batch_ = [ev = std::move(evaluator)](std::span<const NodeSet> sets) {
    std::vector<Output> out;
    out.reserve(sets.size());
    for (NodeSet s : sets) out.push_back(ev(s));
    return out;
  };
  if (memoize) cache_ = std::make_shared<EvaluationCache<Output>>();
}

template <typename Output>
BasicSetFunction<Output>::BasicSetFunction(int arity, BatchEvaluator evaluator,
                                           bool defined_on_empty, bool memoize,
                                           int batch_size)
    : arity_(arity),
      defined_on_empty_(defined_on_empty),
      batch_(std::move(evaluator)),
      batch_size_(std::max(batch_size, 1)) {
  if (arity < 1 || arity > 64) throw std::invalid_argument("arity must be in [1, 64]");
  if (!batch_) throw std::invalid_argument("null evaluator");
  if (memoize) cache_ = std::make_shared<EvaluationCache<Output>>();
}

template <typename Output>
void BasicSetFunction<Output>::Check(NodeSet s) const {
  if (s == 0 && !defined_on_empty_) {
    throw std::invalid_argument("set function is not defined on the empty set");
  }
  if ((s & ~FullSet(arity_)) != 0) {
    throw std::invalid_argument("subset contains players outside the arity");
  }
}

template <typename Output>
Output BasicSetFunction<Output>::operator()(NodeSet s) const {
  Check(s);
  Output value;
  if (cache_ && cache_->Lookup(s, &value)) return value;
  const NodeSet one[1] = {s};
  std::vector<Output> out = batch_(std::span<const NodeSet>(one, 1));
  if (out.size() != 1) throw std::logic_error("evaluator returned wrong count");
  if (cache_) cache_->Insert(s, out[0]);
  return std::move(out[0]);
}

template <typename Output>
void BasicSetFunction<Output>::Prefetch(std::span<const NodeSet> sets,
                                        int workers) const {
  if (!cache_) return;
  std::set<NodeSet> unique;
  for (NodeSet s : sets) {
    Check(s);
    if (!cache_->Contains(s)) unique.insert(s);
  }
  const std::vector<NodeSet> todo(unique.begin(), unique.end());
  const std::size_t chunks = (todo.size() + batch_size_ - 1) / batch_size_;
  ParallelFor(chunks, workers, [&](std::size_t c) {
    const std::size_t begin = c * batch_size_;
    const std::size_t end = std::min(todo.size(), begin + batch_size_);
    std::span<const NodeSet> part(todo.data() + begin, end - begin);
    std::vector<Output> out = batch_(part);
    if (out.size() != part.size()) {
      throw std::logic_error("evaluator returned wrong count");
    }
    for (std::size_t t = 0; t < part.size(); ++t) cache_->Insert(part[t], out[t]);
  });
}

template <typename Output>
std::size_t BasicSetFunction<Output>::cached_count() const {
  return cache_ ? cache_->size() : 0;
}

template class BasicSetFunction<double>;
template class BasicSetFunction<Eigen::MatrixXd>;

SetFunction TabulatedGame(std::vector<double> values) {
  if (values.size() < 2 || !std::has_single_bit(values.size())) {
    throw std::invalid_argument("table size must be 2^n with n >= 1");
  }
  const int n = std::countr_zero(values.size());
  if (n > 20) throw std::invalid_argument("tabulated game limited to 20 players");
  auto table = std::make_shared<const std::vector<double>>(std::move(values));
  return SetFunction(
      n, SetFunction::Evaluator([table](NodeSet s) { return (*table)[s]; }), true);
}

std::int64_t Binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t r = 1;
  for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
  return r;
}

namespace {

double BinomialReal(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  double r = 1;
  for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
  return r;
}

void CheckPair(int n, int i, int j) {
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw std::out_of_range("player index outside [0, n)");
  }
  if (i == j) throw std::invalid_argument("interaction needs two distinct players");
}

void CheckOrder(int m, int lo, int hi) {
  if (m < lo || m > hi) {
    throw std::out_of_range("order " + std::to_string(m) + " outside [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

std::vector<int> Others(int n, int i, int j) {
  std::vector<int> out;
  for (int p = 0; p < n; ++p) {
    if (p != i && p != j) out.push_back(p);
  }
  return out;
}

// Every size-r subset of `pool`, as masks, in lexicographic index order.
std::vector<NodeSet> Combinations(const std::vector<int>& pool, int r) {
  std::vector<NodeSet> out;
  const int size = static_cast<int>(pool.size());
  if (r < 0 || r > size) return out;
  std::vector<int> idx(r);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    NodeSet s = 0;
    for (int t : idx) s |= Bit(pool[t]);
    out.push_back(s);
    int t = r - 1;
    while (t >= 0 && idx[t] == size - r + t) --t;
    if (t < 0) break;
    ++idx[t];
    for (int u = t + 1; u < r; ++u) idx[u] = idx[u - 1] + 1;
  }
  return out;
}

// Contexts (as masks over the other players, i.e. without i and j) for one
// (pair, order) cell: all of them when few enough, else `budget` uniform
// draws with replacement.
struct ContextPlan {
  std::vector<NodeSet> rest;
  bool exact = false;
};

ContextPlan PlanContexts(int n, int i, int j, int rest_size, std::int64_t budget,
                         std::uint64_t seed) {
  ContextPlan plan;
  const std::vector<int> pool = Others(n, i, j);
  const double total = BinomialReal(n - 2, rest_size);
  if (total <= static_cast<double>(budget)) {
    plan.rest = Combinations(pool, rest_size);
    plan.exact = true;
    return plan;
  }
  std::mt19937_64 rng(seed);
  std::vector<int> scratch = pool;
  plan.rest.reserve(budget);
  for (std::int64_t b = 0; b < budget; ++b) {
    // Partial Fisher-Yates: the first rest_size slots become the draw.
    NodeSet s = 0;
    for (int t = 0; t < rest_size; ++t) {
      std::uniform_int_distribution<int> pick(t, static_cast<int>(scratch.size()) - 1);
      std::swap(scratch[t], scratch[pick(rng)]);
      s |= Bit(scratch[t]);
    }
    plan.rest.push_back(s);
  }
  return plan;
}

std::uint64_t CellSeed(std::uint64_t seed, int g, int i, int j, int m) {
  std::uint64_t s = MixSeed(seed, static_cast<std::uint64_t>(g));
  s = MixSeed(s, static_cast<std::uint64_t>(i));
  s = MixSeed(s, static_cast<std::uint64_t>(j));
  return MixSeed(s, static_cast<std::uint64_t>(m));
}

void AppendGraphMasks(const ContextPlan& plan, int i, int j, std::vector<NodeSet>* out) {
  for (NodeSet t : plan.rest) {
    out->push_back(t | Bit(i) | Bit(j));
    out->push_back(t | Bit(j));
    out->push_back(t | Bit(i));
    if (t != 0) out->push_back(t);
  }
}

void AppendNodeMasks(const ContextPlan& plan, int i, int j, std::vector<NodeSet>* out) {
  for (NodeSet t : plan.rest) {
    out->push_back(t | Bit(i) | Bit(j));
    out->push_back(t | Bit(i));
  }
}

// Grouped so that swapping i and j gives bit-identical results.
double Delta(double both, double with_i, double with_j, double neither) {
  return (both + neither) - (with_i + with_j);
}

double GraphDelta(const SetFunction& f, int i, int j, NodeSet t) {
  return Delta(f(t | Bit(i) | Bit(j)), f(t | Bit(i)), f(t | Bit(j)), f(t));
}

double NodeDelta(const NodeSetFunction& f, int i, int j, NodeSet t, double p) {
  const Eigen::MatrixXd with = f(t | Bit(i) | Bit(j));
  const Eigen::MatrixXd without = f(t | Bit(i));
  const Eigen::RowVectorXd d = with.row(i) - without.row(i);
  if (std::isinf(p)) return d.cwiseAbs().maxCoeff();
  return std::pow(d.cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

template <typename Delta>
PairInteractionEstimate Summarize(const ContextPlan& plan, int i, int j, int m,
                                  Delta delta) {
  PairInteractionEstimate est;
  est.i = i;
  est.j = j;
  est.m = m;
  est.exact = plan.exact;
  est.samples = static_cast<std::int64_t>(plan.rest.size());
  std::vector<double> values;
  values.reserve(plan.rest.size());
  for (NodeSet t : plan.rest) values.push_back(delta(t));
  const double count = static_cast<double>(values.size());
  est.value = std::accumulate(values.begin(), values.end(), 0.0) / count;
  if (plan.exact) {
    est.std_error = 0;
  } else if (values.size() < 2) {
    est.std_error = std::numeric_limits<double>::infinity();
  } else {
    double ss = 0;
    for (double v : values) ss += (v - est.value) * (v - est.value);
    est.std_error = std::sqrt(ss / (count - 1) / count);
  }
  return est;
}

// Mean of delta f over contexts T (without i and j) of size rest_size.
double EnumeratedMean(const SetFunction& f, int i, int j, int rest_size) {
  const std::vector<NodeSet> contexts =
      Combinations(Others(f.arity(), i, j), rest_size);
  double sum = 0;
  for (NodeSet t : contexts) sum += GraphDelta(f, i, j, t);
  return sum / static_cast<double>(contexts.size());
}

}  // namespace

double ExactInteraction(const SetFunction& f, int i, int j, int m) {
  const int n = f.arity();
  if (n > 14) throw std::length_error("exact enumeration too large; use mc_interaction");
  CheckPair(n, i, j);
  CheckOrder(m, 3, n);
  return EnumeratedMean(f, i, j, m - 2);
}

PairInteractionEstimate McInteractionGraph(const SetFunction& f, int i, int j, int m,
                                           std::int64_t budget, std::uint64_t seed) {
  const int n = f.arity();
  CheckPair(n, i, j);
  CheckOrder(m, 3, n);
  if (budget < 1) throw std::invalid_argument("budget must be positive");
  const ContextPlan plan = PlanContexts(n, i, j, m - 2, budget, seed);
  std::vector<NodeSet> masks;
  AppendGraphMasks(plan, i, j, &masks);
  f.Prefetch(masks, 1);
  return Summarize(plan, i, j, m, [&](NodeSet t) { return GraphDelta(f, i, j, t); });
}

PairInteractionEstimate McInteractionNode(const NodeSetFunction& f, int i, int j, int m,
                                          double p, std::int64_t budget,
                                          std::uint64_t seed) {
  const int n = f.arity();
  CheckPair(n, i, j);
  CheckOrder(m, 2, n);
  if (budget < 1) throw std::invalid_argument("budget must be positive");
  if (!(p >= 1)) throw std::invalid_argument("norm order must be >= 1");
  const ContextPlan plan = PlanContexts(n, i, j, m - 2, budget, seed);
  std::vector<NodeSet> masks;
  AppendNodeMasks(plan, i, j, &masks);
  f.Prefetch(masks, 1);
  return Summarize(plan, i, j, m,
                   [&](NodeSet t) { return NodeDelta(f, i, j, t, p); });
}

std::string LevelName(Level level) {
  return level == Level::kGraph ? "graph" : "node";
}

int StrengthProfile::ArgMax() const {
  if (strength.empty()) throw std::logic_error("empty profile");
  return static_cast<int>(std::max_element(strength.begin(), strength.end()) -
                          strength.begin());
}

std::vector<int> DefaultOrders(Level level, int n) {
  const int lo = level == Level::kGraph ? 3 : 2;
  std::vector<int> out;
  for (int m = lo; m <= n; ++m) out.push_back(m);
  return out;
}

std::vector<int> OrdersFromRatios(std::span<const double> ratios, Level level, int n) {
  const int lo = level == Level::kGraph ? 3 : 2;
  if (n < lo) throw std::invalid_argument("too few nodes for any order");
  std::set<int> out;
  for (double r : ratios) {
    if (!(r > 0) || r > 1) throw std::invalid_argument("order ratio must be in (0, 1]");
    out.insert(std::clamp(static_cast<int>(std::lround(r * n)), lo, n));
  }
  return {out.begin(), out.end()};
}

namespace {

struct Pair {
  int i, j;
};

std::vector<Pair> SelectPairs(int n, bool ordered, std::int64_t budget,
                              std::uint64_t seed) {
  std::vector<Pair> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = ordered ? 0 : i + 1; j < n; ++j) {
      if (i != j) pairs.push_back({i, j});
    }
  }
  if (budget < static_cast<std::int64_t>(pairs.size())) {
    std::mt19937_64 rng(seed);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(std::max<std::int64_t>(budget, 0));
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
  }
  return pairs;
}

template <typename Function, typename AppendMasks, typename Estimate>
StrengthProfile Profile(std::span<const Function> functions,
                        const ProfileOptions& options, Level level,
                        AppendMasks append_masks, Estimate estimate) {
  if (functions.empty()) throw std::invalid_argument("no set functions to profile");
  const int n = functions[0].arity();
  for (const Function& f : functions) {
    if (f.arity() != n) throw std::invalid_argument("set functions differ in arity");
  }
  if (options.context_budget < 1) throw std::invalid_argument("budget must be positive");
  const int lo = level == Level::kGraph ? 3 : 2;
  if (n < lo) throw std::invalid_argument("too few nodes for any order");
  std::vector<int> orders = options.orders.empty() ? DefaultOrders(level, n) : options.orders;
  for (int m : orders) CheckOrder(m, lo, n);
  if (!std::is_sorted(orders.begin(), orders.end()) ||
      std::adjacent_find(orders.begin(), orders.end()) != orders.end()) {
    throw std::invalid_argument("orders must be strictly increasing");
  }

  const std::size_t k = orders.size();
  std::vector<double> abs_sum(k, 0.0), var_sum(k, 0.0);
  std::vector<std::int64_t> cells(k, 0);
  for (std::size_t g = 0; g < functions.size(); ++g) {
    const Function& f = functions[g];
    const std::vector<Pair> pairs =
        SelectPairs(n, level == Level::kNode, options.pair_budget,
                    MixSeed(options.seed, 0x5eed0000ULL + g));
    std::vector<ContextPlan> plans;
    std::vector<NodeSet> masks;
    for (const Pair& pr : pairs) {
      for (int m : orders) {
        plans.push_back(PlanContexts(n, pr.i, pr.j, m - 2, options.context_budget,
                                     CellSeed(options.seed, static_cast<int>(g), pr.i,
                                              pr.j, m)));
        append_masks(plans.back(), pr.i, pr.j, &masks);
      }
    }
    f.Prefetch(masks, options.workers);
    std::size_t cell = 0;
    for (const Pair& pr : pairs) {
      for (std::size_t o = 0; o < k; ++o, ++cell) {
        const PairInteractionEstimate est =
            estimate(f, plans[cell], pr.i, pr.j, orders[o]);
        abs_sum[o] += std::abs(est.value);
        var_sum[o] += est.std_error * est.std_error;
        ++cells[o];
      }
    }
  }

  StrengthProfile profile;
  profile.orders = orders;
  profile.level = level;
  profile.n = n;
  double total = 0;
  for (std::size_t o = 0; o < k; ++o) {
    const double c = static_cast<double>(std::max<std::int64_t>(cells[o], 1));
    profile.raw.push_back(abs_sum[o] / c);
    profile.std_error.push_back(std::sqrt(var_sum[o]) / c);
    total += profile.raw.back();
  }
  if (!(total > 0) || !std::isfinite(total)) {
    throw std::domain_error("degenerate profile: every interaction is zero");
  }
  for (std::size_t o = 0; o < k; ++o) {
    profile.strength.push_back(profile.raw[o] / total);
    profile.std_error[o] /= total;
  }
  return profile;
}

}  // namespace

StrengthProfile GraphStrengthProfile(std::span<const SetFunction> functions,
                                     const ProfileOptions& options) {
  return Profile(
      functions, options, Level::kGraph,
      [](const ContextPlan& plan, int i, int j, std::vector<NodeSet>* out) {
        AppendGraphMasks(plan, i, j, out);
      },
      [](const SetFunction& f, const ContextPlan& plan, int i, int j, int m) {
        return Summarize(plan, i, j, m,
                         [&](NodeSet t) { return GraphDelta(f, i, j, t); });
      });
}

StrengthProfile NodeStrengthProfile(std::span<const NodeSetFunction> functions,
                                    const ProfileOptions& options) {
  if (!(options.p >= 1)) throw std::invalid_argument("norm order must be >= 1");
  const double p = options.p;
  return Profile(
      functions, options, Level::kNode,
      [](const ContextPlan& plan, int i, int j, std::vector<NodeSet>* out) {
        AppendNodeMasks(plan, i, j, out);
      },
      [p](const NodeSetFunction& f, const ContextPlan& plan, int i, int j, int m) {
        return Summarize(plan, i, j, m,
                         [&](NodeSet t) { return NodeDelta(f, i, j, t, p); });
      });
}

double TotalVariation(const StrengthProfile& a, const StrengthProfile& b) {
  if (a.orders != b.orders) throw std::invalid_argument("profile order grids differ");
  double sum = 0;
  for (std::size_t o = 0; o < a.strength.size(); ++o) {
    sum += std::abs(a.strength[o] - b.strength[o]);
  }
  return 0.5 * sum;
}

std::string ProfileCsv(const StrengthProfile& profile) {
  std::ostringstream out;
  out << "m,m_over_n,J,stderr\n" << std::setprecision(17);
  for (std::size_t o = 0; o < profile.orders.size(); ++o) {
    out << profile.orders[o] << ','
        << static_cast<double>(profile.orders[o]) / profile.n << ','
        << profile.strength[o] << ',' << profile.std_error[o] << '\n';
  }
  return out.str();
}

std::vector<CurvePoint> LearningStrengthCurve(int n, bool include_empty) {
  if (n < 3) throw std::invalid_argument("learning-strength curve needs n >= 3");
  const double scale = 1.0 / (static_cast<double>(n) * (n - 1));
  std::vector<CurvePoint> out;
  if (include_empty) {
    for (int m = 0; m <= n - 2; ++m) {
      out.push_back({m, (n - m - 1) * scale / std::sqrt(BinomialReal(n - 2, m))});
    }
  } else {
    for (int m = 2; m <= n; ++m) {
      out.push_back({m, (n - m + 1) * scale / std::sqrt(BinomialReal(n - 2, m - 2))});
    }
  }
  return out;
}

double ExcludedFormInteraction(const SetFunction& f, int i, int j, int m) {
  const int n = f.arity();
  CheckPair(n, i, j);
  CheckOrder(m, 0, n - 2);
  const std::vector<int> pool = Others(n, i, j);
  double sum = 0;
  std::int64_t count = 0;
  for (NodeSet s : Combinations(pool, m)) {
    sum += Delta(f(s | Bit(i) | Bit(j)), f(s | Bit(i)), f(s | Bit(j)), f(s));
    ++count;
  }
  return sum / static_cast<double>(count);
}

double EfficiencyWeight(int n, int m) {
  if (n < 2) throw std::invalid_argument("efficiency weight needs n >= 2");
  CheckOrder(m, 0, n - 2);
  return static_cast<double>(n - 1 - m) / (static_cast<double>(n) * (n - 1));
}

double EfficiencyResidual(const SetFunction& f) {
  const int n = f.arity();
  if (n > 10) throw std::length_error("efficiency check is exhaustive; needs n <= 10");
  if (!f.defined_on_empty()) throw std::invalid_argument("missing f(empty set)");
  const double empty = f(0);
  double residual = f(FullSet(n)) - empty;
  for (int i = 0; i < n; ++i) residual -= f(Bit(i)) - empty;
  if (n >= 2) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        for (int m = 0; m <= n - 2; ++m) {
          residual -= EfficiencyWeight(n, m) * ExcludedFormInteraction(f, i, j, m);
        }
      }
    }
  }
  return std::abs(residual);
}

std::pair<double, double> EquivalenceCheck(const SetFunction& f, int i, int j, int m) {
  const int n = f.arity();
  if (n > 12) throw std::length_error("equivalence check needs n <= 12");
  CheckPair(n, i, j);
  if (m < 0 || m + 2 > n) throw std::out_of_range("order m + 2 exceeds n");
  const double excluded = ExcludedFormInteraction(f, i, j, m);
  // Included form: contexts S of size m + 2 holding both players.
  double sum = 0;
  std::int64_t count = 0;
  for (NodeSet s : Combinations([&] {
         std::vector<int> all(n);
         std::iota(all.begin(), all.end(), 0);
         return all;
       }(), m + 2)) {
    if ((s & Bit(i)) == 0 || (s & Bit(j)) == 0) continue;
    sum += Delta(f(s), f(s & ~Bit(j)), f(s & ~Bit(i)), f(s & ~(Bit(i) | Bit(j))));
    ++count;
  }
  return {excluded, sum / static_cast<double>(count)};
}

NormalityResult NormalityTest(std::span<const double> samples) {
  const std::size_t count = samples.size();
  if (count < 20) throw std::invalid_argument("normality test needs at least 20 samples");
  const double n = static_cast<double>(count);
  double mean = 0;
  for (double x : samples) mean += x;
  mean /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double x : samples) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0)) throw std::domain_error("normality test undefined for zero variance");

  // Skewness z-score.
  const double b2 = m3 / std::pow(m2, 1.5);
  double y = b2 * std::sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)));
  const double beta2 = 3.0 * (n * n + 27 * n - 70) * (n + 1) * (n + 3) /
                       ((n - 2) * (n + 5) * (n + 7) * (n + 9));
  const double w2 = -1 + std::sqrt(2 * (beta2 - 1));
  const double delta = 1 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1));
  if (y == 0) y = 1;
  const double skew_z = delta * std::log(y / alpha + std::sqrt((y / alpha) * (y / alpha) + 1));

  // Kurtosis z-score.
  const double b = m4 / (m2 * m2);
  const double e = 3.0 * (n - 1) / (n + 1);
  const double var_b = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) * (n + 1) * (n + 3) * (n + 5));
  const double x = (b - e) / std::sqrt(var_b);
  const double sqrt_beta1 = 6.0 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9)) *
                            std::sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)));
  const double a = 6.0 + 8.0 / sqrt_beta1 *
                             (2.0 / sqrt_beta1 + std::sqrt(1 + 4.0 / (sqrt_beta1 * sqrt_beta1)));
  const double term1 = 1 - 2 / (9 * a);
  const double denom = 1 + x * std::sqrt(2 / (a - 4.0));
  const double term2 = std::copysign(1.0, denom) *
                       std::cbrt(std::abs((1 - 2.0 / a) / denom));
  const double kurtosis_z = (term1 - term2) / std::sqrt(2 / (9.0 * a));

  NormalityResult result;
  result.skew_z = skew_z;
  result.kurtosis_z = kurtosis_z;
  result.statistic = skew_z * skew_z + kurtosis_z * kurtosis_z;
  result.p_value = std::exp(-0.5 * result.statistic);
  return result;
}

}  // namespace gil
