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

#include "gil/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "gil/analysis.hpp"
#include "gil/data.hpp"
#include "gil/isgr.hpp"
#include "gil/models.hpp"
#include "gil/parallel.hpp"
#include "json.hpp"

namespace gil {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Input problems the user can fix; mapped to the usage exit code.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw UsageError("failed writing " + path.string());
}

void WriteJson(const fs::path& path, const json& j) { WriteText(path, j.dump(2) + "\n"); }

json ReadJson(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

void MakeDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create directory " + dir.string());
}

void RequireFile(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) {
    throw UsageError(std::string(what) + " not found: " + path.string());
  }
}

void ApplySeedOverride(std::uint64_t* seed) {
  if (const char* env = std::getenv("GIL_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      *seed = v;
    } catch (const std::exception&) {
      throw UsageError(std::string("GIL_SEED is not an unsigned integer: ") + env);
    }
  }
}

double ParseReal(const std::string& text, const char* flag) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "inf" || lower == "+inf" || lower == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || std::isnan(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string(flag) + ": not a number: " + text);
  }
}

json Manifest(const std::string& command,
              const std::vector<std::pair<std::string, fs::path>>& inputs,
              const fs::path& dir, const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["inputs"] = json::object();
  for (const auto& [name, path] : inputs) {
    m["inputs"][name] = {{"path", path.string()}, {"sha256", Sha256File(path)}};
  }
  m["outputs"] = json::object();
  for (const std::string& name : outputs) m["outputs"][name] = Sha256File(dir / name);
  return m;
}

json ProfileJson(const StrengthProfile& p) {
  return {{"orders", p.orders}, {"J", p.strength}, {"stderr", p.std_error}, {"raw", p.raw}};
}

// "a:b:step" ratios, "all", or comma-separated orders.
std::vector<int> ParseOrders(const std::string& spec, Level level, int n) {
  if (spec.empty() || spec == "all") return DefaultOrders(level, n);
  if (spec.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(ParseReal(item, "--orders"));
    if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0]) {
      throw UsageError("--orders expects start:stop:step with stop >= start, step > 0");
    }
    const int count = static_cast<int>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
    std::vector<double> ratios;
    for (int t = 0; t < count; ++t) ratios.push_back(parts[0] + t * parts[2]);
    try {
      return OrdersFromRatios(ratios, level, n);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--orders: ") + e.what());
    }
  }
  std::vector<int> orders;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double v = ParseReal(item, "--orders");
    if (v != std::floor(v)) throw UsageError("--orders: orders must be integers");
    orders.push_back(static_cast<int>(v));
  }
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  const int lo = level == Level::kGraph ? 3 : 2;
  for (int m : orders) {
    if (m < lo || m > n) {
      throw UsageError("--orders: order " + std::to_string(m) + " outside [" +
                       std::to_string(lo) + ", " + std::to_string(n) + "]");
    }
  }
  return orders;
}

Construction ParseConstruction(const std::string& kind, int k, double radius) {
  if (kind == "knn") {
    if (k < 1) throw UsageError("--k must be >= 1");
    return Construction::Knn(k);
  }
  if (kind == "fc") return Construction::FullyConnected();
  if (kind == "rball") {
    if (!(radius > 0)) throw UsageError("--radius must be positive");
    return Construction::RBall(radius);
  }
  throw UsageError("--graph must be knn, fc or rball");
}

Dataset LoadData(const fs::path& path) {
  RequireFile(path, "dataset");
  try {
    return LoadDataset(path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

// ---- generate -----------------------------------------------------------------

struct GenerateArgs {
  std::string system = "spring";
  GenerateOptions options;
  std::string task = "hamiltonian";
  std::string out;
};

int RunGenerate(GenerateArgs a, std::ostream& out, std::ostream& err) {
  if (a.system != "spring") throw UsageError("--system: only 'spring' is available");
  if (a.options.particles < 1) throw UsageError("--particles must be >= 1");
  if (a.options.steps < 1) throw UsageError("--steps must be >= 1");
  if (a.options.systems < 1) throw UsageError("--systems must be >= 1");
  if (a.options.stride < 1) throw UsageError("--stride must be >= 1");
  if (!(a.options.dt > 0)) throw UsageError("--dt must be positive");
  try {
    a.options.task = ParseTask(a.task);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  ApplySeedOverride(&a.options.seed);
  Dataset d;
  try {
    d = GenerateSpringDataset(a.options);
  } catch (const SimulationDiverged& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  WriteDataset(d, a.out);
  out << "wrote " << d.records.size() << " records to " << a.out << "\n";
  return kExitOk;
}

// ---- train --------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string model = "egnn";
  std::string rewire = "none";
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  int epochs = 200;
  int batch_size = 32;
  double lr = 1e-4;
  int hidden = 32;
  int depth = 3;
  int heads = 4;
  int ffn = 128;
  double dropout = 0.1;
  bool multiscale = false;
  std::string activation = "silu";
  std::string graph = "knn";
  int k = 8;
  double radius = 1.5;
  int early_stopping = 30;
  std::string isgr_threshold = "0.05";
  int isgr_interval = 10;
  int isgr_batch = 8;
  std::int64_t isgr_budget = 16;
  std::string isgr_baseline = "previous";
  bool isgr_fc = false;
  double digl_alpha = 0.0259;
  int digl_top_k = 32;
  double digl_eps = 0;
  std::string out_dir;
  int workers = 0;
};

json RunConfigJson(const TrainArgs& a, const TrainConfig& c, const Model& model) {
  const ModelConfig& m = model.config();
  return {
      {"data", a.data},
      {"seed", c.seed},
      {"split_seed", a.split_seed},
      {"rewire", RewireName(c.rewire)},
      {"model",
       {{"architecture", ArchitectureName(m.architecture)},
        {"head", m.head == Head::kGraphScalar ? "graph" : "node"},
        {"in_features", m.in_features},
        {"hidden", m.hidden},
        {"depth", m.depth},
        {"heads", m.heads},
        {"ffn", m.ffn},
        {"dropout", m.dropout},
        {"multiscale", m.multiscale},
        {"distance_bars", m.distance_bars},
        {"activation", ActivationName(m.activation)},
        {"output_scale", m.output_scale},
        {"output_shift", m.output_shift}}},
      {"graph", c.graph.ToString()},
      {"training",
       {{"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"lr", c.adam.lr},
        {"beta1", c.adam.beta1},
        {"beta2", c.adam.beta2},
        {"eps", c.adam.eps},
        {"plateau_factor", c.plateau.factor},
        {"plateau_patience", c.plateau.patience},
        {"min_lr", c.plateau.min_lr},
        {"early_stopping", c.early_stopping},
        {"loss", "mse"}}},
      {"isgr",
       {{"threshold", std::isinf(c.isgr_threshold) ? json("inf") : json(c.isgr_threshold)},
        {"interval", c.isgr_interval},
        {"k0", c.graph.k},
        {"batch", c.isgr_batch},
        {"context_budget", c.isgr_context_budget},
        {"baseline", BaselineName(c.isgr_baseline)},
        {"fully_connected", c.isgr_fully_connected}}},
      {"digl",
       {{"alpha", c.digl.alpha},
        {"top_k", c.digl.top_k ? json(*c.digl.top_k) : json(nullptr)},
        {"eps", c.digl.eps ? json(*c.digl.eps) : json(nullptr)}}},
      {"workers", c.workers}};
}

int RunTrain(TrainArgs a, std::ostream& out, std::ostream& err) {
  ApplySeedOverride(&a.seed);
  const fs::path data_path = a.data;
  Dataset dataset = LoadData(data_path);
  if (dataset.records.empty()) throw UsageError("dataset has no records");
  if (a.epochs < 1) throw UsageError("--epochs must be >= 1");
  if (a.batch_size < 1) throw UsageError("--batch-size must be >= 1");
  if (!(a.lr > 0)) throw UsageError("--lr must be positive");
  if (a.isgr_interval < 1) throw UsageError("--isgr-interval must be >= 1");
  if (a.isgr_batch < 1) throw UsageError("--isgr-batch must be >= 1");
  if (a.isgr_budget < 1) throw UsageError("--isgr-budget must be >= 1");

  TrainConfig c;
  try {
    c.model.architecture = ParseArchitecture(a.model);
    c.model.activation = ParseActivation(a.activation);
    c.rewire = ParseRewire(a.rewire);
    c.isgr_baseline = ParseBaseline(a.isgr_baseline);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  c.model.hidden = a.hidden;
  c.model.depth = a.depth;
  c.model.heads = a.heads;
  c.model.ffn = a.ffn;
  c.model.dropout = a.dropout;
  c.model.multiscale = a.multiscale;
  c.model.seed = a.seed;
  c.epochs = a.epochs;
  c.batch_size = a.batch_size;
  c.adam.lr = a.lr;
  c.early_stopping = a.early_stopping;
  c.graph = ParseConstruction(a.graph, a.k, a.radius);
  c.isgr_threshold = ParseReal(a.isgr_threshold, "--isgr-threshold");
  c.isgr_interval = a.isgr_interval;
  c.isgr_batch = a.isgr_batch;
  c.isgr_context_budget = a.isgr_budget;
  c.isgr_fully_connected = a.isgr_fc;
  c.digl.alpha = a.digl_alpha;
  if (a.digl_eps > 0) {
    c.digl.eps = a.digl_eps;
    c.digl.top_k.reset();
  } else {
    c.digl.top_k = a.digl_top_k;
  }
  c.seed = a.seed;
  c.workers = a.workers > 0 ? a.workers : DefaultWorkers();

  DatasetSplit split = SplitDataset(dataset.records, a.split_seed);
  if (split.all_train_fallback) {
    err << "warning: fewer than 10 records; every record goes to training\n";
    throw UsageError("training needs validation and test records (at least 10 records)");
  }

  const fs::path dir = a.out_dir;
  MakeDir(dir);
  std::ofstream log(dir / "isgr_log.jsonl", std::ios::binary);
  if (!log) throw UsageError("cannot write " + (dir / "isgr_log.jsonl").string());

  TrainResult result;
  try {
    result = Train(split, c, [&](const IsgrRecord& r) {
      json line = {{"epoch", r.epoch},
                   {"k", r.k},
                   {"m_star", r.m_star < 0 ? json(nullptr) : json(r.m_star)},
                   {"fired", r.fired},
                   {"max_delta", r.compared ? json(r.max_delta) : json(nullptr)},
                   {"orders", r.profile.orders},
                   {"J", r.profile.strength}};
      log << line.dump() << "\n";
      log.flush();
    });
  } catch (const NumericFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  log.close();

  SaveCheckpoint(*result.model, dir / "checkpoint.bin");
  WriteJson(dir / "config.json", RunConfigJson(a, c, *result.model));
  json epochs = json::array();
  std::vector<int> k_traj;
  for (const EpochLog& e : result.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"val_mae", e.val_mae},
                      {"lr", e.lr},
                      {"k", e.k}});
    k_traj.push_back(e.k);
  }
  const json metrics = {{"test_mae", result.test_mae},
                        {"best_val_mae", result.best_val_mae},
                        {"best_epoch", result.best_epoch},
                        {"best_k", result.best_k},
                        {"final_k", result.final_k},
                        {"stopped_early", result.stopped_early},
                        {"epochs_run", result.epochs.size()},
                        {"k_trajectory", k_traj},
                        {"epochs", epochs}};
  WriteJson(dir / "metrics.json", metrics);
  WriteJson(dir / "manifest.json",
            Manifest("train", {{"data", data_path}}, dir,
                     {"config.json", "checkpoint.bin", "metrics.json", "isgr_log.jsonl"}));
  out << std::setprecision(6) << "test MAE " << result.test_mae << " (best epoch "
      << result.best_epoch << ", k " << result.best_k << ", final k " << result.final_k
      << ")\n";
  return kExitOk;
}

// ---- analyze ------------------------------------------------------------------

struct AnalyzeArgs {
  std::string checkpoint;
  std::string data;
  std::string orders = "all";
  std::string level;
  std::string rewire = "none";
  double digl_alpha = 0.0259;
  int digl_top_k = 32;
  int graphs = 10;
  std::int64_t budget = 64;
  std::int64_t pair_budget = std::int64_t{1} << 40;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  int workers = 0;
  std::string out_dir;
};

int RunAnalyze(AnalyzeArgs a, std::ostream& out, std::ostream&) {
  ApplySeedOverride(&a.seed);
  const fs::path ckpt_path = a.checkpoint;
  const fs::path data_path = a.data;
  RequireFile(ckpt_path, "checkpoint");
  std::unique_ptr<Model> model;
  try {
    model = LoadCheckpoint(ckpt_path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  const Level head_level = HeadLevel(model->config().head);
  if (!a.level.empty() && a.level != LevelName(head_level)) {
    if (a.level != "graph" && a.level != "node") throw UsageError("--level must be graph or node");
    throw UsageError("--level " + a.level + " does not match the checkpoint's " +
                     LevelName(head_level) + "-level head");
  }
  if (a.graphs < 1) throw UsageError("--graphs must be >= 1");
  if (a.budget < 1) throw UsageError("--budget must be >= 1");
  if (a.pair_budget < 1) throw UsageError("--pair-budget must be >= 1");
  Rewire rewire;
  try {
    rewire = ParseRewire(a.rewire);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  Dataset dataset = LoadData(data_path);
  if (dataset.records.empty()) throw UsageError("dataset has no records");
  if (dataset.records.front().graph_target.has_value() != (head_level == Level::kGraph)) {
    throw UsageError("dataset targets do not match the checkpoint's head");
  }
  DatasetSplit split = SplitDataset(dataset.records, a.split_seed);
  std::vector<DatasetRecord> pool = split.val.empty() ? split.train : split.val;

  const Construction construction = model->config().construction;
  DiglOptions digl{a.digl_alpha, a.digl_top_k, std::nullopt};
  const bool fa = rewire == Rewire::kFullyAdjacent;
  std::vector<GeometricGraph> graphs;
  for (const DatasetRecord& r : pool) {
    GeometricGraph g = RecordGraph(r, construction);
    if (rewire == Rewire::kDigl) g = RewireDigl(g, digl);
    graphs.push_back(std::move(g));
  }
  // Lowest-error graphs of the trained model.
  std::vector<double> errors(graphs.size());
  for (std::size_t t = 0; t < graphs.size(); ++t) {
    errors[t] = MeanAbsoluteError(*model, std::span(&graphs[t], 1), std::span(&pool[t], 1), fa);
  }
  std::vector<std::size_t> order(graphs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return errors[x] < errors[y]; });
  order.resize(std::min<std::size_t>(order.size(), a.graphs));
  std::vector<GeometricGraph> chosen;
  for (std::size_t t : order) chosen.push_back(graphs[t]);
  const int n = chosen.front().num_nodes();
  for (const GeometricGraph& g : chosen) {
    if (g.num_nodes() != n) throw UsageError("profiles need graphs of equal size");
  }

  ProfileOptions po;
  po.orders = ParseOrders(a.orders, head_level, n);
  po.context_budget = a.budget;
  po.pair_budget = a.pair_budget;
  po.seed = a.seed;
  po.workers = a.workers > 0 ? a.workers : DefaultWorkers();
  GameOptions game;
  game.fully_connect_last_layer = fa;

  std::unique_ptr<Model> random_init = MakeModel(model->config());
  StrengthProfile learned, initial;
  try {
    learned = ModelStrengthProfile(*model, chosen, po, game);
    initial = ModelStrengthProfile(*random_init, chosen, po, game);
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
  const double tv = TotalVariation(learned, initial);
  std::size_t gap = 0;
  for (std::size_t o = 0; o < learned.orders.size(); ++o) {
    if (std::abs(learned.strength[o] - initial.strength[o]) >
        std::abs(learned.strength[gap] - initial.strength[gap])) {
      gap = o;
    }
  }

  const fs::path dir = a.out_dir;
  MakeDir(dir);
  WriteText(dir / "learned.csv", ProfileCsv(learned));
  WriteText(dir / "random_init.csv", ProfileCsv(initial));
  const json summary = {{"level", LevelName(head_level)},
                        {"n", n},
                        {"graphs", chosen.size()},
                        {"seed", a.seed},
                        {"split_seed", a.split_seed},
                        {"context_budget", a.budget},
                        {"pair_budget", a.pair_budget},
                        {"rewire", RewireName(rewire)},
                        {"graph", construction.ToString()},
                        {"checkpoint_sha256", Sha256File(ckpt_path)},
                        {"data_sha256", Sha256File(data_path)},
                        {"learned", ProfileJson(learned)},
                        {"random_init", ProfileJson(initial)},
                        {"total_variation", tv},
                        {"max_gap_order", learned.orders[gap]}};
  WriteJson(dir / "strength.json", summary);
  WriteJson(dir / "manifest.json",
            Manifest("analyze", {{"checkpoint", ckpt_path}, {"data", data_path}}, dir,
                     {"learned.csv", "random_init.csv", "strength.json"}));
  out << std::setprecision(6) << "total variation " << tv << ", largest gap at m = "
      << learned.orders[gap] << "\n";
  return kExitOk;
}

// ---- report -------------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> runs;
  std::string out;
};

int RunReport(const ReportArgs& a, std::ostream& out, std::ostream&) {
  struct Group {
    std::vector<double> mae;
    std::vector<double> k;
  };
  std::map<std::pair<std::string, std::string>, Group> groups;
  for (const std::string& run : a.runs) {
    const json config = ReadJson(fs::path(run) / "config.json");
    const json metrics = ReadJson(fs::path(run) / "metrics.json");
    try {
      Group& g = groups[{config.at("model").at("architecture").get<std::string>(),
                         config.at("rewire").get<std::string>()}];
      g.mae.push_back(metrics.at("test_mae").get<double>());
      g.k.push_back(metrics.at("final_k").get<double>());
    } catch (const json::exception& e) {
      throw UsageError(run + ": " + e.what());
    }
  }
  std::ostringstream csv;
  csv << std::setprecision(10) << "model,rewire,runs,test_mae_mean,test_mae_std,final_k_mean\n";
  for (const auto& [key, g] : groups) {
    const double count = static_cast<double>(g.mae.size());
    const double mean = std::accumulate(g.mae.begin(), g.mae.end(), 0.0) / count;
    double var = 0;
    for (double v : g.mae) var += (v - mean) * (v - mean);
    const double sd = g.mae.size() > 1 ? std::sqrt(var / (count - 1)) : 0.0;
    const double k = std::accumulate(g.k.begin(), g.k.end(), 0.0) / count;
    csv << key.first << ',' << key.second << ',' << g.mae.size() << ',' << mean << ','
        << sd << ',' << k << '\n';
  }
  if (a.out.empty()) {
    out << csv.str();
  } else {
    WriteText(a.out, csv.str());
    out << "wrote " << groups.size() << " rows to " << a.out << "\n";
  }
  return kExitOk;
}

}  // namespace

std::string Sha256File(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 unavailable");
  }
  std::vector<char> buffer(1 << 16);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), in.gcount());
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream hex;
  for (unsigned int t = 0; t < len; ++t) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[t]);
  }
  return hex.str();
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-order interaction analysis and interaction-guided rewiring for "
               "geometric graph predictors"};
  app.name("gil");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Simulate spring systems into a dataset");
  generate->add_option("--system", gen.system, "Force law")->capture_default_str();
  generate->add_option("--particles", gen.options.particles)->capture_default_str();
  generate->add_option("--steps", gen.options.steps, "Records per system")->capture_default_str();
  generate->add_option("--dt", gen.options.dt)->capture_default_str();
  generate->add_option("--task", gen.task, "hamiltonian or newtonian")->capture_default_str();
  generate->add_option("--seed", gen.options.seed)->capture_default_str();
  generate->add_option("--systems", gen.options.systems)->capture_default_str();
  generate->add_option("--stride", gen.options.stride, "Integration steps per record")
      ->capture_default_str();
  generate->add_option("--workers", gen.options.workers)->capture_default_str();
  generate->add_option("--out", gen.out)->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a predictor with optional rewiring");
  train->add_option("--data", tr.data)->required();
  train->add_option("--model", tr.model, "egnn or attention")->capture_default_str();
  train->add_option("--rewire", tr.rewire, "none, isgr, fa or digl")->capture_default_str();
  train->add_option("--seed", tr.seed)->capture_default_str();
  train->add_option("--split-seed", tr.split_seed)->capture_default_str();
  train->add_option("--epochs", tr.epochs)->capture_default_str();
  train->add_option("--batch-size", tr.batch_size)->capture_default_str();
  train->add_option("--lr", tr.lr)->capture_default_str();
  train->add_option("--hidden", tr.hidden)->capture_default_str();
  train->add_option("--depth", tr.depth)->capture_default_str();
  train->add_option("--heads", tr.heads)->capture_default_str();
  train->add_option("--ffn", tr.ffn)->capture_default_str();
  train->add_option("--dropout", tr.dropout)->capture_default_str();
  train->add_flag("--multiscale", tr.multiscale);
  train->add_option("--activation", tr.activation)->capture_default_str();
  train->add_option("--graph", tr.graph, "knn, fc or rball")->capture_default_str();
  train->add_option("--k", tr.k)->capture_default_str();
  train->add_option("--radius", tr.radius)->capture_default_str();
  train->add_option("--early-stopping", tr.early_stopping)->capture_default_str();
  train->add_option("--isgr-threshold", tr.isgr_threshold, "Real or inf")->capture_default_str();
  train->add_option("--isgr-interval", tr.isgr_interval)->capture_default_str();
  train->add_option("--isgr-batch", tr.isgr_batch)->capture_default_str();
  train->add_option("--isgr-budget", tr.isgr_budget, "Contexts per (pair, order)")
      ->capture_default_str();
  train->add_option("--isgr-baseline", tr.isgr_baseline, "previous or initial")
      ->capture_default_str();
  train->add_flag("--isgr-fc", tr.isgr_fc, "Let ISGR shrink fully connected graphs");
  train->add_option("--digl-alpha", tr.digl_alpha)->capture_default_str();
  train->add_option("--digl-top-k", tr.digl_top_k)->capture_default_str();
  train->add_option("--digl-eps", tr.digl_eps, "Threshold instead of top-k when > 0");
  train->add_option("--workers", tr.workers, "0 = logical cores")->capture_default_str();
  train->add_option("--out-dir", tr.out_dir)->required();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Strength profiles of a trained model");
  analyze->add_option("--checkpoint", an.checkpoint)->required();
  analyze->add_option("--data", an.data)->required();
  analyze->add_option("--orders", an.orders, "all, start:stop:step ratios or m1,m2,...")
      ->capture_default_str();
  analyze->add_option("--level", an.level, "graph or node (default: from the head)");
  analyze->add_option("--rewire", an.rewire, "Connectivity used in training")
      ->capture_default_str();
  analyze->add_option("--digl-alpha", an.digl_alpha)->capture_default_str();
  analyze->add_option("--digl-top-k", an.digl_top_k)->capture_default_str();
  analyze->add_option("--graphs", an.graphs, "Lowest-error graphs to use")
      ->capture_default_str();
  analyze->add_option("--budget", an.budget, "Contexts per (pair, order)")
      ->capture_default_str();
  analyze->add_option("--pair-budget", an.pair_budget, "Pairs per graph");
  analyze->add_option("--seed", an.seed)->capture_default_str();
  analyze->add_option("--split-seed", an.split_seed)->capture_default_str();
  analyze->add_option("--workers", an.workers, "0 = logical cores")->capture_default_str();
  analyze->add_option("--out-dir", an.out_dir)->required();

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Aggregate training runs into a table");
  report->add_option("--runs", rep.runs, "Run directories")->required();
  report->add_option("--out", rep.out, "CSV path (default: standard output)");

  std::vector<std::string> argv_store{"gil"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& s : argv_store) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) return RunGenerate(gen, out, err);
    if (*train) return RunTrain(tr, out, err);
    if (*analyze) return RunAnalyze(an, out, err);
    if (*report) return RunReport(rep, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace gil
