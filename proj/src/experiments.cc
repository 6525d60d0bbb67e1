// Copyright 2026 The locpriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "locpriv/experiments.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "locpriv/errors.h"

namespace locpriv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* CreditName(ActorCredit c) {
  return c == ActorCredit::kAllPairs ? "all_pairs" : "realized_pair";
}

const char* EvalKernelName(EvalKernel k) {
  return k == EvalKernel::kMean ? "mean" : "sampled";
}

std::string ReadFile(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + file.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void WriteFileAtomic(const fs::path& file, const std::string& text) {
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << text;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  fs::rename(tmp, file);
}

std::string NowUtc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double ParseDouble(const std::string& field, const std::string& what) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("bad " + what + " value '" + field + "'");
  }
  return v;
}

}  // namespace

void ExperimentConfig::ApplyProfile(Profile p) {
  if (p == Profile::kDesk) {
    episodes = 500;
    horizon = 100;
    rollouts = 50;
  } else {
    episodes = 5000;
    horizon = 300;
    rollouts = 100;
  }
}

void ExperimentConfig::Validate() const {
  if (world.empty()) throw ConfigError("world must not be empty");
  if (side < 2 || side > 8) throw ConfigError("side must be in [2, 8]");
  if (!(q2_r0 > 0.0) || !(q2_r1 > 0.0)) throw ConfigError("q2 weights must be > 0");
  if (methods.empty()) throw ConfigError("methods must not be empty");
  for (const auto& m : methods) {
    if (m != "a2c" && m != "myopic") throw ConfigError("unknown method '" + m + "'");
  }
  auto check_sweep = [](const std::vector<double>& s, const char* name) {
    if (s.empty()) throw ConfigError(std::string(name) + " must not be empty");
    for (double v : s) {
      if (!(v >= 0.0 && v <= 1e3)) {
        throw ConfigError(std::string(name) + " values must be in [0, 1000]");
      }
    }
  };
  check_sweep(lambdas, "lambdas");
  check_sweep(myopic_lambdas, "myopic_lambdas");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (!(dbar >= 0.0)) throw ConfigError("dbar must be >= 0");
  if (horizon < 1 || episodes < 1 || rollouts < 1) {
    throw ConfigError("horizon, episodes and rollouts must be >= 1");
  }
  if (out.empty()) throw ConfigError("out must not be empty");
  TrainFor(lambdas.front(), seeds.front()).Validate();
}

TrainConfig ExperimentConfig::TrainFor(double lambda, uint64_t seed) const {
  TrainConfig t;
  t.episodes = episodes;
  t.horizon = horizon;
  t.gamma = gamma;
  t.lambda = lambda;
  t.dbar = dbar;
  t.critic_lr = critic_lr;
  t.actor_lr = actor_lr;
  t.hidden1 = hidden1;
  t.hidden2 = hidden2;
  t.actor_output_scale = actor_output_scale;
  t.credit = credit;
  t.seed = seed;
  return t;
}

Profile ParseProfile(const std::string& name) {
  if (name == "desk") return Profile::kDesk;
  if (name == "paper") return Profile::kPaper;
  throw ConfigError("unknown profile '" + name + "' (desk or paper)");
}

ExperimentConfig ConfigFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "profile", "world", "side", "q2_r0", "q2_r1", "methods", "lambdas",
      "myopic_lambdas", "seeds", "dbar", "horizon", "episodes", "rollouts",
      "gamma", "critic_lr", "actor_lr", "hidden", "actor_output_scale",
      "credit", "eval_kernel", "out"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig cfg;
  try {
    if (doc.contains("profile")) cfg.ApplyProfile(ParseProfile(doc["profile"]));
    auto get = [&](const char* key, auto& field) {
      if (doc.contains(key)) field = doc[key].get<std::decay_t<decltype(field)>>();
    };
    get("world", cfg.world);
    get("side", cfg.side);
    get("q2_r0", cfg.q2_r0);
    get("q2_r1", cfg.q2_r1);
    get("methods", cfg.methods);
    get("lambdas", cfg.lambdas);
    get("myopic_lambdas", cfg.myopic_lambdas);
    get("seeds", cfg.seeds);
    get("dbar", cfg.dbar);
    get("horizon", cfg.horizon);
    get("episodes", cfg.episodes);
    get("rollouts", cfg.rollouts);
    get("gamma", cfg.gamma);
    get("critic_lr", cfg.critic_lr);
    get("actor_lr", cfg.actor_lr);
    get("actor_output_scale", cfg.actor_output_scale);
    get("out", cfg.out);
    if (doc.contains("hidden")) {
      const auto h = doc["hidden"].get<std::vector<int>>();
      if (h.size() != 2) throw ConfigError("hidden must list two widths");
      cfg.hidden1 = h[0];
      cfg.hidden2 = h[1];
    }
    if (doc.contains("credit")) {
      const std::string c = doc["credit"];
      if (c == "all_pairs") {
        cfg.credit = ActorCredit::kAllPairs;
      } else if (c == "realized_pair") {
        cfg.credit = ActorCredit::kRealizedPair;
      } else {
        throw ConfigError("credit must be all_pairs or realized_pair");
      }
    }
    if (doc.contains("eval_kernel")) {
      const std::string k = doc["eval_kernel"];
      if (k == "mean") {
        cfg.eval_kernel = EvalKernel::kMean;
      } else if (k == "sampled") {
        cfg.eval_kernel = EvalKernel::kSampled;
      } else {
        throw ConfigError("eval_kernel must be mean or sampled");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") + e.what());
  }
  cfg.Validate();
  return cfg;
}

std::string ConfigToJson(const ExperimentConfig& cfg) {
  json doc = {{"world", cfg.world},
              {"side", cfg.side},
              {"q2_r0", cfg.q2_r0},
              {"q2_r1", cfg.q2_r1},
              {"methods", cfg.methods},
              {"lambdas", cfg.lambdas},
              {"myopic_lambdas", cfg.myopic_lambdas},
              {"seeds", cfg.seeds},
              {"dbar", cfg.dbar},
              {"horizon", cfg.horizon},
              {"episodes", cfg.episodes},
              {"rollouts", cfg.rollouts},
              {"gamma", cfg.gamma},
              {"critic_lr", cfg.critic_lr},
              {"actor_lr", cfg.actor_lr},
              {"hidden", {cfg.hidden1, cfg.hidden2}},
              {"actor_output_scale", cfg.actor_output_scale},
              {"credit", CreditName(cfg.credit)},
              {"eval_kernel", EvalKernelName(cfg.eval_kernel)},
              {"out", cfg.out}};
  return doc.dump(2) + "\n";
}

World BuildWorld(const ExperimentConfig& cfg) {
  if (cfg.world == "q0" || cfg.world == "q1" || cfg.world == "q2") {
    const GridSpec spec(cfg.side);
    TransitionMatrix q;
    if (cfg.world == "q0") {
      q = BuildQ0(spec);
    } else if (cfg.world == "q1") {
      q = BuildQ1(spec, DefaultQ1Weights(spec));
    } else {
      q = BuildQ2(spec, cfg.q2_r0, cfg.q2_r1);
    }
    return {spec, q, InitialDistribution::Uniform(spec.cell_count())};
  }
  if (!fs::exists(cfg.world)) {
    throw ConfigError("world must be q0, q1, q2 or an existing file: " + cfg.world);
  }
  auto [spec, q] = TransitionMatrixFromJson(ReadFile(cfg.world));
  return {spec, q, InitialDistribution::Uniform(spec.cell_count())};
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericError("cannot format a double");
  return std::string(buf, ptr);
}

void SortRows(std::vector<CurveRow>& rows) {
  auto key = [](const CurveRow& r) { return std::tie(r.method, r.lambda, r.seed); };
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const CurveRow& a, const CurveRow& b) { return key(a) < key(b); });
  // Later rows win on duplicate keys.
  std::vector<CurveRow> unique;
  for (const auto& r : rows) {
    if (!unique.empty() && key(unique.back()) == key(r)) {
      unique.back() = r;
    } else {
      unique.push_back(r);
    }
  }
  rows = std::move(unique);
}

std::string RowsToCsv(const std::vector<CurveRow>& rows) {
  std::string s = std::string(kResultsHeader) + "\n";
  for (const auto& r : rows) {
    s += r.method + "," + FormatDouble(r.lambda) + "," + std::to_string(r.seed) + "," +
         FormatDouble(r.avg_distortion) + "," + FormatDouble(r.avg_leakage_bits) + "," +
         FormatDouble(r.stderr_leakage) + "," + FormatDouble(r.stderr_distortion) + "\n";
  }
  return s;
}

std::vector<CurveRow> RowsFromCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw ConfigError("results file does not start with the expected header");
  }
  std::vector<CurveRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 7) {
      throw ConfigError("results line " + std::to_string(line_no) + " has " +
                        std::to_string(f.size()) + " fields");
    }
    CurveRow r;
    r.method = f[0];
    r.lambda = ParseDouble(f[1], "lambda");
    const double seed = ParseDouble(f[2], "seed");
    if (seed < 0 || seed != std::floor(seed)) throw ConfigError("bad seed " + f[2]);
    r.seed = static_cast<uint64_t>(seed);
    r.avg_distortion = ParseDouble(f[3], "avg_distortion");
    r.avg_leakage_bits = ParseDouble(f[4], "avg_leakage_bits");
    r.stderr_leakage = ParseDouble(f[5], "stderr_leakage");
    r.stderr_distortion = ParseDouble(f[6], "stderr_distortion");
    rows.push_back(r);
  }
  return rows;
}

std::vector<CurveRow> ReadResults(const fs::path& file) {
  if (!fs::exists(file)) return {};
  return RowsFromCsv(ReadFile(file));
}

void WriteResults(const fs::path& file, std::vector<CurveRow> rows) {
  SortRows(rows);
  WriteFileAtomic(file, RowsToCsv(rows));
}

std::string CellStem(const std::string& method, double lambda, uint64_t seed) {
  return method + "_lambda" + FormatDouble(lambda) + "_seed" + std::to_string(seed);
}

uint64_t EvalSeed(uint64_t seed) { return seed ^ 0x5DEECE66DULL; }

A2cCell RunA2cCell(const ExperimentConfig& cfg, const World& world,
                   double lambda, uint64_t seed) {
  A2cCell cell;
  cell.train = Train(cfg.TrainFor(lambda, seed), world);
  cell.eval = EvaluatePolicy(cell.train.actor, world, cfg.horizon, cfg.rollouts,
                             lambda, cfg.dbar, EvalSeed(seed), cfg.eval_kernel);
  return cell;
}

void WriteA2cArtifacts(const fs::path& dir, const ExperimentConfig& cfg,
                       double lambda, uint64_t seed, const A2cCell& cell) {
  fs::create_directories(dir / "checkpoints");
  fs::create_directories(dir / "curves");
  const std::string stem = CellStem("a2c", lambda, seed);
  WriteFileAtomic(dir / "checkpoints" / (stem + "_actor.json"), MlpToJson(cell.train.actor));
  WriteFileAtomic(dir / "checkpoints" / (stem + "_critic.json"),
                  MlpToJson(cell.train.critic));
  const TrainConfig t = cfg.TrainFor(lambda, seed);
  const EpisodeStats& last = cell.train.curve.back();
  json manifest = {
      {"version", LOCPRIV_VERSION},
      {"world", cfg.world},
      {"config",
       {{"episodes", t.episodes}, {"horizon", t.horizon}, {"gamma", t.gamma},
        {"lambda", t.lambda}, {"dbar", t.dbar}, {"critic_lr", t.critic_lr},
        {"actor_lr", t.actor_lr}, {"hidden", {t.hidden1, t.hidden2}},
        {"actor_output_scale", t.actor_output_scale},
        {"credit", CreditName(t.credit)}, {"seed", t.seed}}},
      {"episodes_run", cell.train.curve.size()},
      {"final_episode",
       {{"avg_leakage_bits", last.avg_leakage_bits},
        {"avg_distortion", last.avg_distortion},
        {"avg_cost", last.avg_cost}}},
      {"evaluation",
       {{"rollouts", cfg.rollouts}, {"kernel", EvalKernelName(cfg.eval_kernel)},
        {"seed", EvalSeed(seed)}, {"avg_leakage_bits", cell.eval.avg_leakage_bits},
        {"avg_distortion", cell.eval.avg_distortion},
        {"stderr_leakage", cell.eval.stderr_leakage},
        {"stderr_distortion", cell.eval.stderr_distortion}}}};
  WriteFileAtomic(dir / "checkpoints" / (stem + "_train.json"), manifest.dump(2) + "\n");
  std::string curve = "episode,avg_leakage_bits,avg_distortion,avg_cost\n";
  for (size_t i = 0; i < cell.train.curve.size(); ++i) {
    const auto& e = cell.train.curve[i];
    curve += std::to_string(i + 1) + "," + FormatDouble(e.avg_leakage_bits) + "," +
             FormatDouble(e.avg_distortion) + "," + FormatDouble(e.avg_cost) + "\n";
  }
  WriteFileAtomic(dir / "curves" / (stem + ".csv"), curve);
}

std::vector<CellOutcome> RunExperiment(const ExperimentConfig& cfg, bool force,
                                       const ProgressFn& progress) {
  cfg.Validate();
  const World world = BuildWorld(cfg);
  const fs::path dir = cfg.out;
  fs::create_directories(dir);
  const fs::path results = dir / "results.csv";

  json manifest = {{"version", LOCPRIV_VERSION}, {"config", json::parse(ConfigToJson(cfg))}};
  WriteFileAtomic(dir / "manifest.json", manifest.dump(2) + "\n");

  std::vector<CurveRow> rows = ReadResults(results);
  std::set<std::tuple<std::string, double, uint64_t>> done;
  for (const auto& r : rows) done.insert({r.method, r.lambda, r.seed});

  struct Cell {
    std::string method;
    double lambda;
    uint64_t seed;
  };
  std::vector<Cell> pending;
  std::vector<CellOutcome> outcomes;
  auto plan = [&](const std::string& method, const std::vector<double>& sweep) {
    for (double lambda : sweep) {
      for (uint64_t seed : cfg.seeds) {
        const bool have = done.count({method, lambda, seed}) > 0;
        outcomes.push_back({method, lambda, seed, have && !force});
        if (!have || force) pending.push_back({method, lambda, seed});
      }
    }
  };
  for (const auto& m : cfg.methods) plan(m, m == "a2c" ? cfg.lambdas : cfg.myopic_lambdas);

  std::mutex mu;
  json stamps = json::array();
  if (fs::exists(dir / "timestamps.json")) {
    try {
      stamps = json::parse(ReadFile(dir / "timestamps.json"));
    } catch (const json::exception&) {
      stamps = json::array();
    }
    if (!stamps.is_array()) stamps = json::array();
  }
  auto record = [&](const Cell& c, const CurveRow& row, const std::string& started,
                    double seconds) {
    std::lock_guard<std::mutex> lock(mu);
    rows.push_back(row);
    WriteResults(results, rows);
    stamps.push_back({{"method", c.method}, {"lambda", c.lambda}, {"seed", c.seed},
                      {"started", started}, {"finished", NowUtc()}, {"seconds", seconds}});
    WriteFileAtomic(dir / "timestamps.json", stamps.dump(2) + "\n");
    if (progress) {
      progress(CellStem(c.method, c.lambda, c.seed) + ": D " +
               FormatDouble(row.avg_distortion) + " L " + FormatDouble(row.avg_leakage_bits));
    }
  };

  // Myopic solutions do not depend on the seed; solve each lambda once.
  std::map<double, MyopicRow> myopic;
  {
    std::vector<double> need;
    for (const auto& c : pending) {
      if (c.method == "myopic" && !myopic.count(c.lambda)) {
        myopic[c.lambda] = {};
        need.push_back(c.lambda);
      }
    }
    if (!need.empty()) {
      const auto solved = RunMyopic(world.spec, world.q, world.p1, need, cfg.horizon);
      for (size_t i = 0; i < need.size(); ++i) myopic[need[i]] = solved[i];
    }
  }

  std::vector<std::exception_ptr> errors(pending.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < pending.size(); ++i) {
    const Cell& c = pending[i];
    const std::string started = NowUtc();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      CurveRow row{c.method, c.lambda, c.seed};
      if (c.method == "myopic") {
        row.avg_distortion = myopic[c.lambda].avg_distortion;
        row.avg_leakage_bits = myopic[c.lambda].avg_leakage_bits;
      } else {
        const A2cCell cell = RunA2cCell(cfg, world, c.lambda, c.seed);
        {
          std::lock_guard<std::mutex> lock(mu);
          WriteA2cArtifacts(dir, cfg, c.lambda, c.seed, cell);
        }
        row.avg_distortion = cell.eval.avg_distortion;
        row.avg_leakage_bits = cell.eval.avg_leakage_bits;
        row.stderr_leakage = cell.eval.stderr_leakage;
        row.stderr_distortion = cell.eval.stderr_distortion;
      }
      record(c, row, started,
             std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outcomes;
}

std::vector<PlotRow> AggregateCurve(const std::vector<CurveRow>& rows,
                                    const std::vector<std::string>& filter) {
  std::map<std::pair<std::string, double>, std::vector<const CurveRow*>> groups;
  for (const auto& r : rows) {
    if (!filter.empty() && std::find(filter.begin(), filter.end(), r.method) == filter.end()) {
      continue;
    }
    groups[{r.method, r.lambda}].push_back(&r);
  }
  if (groups.empty()) throw ConfigError("no results match the method filter");
  std::vector<PlotRow> out;
  for (const auto& [key, members] : groups) {
    PlotRow p;
    p.method = key.first;
    p.lambda = key.second;
    p.seeds = static_cast<int>(members.size());
    for (const CurveRow* r : members) {
      p.avg_distortion += r->avg_distortion;
      p.avg_leakage_bits += r->avg_leakage_bits;
    }
    p.avg_distortion /= p.seeds;
    p.avg_leakage_bits /= p.seeds;
    if (p.seeds > 1) {
      double vd = 0.0, vl = 0.0;
      for (const CurveRow* r : members) {
        vd += std::pow(r->avg_distortion - p.avg_distortion, 2);
        vl += std::pow(r->avg_leakage_bits - p.avg_leakage_bits, 2);
      }
      p.stderr_distortion = std::sqrt(vd / (p.seeds - 1) / p.seeds);
      p.stderr_leakage = std::sqrt(vl / (p.seeds - 1) / p.seeds);
    }
    out.push_back(p);
  }
  std::stable_sort(out.begin(), out.end(), [](const PlotRow& a, const PlotRow& b) {
    return std::tie(a.method, a.avg_distortion, a.lambda) <
           std::tie(b.method, b.avg_distortion, b.lambda);
  });
  return out;
}

std::string PlotToCsv(const std::vector<PlotRow>& rows) {
  std::string s = std::string(kPlotHeader) + "\n";
  for (const auto& r : rows) {
    s += r.method + "," + FormatDouble(r.lambda) + "," + std::to_string(r.seeds) + "," +
         FormatDouble(r.avg_distortion) + "," + FormatDouble(r.stderr_distortion) + "," +
         FormatDouble(r.avg_leakage_bits) + "," + FormatDouble(r.stderr_leakage) + "\n";
  }
  return s;
}

Frontier::Frontier(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw DomainError("a frontier needs at least one point");
  std::sort(points.begin(), points.end());
  for (size_t i = 0; i < points.size();) {
    size_t j = i;
    double sum = 0.0;
    while (j < points.size() && points[j].first == points[i].first) sum += points[j++].second;
    points_.push_back({points[i].first, sum / static_cast<double>(j - i)});
    i = j;
  }
}

double Frontier::LeakageAt(double d) const {
  if (d < min_distortion() || d > max_distortion()) {
    throw DomainError("distortion " + FormatDouble(d) + " outside the frontier");
  }
  auto hi = std::lower_bound(points_.begin(), points_.end(), d,
                             [](const auto& p, double v) { return p.first < v; });
  if (hi->first == d) return hi->second;
  auto lo = hi - 1;
  const double w = (d - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

Frontier FrontierOf(const std::vector<PlotRow>& rows, const std::string& method) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (r.method == method) pts.push_back({r.avg_distortion, r.avg_leakage_bits});
  }
  if (pts.empty()) throw DomainError("no rows for method " + method);
  return Frontier(std::move(pts));
}

FrontierGap CompareFrontiers(const Frontier& a, const Frontier& b) {
  FrontierGap g;
  g.lo = std::max(a.min_distortion(), b.min_distortion());
  g.hi = std::min(a.max_distortion(), b.max_distortion());
  if (g.lo > g.hi) throw DomainError("frontiers share no distortion range");
  std::vector<double> at = {g.lo, g.hi};
  for (const auto* f : {&a, &b}) {
    for (const auto& p : f->points()) {
      if (p.first > g.lo && p.first < g.hi) at.push_back(p.first);
    }
  }
  std::sort(at.begin(), at.end());
  at.erase(std::unique(at.begin(), at.end()), at.end());
  g.worst_excess = -std::numeric_limits<double>::infinity();
  for (double d : at) {
    const double diff = a.LeakageAt(d) - b.LeakageAt(d);
    if (diff > g.worst_excess) {
      g.worst_excess = diff;
      g.at = d;
    }
    g.worst_abs = std::max(g.worst_abs, std::abs(diff));
    ++g.checked;
  }
  return g;
}

}  // namespace locpriv
