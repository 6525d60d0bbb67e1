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

// Command-line front end: train, evaluate, myopic, curve, oracle-check, run.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "locpriv/a2c_trainer.h"
#include "locpriv/errors.h"
#include "locpriv/experiments.h"
#include "locpriv/myopic_baseline.h"
#include "locpriv/neural.h"
#include "locpriv/oracle_suite.h"

namespace {

namespace fs = std::filesystem;
using namespace locpriv;

constexpr int kExitOk = 0;
constexpr int kExitProperty = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

// Flags shared by every subcommand. Unset flags leave the config alone.
struct Overrides {
  std::string config;
  std::string profile;
  std::optional<std::string> world;
  std::optional<std::string> out;
  std::optional<double> lambda;
  std::optional<uint64_t> seed;
  std::optional<int> side;
  std::optional<double> q2_r0, q2_r1;
  std::vector<std::string> methods;
  std::vector<double> lambdas, myopic_lambdas;
  std::vector<uint64_t> seeds;
  std::optional<double> dbar, gamma, critic_lr, actor_lr, actor_output_scale;
  std::optional<int> horizon, episodes, rollouts;
  std::vector<int> hidden;
  std::optional<std::string> credit, eval_kernel;
  // List flags given on the command line; an empty list is a usage error.
  std::vector<CLI::Option*> lists;
};

void AddCommonFlags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON experiment config");
  app->add_option("--profile", o.profile, "desk or paper scale")
      ->check(CLI::IsMember({"desk", "paper"}));
  app->add_option("--world", o.world, "q0, q1, q2 or a transition-matrix JSON file");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--lambda", o.lambda, "single lambda (replaces both sweeps)");
  app->add_option("--seed", o.seed, "single seed (replaces the seed list)");
  app->add_option("--side", o.side, "grid side for the built-in worlds");
  app->add_option("--q2-r0", o.q2_r0, "Q2 weight for cells off the route");
  app->add_option("--q2-r1", o.q2_r1, "Q2 weight along the route");
  o.lists = {
      app->add_option("--methods", o.methods, "a2c and/or myopic")->delimiter(','),
      app->add_option("--lambdas", o.lambdas, "a2c lambda sweep")->delimiter(','),
      app->add_option("--myopic-lambdas", o.myopic_lambdas, "myopic tilt sweep")
          ->delimiter(','),
      app->add_option("--seeds", o.seeds, "seed list")->delimiter(',')};
  app->add_option("--dbar", o.dbar, "distortion reference");
  app->add_option("--horizon", o.horizon, "steps per episode and roll-out");
  app->add_option("--episodes", o.episodes, "training episodes");
  app->add_option("--rollouts", o.rollouts, "evaluation roll-outs");
  app->add_option("--gamma", o.gamma, "discount");
  app->add_option("--critic-lr", o.critic_lr, "critic Adam step size");
  app->add_option("--actor-lr", o.actor_lr, "actor Adam step size");
  app->add_option("--hidden", o.hidden, "two hidden widths")->delimiter(',')->expected(2);
  app->add_option("--actor-output-scale", o.actor_output_scale,
                  "initial scale of the actor's last layer");
  app->add_option("--credit", o.credit, "all_pairs or realized_pair")
      ->check(CLI::IsMember({"all_pairs", "realized_pair"}));
  app->add_option("--eval-kernel", o.eval_kernel, "mean or sampled")
      ->check(CLI::IsMember({"mean", "sampled"}));
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig Resolve(const Overrides& o) {
  for (const CLI::Option* opt : o.lists) {
    const auto& given = opt->results();
    const bool empty = std::all_of(given.begin(), given.end(),
                                   [](const std::string& s) { return s.empty(); });
    if (opt->count() > 0 && empty) {
      throw ConfigError(opt->get_name() + " needs at least one value");
    }
  }
  ExperimentConfig cfg;
  if (!o.config.empty()) cfg = ConfigFromJson(Slurp(o.config));
  if (!o.profile.empty()) cfg.ApplyProfile(ParseProfile(o.profile));
  if (o.world) cfg.world = *o.world;
  if (o.out) cfg.out = *o.out;
  if (o.side) cfg.side = *o.side;
  if (o.q2_r0) cfg.q2_r0 = *o.q2_r0;
  if (o.q2_r1) cfg.q2_r1 = *o.q2_r1;
  if (!o.methods.empty()) cfg.methods = o.methods;
  if (!o.lambdas.empty()) cfg.lambdas = o.lambdas;
  if (!o.myopic_lambdas.empty()) cfg.myopic_lambdas = o.myopic_lambdas;
  if (o.lambda) cfg.lambdas = cfg.myopic_lambdas = {*o.lambda};
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  if (o.seed) cfg.seeds = {*o.seed};
  if (o.dbar) cfg.dbar = *o.dbar;
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.critic_lr) cfg.critic_lr = *o.critic_lr;
  if (o.actor_lr) cfg.actor_lr = *o.actor_lr;
  if (o.actor_output_scale) cfg.actor_output_scale = *o.actor_output_scale;
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.episodes) cfg.episodes = *o.episodes;
  if (o.rollouts) cfg.rollouts = *o.rollouts;
  if (o.hidden.size() == 2) {
    cfg.hidden1 = o.hidden[0];
    cfg.hidden2 = o.hidden[1];
  }
  if (o.credit) {
    cfg.credit = *o.credit == "all_pairs" ? ActorCredit::kAllPairs : ActorCredit::kRealizedPair;
  }
  if (o.eval_kernel) {
    cfg.eval_kernel = *o.eval_kernel == "mean" ? EvalKernel::kMean : EvalKernel::kSampled;
  }
  cfg.Validate();
  return cfg;
}

int CmdTrain(const Overrides& o) {
  const ExperimentConfig cfg = Resolve(o);
  const World world = BuildWorld(cfg);
  const double lambda = cfg.lambdas.front();
  const uint64_t seed = cfg.seeds.front();
  std::fprintf(stderr, "training a2c lambda=%s seed=%llu (%d episodes x %d steps)\n",
               FormatDouble(lambda).c_str(), static_cast<unsigned long long>(seed),
               cfg.episodes, cfg.horizon);
  A2cCell cell;
  try {
    cell = RunA2cCell(cfg, world, lambda, seed);
  } catch (const TrainingAborted& e) {
    // Keep the last finite networks for inspection.
    fs::create_directories(fs::path(cfg.out) / "checkpoints");
    const std::string stem = CellStem("a2c", lambda, seed);
    std::ofstream(fs::path(cfg.out) / "checkpoints" / (stem + "_aborted_actor.json"))
        << MlpToJson(e.actor());
    std::ofstream(fs::path(cfg.out) / "checkpoints" / (stem + "_aborted_critic.json"))
        << MlpToJson(e.critic());
    throw;
  }
  WriteA2cArtifacts(cfg.out, cfg, lambda, seed, cell);
  std::printf("%s\n", kResultsHeader);
  std::printf("a2c,%s,%llu,%s,%s,%s,%s\n", FormatDouble(lambda).c_str(),
              static_cast<unsigned long long>(seed),
              FormatDouble(cell.eval.avg_distortion).c_str(),
              FormatDouble(cell.eval.avg_leakage_bits).c_str(),
              FormatDouble(cell.eval.stderr_leakage).c_str(),
              FormatDouble(cell.eval.stderr_distortion).c_str());
  return kExitOk;
}

int CmdEvaluate(const Overrides& o, const std::string& checkpoint) {
  const ExperimentConfig cfg = Resolve(o);
  const World world = BuildWorld(cfg);
  const MlpParams actor = MlpFromJson(Slurp(checkpoint));
  const double lambda = cfg.lambdas.front();
  const uint64_t seed = cfg.seeds.front();
  const EvalResult r = EvaluatePolicy(actor, world, cfg.horizon, cfg.rollouts, lambda,
                                      cfg.dbar, EvalSeed(seed), cfg.eval_kernel);
  std::printf("lambda,seed,avg_distortion,avg_leakage_bits,stderr_leakage,"
              "stderr_distortion,avg_cost\n");
  std::printf("%s,%llu,%s,%s,%s,%s,%s\n", FormatDouble(lambda).c_str(),
              static_cast<unsigned long long>(seed), FormatDouble(r.avg_distortion).c_str(),
              FormatDouble(r.avg_leakage_bits).c_str(), FormatDouble(r.stderr_leakage).c_str(),
              FormatDouble(r.stderr_distortion).c_str(), FormatDouble(r.avg_cost).c_str());
  return kExitOk;
}

int CmdMyopic(const Overrides& o) {
  const ExperimentConfig cfg = Resolve(o);
  const World world = BuildWorld(cfg);
  const auto rows =
      RunMyopic(world.spec, world.q, world.p1, cfg.myopic_lambdas, cfg.horizon);
  std::printf("lambda,avg_distortion,avg_leakage_bits,converged\n");
  for (const auto& r : rows) {
    std::printf("%s,%s,%s,%d\n", FormatDouble(r.lambda).c_str(),
                FormatDouble(r.avg_distortion).c_str(),
                FormatDouble(r.avg_leakage_bits).c_str(), r.converged ? 1 : 0);
  }
  return kExitOk;
}

int CmdCurve(const Overrides& o, const std::vector<std::string>& filter) {
  const ExperimentConfig cfg = Resolve(o);
  const fs::path dir = cfg.out;
  if (!fs::exists(dir / "results.csv")) {
    throw ConfigError("no results.csv in " + dir.string());
  }
  const auto plot = AggregateCurve(ReadResults(dir / "results.csv"), filter);
  std::ofstream(dir / "plot.csv", std::ios::binary) << PlotToCsv(plot);
  std::printf("wrote %s (%zu rows)\n", (dir / "plot.csv").string().c_str(), plot.size());
  return kExitOk;
}

int CmdOracleCheck(uint64_t seed, bool break_filter) {
  OracleSuiteOptions options;
  options.seed = seed;
  options.break_filter = break_filter;
  bool ok = true;
  for (const auto& r : RunOracleSuites(options)) {
    std::printf("%-4s %-24s instances=%d worst=%.3e %s\n", r.passed ? "PASS" : "FAIL",
                r.name.c_str(), r.instances, r.worst, r.detail.c_str());
    if (!r.passed) {
      std::fprintf(stderr, "property failed: %s\n", r.name.c_str());
      ok = false;
    }
  }
  return ok ? kExitOk : kExitProperty;
}

int CmdRun(const Overrides& o, bool force) {
  const ExperimentConfig cfg = Resolve(o);
  const auto outcomes = RunExperiment(cfg, force, [](const std::string& line) {
    std::fprintf(stderr, "%s\n", line.c_str());
  });
  int skipped = 0;
  for (const auto& c : outcomes) skipped += c.skipped ? 1 : 0;
  std::printf("%zu cells, %d already present, results in %s\n", outcomes.size(), skipped,
              (fs::path(cfg.out) / "results.csv").string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Location-privacy release mechanisms on grid worlds"};
  app.set_version_flag("--version", LOCPRIV_VERSION);
  app.require_subcommand(1);

  Overrides train_o, eval_o, myopic_o, curve_o, run_o;
  std::string checkpoint;
  std::vector<std::string> curve_methods;
  uint64_t oracle_seed = 2026;
  bool break_filter = false;
  bool force = false;

  auto* train = app.add_subcommand("train", "train and evaluate one a2c cell");
  AddCommonFlags(train, train_o);
  auto* evaluate = app.add_subcommand("evaluate", "evaluate an actor checkpoint");
  AddCommonFlags(evaluate, eval_o);
  evaluate->add_option("--checkpoint", checkpoint, "actor checkpoint JSON")->required();
  auto* myopic = app.add_subcommand("myopic", "myopic trade-off curve");
  AddCommonFlags(myopic, myopic_o);
  auto* curve = app.add_subcommand("curve", "aggregate results.csv into plot.csv");
  AddCommonFlags(curve, curve_o);
  curve->add_option("--method", curve_methods, "keep only these methods");
  auto* oracle = app.add_subcommand("oracle-check", "exact-enumeration property suites");
  oracle->add_option("--seed", oracle_seed, "seed of the random instances");
  oracle->add_flag("--break-filter", break_filter, "test hook: corrupt the belief filter")
      ->group("");
  auto* run = app.add_subcommand("run", "run every missing (method, lambda, seed) cell");
  AddCommonFlags(run, run_o);
  run->add_flag("--force", force, "recompute cells already in results.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return CmdTrain(train_o);
    if (*evaluate) return CmdEvaluate(eval_o, checkpoint);
    if (*myopic) return CmdMyopic(myopic_o);
    if (*curve) return CmdCurve(curve_o, curve_methods);
    if (*oracle) return CmdOracleCheck(oracle_seed, break_filter);
    if (*run) return CmdRun(run_o, force);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {  // ConfigError, ShapeError
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitUsage;
}
