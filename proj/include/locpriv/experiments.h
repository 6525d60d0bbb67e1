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

#ifndef LOCPRIV_EXPERIMENTS_H_
#define LOCPRIV_EXPERIMENTS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "locpriv/a2c_trainer.h"
#include "locpriv/myopic_baseline.h"

namespace locpriv {

enum class Profile { kDesk, kPaper };

struct ExperimentConfig {
  // "q0", "q1", "q2" or the path of a transition-matrix JSON file.
  std::string world = "q2";
  int side = 4;
  double q2_r0 = 1.0;
  double q2_r1 = 6.0;
  std::vector<std::string> methods = {"a2c", "myopic"};
  std::vector<double> lambdas = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
  // Exponential-tilt parameters for the myopic baseline (nats per grid step).
  std::vector<double> myopic_lambdas = DefaultMyopicLambdas();
  std::vector<uint64_t> seeds = {1};
  double dbar = 0.0;
  int horizon = 100;
  int episodes = 500;
  int rollouts = 50;
  double gamma = 0.99;
  double critic_lr = 1e-3;
  double actor_lr = 1e-3;
  int hidden1 = 128;
  int hidden2 = 128;
  double actor_output_scale = 0.1;
  ActorCredit credit = ActorCredit::kAllPairs;
  EvalKernel eval_kernel = EvalKernel::kMean;
  std::string out = "results";

  // Sets episodes, horizon and rollouts.
  void ApplyProfile(Profile p);
  // Throws ConfigError.
  void Validate() const;
  TrainConfig TrainFor(double lambda, uint64_t seed) const;
};

Profile ParseProfile(const std::string& name);

// Unknown keys and out-of-range values throw ConfigError. A "profile" key is
// applied before the explicit fields.
ExperimentConfig ConfigFromJson(const std::string& text);
std::string ConfigToJson(const ExperimentConfig& cfg);

// Throws ConfigError for an unknown world name or unreadable file.
World BuildWorld(const ExperimentConfig& cfg);

struct CurveRow {
  std::string method;
  double lambda = 0.0;
  uint64_t seed = 0;
  double avg_distortion = 0.0;
  double avg_leakage_bits = 0.0;
  double stderr_leakage = 0.0;
  double stderr_distortion = 0.0;
};

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double v);

inline constexpr char kResultsHeader[] =
    "method,lambda,seed,avg_distortion,avg_leakage_bits,stderr_leakage,"
    "stderr_distortion";

// Sorted by (method, lambda, seed); one row per key.
void SortRows(std::vector<CurveRow>& rows);
std::string RowsToCsv(const std::vector<CurveRow>& rows);
// Throws ConfigError on a malformed file.
std::vector<CurveRow> RowsFromCsv(const std::string& text);
std::vector<CurveRow> ReadResults(const std::filesystem::path& file);
// Writes through a temporary file and a rename.
void WriteResults(const std::filesystem::path& file, std::vector<CurveRow> rows);

struct CellOutcome {
  std::string method;
  double lambda = 0.0;
  uint64_t seed = 0;
  bool skipped = false;
};

using ProgressFn = std::function<void(const std::string&)>;

// Runs every (method, lambda, seed) cell missing from <out>/results.csv (all
// of them with `force`). Writes results.csv after each cell, manifest.json,
// appends to timestamps.json, and for a2c cells the actor and critic checkpoints,
// a training manifest and a learning curve. On a numeric failure the rows
// finished so far stay on disk and the first error is rethrown.
std::vector<CellOutcome> RunExperiment(const ExperimentConfig& cfg, bool force,
                                       const ProgressFn& progress = nullptr);

struct A2cCell {
  TrainResult train;
  EvalResult eval;
};

// One a2c cell: train, then evaluate on roll-out streams of EvalSeed(seed),
// which never coincide with the training streams.
uint64_t EvalSeed(uint64_t seed);
A2cCell RunA2cCell(const ExperimentConfig& cfg, const World& world,
                   double lambda, uint64_t seed);

// Writes the checkpoints, training manifest and learning curve of one cell
// under `dir`.
void WriteA2cArtifacts(const std::filesystem::path& dir,
                       const ExperimentConfig& cfg, double lambda,
                       uint64_t seed, const A2cCell& cell);

std::string CellStem(const std::string& method, double lambda, uint64_t seed);

struct PlotRow {
  std::string method;
  double lambda = 0.0;
  int seeds = 0;
  double avg_distortion = 0.0;
  double stderr_distortion = 0.0;
  double avg_leakage_bits = 0.0;
  double stderr_leakage = 0.0;
};

inline constexpr char kPlotHeader[] =
    "method,lambda,seeds,avg_distortion,stderr_distortion,avg_leakage_bits,"
    "stderr_leakage";

// Per (method, lambda): mean over seeds and the standard error of that mean
// (zero for a single seed). Sorted by method, then ascending distortion.
// Methods outside `filter` are dropped unless it is empty. Throws ConfigError
// when nothing is left.
std::vector<PlotRow> AggregateCurve(const std::vector<CurveRow>& rows,
                                    const std::vector<std::string>& filter);
std::string PlotToCsv(const std::vector<PlotRow>& rows);

// Piecewise-linear curve through (distortion, leakage) points.
class Frontier {
 public:
  // Points are sorted by distortion; ties keep their mean leakage.
  explicit Frontier(std::vector<std::pair<double, double>> points);

  double min_distortion() const { return points_.front().first; }
  double max_distortion() const { return points_.back().first; }
  const std::vector<std::pair<double, double>>& points() const { return points_; }
  // Linear interpolation; DomainError outside [min, max].
  double LeakageAt(double distortion) const;

 private:
  std::vector<std::pair<double, double>> points_;
};

Frontier FrontierOf(const std::vector<PlotRow>& rows, const std::string& method);

struct FrontierGap {
  double lo = 0.0;
  double hi = 0.0;
  // max over the checked distortions of (a - b) and of |a - b|.
  double worst_excess = 0.0;
  double worst_abs = 0.0;
  double at = 0.0;  // distortion of worst_excess
  int checked = 0;
};

// Compares a against b at every breakpoint of either curve inside their
// common distortion range. Throws DomainError when the ranges do not overlap.
FrontierGap CompareFrontiers(const Frontier& a, const Frontier& b);

}  // namespace locpriv

#endif  // LOCPRIV_EXPERIMENTS_H_
