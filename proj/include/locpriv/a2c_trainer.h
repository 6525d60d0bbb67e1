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

#ifndef LOCPRIV_A2C_TRAINER_H_
#define LOCPRIV_A2C_TRAINER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "locpriv/belief_mdp.h"
#include "locpriv/errors.h"
#include "locpriv/grid_world.h"
#include "locpriv/neural.h"
#include "locpriv/rng.h"

namespace locpriv {

// Added to softplus of the actor output so concentrations stay positive.
inline constexpr double kMinConcentration = 1e-3;

// Which sampled kernel rows receive the actor's score-function gradient.
enum class ActorCredit {
  kRealizedPair,  // only the row used to draw the release
  kAllPairs,      // every row of the sampled kernel
};

struct World {
  GridSpec spec;
  TransitionMatrix q;
  InitialDistribution p1;
};

struct TrainConfig {
  int episodes = 500;
  int horizon = 100;
  double gamma = 0.99;
  double lambda = 0.0;
  double dbar = 0.0;
  double critic_lr = 1e-3;
  double actor_lr = 1e-3;
  int hidden1 = 128;
  int hidden2 = 128;
  // Multiplies the actor's initial output-layer weights.
  double actor_output_scale = 0.1;
  ActorCredit credit = ActorCredit::kAllPairs;
  uint64_t seed = 1;

  // Throws ConfigError.
  void Validate() const;
};

struct ExperienceTuple {
  Belief belief_before;
  ReleaseKernel kernel;
  int released = 0;
  Belief belief_after;
  StepCostBreakdown cost;
};

struct TdRecord {
  double delta = 0.0;
  double target = 0.0;
  double value_before = 0.0;
  double value_after = 0.0;
};

// A sampled release kernel plus what the actor update needs. Pair p = x * n +
// x_prev indexes rows of `concentrations` and of the kernel.
struct KernelDraw {
  ReleaseKernel kernel;
  MlpCache actor_cache;
  std::vector<double> concentrations;  // n^2 x n
};

// Actor input for one (x, x_prev) pair: [belief | onehot(x) | onehot(x_prev)].
std::vector<double> ActorInput(const Belief& b, int x, int x_prev);
// All n^2 pair inputs stacked row-wise.
std::vector<double> ActorBatchInput(const Belief& b);

// Runs the actor on every pair, draws one Dirichlet row per pair and floors it.
KernelDraw BuildReleaseKernel(const MlpParams& actor, const Belief& b, Rng& rng);
// Same, reusing the storage of `draw`.
void BuildReleaseKernel(const MlpParams& actor, const Belief& b, Rng& rng,
                        KernelDraw& draw);
// Kernel whose rows are the Dirichlet means xi / sum(xi).
ReleaseKernel MeanReleaseKernel(const MlpParams& actor, const Belief& b);

// Maps actor outputs to concentrations.
std::vector<double> ConcentrationsFromOutput(std::span<const double> z);

double CriticValue(const MlpParams& critic, const Belief& b);

TdRecord TdError(double cost, double v_before, double v_after, double gamma);

// One Adam step on (target - V(b))^2 with the target held fixed.
void CriticStep(MlpParams& critic, AdamState& state, const TdRecord& td,
                const Belief& b);

// Gradient of delta * sum over `pairs` of ln Dir(sampled row | xi) with
// respect to the actor parameters; `pairs` holds x * n + x_prev indices.
MlpParams ActorLossGradient(const MlpParams& actor, const TdRecord& td,
                            const KernelDraw& draw, std::span<const int> pairs);
void ActorLossGradient(const MlpParams& actor, const TdRecord& td,
                       const KernelDraw& draw, std::span<const int> pairs,
                       MlpParams& grad);

// One Adam step descending ActorLossGradient: with delta > 0 the sampled rows
// become less likely.
void ActorStep(MlpParams& actor, AdamState& state, const TdRecord& td,
               const KernelDraw& draw, std::span<const int> pairs);

struct EpisodeStats {
  double avg_leakage_bits = 0.0;
  double avg_distortion = 0.0;
  double avg_cost = 0.0;
};

struct TrainResult {
  MlpParams actor;
  MlpParams critic;
  std::vector<EpisodeStats> curve;
};

// Called with every experience tuple and its TD record; tests use it to
// check invariants.
using ExperienceObserver =
    std::function<void(const ExperienceTuple&, const TdRecord&)>;

// Thrown when a loss or network output stops being finite. Carries the
// networks as they were before the failing update.
class TrainingAborted : public NumericError {
 public:
  TrainingAborted(const std::string& what, MlpParams actor, MlpParams critic)
      : NumericError(what), actor_(std::move(actor)), critic_(std::move(critic)) {}
  const MlpParams& actor() const { return actor_; }
  const MlpParams& critic() const { return critic_; }

 private:
  MlpParams actor_;
  MlpParams critic_;
};

TrainResult Train(const TrainConfig& cfg, const World& world,
                  const ExperienceObserver& observer = nullptr);

// Trailing-window mean of a learning curve column.
std::vector<double> SmoothCurve(std::span<const double> values, int window = 100);

enum class EvalKernel {
  kMean,     // Dirichlet mean of the actor output
  kSampled,  // fresh Dirichlet draw each step, as in training
};

struct EvalResult {
  double avg_leakage_bits = 0.0;
  double avg_distortion = 0.0;
  double stderr_leakage = 0.0;
  double stderr_distortion = 0.0;
  double avg_cost = 0.0;  // avg leakage + lambda * (avg distortion - dbar)
};

// Maps the current belief to the release kernel used at that step.
using KernelPolicy = std::function<ReleaseKernel(const Belief&, Rng&)>;

// R roll-outs of n steps without learning; expected leakage and distortion
// are averaged over steps, then over roll-outs. Roll-out r uses stream r of
// `seed`.
EvalResult EvaluatePolicy(const KernelPolicy& policy, const World& world,
                          int horizon, int rollouts, double lambda, double dbar,
                          uint64_t seed);
EvalResult EvaluatePolicy(const MlpParams& actor, const World& world,
                          int horizon, int rollouts, double lambda, double dbar,
                          uint64_t seed, EvalKernel mode = EvalKernel::kMean);

}  // namespace locpriv

#endif  // LOCPRIV_A2C_TRAINER_H_
