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

#include "locpriv/a2c_trainer.h"

#include <cmath>
#include <exception>
#include <string>

#include "locpriv/kernels.h"

namespace locpriv {
namespace {

bool AllFinite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

// Per-step averages of one roll-out.
struct RolloutSums {
  double leakage = 0.0;
  double distortion = 0.0;
};

}  // namespace

void TrainConfig::Validate() const {
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(dbar >= 0.0)) throw ConfigError("dbar must be >= 0");
  if (!(critic_lr > 0.0) || !(actor_lr > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (hidden1 < 1 || hidden2 < 1) throw ConfigError("hidden widths must be >= 1");
  if (!(actor_output_scale >= 0.0)) {
    throw ConfigError("actor_output_scale must be >= 0");
  }
}

std::vector<double> ActorInput(const Belief& b, int x, int x_prev) {
  const int n = b.size();
  std::vector<double> in(3 * static_cast<size_t>(n), 0.0);
  auto p = b.probs();
  std::copy(p.begin(), p.end(), in.begin());
  in[n + x] = 1.0;
  in[2 * n + x_prev] = 1.0;
  return in;
}

std::vector<double> ActorBatchInput(const Belief& b) {
  const int n = b.size();
  const size_t width = 3 * static_cast<size_t>(n);
  std::vector<double> in(static_cast<size_t>(n) * n * width, 0.0);
  auto p = b.probs();
  for (int x = 0; x < n; ++x) {
    for (int xp = 0; xp < n; ++xp) {
      double* row = in.data() + (static_cast<size_t>(x) * n + xp) * width;
      std::copy(p.begin(), p.end(), row);
      row[n + x] = 1.0;
      row[2 * n + xp] = 1.0;
    }
  }
  return in;
}

std::vector<double> ConcentrationsFromOutput(std::span<const double> z) {
  std::vector<double> xi(z.size());
  for (size_t i = 0; i < z.size(); ++i) xi[i] = Softplus(z[i]) + kMinConcentration;
  return xi;
}

namespace {

void ActorForwardAllPairs(const MlpParams& actor, const Belief& b,
                          MlpCache& cache) {
  const int n = b.size();
  if (actor.input_dim() != 3 * n || actor.output_dim() != n) {
    throw ShapeError("actor must map 3n inputs to n outputs");
  }
  MlpForward(actor, ActorBatchInput(b), n * n, cache);
  if (!AllFinite(cache.output)) {
    throw NumericError("actor produced a non-finite output");
  }
}

}  // namespace

void BuildReleaseKernel(const MlpParams& actor, const Belief& b, Rng& rng,
                        KernelDraw& draw) {
  const int n = b.size();
  ActorForwardAllPairs(actor, b, draw.actor_cache);
  draw.concentrations = ConcentrationsFromOutput(draw.actor_cache.output);
  std::vector<double> data(static_cast<size_t>(n) * n * n);
  for (int p = 0; p < n * n; ++p) {
    const auto first = draw.concentrations.begin() + static_cast<long>(p) * n;
    DirichletParams d(std::vector<double>(first, first + n));
    const auto row = DirichletSample(d, rng);
    std::copy(row.begin(), row.end(), data.begin() + static_cast<long>(p) * n);
  }
  draw.kernel = ReleaseKernel(n, std::move(data));
}

KernelDraw BuildReleaseKernel(const MlpParams& actor, const Belief& b,
                              Rng& rng) {
  KernelDraw draw;
  BuildReleaseKernel(actor, b, rng, draw);
  return draw;
}

ReleaseKernel MeanReleaseKernel(const MlpParams& actor, const Belief& b) {
  const int n = b.size();
  MlpCache cache;
  ActorForwardAllPairs(actor, b, cache);
  std::vector<double> data = ConcentrationsFromOutput(cache.output);
  for (int p = 0; p < n * n; ++p) {
    double z = 0.0;
    for (int y = 0; y < n; ++y) z += data[static_cast<size_t>(p) * n + y];
    for (int y = 0; y < n; ++y) data[static_cast<size_t>(p) * n + y] /= z;
  }
  return ReleaseKernel(n, std::move(data));
}

double CriticValue(const MlpParams& critic, const Belief& b) {
  if (critic.input_dim() != b.size() || critic.output_dim() != 1) {
    throw ShapeError("critic must map n inputs to one output");
  }
  return MlpForward(critic, b.probs()).output[0];
}

TdRecord TdError(double cost, double v_before, double v_after, double gamma) {
  TdRecord td;
  td.value_before = v_before;
  td.value_after = v_after;
  td.target = cost + gamma * v_after;
  td.delta = td.target - v_before;
  return td;
}

void CriticStep(MlpParams& critic, AdamState& state, const TdRecord& td,
                const Belief& b) {
  const MlpCache cache = MlpForward(critic, b.probs());
  const double residual = td.target - cache.output[0];
  const double grad_out = -2.0 * residual;
  if (grad_out == 0.0) return;
  const MlpParams grad = MlpBackward(critic, cache, std::span(&grad_out, 1));
  AdamUpdate(critic, grad, state);
}

void ActorLossGradient(const MlpParams& actor, const TdRecord& td,
                       const KernelDraw& draw, std::span<const int> pairs,
                       MlpParams& grad) {
  const int n = draw.kernel.cell_count();
  const auto& z = draw.actor_cache.output;
  std::vector<double> out_grad(z.size(), 0.0);
  for (int p : pairs) {
    if (p < 0 || p >= n * n) throw DomainError("pair index out of range");
    const auto first = draw.concentrations.begin() + static_cast<long>(p) * n;
    DirichletParams d(std::vector<double>(first, first + n));
    const auto density = DirichletLogDensity(draw.kernel.Row(p / n, p % n), d);
    for (int i = 0; i < n; ++i) {
      const size_t k = static_cast<size_t>(p) * n + i;
      out_grad[k] += td.delta * density.grad_xi[i] * Sigmoid(z[k]);
    }
  }
  MlpBackward(actor, draw.actor_cache, out_grad, grad);
}

MlpParams ActorLossGradient(const MlpParams& actor, const TdRecord& td,
                            const KernelDraw& draw, std::span<const int> pairs) {
  MlpParams grad;
  ActorLossGradient(actor, td, draw, pairs, grad);
  return grad;
}

void ActorStep(MlpParams& actor, AdamState& state, const TdRecord& td,
               const KernelDraw& draw, std::span<const int> pairs) {
  if (td.delta == 0.0) return;
  thread_local MlpParams grad;
  ActorLossGradient(actor, td, draw, pairs, grad);
  AdamUpdate(actor, grad, state);
}

TrainResult Train(const TrainConfig& cfg, const World& world,
                  const ExperienceObserver& observer) {
  cfg.Validate();
  const int n = world.spec.cell_count();
  if (world.q.cell_count() != n || world.p1.cell_count() != n) {
    throw ShapeError("world components disagree on the number of cells");
  }
  Rng init_rng = MakeStream(cfg.seed, 0);
  const int actor_dims[] = {3 * n, cfg.hidden1, cfg.hidden2, n};
  const int critic_dims[] = {n, cfg.hidden1, cfg.hidden2, 1};
  TrainResult result;
  result.actor = MlpParams::Create(actor_dims, init_rng, cfg.actor_output_scale);
  result.critic = MlpParams::Create(critic_dims, init_rng);
  AdamState actor_adam = AdamState::For(result.actor, {.lr = cfg.actor_lr});
  AdamState critic_adam = AdamState::For(result.critic, {.lr = cfg.critic_lr});
  MlpParams& actor = result.actor;
  MlpParams& critic = result.critic;

  const TransitionMatrix first_step = TransitionMatrix::Identity(n);
  std::vector<int> all_pairs(static_cast<size_t>(n) * n);
  for (int p = 0; p < n * n; ++p) all_pairs[p] = p;

  KernelDraw draw;
  result.curve.reserve(cfg.episodes);
  for (int episode = 0; episode < cfg.episodes; ++episode) {
    Rng rng = MakeStream(cfg.seed, static_cast<uint64_t>(episode) + 1);
    Belief belief(std::vector<double>(world.p1.probs().begin(),
                                      world.p1.probs().end()));
    int x_cur = SampleCategorical(world.p1.probs(), rng);
    int x_prev = x_cur;
    EpisodeStats stats;
    for (int t = 0; t < cfg.horizon; ++t) {
      const TransitionMatrix& moves = t == 0 ? first_step : world.q;
      try {
        BuildReleaseKernel(actor, belief, rng, draw);
      } catch (const NumericError& e) {
        throw TrainingAborted("episode " + std::to_string(episode) + " step " +
                                  std::to_string(t) + ": " + e.what(),
                              actor, critic);
      }
      EnvStepResult step = EnvStep(x_prev, x_cur, belief, draw.kernel, world.q,
                                   moves, world.spec, cfg.lambda, cfg.dbar, rng);
      const double v_before = CriticValue(critic, belief);
      const double v_after = CriticValue(critic, step.belief_next);
      const TdRecord td = TdError(step.cost.cost, v_before, v_after, cfg.gamma);
      if (!std::isfinite(td.delta)) {
        throw TrainingAborted("non-finite TD error at episode " +
                                  std::to_string(episode) + " step " +
                                  std::to_string(t),
                              actor, critic);
      }
      if (observer) {
        observer(ExperienceTuple{belief, draw.kernel, step.released,
                                 step.belief_next, step.cost},
                 td);
      }
      try {
        CriticStep(critic, critic_adam, td, belief);
        const int realized = x_cur * n + x_prev;
        if (cfg.credit == ActorCredit::kAllPairs) {
          ActorStep(actor, actor_adam, td, draw, all_pairs);
        } else {
          ActorStep(actor, actor_adam, td, draw, std::span(&realized, 1));
        }
      } catch (const NumericError& e) {
        throw TrainingAborted("episode " + std::to_string(episode) + " step " +
                                  std::to_string(t) + ": " + e.what(),
                              actor, critic);
      }
      stats.avg_leakage_bits += step.cost.leakage;
      stats.avg_distortion += step.cost.distortion;
      stats.avg_cost += step.cost.cost;
      belief = std::move(step.belief_next);
      x_prev = x_cur;
      x_cur = step.next_cell;
    }
    stats.avg_leakage_bits /= cfg.horizon;
    stats.avg_distortion /= cfg.horizon;
    stats.avg_cost /= cfg.horizon;
    result.curve.push_back(stats);
  }
  return result;
}

std::vector<double> SmoothCurve(std::span<const double> values, int window) {
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<size_t>(window)) sum -= values[i - window];
    out[i] = sum / static_cast<double>(std::min<size_t>(i + 1, window));
  }
  return out;
}

EvalResult EvaluatePolicy(const KernelPolicy& policy, const World& world,
                          int horizon, int rollouts, double lambda, double dbar,
                          uint64_t seed) {
  if (horizon < 1 || rollouts < 1) {
    throw DomainError("evaluation needs horizon >= 1 and rollouts >= 1");
  }
  const int n = world.spec.cell_count();
  const TransitionMatrix first_step = TransitionMatrix::Identity(n);
  auto rollout = [&](int r) {
    Rng rng = MakeStream(seed, static_cast<uint64_t>(r));
    Belief belief(std::vector<double>(world.p1.probs().begin(),
                                      world.p1.probs().end()));
    int x_cur = SampleCategorical(world.p1.probs(), rng);
    int x_prev = x_cur;
    RolloutSums s;
    for (int t = 0; t < horizon; ++t) {
      const TransitionMatrix& moves = t == 0 ? first_step : world.q;
      const ReleaseKernel kernel = policy(belief, rng);
      EnvStepResult step = EnvStep(x_prev, x_cur, belief, kernel, world.q, moves,
                                   world.spec, lambda, dbar, rng);
      s.leakage += step.cost.leakage;
      s.distortion += step.cost.distortion;
      belief = std::move(step.belief_next);
      x_prev = x_cur;
      x_cur = step.next_cell;
    }
    s.leakage /= horizon;
    s.distortion /= horizon;
    return s;
  };
  std::vector<RolloutSums> sums(rollouts);
  std::vector<std::exception_ptr> errors(rollouts);
  // Roll-outs are independent; each writes only its own slot.
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < rollouts; ++r) {
    try {
      sums[r] = rollout(r);
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  EvalResult e;
  for (const auto& s : sums) {
    e.avg_leakage_bits += s.leakage;
    e.avg_distortion += s.distortion;
  }
  e.avg_leakage_bits /= rollouts;
  e.avg_distortion /= rollouts;
  if (rollouts > 1) {
    double vl = 0.0, vd = 0.0;
    for (const auto& s : sums) {
      vl += (s.leakage - e.avg_leakage_bits) * (s.leakage - e.avg_leakage_bits);
      vd += (s.distortion - e.avg_distortion) * (s.distortion - e.avg_distortion);
    }
    e.stderr_leakage = std::sqrt(vl / (rollouts - 1) / rollouts);
    e.stderr_distortion = std::sqrt(vd / (rollouts - 1) / rollouts);
  }
  e.avg_cost = e.avg_leakage_bits + lambda * (e.avg_distortion - dbar);
  return e;
}

EvalResult EvaluatePolicy(const MlpParams& actor, const World& world,
                          int horizon, int rollouts, double lambda, double dbar,
                          uint64_t seed, EvalKernel mode) {
  KernelPolicy policy;
  if (mode == EvalKernel::kMean) {
    policy = [&actor](const Belief& b, Rng&) { return MeanReleaseKernel(actor, b); };
  } else {
    policy = [&actor](const Belief& b, Rng& rng) {
      return BuildReleaseKernel(actor, b, rng).kernel;
    };
  }
  return EvaluatePolicy(policy, world, horizon, rollouts, lambda, dbar, seed);
}

}  // namespace locpriv
