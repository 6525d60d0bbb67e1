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

#ifndef LOCPRIV_BELIEF_MDP_H_
#define LOCPRIV_BELIEF_MDP_H_

#include <span>
#include <string>
#include <vector>

#include "locpriv/grid_world.h"
#include "locpriv/rng.h"

namespace locpriv {

// Every release probability is raised to at least this value (the rest of
// the row shrinks to keep unit mass) so every observation has positive
// probability.
inline constexpr double kKernelFloor = 1e-6;

// Rescales a nonnegative vector to unit mass with every entry >= eps:
// p_i <- max(eps, s p_i) for the unique s giving total 1. Idempotent.
void FloorSimplex(std::span<double> p, double eps = kKernelFloor);

// The service provider's posterior over the previous true cell (0-based).
class Belief {
 public:
  Belief() = default;
  // Validates nonnegativity and unit mass within 1e-10.
  explicit Belief(std::vector<double> p);
  static Belief Uniform(int n);
  static Belief PointMass(int n, int cell);

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[i]; }
  std::span<const double> probs() const { return p_; }

 private:
  std::vector<double> p_;
};

// a[x][x'][y]: probability of releasing y when the current cell is x and the
// previous cell is x' (0-based). Rows are floored at kKernelFloor on
// construction.
class ReleaseKernel {
 public:
  ReleaseKernel() = default;
  // `data` holds n^3 entries; every (x, x') row must sum to 1 within 1e-10
  // before flooring.
  ReleaseKernel(int n, std::vector<double> data);

  static ReleaseKernel Uniform(int n);
  // a[x][x'][y] = 1{y == x}, floored.
  static ReleaseKernel Identity(int n);
  // Same release row for every (x, x').
  static ReleaseKernel Constant(std::span<const double> row);

  int cell_count() const { return n_; }
  double operator()(int x, int x_prev, int y) const {
    return a_[(static_cast<size_t>(x) * n_ + x_prev) * n_ + y];
  }
  std::span<const double> Row(int x, int x_prev) const {
    return {a_.data() + (static_cast<size_t>(x) * n_ + x_prev) * n_,
            static_cast<size_t>(n_)};
  }
  const std::vector<double>& data() const { return a_; }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

struct StepCostBreakdown {
  double leakage = 0.0;     // bits
  double distortion = 0.0;  // grid steps
  double cost = 0.0;        // leakage + lambda * (distortion - dbar)
  double lambda = 0.0;
  double dbar = 0.0;
};

// Bayes update of the belief after observing release y:
// b'(x) proportional to sum_x' q(x|x') a[x][x'][y] b(x').
Belief BeliefUpdate(const Belief& b, const ReleaseKernel& a,
                    const TransitionMatrix& q, int y);

// I(X_t, X_{t-1}; Y_t | belief) in bits.
double ExpectedLeakage(const Belief& b, const ReleaseKernel& a,
                       const TransitionMatrix& q);

// E[d(X_t, Y_t) | belief] in Manhattan grid steps.
double ExpectedDistortion(const Belief& b, const ReleaseKernel& a,
                          const TransitionMatrix& q, const GridSpec& spec);

StepCostBreakdown StepCost(const Belief& b, const ReleaseKernel& a,
                           const TransitionMatrix& q, const GridSpec& spec,
                           double lambda, double dbar);

struct EnvStepResult {
  int released = 0;
  Belief belief_next;
  StepCostBreakdown cost;
  int next_cell = 0;
};

// One transition of the artificial environment. `belief_transition` drives the
// belief and the cost (the identity at the first step, where x_prev = x_cur);
// `q` draws the next true cell.
EnvStepResult EnvStep(int x_prev, int x_cur, const Belief& b,
                      const ReleaseKernel& a, const TransitionMatrix& q,
                      const TransitionMatrix& belief_transition,
                      const GridSpec& spec, double lambda, double dbar,
                      Rng& rng);

// Same, with q driving both.
EnvStepResult EnvStep(int x_prev, int x_cur, const Belief& b,
                      const ReleaseKernel& a, const TransitionMatrix& q,
                      const GridSpec& spec, double lambda, double dbar,
                      Rng& rng);

// {"belief": [...], "kernel": [[[...]]]} for debugging.
std::string SnapshotToJson(const Belief& b, const ReleaseKernel& a);

}  // namespace locpriv

#endif  // LOCPRIV_BELIEF_MDP_H_
