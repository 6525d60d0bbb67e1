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

#ifndef LOCPRIV_MYOPIC_BASELINE_H_
#define LOCPRIV_MYOPIC_BASELINE_H_

#include <span>
#include <vector>

#include "locpriv/grid_world.h"

namespace locpriv {

// Joint law of (x_t, x_{t-1}, y_{t-1}) at step t, 0-based cells, stored as
// p[(x * n + x_prev) * n + y_prev].
struct MyopicState {
  int n = 0;
  int t = 1;
  std::vector<double> joint;

  double operator()(int x, int x_prev, int y_prev) const {
    return joint[(static_cast<size_t>(x) * n + x_prev) * n + y_prev];
  }
  // First step: all mass on (x, x, 0) with weight p1(x); y_prev = 0 stands for
  // "no release yet".
  static MyopicState Initial(const InitialDistribution& p1);
  // Throws NumericError if the mass is off by more than 1e-10.
  void Validate() const;
};

// q[y_prev][x][x_prev][y], each (y_prev, x, x_prev) slice a distribution.
struct MyopicKernel {
  int n = 0;
  std::vector<double> q;

  double operator()(int y_prev, int x, int x_prev, int y) const {
    return q[((static_cast<size_t>(y_prev) * n + x) * n + x_prev) * n + y];
  }
};

struct BaStepResult {
  MyopicKernel kernel;
  double leakage_bits = 0.0;  // I(X_t, X_{t-1}; Y_t | Y_{t-1})
  double distortion = 0.0;    // E d(X_t, Y_t)
  bool converged = false;
  int iterations = 0;
  // Lagrangian I (nats) + lambda * E d after each iteration.
  std::vector<double> objective_trace;
};

// An iteration may raise the objective by at most this times
// max(1, |objective|); anything larger is treated as a numeric failure.
inline constexpr double kBaRoundingSlack = 1e-12;

struct BaOptions {
  double tol = 1e-9;
  int max_iter = 500;
  bool record_trace = false;
};

// Blahut-Arimoto for one step: for every y_prev with positive probability,
// alternate q(y|x,x') proportional to m(y|y_prev) exp(-lambda_ba d(x, y)) and
// m(y|y_prev) = sum p(x, x'|y_prev) q(y|x, x') until the objective
// I(nats) + lambda_ba * E d drops by less than tol. Conditions with zero
// probability get the uniform kernel. Throws NumericError if an iteration
// increases the objective beyond rounding.
BaStepResult BaSolveStep(const MyopicState& state, double lambda_ba,
                         const GridSpec& spec, const BaOptions& options = {});

// Joint of (x_{t+1}, x_t, y_t) after applying `kernel` and moving by q.
MyopicState Propagate(const MyopicState& state, const MyopicKernel& kernel,
                      const TransitionMatrix& q);

struct MyopicRow {
  double lambda = 0.0;
  double avg_distortion = 0.0;
  double avg_leakage_bits = 0.0;
  bool converged = true;  // every step met the tolerance
};

// Solve-and-propagate over n steps for every lambda, averages divided by n.
std::vector<MyopicRow> RunMyopic(const GridSpec& spec, const TransitionMatrix& q,
                                 const InitialDistribution& p1,
                                 std::span<const double> lambdas, int n,
                                 const BaOptions& options = {});

// {0, 0.25, 0.5, 1, 2, 4, 8, 16, 20}
std::vector<double> DefaultMyopicLambdas();

}  // namespace locpriv

#endif  // LOCPRIV_MYOPIC_BASELINE_H_
