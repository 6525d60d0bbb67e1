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

#include "locpriv/myopic_baseline.h"

#include <cmath>
#include <exception>
#include <string>

#include "locpriv/errors.h"
#include "locpriv/kernels.h"

namespace locpriv {
namespace {

constexpr double kMassTol = 1e-10;
constexpr double kDriftTol = 1e-8;
constexpr double kMinConditionMass = 1e-300;

}  // namespace

MyopicState MyopicState::Initial(const InitialDistribution& p1) {
  MyopicState s;
  s.n = p1.cell_count();
  s.t = 1;
  s.joint.assign(static_cast<size_t>(s.n) * s.n * s.n, 0.0);
  for (int x = 0; x < s.n; ++x) {
    s.joint[(static_cast<size_t>(x) * s.n + x) * s.n] = p1[x];
  }
  return s;
}

void MyopicState::Validate() const {
  if (n < 1 || joint.size() != static_cast<size_t>(n) * n * n) {
    throw ShapeError("myopic state needs n^3 entries");
  }
  double total = 0.0;
  for (double v : joint) {
    if (!(v >= 0.0)) throw NumericError("myopic state has a negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > kMassTol) {
    throw NumericError("myopic state mass is " + std::to_string(total));
  }
}

BaStepResult BaSolveStep(const MyopicState& state, double lambda_ba,
                         const GridSpec& spec, const BaOptions& options) {
  state.Validate();
  const int n = state.n;
  if (spec.cell_count() != n) throw ShapeError("grid size differs from state");
  if (!(lambda_ba >= 0.0)) throw DomainError("lambda_ba must be >= 0");
  const auto dist = spec.distances();

  // The tilt depends on x only, so the iteration runs on the x-marginal of
  // each condition and the result is broadcast over x_prev.
  std::vector<double> cond_mass(n, 0.0);
  std::vector<double> px(static_cast<size_t>(n) * n, 0.0);  // [c][x]
  for (int x = 0; x < n; ++x) {
    for (int xp = 0; xp < n; ++xp) {
      for (int c = 0; c < n; ++c) {
        const double w = state(x, xp, c);
        px[static_cast<size_t>(c) * n + x] += w;
        cond_mass[c] += w;
      }
    }
  }
  std::vector<int> active;
  for (int c = 0; c < n; ++c) {
    if (cond_mass[c] > kMinConditionMass) {
      active.push_back(c);
      for (int x = 0; x < n; ++x) px[static_cast<size_t>(c) * n + x] /= cond_mass[c];
    }
  }
  const int k = static_cast<int>(active.size());

  // Compact [active condition][x] tables.
  std::vector<double> p(static_cast<size_t>(k) * n), marginal(static_cast<size_t>(k) * n, 1.0 / n);
  for (int a = 0; a < k; ++a) {
    for (int x = 0; x < n; ++x) {
      p[static_cast<size_t>(a) * n + x] = px[static_cast<size_t>(active[a]) * n + x];
    }
  }
  std::vector<double> kernel(static_cast<size_t>(k) * n * n, 1.0 / n);

  // Lagrangian, mutual information (nats) and distortion of `kernel`, with
  // `marginal` refreshed to the kernel's output law.
  auto evaluate = [&](double* info_nats, double* distortion) {
    std::fill(marginal.begin(), marginal.end(), 0.0);
    for (int a = 0; a < k; ++a) {
      for (int x = 0; x < n; ++x) {
        const double w = p[static_cast<size_t>(a) * n + x];
        const double* row = kernel.data() + (static_cast<size_t>(a) * n + x) * n;
        for (int y = 0; y < n; ++y) marginal[static_cast<size_t>(a) * n + y] += w * row[y];
      }
    }
    double info = 0.0, dsum = 0.0;
    for (int a = 0; a < k; ++a) {
      const double ca = cond_mass[active[a]];
      for (int x = 0; x < n; ++x) {
        const double w = ca * p[static_cast<size_t>(a) * n + x];
        if (w == 0.0) continue;
        const double* row = kernel.data() + (static_cast<size_t>(a) * n + x) * n;
        for (int y = 0; y < n; ++y) {
          if (row[y] <= 0.0) continue;
          info += w * row[y] * std::log(row[y] / marginal[static_cast<size_t>(a) * n + y]);
          dsum += w * row[y] * dist[static_cast<size_t>(x) * n + y];
        }
      }
    }
    *info_nats = std::max(info, 0.0);
    *distortion = dsum;
    return *info_nats + lambda_ba * dsum;
  };

  BaStepResult result;
  double info = 0.0, distortion = 0.0;
  double objective = evaluate(&info, &distortion);
  if (options.record_trace) result.objective_trace.push_back(objective);
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    kernels::TiltKernel(marginal, dist, lambda_ba, k, n, kernel);
    const double next = evaluate(&info, &distortion);
    if (options.record_trace) result.objective_trace.push_back(next);
    if (next > objective + kBaRoundingSlack * std::max(1.0, std::abs(objective))) {
      throw NumericError("Blahut-Arimoto objective increased from " +
                         std::to_string(objective) + " to " + std::to_string(next));
    }
    const double decrease = objective - next;
    objective = next;
    result.iterations = iter;
    if (decrease < options.tol) {
      result.converged = true;
      break;
    }
  }

  result.leakage_bits = info / std::log(2.0);
  result.distortion = distortion;
  result.kernel.n = n;
  result.kernel.q.assign(static_cast<size_t>(n) * n * n * n, 1.0 / n);
  for (int a = 0; a < k; ++a) {
    const int c = active[a];
    for (int x = 0; x < n; ++x) {
      const double* row = kernel.data() + (static_cast<size_t>(a) * n + x) * n;
      for (int xp = 0; xp < n; ++xp) {
        double* dst = result.kernel.q.data() +
                      ((static_cast<size_t>(c) * n + x) * n + xp) * n;
        std::copy(row, row + n, dst);
      }
    }
  }
  return result;
}

MyopicState Propagate(const MyopicState& state, const MyopicKernel& kernel,
                      const TransitionMatrix& q) {
  state.Validate();
  const int n = state.n;
  if (kernel.n != n || q.cell_count() != n) {
    throw ShapeError("kernel, transition matrix and state sizes differ");
  }
  // r[x_t][y_t] = sum over (x_{t-1}, y_{t-1}) of state * kernel.
  std::vector<double> r(static_cast<size_t>(n) * n, 0.0);
  for (int x = 0; x < n; ++x) {
    for (int xp = 0; xp < n; ++xp) {
      for (int c = 0; c < n; ++c) {
        const double w = state(x, xp, c);
        if (w == 0.0) continue;
        for (int y = 0; y < n; ++y) r[static_cast<size_t>(x) * n + y] += w * kernel(c, x, xp, y);
      }
    }
  }
  MyopicState next;
  next.n = n;
  next.t = state.t + 1;
  next.joint.assign(static_cast<size_t>(n) * n * n, 0.0);
  double total = 0.0;
  for (int x1 = 0; x1 < n; ++x1) {
    for (int x = 0; x < n; ++x) {
      const double move = q(x, x1);
      for (int y = 0; y < n; ++y) {
        const double v = move * r[static_cast<size_t>(x) * n + y];
        next.joint[(static_cast<size_t>(x1) * n + x) * n + y] = v;
        total += v;
      }
    }
  }
  if (std::abs(total - 1.0) > kDriftTol) {
    throw NumericError("myopic propagation lost mass: " + std::to_string(total));
  }
  for (double& v : next.joint) v /= total;
  return next;
}

std::vector<MyopicRow> RunMyopic(const GridSpec& spec, const TransitionMatrix& q,
                                 const InitialDistribution& p1,
                                 std::span<const double> lambdas, int n,
                                 const BaOptions& options) {
  if (n < 1) throw DomainError("horizon must be >= 1");
  auto solve = [&](double lambda) {
    MyopicRow row;
    row.lambda = lambda;
    MyopicState state = MyopicState::Initial(p1);
    for (int t = 1; t <= n; ++t) {
      BaStepResult step = BaSolveStep(state, lambda, spec, options);
      row.avg_leakage_bits += step.leakage_bits;
      row.avg_distortion += step.distortion;
      row.converged = row.converged && step.converged;
      if (t < n) state = Propagate(state, step.kernel, q);
    }
    row.avg_leakage_bits /= n;
    row.avg_distortion /= n;
    return row;
  };
  std::vector<MyopicRow> rows(lambdas.size());
  // Exceptions cannot leave the parallel region; the first one in lambda
  // order is rethrown afterwards.
  std::vector<std::exception_ptr> errors(lambdas.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < lambdas.size(); ++i) {
    try {
      rows[i] = solve(lambdas[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  return rows;
}

std::vector<double> DefaultMyopicLambdas() {
  return {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 20.0};
}

}  // namespace locpriv
