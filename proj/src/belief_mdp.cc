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

#include "locpriv/belief_mdp.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "json.hpp"
#include "locpriv/errors.h"
#include "locpriv/kernels.h"

namespace locpriv {
namespace {

constexpr double kMassTol = 1e-10;
constexpr double kMinEvidence = 1e-300;

void CheckSameSize(const Belief& b, const ReleaseKernel& a,
                   const TransitionMatrix& q) {
  if (b.size() != a.cell_count() || b.size() != q.cell_count()) {
    throw ShapeError("belief, kernel and transition matrix sizes differ");
  }
}

}  // namespace

void FloorSimplex(std::span<double> p, double eps) {
  // Find the scale s with sum_i max(eps, s p_i) = 1: entries that would fall
  // below the floor sit exactly on it and the rest share what is left.
  const size_t n = p.size();
  if (static_cast<double>(n) * eps >= 1.0) {
    throw DomainError("floor too large for the simplex size");
  }
  double total = 0.0;
  for (double v : p) total += v;
  if (!(total > 0.0)) throw DomainError("cannot floor an all-zero vector");
  std::vector<bool> pinned(n, false);
  double scale = 1.0 / total;
  for (size_t round = 0; round <= n; ++round) {
    double free_mass = 0.0;
    size_t pinned_count = 0;
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      if (!pinned[i] && p[i] * scale < eps) {
        pinned[i] = true;
        changed = true;
      }
      if (pinned[i]) {
        ++pinned_count;
      } else {
        free_mass += p[i];
      }
    }
    scale = (1.0 - static_cast<double>(pinned_count) * eps) / free_mass;
    if (!changed) break;
  }
  for (size_t i = 0; i < n; ++i) p[i] = pinned[i] ? eps : p[i] * scale;
}

Belief::Belief(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw ShapeError("empty belief");
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("belief has a negative or non-finite entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kMassTol) {
    throw DomainError("belief mass is " + std::to_string(sum));
  }
}

Belief Belief::Uniform(int n) {
  return Belief(std::vector<double>(n, 1.0 / n));
}

Belief Belief::PointMass(int n, int cell) {
  if (cell < 0 || cell >= n) throw DomainError("point mass cell out of range");
  std::vector<double> p(n, 0.0);
  p[cell] = 1.0;
  return Belief(std::move(p));
}

ReleaseKernel::ReleaseKernel(int n, std::vector<double> data)
    : n_(n), a_(std::move(data)) {
  if (n_ < 1 || a_.size() != static_cast<size_t>(n_) * n_ * n_) {
    throw ShapeError("release kernel needs n^3 entries");
  }
  for (size_t r = 0; r < static_cast<size_t>(n_) * n_; ++r) {
    std::span<double> row(a_.data() + r * n_, static_cast<size_t>(n_));
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError("release kernel has a negative or non-finite entry");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kMassTol) {
      throw DomainError("release kernel row sums to " + std::to_string(sum));
    }
    FloorSimplex(row);
  }
}

ReleaseKernel ReleaseKernel::Uniform(int n) {
  return ReleaseKernel(
      n, std::vector<double>(static_cast<size_t>(n) * n * n, 1.0 / n));
}

ReleaseKernel ReleaseKernel::Identity(int n) {
  std::vector<double> a(static_cast<size_t>(n) * n * n, 0.0);
  for (int x = 0; x < n; ++x) {
    for (int xp = 0; xp < n; ++xp) a[(static_cast<size_t>(x) * n + xp) * n + x] = 1.0;
  }
  return ReleaseKernel(n, std::move(a));
}

ReleaseKernel ReleaseKernel::Constant(std::span<const double> row) {
  const int n = static_cast<int>(row.size());
  std::vector<double> a;
  a.reserve(static_cast<size_t>(n) * n * n);
  for (int r = 0; r < n * n; ++r) a.insert(a.end(), row.begin(), row.end());
  return ReleaseKernel(n, std::move(a));
}

Belief BeliefUpdate(const Belief& b, const ReleaseKernel& a,
                    const TransitionMatrix& q, int y) {
  CheckSameSize(b, a, q);
  const int n = b.size();
  if (y < 0 || y >= n) throw DomainError("released cell out of range");
  std::vector<double> w(n);
  kernels::PosteriorWeights(b.probs(), a.data(), q.data(), y, n, w);
  double z = 0.0;
  for (double v : w) z += v;
  if (!(z >= kMinEvidence)) {
    throw DomainError("observed release has zero probability under the belief");
  }
  for (double& v : w) v /= z;
  return Belief(std::move(w));
}

double ExpectedLeakage(const Belief& b, const ReleaseKernel& a,
                       const TransitionMatrix& q) {
  CheckSameSize(b, a, q);
  const int n = b.size();
  // Distortion is not needed; any table of the right shape will do.
  static thread_local std::vector<double> zeros;
  zeros.assign(static_cast<size_t>(n) * n, 0.0);
  const double leak =
      kernels::KernelMoments(b.probs(), a.data(), q.data(), zeros, n).leakage_bits;
  return std::max(leak, 0.0);
}

double ExpectedDistortion(const Belief& b, const ReleaseKernel& a,
                          const TransitionMatrix& q, const GridSpec& spec) {
  CheckSameSize(b, a, q);
  if (spec.cell_count() != b.size()) throw ShapeError("grid size differs");
  return kernels::KernelMoments(b.probs(), a.data(), q.data(), spec.distances(),
                                b.size())
      .distortion;
}

StepCostBreakdown StepCost(const Belief& b, const ReleaseKernel& a,
                           const TransitionMatrix& q, const GridSpec& spec,
                           double lambda, double dbar) {
  CheckSameSize(b, a, q);
  if (spec.cell_count() != b.size()) throw ShapeError("grid size differs");
  if (!(lambda >= 0.0) || !(dbar >= 0.0)) {
    throw DomainError("lambda and dbar must be >= 0");
  }
  const auto m = kernels::KernelMoments(b.probs(), a.data(), q.data(),
                                        spec.distances(), b.size());
  StepCostBreakdown c;
  // Rounding can leave a tiny negative value when the kernel ignores (x, x').
  c.leakage = std::max(m.leakage_bits, 0.0);
  c.distortion = m.distortion;
  c.lambda = lambda;
  c.dbar = dbar;
  c.cost = c.leakage + lambda * (c.distortion - dbar);
  return c;
}

EnvStepResult EnvStep(int x_prev, int x_cur, const Belief& b,
                      const ReleaseKernel& a, const TransitionMatrix& q,
                      const TransitionMatrix& belief_transition,
                      const GridSpec& spec, double lambda, double dbar,
                      Rng& rng) {
  const int n = b.size();
  if (x_prev < 0 || x_prev >= n || x_cur < 0 || x_cur >= n) {
    throw DomainError("true cell out of range");
  }
  EnvStepResult r;
  r.cost = StepCost(b, a, belief_transition, spec, lambda, dbar);
  r.released = SampleCategorical(a.Row(x_cur, x_prev), rng);
  r.belief_next = BeliefUpdate(b, a, belief_transition, r.released);
  r.next_cell = SampleCategorical(q.Row(x_cur), rng);
  return r;
}

EnvStepResult EnvStep(int x_prev, int x_cur, const Belief& b,
                      const ReleaseKernel& a, const TransitionMatrix& q,
                      const GridSpec& spec, double lambda, double dbar,
                      Rng& rng) {
  return EnvStep(x_prev, x_cur, b, a, q, q, spec, lambda, dbar, rng);
}

std::string SnapshotToJson(const Belief& b, const ReleaseKernel& a) {
  const int n = a.cell_count();
  nlohmann::json kernel = nlohmann::json::array();
  for (int x = 0; x < n; ++x) {
    nlohmann::json plane = nlohmann::json::array();
    for (int xp = 0; xp < n; ++xp) {
      auto row = a.Row(x, xp);
      plane.push_back(std::vector<double>(row.begin(), row.end()));
    }
    kernel.push_back(std::move(plane));
  }
  auto p = b.probs();
  nlohmann::json doc = {{"belief", std::vector<double>(p.begin(), p.end())},
                        {"kernel", std::move(kernel)}};
  return doc.dump();
}

}  // namespace locpriv
