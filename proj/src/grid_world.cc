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

#include "locpriv/grid_world.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "json.hpp"
#include "locpriv/errors.h"

namespace locpriv {
namespace {

constexpr double kStochasticTol = 1e-12;

void CheckDistribution(std::span<const double> p, const char* what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError(std::string(what) + ": negative or non-finite entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kStochasticTol) {
    throw DomainError(std::string(what) + ": entries sum to " +
                      std::to_string(sum));
  }
}

// Row-normalizes a matrix of nonnegative weights.
TransitionMatrix NormalizeRows(int n, std::vector<double> w) {
  for (int i = 0; i < n; ++i) {
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += w[i * n + j];
    if (!(z > 0.0)) {
      throw DomainError("transition row " + std::to_string(i + 1) +
                        " has zero total weight");
    }
    for (int j = 0; j < n; ++j) w[i * n + j] /= z;
  }
  return TransitionMatrix(n, std::move(w));
}

}  // namespace

GridSpec::GridSpec(int side) : side_(side) {
  if (side < 1) throw DomainError("grid side must be positive");
  const int n = cell_count();
  distance_.resize(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      distance_[i * n + j] =
          std::abs(i / side - j / side) + std::abs(i % side - j % side);
    }
  }
  distance_f_.assign(distance_.begin(), distance_.end());
}

std::pair<int, int> GridSpec::CellCoords(int cell) const {
  if (cell < 1 || cell > cell_count()) {
    throw DomainError("cell " + std::to_string(cell) + " outside 1.." +
                      std::to_string(cell_count()));
  }
  return {(cell - 1) / side_, (cell - 1) % side_};
}

int GridSpec::Manhattan(int a, int b) const {
  const auto [ra, ca] = CellCoords(a);
  const auto [rb, cb] = CellCoords(b);
  return std::abs(ra - rb) + std::abs(ca - cb);
}

TransitionMatrix::TransitionMatrix(int cell_count, std::vector<double> row_major)
    : n_(cell_count), p_(std::move(row_major)) {
  if (n_ < 1 || p_.size() != static_cast<size_t>(n_) * n_) {
    throw ShapeError("transition matrix needs cell_count^2 entries");
  }
  for (int i = 0; i < n_; ++i) CheckDistribution(Row(i), "transition row");
}

TransitionMatrix TransitionMatrix::Identity(int cell_count) {
  std::vector<double> p(static_cast<size_t>(cell_count) * cell_count, 0.0);
  for (int i = 0; i < cell_count; ++i) p[i * cell_count + i] = 1.0;
  return TransitionMatrix(cell_count, std::move(p));
}

InitialDistribution::InitialDistribution(std::vector<double> p)
    : p_(std::move(p)) {
  if (p_.empty()) throw ShapeError("empty initial distribution");
  CheckDistribution(p_, "initial distribution");
}

InitialDistribution InitialDistribution::Uniform(int cell_count) {
  return InitialDistribution(std::vector<double>(cell_count, 1.0 / cell_count));
}

TransitionMatrix BuildQ0(const GridSpec& spec) {
  const int n = spec.cell_count();
  return TransitionMatrix(
      n, std::vector<double>(static_cast<size_t>(n) * n, 1.0 / n));
}

TransitionMatrix BuildQ1(const GridSpec& spec, std::span<const double> r) {
  const int n = spec.cell_count();
  if (static_cast<int>(r.size()) <= spec.MaxDistance()) {
    throw ShapeError("need a weight for every distance 0.." +
                     std::to_string(spec.MaxDistance()));
  }
  for (double v : r) {
    if (!(v >= 0.0)) throw DomainError("distance weights must be >= 0");
  }
  std::vector<double> w(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int d = spec.Distance(i, j);
      w[i * n + j] = d == 0 ? r[0] : r[d] / d;
    }
  }
  return NormalizeRows(n, std::move(w));
}

TransitionMatrix BuildQ2(const GridSpec& spec, double r0, double r1) {
  if (!(r0 >= 0.0) || !(r1 >= 0.0)) {
    throw DomainError("path weights must be >= 0");
  }
  const int n = spec.cell_count();
  const int side = spec.side();
  std::vector<double> w(static_cast<size_t>(n) * n);
  for (int x = 1; x <= n; ++x) {
    int next;
    if (x == n) {
      next = n;
    } else if (x % side != 0) {
      next = x + 1;
    } else {
      next = x + side;
    }
    for (int y = 1; y <= n; ++y) {
      const double u = y == next ? r1 : r0;
      const int d = spec.Distance(x - 1, y - 1);
      w[(x - 1) * n + (y - 1)] = u / std::max(d, 1);
    }
  }
  return NormalizeRows(n, std::move(w));
}

std::vector<double> DefaultQ1Weights(const GridSpec& spec) {
  const int dmax = spec.MaxDistance();
  std::vector<double> r(dmax + 1);
  r[0] = 1.0;
  for (int i = 1; i <= dmax; ++i) r[i] = dmax + 1 - i;
  return r;
}

Trajectory SampleTrajectory(const TransitionMatrix& q,
                            const InitialDistribution& p1, int n, Rng& rng) {
  if (n < 1) throw DomainError("trajectory length must be >= 1");
  if (q.cell_count() != p1.cell_count()) {
    throw ShapeError("transition matrix and initial law disagree on size");
  }
  Trajectory traj;
  traj.cells.reserve(n);
  int cur = SampleCategorical(p1.probs(), rng);
  traj.cells.push_back(cur + 1);
  for (int t = 1; t < n; ++t) {
    cur = SampleCategorical(q.Row(cur), rng);
    traj.cells.push_back(cur + 1);
  }
  return traj;
}

std::string TransitionMatrixToJson(const GridSpec& spec,
                                   const TransitionMatrix& q) {
  if (spec.cell_count() != q.cell_count()) {
    throw ShapeError("grid and transition matrix disagree on size");
  }
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < q.cell_count(); ++i) {
    auto row = q.Row(i);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  nlohmann::json doc = {{"side", spec.side()}, {"rows", rows}};
  return doc.dump();
}

std::pair<GridSpec, TransitionMatrix> TransitionMatrixFromJson(
    const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("transition matrix JSON: ") + e.what());
  }
  if (!doc.contains("side") || !doc.contains("rows")) {
    throw ConfigError("transition matrix JSON needs \"side\" and \"rows\"");
  }
  GridSpec spec(doc["side"].get<int>());
  const int n = spec.cell_count();
  const auto& rows = doc["rows"];
  if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
    throw ShapeError("transition matrix JSON needs side^2 rows");
  }
  std::vector<double> p;
  p.reserve(static_cast<size_t>(n) * n);
  for (const auto& row : rows) {
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw ShapeError("transition matrix JSON row has wrong length");
    }
    for (const auto& v : row) p.push_back(v.get<double>());
  }
  return {spec, TransitionMatrix(n, std::move(p))};
}

std::vector<double> StationaryDistribution(const TransitionMatrix& q) {
  const int n = q.cell_count();
  std::vector<double> pi(n, 1.0 / n), next(n);
  for (int iter = 0; iter < 100000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) next[j] += pi[i] * q(i, j);
    }
    double diff = 0.0;
    for (int j = 0; j < n; ++j) diff += std::abs(next[j] - pi[j]);
    pi.swap(next);
    if (diff < 1e-15) break;
  }
  return pi;
}

double EntropyRateBits(const TransitionMatrix& q) {
  const auto pi = StationaryDistribution(q);
  double h = 0.0;
  for (int i = 0; i < q.cell_count(); ++i) {
    for (double p : q.Row(i)) {
      if (p > 0.0) h -= pi[i] * p * std::log2(p);
    }
  }
  return h;
}

}  // namespace locpriv
