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

#ifndef LOCPRIV_GRID_WORLD_H_
#define LOCPRIV_GRID_WORLD_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "locpriv/rng.h"

namespace locpriv {

// Square grid of side x side cells. Cells carry 1-based labels in row-major
// order (first row 1..side); matrices and beliefs use 0-based indices
// (label - 1).
class GridSpec {
 public:
  explicit GridSpec(int side = 4);

  int side() const { return side_; }
  int cell_count() const { return side_ * side_; }

  // Zero-based (row, col) of a 1-based cell label.
  std::pair<int, int> CellCoords(int cell) const;
  // Manhattan distance between two 1-based cell labels.
  int Manhattan(int a, int b) const;
  // Manhattan distance between two 0-based indices, unchecked.
  int Distance(int i, int j) const { return distance_[i * cell_count() + j]; }
  // n x n table of distances between 0-based indices.
  std::span<const double> distances() const { return distance_f_; }
  // Largest achievable distance, 2 * (side - 1).
  int MaxDistance() const { return 2 * (side_ - 1); }

  bool operator==(const GridSpec& other) const { return side_ == other.side_; }

 private:
  int side_;
  std::vector<int> distance_;
  std::vector<double> distance_f_;
};

// Row-stochastic matrix; row i is the law of the next cell given cell i.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  // Validates shape, nonnegativity and unit row sums (within 1e-12).
  TransitionMatrix(int cell_count, std::vector<double> row_major);

  static TransitionMatrix Identity(int cell_count);

  int cell_count() const { return n_; }
  double operator()(int from, int to) const { return p_[from * n_ + to]; }
  std::span<const double> Row(int from) const {
    return {p_.data() + static_cast<size_t>(from) * n_, static_cast<size_t>(n_)};
  }
  const std::vector<double>& data() const { return p_; }

 private:
  int n_ = 0;
  std::vector<double> p_;
};

// Law of the first location.
class InitialDistribution {
 public:
  InitialDistribution() = default;
  explicit InitialDistribution(std::vector<double> p);
  static InitialDistribution Uniform(int cell_count);

  int cell_count() const { return static_cast<int>(p_.size()); }
  double operator[](int i) const { return p_[i]; }
  std::span<const double> probs() const { return p_; }

 private:
  std::vector<double> p_;
};

// 1-based cell labels X_1..X_n.
struct Trajectory {
  std::vector<int> cells;
};

// Uniform moves: every entry 1 / cell_count.
TransitionMatrix BuildQ0(const GridSpec& spec);

// Distance-weighted moves. Weight of x -> x' is r[0] when x' == x and
// r[d] / d otherwise, d the Manhattan distance; rows are normalized.
// r needs one entry per achievable distance 0..MaxDistance().
TransitionMatrix BuildQ1(const GridSpec& spec, std::span<const double> r);

// Path-following moves: the "next along the snake" cell (x + 1 within a row,
// x + side at a row end, the last cell to itself) gets weight r1, every
// other cell r0, each divided by max(d, 1) and row-normalized.
TransitionMatrix BuildQ2(const GridSpec& spec, double r0, double r1);

// r_0 = 1, r_i = 2 * (side - 1) + 1 - i; on the 4x4 grid (1,6,5,4,3,2,1).
std::vector<double> DefaultQ1Weights(const GridSpec& spec);

// Markov chain sample path; X_1 ~ p1, X_{t+1} ~ q(.|X_t).
Trajectory SampleTrajectory(const TransitionMatrix& q,
                            const InitialDistribution& p1, int n, Rng& rng);

// {"side": s, "rows": [[...], ...]}
std::string TransitionMatrixToJson(const GridSpec& spec,
                                   const TransitionMatrix& q);
std::pair<GridSpec, TransitionMatrix> TransitionMatrixFromJson(
    const std::string& text);

// Entropy rate (bits/step) of the stationary chain, sum_i pi_i H(q(.|i)).
double EntropyRateBits(const TransitionMatrix& q);
// Stationary law by power iteration.
std::vector<double> StationaryDistribution(const TransitionMatrix& q);

}  // namespace locpriv

#endif  // LOCPRIV_GRID_WORLD_H_
