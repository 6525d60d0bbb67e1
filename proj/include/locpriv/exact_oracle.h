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

#ifndef LOCPRIV_EXACT_ORACLE_H_
#define LOCPRIV_EXACT_ORACLE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "locpriv/belief_mdp.h"
#include "locpriv/grid_world.h"
#include "locpriv/rng.h"

namespace locpriv {

// Tables grow as cells^(2 n); enumeration refuses anything larger.
inline constexpr int64_t kMaxJointEntries = 10'000'000;

// Release policy over a horizon, stored as explicit conditional tables.
//
// History form: step t (1-based) conditions on (x_1..x_t, y_1..y_{t-1}).
// Simplified form: step t conditions on (x_t, x_{t-1}, y_1..y_{t-1}), with
// x_0 taken to be x_1.
//
// Sequences are packed base-`cells` with the earliest element most
// significant.
class ExplicitPolicy {
 public:
  enum class Form { kHistory, kSimplified };

  // `tables[t-1]` holds one distribution over y per condition, laid out as
  // [condition][y]. Throws ShapeError on a size mismatch and DomainError when
  // a slice is not a distribution within 1e-12.
  ExplicitPolicy(Form form, int cells, int horizon,
                 std::vector<std::vector<double>> tables);

  // Slices drawn from Dirichlet(1, ..., 1), floored at kKernelFloor.
  static ExplicitPolicy RandomHistory(int cells, int horizon, Rng& rng);
  static ExplicitPolicy RandomSimplified(int cells, int horizon, Rng& rng);
  // Releases y_t = x_t at every step.
  static ExplicitPolicy Identity(int cells, int horizon);
  // Releases from `row` regardless of anything.
  static ExplicitPolicy Constant(std::span<const double> row, int horizon);

  Form form() const { return form_; }
  int cells() const { return cells_; }
  int horizon() const { return horizon_; }
  // Number of conditions at step t.
  int64_t ConditionCount(int t) const;
  const std::vector<double>& table(int t) const { return tables_[t - 1]; }

  // q_t(y | x^t, y^{t-1}). `xs` holds x_1..x_t, `ys` holds y_1..y_{t-1}.
  double Prob(int t, std::span<const int> xs, std::span<const int> ys,
              int y) const;

  // Step-t release kernel a[x][x'][y] given y^{t-1}; simplified form only.
  ReleaseKernel StepKernel(int t, std::span<const int> ys) const;

 private:
  Form form_;
  int cells_;
  int horizon_;
  std::vector<std::vector<double>> tables_;
};

// P(X^n = x^n, Y^n = y^n), stored at index Pack(x^n) * cells^n + Pack(y^n).
class JointLaw {
 public:
  JointLaw(int cells, int horizon, std::vector<double> p);

  int cells() const { return cells_; }
  int horizon() const { return horizon_; }
  int64_t sequence_count() const { return seq_; }
  const std::vector<double>& probs() const { return p_; }
  double operator()(int64_t x_seq, int64_t y_seq) const {
    return p_[static_cast<size_t>(x_seq * seq_ + y_seq)];
  }
  // Element t (1-based) of a packed sequence.
  int Digit(int64_t seq, int t) const;

 private:
  int cells_;
  int horizon_;
  int64_t seq_;
  std::vector<double> p_;
};

// Exact product-form joint. Throws DomainError past kMaxJointEntries and
// ShapeError when the pieces disagree on the alphabet.
JointLaw EnumerateJoint(const ExplicitPolicy& policy, const TransitionMatrix& q,
                        const InitialDistribution& p1);

// I(X^n; Y^n) in bits.
double MutualInformationFull(const JointLaw& j);

// sum_t I(X_t, X_{t-1}; Y_t | Y^{t-1}) in bits, with X_0 = X_1.
double DecomposedLeakage(const JointLaw& j);

// The per-step terms of DecomposedLeakage.
std::vector<double> DecomposedLeakageTerms(const JointLaw& j);

// sum_t I(X^t; Y_t | Y^{t-1}) in bits.
double ChainRuleLeakage(const JointLaw& j);

// P(X_t | Y^t = prefix) with t = prefix.size(). Throws DomainError for a
// zero-probability prefix or a prefix longer than the horizon.
std::vector<double> Posterior(const JointLaw& j, std::span<const int> y_prefix);

// Law of (X_t, X_{t-1}, Y^t), laid out [x_t][x_{t-1}][Pack(y^t)].
std::vector<double> StepMarginal(const JointLaw& j, int t);

// Simplified policy whose step-t slices are P(Y_t | X_t, X_{t-1}, Y^{t-1})
// under `j`. Conditions with zero probability get the uniform slice.
ExplicitPolicy SimplifiedFromJoint(const JointLaw& j);

// Rows drawn from Dirichlet(1, ..., 1).
TransitionMatrix RandomTransition(int cells, Rng& rng);
InitialDistribution RandomInitial(int cells, Rng& rng);

// {"cells", "horizon", "entries": [{"x": [...], "y": [...], "p": ...}]} with
// zero entries omitted; cells are 1-based.
std::string JointToJson(const JointLaw& j);

}  // namespace locpriv

#endif  // LOCPRIV_EXACT_ORACLE_H_
