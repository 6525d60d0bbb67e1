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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>
#include <omp.h>

#include "locpriv/errors.h"
#include "locpriv/exact_oracle.h"

namespace locpriv {
namespace {

// The myopic kernels for steps 1..horizon, each solved on the propagated
// state, together with the per-step leakage they report.
struct MyopicRun {
  std::vector<MyopicKernel> kernels;
  std::vector<MyopicState> states;
  std::vector<double> leakage;
};

MyopicRun SolveSequence(const GridSpec& spec, const TransitionMatrix& q,
                        const InitialDistribution& p1, double lambda,
                        int horizon) {
  MyopicRun run;
  MyopicState state = MyopicState::Initial(p1);
  for (int t = 1; t <= horizon; ++t) {
    BaStepResult step = BaSolveStep(state, lambda, spec);
    run.states.push_back(state);
    run.leakage.push_back(step.leakage_bits);
    run.kernels.push_back(step.kernel);
    if (t < horizon) state = Propagate(state, step.kernel, q);
  }
  return run;
}

// The same kernels written as a simplified explicit policy; step t reads
// only the last release (0 at the first step).
ExplicitPolicy ToExplicit(const std::vector<MyopicKernel>& kernels, int n) {
  const int horizon = static_cast<int>(kernels.size());
  std::vector<std::vector<double>> tables;
  int64_t ys = 1;
  for (int t = 1; t <= horizon; ++t) {
    const MyopicKernel& k = kernels[t - 1];
    std::vector<double> tab;
    tab.reserve(static_cast<size_t>(n) * n * ys * n);
    for (int x = 0; x < n; ++x) {
      for (int xp = 0; xp < n; ++xp) {
        for (int64_t y_seq = 0; y_seq < ys; ++y_seq) {
          const int y_prev = t == 1 ? 0 : static_cast<int>(y_seq % n);
          double sum = 0.0;
          for (int y = 0; y < n; ++y) sum += k(y_prev, x, xp, y);
          for (int y = 0; y < n; ++y) tab.push_back(k(y_prev, x, xp, y) / sum);
        }
      }
    }
    tables.push_back(std::move(tab));
    ys *= n;
  }
  return ExplicitPolicy(ExplicitPolicy::Form::kSimplified, n, horizon,
                        std::move(tables));
}

// I(X_t, X_{t-1}; Y_t | Y_{t-1}) in bits from the exact joint.
double LastReleaseLeakage(const JointLaw& j, int t) {
  const int n = j.cells();
  const std::vector<double> m = StepMarginal(j, t);
  int64_t ys = 1;
  for (int i = 0; i < t; ++i) ys *= n;
  // p[a][y_prev][y] with a = (x_t, x_{t-1}).
  std::vector<double> p(static_cast<size_t>(n) * n * n * n, 0.0);
  for (int a = 0; a < n * n; ++a) {
    for (int64_t s = 0; s < ys; ++s) {
      const int y = static_cast<int>(s % n);
      const int y_prev = t == 1 ? 0 : static_cast<int>((s / n) % n);
      p[(static_cast<size_t>(a) * n + y_prev) * n + y] += m[a * ys + s];
    }
  }
  std::vector<double> pay(n * n * n, 0.0), py(n * n, 0.0), pc(n, 0.0);
  for (int a = 0; a < n * n; ++a) {
    for (int c = 0; c < n; ++c) {
      for (int y = 0; y < n; ++y) {
        const double v = p[(static_cast<size_t>(a) * n + c) * n + y];
        pay[a * n + c] += v;
        py[c * n + y] += v;
        pc[c] += v;
      }
    }
  }
  double mi = 0.0;
  for (int a = 0; a < n * n; ++a) {
    for (int c = 0; c < n; ++c) {
      for (int y = 0; y < n; ++y) {
        const double v = p[(static_cast<size_t>(a) * n + c) * n + y];
        if (v > 0.0) mi += v * std::log2(v * pc[c] / (pay[a * n + c] * py[c * n + y]));
      }
    }
  }
  return mi;
}

TEST(MyopicTest, InitialStateSitsOnTheDiagonal) {
  const InitialDistribution p1({0.1, 0.2, 0.3, 0.4});
  const MyopicState s = MyopicState::Initial(p1);
  EXPECT_EQ(s.t, 1);
  for (int x = 0; x < 4; ++x) {
    EXPECT_DOUBLE_EQ(s(x, x, 0), p1[x]);
    for (int xp = 0; xp < 4; ++xp) {
      for (int y = 1; y < 4; ++y) EXPECT_EQ(s(x, xp, y), 0.0);
    }
  }
  EXPECT_NO_THROW(s.Validate());
}

TEST(MyopicTest, ValidateRejectsLostMass) {
  MyopicState s = MyopicState::Initial(InitialDistribution::Uniform(4));
  s.joint[0] += 1e-6;
  EXPECT_THROW(s.Validate(), NumericError);
  s.joint.pop_back();
  EXPECT_THROW(s.Validate(), ShapeError);
}

TEST(MyopicTest, ZeroLambdaReleasesNothing) {
  const GridSpec spec(4);
  const MyopicState s = MyopicState::Initial(InitialDistribution::Uniform(16));
  const BaStepResult r = BaSolveStep(s, 0.0, spec);
  EXPECT_NEAR(r.leakage_bits, 0.0, 1e-12);
  EXPECT_TRUE(r.converged);
  for (int x = 0; x < 16; ++x) {
    for (int y = 0; y < 16; ++y) {
      EXPECT_NEAR(r.kernel(0, x, x, y), r.kernel(0, 0, 0, y), 1e-12);
    }
  }
}

TEST(MyopicTest, LargeLambdaReleasesTheTruth) {
  const GridSpec spec(4);
  const MyopicState s = MyopicState::Initial(InitialDistribution::Uniform(16));
  const BaStepResult r = BaSolveStep(s, 1e3, spec);
  EXPECT_LT(r.distortion, 1e-3);
  EXPECT_NEAR(r.leakage_bits, 4.0, 1e-2);
}

TEST(MyopicTest, RejectsNegativeLambdaAndMismatchedGrid) {
  const MyopicState s = MyopicState::Initial(InitialDistribution::Uniform(16));
  EXPECT_THROW(BaSolveStep(s, -1.0, GridSpec(4)), DomainError);
  EXPECT_THROW(BaSolveStep(s, 1.0, GridSpec(3)), ShapeError);
}

TEST(MyopicTest, KernelSlicesAreDistributions) {
  const GridSpec spec(4);
  const TransitionMatrix q = BuildQ2(spec, 1, 6);
  const MyopicRun run =
      SolveSequence(spec, q, InitialDistribution::Uniform(16), 1.5, 5);
  for (const MyopicKernel& k : run.kernels) {
    for (int yp = 0; yp < 16; ++yp) {
      for (int x = 0; x < 16; ++x) {
        for (int xp = 0; xp < 16; ++xp) {
          double sum = 0.0;
          for (int y = 0; y < 16; ++y) {
            EXPECT_GE(k(yp, x, xp, y), 0.0);
            sum += k(yp, x, xp, y);
          }
          EXPECT_NEAR(sum, 1.0, 1e-12);
        }
      }
    }
  }
}

TEST(MyopicTest, ObjectiveNeverIncreasesOverAFullRun) {
  const GridSpec spec(4);
  const TransitionMatrix q = BuildQ2(spec, 1, 6);
  BaOptions opts;
  opts.record_trace = true;
  for (double lambda : {0.5, 2.0, 8.0}) {
    MyopicState state = MyopicState::Initial(InitialDistribution::Uniform(16));
    for (int t = 1; t <= 30; ++t) {
      const BaStepResult r = BaSolveStep(state, lambda, spec, opts);
      ASSERT_FALSE(r.objective_trace.empty());
      for (size_t i = 1; i < r.objective_trace.size(); ++i) {
        const double prev = r.objective_trace[i - 1];
        EXPECT_LE(r.objective_trace[i],
                  prev + kBaRoundingSlack * std::max(1.0, std::abs(prev)))
            << "lambda " << lambda << " step " << t << " iteration " << i;
      }
      state = Propagate(state, r.kernel, q);
    }
  }
}

TEST(MyopicTest, IdentityKernelFollowsADeterministicChain) {
  // Cyclic shift 0 -> 1 -> 2 -> 3 -> 0.
  std::vector<double> shift(16, 0.0);
  for (int i = 0; i < 4; ++i) shift[i * 4 + (i + 1) % 4] = 1.0;
  const TransitionMatrix q(4, shift);
  MyopicKernel identity{4, std::vector<double>(256, 0.0)};
  for (int yp = 0; yp < 4; ++yp) {
    for (int x = 0; x < 4; ++x) {
      for (int xp = 0; xp < 4; ++xp) identity.q[((yp * 4 + x) * 4 + xp) * 4 + x] = 1.0;
    }
  }
  MyopicState s = MyopicState::Initial(InitialDistribution({0.0, 0.0, 1.0, 0.0}));
  s = Propagate(s, identity, q);
  EXPECT_EQ(s.t, 2);
  EXPECT_DOUBLE_EQ(s(3, 2, 2), 1.0);
  s = Propagate(s, identity, q);
  EXPECT_DOUBLE_EQ(s(0, 3, 3), 1.0);
}

TEST(MyopicTest, UniformStaysUniform) {
  const GridSpec spec(2);
  const TransitionMatrix q = BuildQ0(spec);
  const MyopicKernel uniform{4, std::vector<double>(256, 0.25)};
  MyopicState s = MyopicState::Initial(InitialDistribution::Uniform(4));
  for (int t = 0; t < 3; ++t) {
    s = Propagate(s, uniform, q);
    for (double v : s.joint) EXPECT_NEAR(v, 1.0 / 64, 1e-15);
  }
}

TEST(MyopicTest, PropagateRejectsMismatchedSizes) {
  const MyopicState s = MyopicState::Initial(InitialDistribution::Uniform(4));
  const MyopicKernel k{4, std::vector<double>(256, 0.25)};
  EXPECT_THROW(Propagate(s, k, BuildQ0(GridSpec(3))), ShapeError);
}

TEST(MyopicTest, PropagateMatchesExactMarginals) {
  const GridSpec spec(2);
  Rng rng = MakeStream(404, 0);
  const TransitionMatrix q = RandomTransition(4, rng);
  const InitialDistribution p1 = RandomInitial(4, rng);
  const int horizon = 4;
  const MyopicRun run = SolveSequence(spec, q, p1, 1.0, horizon);
  const JointLaw j = EnumerateJoint(ToExplicit(run.kernels, 4), q, p1);
  for (int t = 2; t <= horizon; ++t) {
    // Law of (x_t, x_{t-1}, y_{t-1}) from the exact joint at step t - 1 moved
    // forward by q.
    const std::vector<double> m = StepMarginal(j, t);
    int64_t ys = 1;
    for (int i = 0; i < t; ++i) ys *= 4;
    std::vector<double> expected(64, 0.0);
    for (int x = 0; x < 4; ++x) {
      for (int xp = 0; xp < 4; ++xp) {
        for (int64_t s = 0; s < ys; ++s) {
          const int y_prev = static_cast<int>((s / 4) % 4);
          expected[(x * 4 + xp) * 4 + y_prev] += m[(x * 4 + xp) * ys + s];
        }
      }
    }
    const MyopicState& state = run.states[t - 1];
    for (size_t i = 0; i < expected.size(); ++i) {
      EXPECT_NEAR(state.joint[i], expected[i], 1e-12) << "t=" << t << " i=" << i;
    }
  }
}

TEST(MyopicTest, ReportedLeakageMatchesExactOneStepTerms) {
  const GridSpec spec(2);
  Rng rng = MakeStream(405, 0);
  const TransitionMatrix q = RandomTransition(4, rng);
  const InitialDistribution p1 = RandomInitial(4, rng);
  const int horizon = 4;
  for (double lambda : {0.3, 1.0, 3.0}) {
    const MyopicRun run = SolveSequence(spec, q, p1, lambda, horizon);
    const JointLaw j = EnumerateJoint(ToExplicit(run.kernels, 4), q, p1);
    for (int t = 1; t <= horizon; ++t) {
      EXPECT_NEAR(run.leakage[t - 1], LastReleaseLeakage(j, t), 1e-9)
          << "lambda " << lambda << " t " << t;
    }
  }
}

TEST(MyopicTest, FirstStepEqualsExactMutualInformation) {
  const GridSpec spec(2);
  const TransitionMatrix q = BuildQ0(spec);
  const InitialDistribution p1 = InitialDistribution::Uniform(4);
  for (double lambda : {0.5, 1.0, 2.0, 4.0}) {
    const MyopicRun run = SolveSequence(spec, q, p1, lambda, 1);
    const JointLaw j = EnumerateJoint(ToExplicit(run.kernels, 4), q, p1);
    EXPECT_NEAR(run.leakage[0], MutualInformationFull(j), 1e-9);
  }
}

// Conditioning on the whole release history can only lower the step leakage,
// so the full-history total never exceeds what the myopic run reports.
TEST(MyopicTest, FullHistoryLeakageIsBelowReported) {
  const GridSpec spec(2);
  for (uint64_t seed = 0; seed < 8; ++seed) {
    Rng rng = MakeStream(500 + seed, 0);
    const TransitionMatrix q = RandomTransition(4, rng);
    const InitialDistribution p1 = RandomInitial(4, rng);
    const MyopicRun run = SolveSequence(spec, q, p1, 1.0, 4);
    const JointLaw j = EnumerateJoint(ToExplicit(run.kernels, 4), q, p1);
    const std::vector<double> terms = DecomposedLeakageTerms(j);
    for (int t = 0; t < 4; ++t) {
      EXPECT_LE(terms[t], run.leakage[t] + 1e-10) << "seed " << seed << " t " << t;
    }
  }
}

TEST(MyopicTest, ZeroLambdaOnUniformMovesGivesKnownDistortion) {
  const GridSpec spec(4);
  const std::vector<double> lambdas = {0.0};
  const auto rows = RunMyopic(spec, BuildQ0(spec), InitialDistribution::Uniform(16),
                              lambdas, 20);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].avg_leakage_bits, 0.0, 1e-12);
  EXPECT_NEAR(rows[0].avg_distortion, 2.5, 1e-9);
  EXPECT_TRUE(rows[0].converged);
}

TEST(MyopicTest, CurveIsMonotoneInLambda) {
  const GridSpec spec(4);
  const std::vector<double> lambdas = DefaultMyopicLambdas();
  ASSERT_GE(lambdas.size(), 7u);
  const auto rows = RunMyopic(spec, BuildQ2(spec, 1, 6),
                              InitialDistribution::Uniform(16), lambdas, 20);
  for (size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].lambda, lambdas[i]);
    EXPECT_LE(rows[i].avg_distortion, rows[i - 1].avg_distortion + 1e-9);
    EXPECT_GE(rows[i].avg_leakage_bits, rows[i - 1].avg_leakage_bits - 1e-9);
  }
}

TEST(MyopicTest, MassIsConservedOverTheHorizon) {
  const GridSpec spec(4);
  const TransitionMatrix q = BuildQ1(spec, DefaultQ1Weights(spec));
  MyopicState s = MyopicState::Initial(InitialDistribution::Uniform(16));
  for (int t = 1; t < 100; ++t) {
    const BaStepResult r = BaSolveStep(s, 2.0, spec);
    s = Propagate(s, r.kernel, q);
    double total = 0.0;
    for (double v : s.joint) total += v;
    ASSERT_NEAR(total, 1.0, 1e-12) << "step " << t;
  }
  EXPECT_EQ(s.t, 100);
}

TEST(MyopicTest, RunMyopicRejectsEmptyHorizon) {
  const GridSpec spec(4);
  const std::vector<double> lambdas = {1.0};
  EXPECT_THROW(RunMyopic(spec, BuildQ0(spec), InitialDistribution::Uniform(16),
                         lambdas, 0),
               DomainError);
  const std::vector<double> bad = {1.0, -2.0};
  EXPECT_THROW(RunMyopic(spec, BuildQ0(spec), InitialDistribution::Uniform(16),
                         bad, 3),
               DomainError);
}

TEST(MyopicTest, ResultsDoNotDependOnThreadCount) {
  const GridSpec spec(4);
  const std::vector<double> lambdas = {0.5, 1.0, 4.0};
  const TransitionMatrix q = BuildQ2(spec, 1, 6);
  const auto p1 = InitialDistribution::Uniform(16);
  omp_set_num_threads(1);
  const auto serial = RunMyopic(spec, q, p1, lambdas, 10);
  omp_set_num_threads(3);
  const auto parallel = RunMyopic(spec, q, p1, lambdas, 10);
  for (size_t i = 0; i < lambdas.size(); ++i) {
    EXPECT_EQ(serial[i].avg_leakage_bits, parallel[i].avg_leakage_bits);
    EXPECT_EQ(serial[i].avg_distortion, parallel[i].avg_distortion);
  }
}

}  // namespace
}  // namespace locpriv
