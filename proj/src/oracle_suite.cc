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

#include "locpriv/oracle_suite.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "locpriv/belief_mdp.h"
#include "locpriv/exact_oracle.h"
#include "locpriv/rng.h"

namespace locpriv {
namespace {

struct Instance {
  TransitionMatrix q;
  InitialDistribution p1;
};

Instance RandomWorld(int cells, Rng& rng) {
  Instance w;
  w.q = RandomTransition(cells, rng);
  w.p1 = RandomInitial(cells, rng);
  return w;
}

std::string Describe(const SuiteResult& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d instances, worst %.3g", r.instances,
                r.worst);
  return buf;
}

}  // namespace

SuiteResult RunDecompositionSuite(const OracleSuiteOptions& options) {
  SuiteResult r{.name = "decomposition equality"};
  Rng rng = MakeStream(options.seed, 1);
  for (int i = 0; i < options.decomposition_instances; ++i) {
    const int k = 2 + i % 2;
    const int n = 1 + (i / 2) % 3;
    const Instance w = RandomWorld(k, rng);
    const auto policy = ExplicitPolicy::RandomSimplified(k, n, rng);
    const JointLaw j = EnumerateJoint(policy, w.q, w.p1);
    r.worst = std::max(r.worst,
                       std::abs(MutualInformationFull(j) - DecomposedLeakage(j)));
    ++r.instances;
  }
  r.passed = r.instances > 0 && r.worst < 1e-10;
  r.detail = Describe(r);
  return r;
}

SuiteResult RunHistoryInequalitySuite(const OracleSuiteOptions& options) {
  SuiteResult r{.name = "history inequality"};
  Rng rng = MakeStream(options.seed, 2);
  int strict = 0;
  for (int i = 0; i < options.history_instances; ++i) {
    const int k = 2 + i % 2;
    const Instance w = RandomWorld(k, rng);
    const auto policy = ExplicitPolicy::RandomHistory(k, 3, rng);
    const JointLaw j = EnumerateJoint(policy, w.q, w.p1);
    const double gap = MutualInformationFull(j) - DecomposedLeakage(j);
    r.worst = std::max(r.worst, -gap);
    strict += gap > 1e-9;
    ++r.instances;
  }
  r.passed = r.instances > 0 && r.worst <= 1e-12 && strict > 0;
  r.detail = Describe(r) + ", strict in " + std::to_string(strict);
  return r;
}

SuiteResult RunConstructionSuite(const OracleSuiteOptions& options) {
  SuiteResult r{.name = "simplified construction"};
  Rng rng = MakeStream(options.seed, 3);
  for (int i = 0; i < options.construction_instances; ++i) {
    const int k = 2 + i % 2;
    const Instance w = RandomWorld(k, rng);
    const JointLaw jh =
        EnumerateJoint(ExplicitPolicy::RandomHistory(k, 3, rng), w.q, w.p1);
    const JointLaw js = EnumerateJoint(SimplifiedFromJoint(jh), w.q, w.p1);
    for (int t = 1; t <= 3; ++t) {
      const auto a = StepMarginal(jh, t);
      const auto b = StepMarginal(js, t);
      for (size_t e = 0; e < a.size(); ++e) {
        r.worst = std::max(r.worst, std::abs(a[e] - b[e]));
      }
    }
    r.worst = std::max(r.worst,
                       std::abs(DecomposedLeakage(jh) - DecomposedLeakage(js)));
    ++r.instances;
  }
  r.passed = r.instances > 0 && r.worst <= 1e-12;
  r.detail = Describe(r);
  return r;
}

SuiteResult RunChainRuleSuite(const OracleSuiteOptions& options) {
  SuiteResult r{.name = "chain rule"};
  Rng rng = MakeStream(options.seed, 4);
  for (int i = 0; i < options.chain_rule_instances; ++i) {
    const int k = 2 + i % 2;
    const Instance w = RandomWorld(k, rng);
    const JointLaw j =
        EnumerateJoint(ExplicitPolicy::RandomHistory(k, 3, rng), w.q, w.p1);
    r.worst = std::max(r.worst,
                       std::abs(MutualInformationFull(j) - ChainRuleLeakage(j)));
    ++r.instances;
  }
  r.passed = r.instances > 0 && r.worst <= 1e-12;
  r.detail = Describe(r);
  return r;
}

SuiteResult RunFilterSuite(const OracleSuiteOptions& options) {
  constexpr int kCells = 3;
  constexpr int kHorizon = 4;
  SuiteResult r{.name = "filter consistency"};
  Rng rng = MakeStream(options.seed, 5);
  const TransitionMatrix identity = TransitionMatrix::Identity(kCells);
  int prefixes = 0;
  for (int i = 0; i < options.filter_kernels; ++i) {
    const Instance w = RandomWorld(kCells, rng);
    const auto policy = ExplicitPolicy::RandomSimplified(kCells, kHorizon, rng);
    const JointLaw j = EnumerateJoint(policy, w.q, w.p1);
    const TransitionMatrix& motion = options.break_filter ? identity : w.q;
    // Depth-first over all observation prefixes, carrying the belief.
    std::vector<int> ys;
    std::vector<Belief> beliefs{
        Belief(std::vector<double>(w.p1.probs().begin(), w.p1.probs().end()))};
    auto visit = [&](auto&& self) -> void {
      const int t = static_cast<int>(ys.size()) + 1;
      if (t > kHorizon) return;
      const ReleaseKernel a = policy.StepKernel(t, ys);
      for (int y = 0; y < kCells; ++y) {
        beliefs.push_back(
            BeliefUpdate(beliefs.back(), a, t == 1 ? identity : motion, y));
        ys.push_back(y);
        const auto post = Posterior(j, ys);
        for (int x = 0; x < kCells; ++x) {
          r.worst = std::max(r.worst, std::abs(beliefs.back()[x] - post[x]));
        }
        ++prefixes;
        self(self);
        ys.pop_back();
        beliefs.pop_back();
      }
    };
    visit(visit);
    ++r.instances;
  }
  r.passed = r.instances > 0 && r.worst <= 1e-10;
  r.detail = Describe(r) + ", " + std::to_string(prefixes) + " prefixes";
  return r;
}

std::vector<SuiteResult> RunOracleSuites(const OracleSuiteOptions& options) {
  return {RunDecompositionSuite(options), RunHistoryInequalitySuite(options),
          RunConstructionSuite(options), RunChainRuleSuite(options),
          RunFilterSuite(options)};
}

}  // namespace locpriv
