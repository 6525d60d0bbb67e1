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

#ifndef LOCPRIV_ORACLE_SUITE_H_
#define LOCPRIV_ORACLE_SUITE_H_

#include <cstdint>
#include <string>
#include <vector>

namespace locpriv {

struct OracleSuiteOptions {
  uint64_t seed = 2026;
  int decomposition_instances = 1000;
  int history_instances = 500;
  int construction_instances = 100;
  int chain_rule_instances = 100;
  int filter_kernels = 50;
  // Test hook: the recursive filter skips the motion step, which the filter
  // consistency suite must catch.
  bool break_filter = false;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  int instances = 0;
  // Largest violation seen (absolute difference or shortfall).
  double worst = 0.0;
  std::string detail;
};

// Random simplified policies (2-3 cells, horizon 1-3): the full mutual
// information equals the per-step decomposition within 1e-10.
SuiteResult RunDecompositionSuite(const OracleSuiteOptions& options);
// Random history-form policies: full >= decomposition - 1e-12, strictly
// greater at least once.
SuiteResult RunHistoryInequalitySuite(const OracleSuiteOptions& options);
// Simplified policy built from a history-form joint reproduces the
// (X_t, X_{t-1}, Y^t) marginals within 1e-12 and the same decomposition.
SuiteResult RunConstructionSuite(const OracleSuiteOptions& options);
// Full information equals sum_t I(X^t; Y_t | Y^{t-1}) within 1e-12.
SuiteResult RunChainRuleSuite(const OracleSuiteOptions& options);
// Recursive belief equals the enumerated posterior within 1e-10 for every
// observation prefix, 3 cells, horizon 4.
SuiteResult RunFilterSuite(const OracleSuiteOptions& options);

std::vector<SuiteResult> RunOracleSuites(const OracleSuiteOptions& options = {});

}  // namespace locpriv

#endif  // LOCPRIV_ORACLE_SUITE_H_
