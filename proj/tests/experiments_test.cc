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

#include "locpriv/experiments.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "locpriv/errors.h"

namespace locpriv {
namespace {

namespace fs = std::filesystem;

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("locpriv_" + std::string(::testing::UnitTest::GetInstance()
                                          ->current_test_info()
                                          ->name()));
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

ExperimentConfig TinyConfig(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.world = "q0";
  cfg.side = 2;
  cfg.episodes = 2;
  cfg.horizon = 5;
  cfg.rollouts = 3;
  cfg.hidden1 = 8;
  cfg.hidden2 = 8;
  cfg.lambdas = {0.0, 1.0};
  cfg.myopic_lambdas = {0.0, 2.0};
  cfg.out = out.string();
  return cfg;
}

TEST(ConfigTest, DefaultsMatchTheDeskProfile) {
  ExperimentConfig cfg;
  EXPECT_EQ(cfg.episodes, 500);
  EXPECT_EQ(cfg.horizon, 100);
  EXPECT_EQ(cfg.rollouts, 50);
  EXPECT_EQ(cfg.dbar, 0.0);
  EXPECT_EQ(cfg.lambdas, (std::vector<double>{0, 0.5, 1, 2, 5, 10, 20}));
  cfg.ApplyProfile(Profile::kPaper);
  EXPECT_EQ(cfg.episodes, 5000);
  EXPECT_EQ(cfg.horizon, 300);
  EXPECT_NO_THROW(cfg.Validate());
}

TEST(ConfigTest, JsonRoundTrip) {
  ExperimentConfig cfg = TinyConfig("somewhere");
  cfg.seeds = {4, 9};
  cfg.credit = ActorCredit::kRealizedPair;
  cfg.eval_kernel = EvalKernel::kSampled;
  const ExperimentConfig back = ConfigFromJson(ConfigToJson(cfg));
  EXPECT_EQ(ConfigToJson(back), ConfigToJson(cfg));
  EXPECT_EQ(back.seeds, cfg.seeds);
  EXPECT_EQ(back.credit, ActorCredit::kRealizedPair);
}

TEST(ConfigTest, ProfileKeyIsAppliedBeforeExplicitFields) {
  const ExperimentConfig cfg = ConfigFromJson(R"({"profile": "paper", "episodes": 7})");
  EXPECT_EQ(cfg.episodes, 7);
  EXPECT_EQ(cfg.horizon, 300);
}

TEST(ConfigTest, RejectsBadInput) {
  EXPECT_THROW(ConfigFromJson("{"), ConfigError);
  EXPECT_THROW(ConfigFromJson("[]"), ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"epochs": 3})"), ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"episodes": "many"})"), ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"lambdas": []})"), ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"lambdas": [-1]})"), ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"methods": ["ppo"]})"), ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"profile": "huge"})"), ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"gamma": 0})"), ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"hidden": [3]})"), ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"credit": "some"})"), ConfigError);
  EXPECT_THROW(ConfigFromJson(R"({"seeds": []})"), ConfigError);
}

TEST(ConfigTest, Worlds) {
  ExperimentConfig cfg;
  for (const char* name : {"q0", "q1", "q2"}) {
    cfg.world = name;
    const World w = BuildWorld(cfg);
    EXPECT_EQ(w.spec.cell_count(), 16);
    EXPECT_EQ(w.q.cell_count(), 16);
  }
  cfg.world = "/no/such/world.json";
  EXPECT_THROW(BuildWorld(cfg), ConfigError);
}

TEST(ConfigTest, WorldFromFile) {
  TempDir dir;
  fs::create_directories(dir.path());
  const GridSpec spec(2);
  const fs::path file = dir.path() / "world.json";
  std::ofstream(file) << TransitionMatrixToJson(spec, BuildQ0(spec));
  ExperimentConfig cfg;
  cfg.world = file.string();
  const World w = BuildWorld(cfg);
  EXPECT_EQ(w.spec.side(), 2);
  EXPECT_DOUBLE_EQ(w.q(0, 3), 0.25);
}

TEST(CsvTest, FormatDoubleRoundTrips) {
  for (double v : {0.0, 1.0, 0.1, 1.0 / 3.0, 2.5e-17, 123456.789, 20.0}) {
    EXPECT_EQ(std::stod(FormatDouble(v)), v);
  }
  EXPECT_EQ(FormatDouble(0.5), "0.5");
  EXPECT_EQ(FormatDouble(20.0), "20");
}

TEST(CsvTest, RowsRoundTripInCanonicalOrder) {
  std::vector<CurveRow> rows = {
      {"myopic", 2.0, 1, 0.3, 1.2, 0, 0},
      {"a2c", 1.0, 2, 1.5, 0.25, 0.01, 0.02},
      {"a2c", 1.0, 1, 1.6, 0.2, 0.01, 0.02},
      {"a2c", 0.5, 1, 1.9, 0.1, 0.0, 0.0},
  };
  SortRows(rows);
  EXPECT_EQ(rows[0].lambda, 0.5);
  EXPECT_EQ(rows[1].seed, 1u);
  EXPECT_EQ(rows[3].method, "myopic");
  const std::string csv = RowsToCsv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kResultsHeader);
  const std::vector<CurveRow> back = RowsFromCsv(csv);
  ASSERT_EQ(back.size(), rows.size());
  EXPECT_EQ(RowsToCsv(back), csv);
}

TEST(CsvTest, DuplicateKeysKeepTheLastRow) {
  std::vector<CurveRow> rows = {{"a2c", 1.0, 1, 1.0, 1.0, 0, 0},
                                {"a2c", 1.0, 1, 2.0, 2.0, 0, 0}};
  SortRows(rows);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].avg_distortion, 2.0);
}

TEST(CsvTest, MalformedFilesAreRejected) {
  EXPECT_THROW(RowsFromCsv("nonsense\n"), ConfigError);
  const std::string header = std::string(kResultsHeader) + "\n";
  EXPECT_THROW(RowsFromCsv(header + "a2c,1,1,0.5\n"), ConfigError);
  EXPECT_THROW(RowsFromCsv(header + "a2c,one,1,0.5,0.5,0,0\n"), ConfigError);
  EXPECT_THROW(RowsFromCsv(header + "a2c,1,1.5,0.5,0.5,0,0\n"), ConfigError);
  EXPECT_TRUE(RowsFromCsv(header).empty());
}

TEST(CurveTest, SingleRowHasZeroStderr) {
  const auto plot = AggregateCurve({{"a2c", 1.0, 3, 1.2, 0.4, 0.1, 0.1}}, {});
  ASSERT_EQ(plot.size(), 1u);
  EXPECT_EQ(plot[0].seeds, 1);
  EXPECT_EQ(plot[0].stderr_leakage, 0.0);
  EXPECT_EQ(plot[0].stderr_distortion, 0.0);
  EXPECT_EQ(plot[0].avg_distortion, 1.2);
}

TEST(CurveTest, ThreeSeedAggregationMatchesHandArithmetic) {
  const std::vector<CurveRow> rows = {{"a2c", 2.0, 1, 1.0, 0.3, 0, 0},
                                      {"a2c", 2.0, 2, 2.0, 0.6, 0, 0},
                                      {"a2c", 2.0, 3, 3.0, 0.9, 0, 0}};
  const auto plot = AggregateCurve(rows, {"a2c"});
  ASSERT_EQ(plot.size(), 1u);
  EXPECT_DOUBLE_EQ(plot[0].avg_distortion, 2.0);
  EXPECT_DOUBLE_EQ(plot[0].avg_leakage_bits, 0.6);
  // Sample sd 1 and 0.3, divided by sqrt(3).
  EXPECT_NEAR(plot[0].stderr_distortion, 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(plot[0].stderr_leakage, 0.3 / std::sqrt(3.0), 1e-15);
}

TEST(CurveTest, SortedByDistortionAndFiltered) {
  const std::vector<CurveRow> rows = {{"a2c", 0.0, 1, 2.5, 0.0, 0, 0},
                                      {"a2c", 5.0, 1, 0.2, 2.0, 0, 0},
                                      {"a2c", 1.0, 1, 1.7, 0.1, 0, 0},
                                      {"myopic", 1.0, 1, 1.0, 0.5, 0, 0}};
  const auto plot = AggregateCurve(rows, {"a2c"});
  ASSERT_EQ(plot.size(), 3u);
  for (size_t i = 1; i < plot.size(); ++i) {
    EXPECT_LE(plot[i - 1].avg_distortion, plot[i].avg_distortion);
  }
  EXPECT_EQ(AggregateCurve(rows, {}).size(), 4u);
  EXPECT_THROW(AggregateCurve(rows, {"ppo"}), ConfigError);
  EXPECT_THROW(AggregateCurve({}, {}), ConfigError);
}

TEST(FrontierTest, InterpolatesLinearly) {
  const Frontier f({{2.0, 0.0}, {0.0, 3.0}, {1.0, 1.0}});
  EXPECT_EQ(f.min_distortion(), 0.0);
  EXPECT_EQ(f.max_distortion(), 2.0);
  EXPECT_DOUBLE_EQ(f.LeakageAt(0.5), 2.0);
  EXPECT_DOUBLE_EQ(f.LeakageAt(1.0), 1.0);
  EXPECT_DOUBLE_EQ(f.LeakageAt(1.5), 0.5);
  EXPECT_THROW(f.LeakageAt(2.1), DomainError);
  const Frontier ties({{1.0, 1.0}, {1.0, 3.0}});
  EXPECT_DOUBLE_EQ(ties.LeakageAt(1.0), 2.0);
}

TEST(FrontierTest, ComparesOverTheCommonRange) {
  const Frontier a({{0.5, 2.0}, {1.5, 0.5}, {3.0, 0.0}});
  const Frontier b({{0.0, 3.0}, {1.0, 1.0}, {2.0, 0.0}});
  const FrontierGap g = CompareFrontiers(a, b);
  EXPECT_EQ(g.lo, 0.5);
  EXPECT_EQ(g.hi, 2.0);
  // Checked at 0.5, 1.0, 1.5 and 2.0.
  EXPECT_EQ(g.checked, 4);
  // a(1.0) = 1.25 vs b(1.0) = 1.0; a(1.5) = 0.5 vs 0.5; a(2) = 1/3 vs 0.
  EXPECT_NEAR(g.worst_excess, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(g.at, 2.0);
  EXPECT_NEAR(g.worst_abs, 1.0 / 3.0, 1e-15);
  EXPECT_THROW(CompareFrontiers(Frontier({{0.0, 1.0}}), Frontier({{1.0, 1.0}})),
               DomainError);
}

TEST(RunExperimentTest, MyopicZeroLambdaOnUniformWorld) {
  TempDir dir;
  ExperimentConfig cfg = TinyConfig(dir.path());
  cfg.methods = {"myopic"};
  cfg.myopic_lambdas = {0.0};
  RunExperiment(cfg, false);
  const auto rows = ReadResults(dir.path() / "results.csv");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].method, "myopic");
  EXPECT_NEAR(rows[0].avg_leakage_bits, 0.0, 1e-12);
}

TEST(RunExperimentTest, TwoSeedsGiveTwoRowsPerLambda) {
  TempDir dir;
  ExperimentConfig cfg = TinyConfig(dir.path());
  cfg.seeds = {1, 2};
  const auto outcomes = RunExperiment(cfg, false);
  EXPECT_EQ(outcomes.size(), 8u);
  const auto rows = ReadResults(dir.path() / "results.csv");
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) {
    EXPECT_GE(r.avg_distortion, 0.0);
    EXPECT_GE(r.avg_leakage_bits, 0.0);
  }
  EXPECT_TRUE(fs::exists(dir.path() / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir.path() / "timestamps.json"));
  EXPECT_TRUE(fs::exists(dir.path() / "checkpoints" / "a2c_lambda1_seed2_actor.json"));
  EXPECT_TRUE(fs::exists(dir.path() / "checkpoints" / "a2c_lambda1_seed2_train.json"));
  EXPECT_TRUE(fs::exists(dir.path() / "curves" / "a2c_lambda0_seed1.csv"));
  const std::string manifest = ReadAll(dir.path() / "manifest.json");
  EXPECT_NE(manifest.find(LOCPRIV_VERSION), std::string::npos);
  EXPECT_EQ(manifest.find("started"), std::string::npos);
}

TEST(RunExperimentTest, ExistingCellsAreSkippedUnlessForced) {
  TempDir dir;
  const ExperimentConfig cfg = TinyConfig(dir.path());
  RunExperiment(cfg, false);
  const std::string first = ReadAll(dir.path() / "results.csv");
  const auto again = RunExperiment(cfg, false);
  for (const auto& c : again) EXPECT_TRUE(c.skipped);
  EXPECT_EQ(ReadAll(dir.path() / "results.csv"), first);

  // A hand-edited row survives a plain rerun and is replaced by --force.
  auto rows = ReadResults(dir.path() / "results.csv");
  rows[0].avg_distortion = 99.0;
  WriteResults(dir.path() / "results.csv", rows);
  RunExperiment(cfg, false);
  EXPECT_EQ(ReadResults(dir.path() / "results.csv")[0].avg_distortion, 99.0);
  const auto forced = RunExperiment(cfg, true);
  for (const auto& c : forced) EXPECT_FALSE(c.skipped);
  EXPECT_EQ(ReadAll(dir.path() / "results.csv"), first);
}

TEST(RunExperimentTest, RerunsAreByteIdentical) {
  TempDir a, b;
  ExperimentConfig cfg = TinyConfig(a.path());
  cfg.seeds = {5, 6};
  RunExperiment(cfg, false);
  ExperimentConfig other = cfg;
  other.out = b.path().string();
  RunExperiment(other, false);
  EXPECT_EQ(ReadAll(a.path() / "results.csv"), ReadAll(b.path() / "results.csv"));
  EXPECT_EQ(ReadAll(a.path() / "checkpoints" / "a2c_lambda1_seed6_actor.json"),
            ReadAll(b.path() / "checkpoints" / "a2c_lambda1_seed6_actor.json"));
}

TEST(RunExperimentTest, CellsAreReproducibleInIsolation) {
  TempDir all, one;
  ExperimentConfig cfg = TinyConfig(all.path());
  cfg.seeds = {1, 2, 3};
  RunExperiment(cfg, false);
  ExperimentConfig single = cfg;
  single.out = one.path().string();
  single.lambdas = {1.0};
  single.myopic_lambdas = {2.0};
  single.seeds = {2};
  RunExperiment(single, false);
  const auto full = ReadResults(all.path() / "results.csv");
  for (const auto& r : ReadResults(one.path() / "results.csv")) {
    bool found = false;
    for (const auto& f : full) {
      if (f.method == r.method && f.lambda == r.lambda && f.seed == r.seed) {
        found = true;
        EXPECT_EQ(RowsToCsv({f}), RowsToCsv({r}));
      }
    }
    EXPECT_TRUE(found) << r.method;
  }
}

TEST(RunExperimentTest, InvalidConfigIsRejectedBeforeAnyWork) {
  TempDir dir;
  ExperimentConfig cfg = TinyConfig(dir.path());
  cfg.world = "q7";
  EXPECT_THROW(RunExperiment(cfg, false), ConfigError);
  EXPECT_FALSE(fs::exists(dir.path() / "results.csv"));
}

}  // namespace
}  // namespace locpriv
