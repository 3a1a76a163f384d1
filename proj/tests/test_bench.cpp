#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "poolkit/bench.hpp"

using namespace poolkit;

namespace {

const std::string kData = POOLKIT_DATA_DIR;

RunRecord sample_record() {
  RunRecord r;
  r.instance = "Haverly3";
  r.method = "F3:S+Vab(x,r)";
  r.obbt = true;
  r.prep_seconds = 0.1;
  r.solve_seconds = 1.0 / 3.0;
  r.objective = -875.0000000000001;
  r.dual_bound = -kInf;
  r.gap_percent = kUndefinedGap;
  r.gap_kind = GapKind::kP;
  r.status = "time-limit";
  r.message = "says \"hi\", twice";
  return r;
}

}  // namespace

TEST(Gap, Examples) {
  EXPECT_NEAR(compute_gap(-400.0, -500.0), 25.0, 1e-12);
  EXPECT_NEAR(compute_gap(-550.0, -853.49), 55.18, 0.005);
  EXPECT_NEAR(compute_gap(-600.0, -1000.0), 66.67, 0.005);
  EXPECT_DOUBLE_EQ(compute_gap(-400.0, -400.0), 0.0);
  EXPECT_TRUE(std::isnan(compute_gap(0.0, -1.0)));
}

TEST(Csv, EmptyGridGivesHeaderOnly) {
  GridConfig cfg;
  cfg.instances = {kData + "/instances/haverly1.json"};
  const auto recs = run_grid(cfg);
  EXPECT_TRUE(recs.empty());
  const std::string csv = records_to_csv(recs);
  EXPECT_EQ(csv.rfind("instance,method,obbt,", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
  EXPECT_TRUE(records_from_csv(csv).empty());
}

TEST(Csv, RoundTripIsBitExact) {
  std::vector<RunRecord> recs{sample_record()};
  RunRecord b = sample_record();
  b.method = "M2:T:H=3";
  b.obbt = false;
  b.objective = 0.1 + 0.2;
  b.dual_bound = -600.0000000000002;
  b.gap_percent = 1e-17;
  b.gap_kind = GapKind::kD;
  b.message.clear();
  recs.push_back(b);
  const auto back = records_from_csv(records_to_csv(recs));
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) EXPECT_TRUE(same_record(back[k], recs[k])) << k;
}

TEST(Csv, RejectsWrongHeader) {
  EXPECT_ANY_THROW(records_from_csv("a,b\n1,2\n"));
}

TEST(Summary, MeansSkipUndefinedGaps) {
  std::vector<RunRecord> recs(3, sample_record());
  recs[0].gap_percent = 10.0;
  recs[0].solve_seconds = 1.0;
  recs[1].gap_percent = 20.0;
  recs[1].solve_seconds = 3.0;
  const auto rows = summarize(recs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].count, 2);
  EXPECT_DOUBLE_EQ(rows[0].mean_gap, 15.0);
  EXPECT_DOUBLE_EQ(rows[0].mean_seconds, 2.0);
}

TEST(Grid, HaverlySourceRelaxations) {
  GridConfig cfg;
  for (int k = 1; k <= 3; ++k)
    cfg.instances.push_back(kData + "/instances/haverly" + std::to_string(k) + ".json");
  cfg.methods = {"F1:S", "F2:S", "F3:S", "F4:S"};
  cfg.threads = 3;
  const auto recs = run_grid(cfg);
  ASSERT_EQ(recs.size(), 12u);
  const double gaps[] = {25.00, 66.67, 16.67};
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const RunRecord& r = recs[k];
    EXPECT_EQ(r.instance, "Haverly" + std::to_string(k / 4 + 1));
    EXPECT_EQ(r.method, cfg.methods[k % 4]);
    EXPECT_EQ(r.gap_kind, GapKind::kD);
    EXPECT_NEAR(r.gap_percent, gaps[k / 4], 0.05);
  }
}

TEST(Grid, ErrorsAreRecordedNotThrown) {
  GridConfig cfg;
  cfg.instances = {kData + "/instances/haverly1.json", kData + "/instances/missing.json"};
  cfg.methods = {"F1:S", "F9:S"};
  const auto recs = run_grid(cfg);
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_FALSE(recs[0].errored());
  EXPECT_TRUE(recs[1].errored());
  EXPECT_TRUE(recs[2].errored());
  EXPECT_TRUE(recs[3].errored());
  EXPECT_FALSE(recs[1].message.empty());
}

TEST(Grid, RestrictionsReportPrimalGap) {
  GridConfig cfg;
  cfg.instances = {kData + "/instances/haverly1.json"};
  cfg.methods = {"G2:T:H=3", "EXACT:T"};
  const auto recs = run_grid(cfg);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].gap_kind, GapKind::kP);
  EXPECT_NEAR(recs[0].gap_percent, 0.0, 0.1);
  EXPECT_EQ(recs[1].gap_kind, GapKind::kO);
  EXPECT_NEAR(recs[1].objective, -400.0, 0.04);
}

TEST(Grid, ObbtCacheIsReused) {
  const auto dir = std::filesystem::temp_directory_path() / "poolkit-cache-test";
  std::filesystem::remove_all(dir);
  GridConfig cfg;
  cfg.instances = {kData + "/instances/haverly2.json"};
  cfg.methods = {"F1:S"};
  cfg.obbt = {true};
  cfg.bounds_cache = dir.string();
  const auto first = run_grid(cfg);
  ASSERT_EQ(first.size(), 1u);
  EXPECT_NEAR(first[0].gap_percent, 0.0, 0.05);
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.is_regular_file();
  EXPECT_EQ(files, 1u);
  const auto second = run_grid(cfg);
  EXPECT_EQ(second[0].objective, first[0].objective);
  std::filesystem::remove_all(dir);
}

TEST(Instances, ListedSortedByName) {
  const auto files = list_instances(kData + "/instances");
  ASSERT_GE(files.size(), 3u);
  EXPECT_TRUE(std::is_sorted(files.begin(), files.end()));
}
