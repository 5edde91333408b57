#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "tilescope/bench.hpp"
#include "tilescope/error.hpp"

using namespace tilescope;
using namespace tilescope::bench;
using tilescope::testing::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::filesystem::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(GenData, RangeAndDeterminism) {
  TempDir dir;
  SynthSpec spec;
  spec.n_objects = 10;
  spec.n_attributes = 3;
  auto stats = gen_data(spec, dir / "a.csv");
  EXPECT_EQ(stats.rows, 10u);
  gen_data(spec, dir / "b.csv");
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_EQ(stats.bytes, slurp(dir / "a.csv").size());

  auto d = synth_descriptor(dir / "a.csv", 3);
  std::size_t n = 0;
  std::vector<std::size_t> all{0, 1, 2};
  scan(d, all, [&](const ObjectRecord& r) {
    ++n;
    for (double v : r.values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1000.0);
    }
  }, ScanOptions{true, 0});
  EXPECT_EQ(n, 10u);
}

TEST(GenData, ColumnMeansConcentrate) {
  TempDir dir;
  SynthSpec spec;
  spec.n_objects = 200000;
  spec.n_attributes = 4;
  gen_data(spec, dir / "m.csv");
  auto d = synth_descriptor(dir / "m.csv", 4);
  std::vector<double> sums(4, 0.0);
  std::vector<std::size_t> all{0, 1, 2, 3};
  scan(d, all, [&](const ObjectRecord& r) {
    for (std::size_t k = 0; k < 4; ++k) sums[k] += r.values[k];
  });
  for (double s : sums) EXPECT_NEAR(s / 200000, 500.0, 3.0);
}

TEST(Workload, FixedHeadingAdvancesExactly) {
  WorkloadSpec w;
  w.n_queries = 20;
  w.width = w.height = 10;
  w.trajectory_bias = 1.0;
  w.heading = 0;
  w.start_x = 100;
  w.start_y = 500;
  auto qs = gen_workload(w, {0, 1000}, {0, 1000});
  ASSERT_EQ(qs.size(), 20u);
  for (std::size_t i = 1; i < qs.size(); ++i) {
    EXPECT_NEAR(qs[i].ix.lo - qs[i - 1].ix.lo, 1.0, 1e-9);
    EXPECT_EQ(qs[i].iy, qs[0].iy);
  }
}

TEST(Workload, OverlapDeterminismAndBorders) {
  WorkloadSpec w;
  w.n_queries = 300;
  auto a = gen_workload(w, {0, 1000}, {0, 1000});
  auto b = gen_workload(w, {0, 1000}, {0, 1000});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].ix, b[i].ix);
    EXPECT_EQ(a[i].iy, b[i].iy);
    EXPECT_GE(a[i].ix.lo, 0.0);
    EXPECT_LE(a[i].ix.hi, 1000.0);
    EXPECT_GE(a[i].iy.lo, 0.0);
    EXPECT_LE(a[i].iy.hi, 1000.0);
    EXPECT_NEAR(a[i].ix.width(), 100.0, 1e-9);
    if (i > 0) {
      const double ox = std::max(0.0, std::min(a[i].ix.hi, a[i - 1].ix.hi) - std::max(a[i].ix.lo, a[i - 1].ix.lo));
      const double oy = std::max(0.0, std::min(a[i].iy.hi, a[i - 1].iy.hi) - std::max(a[i].iy.lo, a[i - 1].iy.lo));
      EXPECT_GE(ox * oy, 0.8 * 100 * 100 - 1e-6);
    }
  }
  w.seed = 8;
  auto c = gen_workload(w, {0, 1000}, {0, 1000});
  EXPECT_NE(c[5].ix, a[5].ix);
  EXPECT_NEAR(window_side_for(1'000'000, 10'000, {0, 1000}), 100.0, 1e-9);
}

TEST(Workload, JsonRoundTrip) {
  WorkloadSpec w;
  w.n_queries = 5;
  auto qs = gen_workload(w, {0, 1000}, {0, 1000});
  auto d = synth_descriptor("unused.csv", 10);
  auto back = workload_from_json(workload_to_json(qs), d);
  ASSERT_EQ(back.size(), 5u);
  EXPECT_EQ(back[3].ix, qs[3].ix);
  EXPECT_EQ(back[3].aggs, qs[3].aggs);
}

TEST(ExactAnswers, MatchesInMemoryScan) {
  TempDir dir;
  auto rows = tilescope::testing::write_uniform_csv(dir / "x.csv", 2000, 4, 3);
  auto d = DatasetDescriptor::from_header(dir / "x.csv");
  ExploratoryQuery q;
  q.ix = {10, 60};
  q.iy = {20, 50};
  q.aggs = {{AggregateFunc::Count, 0}, {AggregateFunc::Sum, 2}, {AggregateFunc::Max, 3}};
  ExploratoryQuery empty = q;
  empty.ix = {200, 300};
  auto ans = exact_answers(d, {q, empty});
  double count = 0, sum = 0, mx = -1;
  for (const auto& r : rows) {
    if (r[0] < 10 || r[0] > 60 || r[1] < 20 || r[1] > 50) continue;
    ++count;
    sum += r[2];
    mx = std::max(mx, r[3]);
  }
  EXPECT_EQ(*ans[0][0], count);
  EXPECT_NEAR(*ans[0][1], sum, 1e-6);
  EXPECT_EQ(*ans[0][2], mx);
  EXPECT_EQ(*ans[1][0], 0.0);
  EXPECT_FALSE(ans[1][2].has_value());
}

class BenchRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    SynthSpec s;
    s.n_objects = 20000;
    s.n_attributes = 4;
    gen_data(s, *dir_ / "s.csv");
    cfg_.dataset = synth_descriptor(*dir_ / "s.csv", 4);
    cfg_.engine.min_batch = 5;
    cfg_.init.grid_x = cfg_.init.grid_y = 20;
    cfg_.eps_values = {0.05, 0.1};
    WorkloadSpec w;
    w.n_queries = 15;
    w.width = w.height = 200;
    workload_ = gen_workload(w, {0, 1000}, {0, 1000});
    exact_ = exact_answers(cfg_.dataset, workload_);
    report_ = run(cfg_, workload_, exact_);
  }
  static void TearDownTestSuite() { delete dir_; }

  static TempDir* dir_;
  static RunConfig cfg_;
  static std::vector<ExploratoryQuery> workload_;
  static std::vector<std::vector<std::optional<double>>> exact_;
  static RunReport report_;
};

TempDir* BenchRun::dir_ = nullptr;
RunConfig BenchRun::cfg_;
std::vector<ExploratoryQuery> BenchRun::workload_;
std::vector<std::vector<std::optional<double>>> BenchRun::exact_;
RunReport BenchRun::report_;

TEST_F(BenchRun, SummaryShape) {
  // VAL once, the two approximate engines once per eps value.
  ASSERT_EQ(report_.summary.size(), 5u);
  for (const auto& s : report_.summary) {
    EXPECT_TRUE(s.error.empty()) << s.error;
    EXPECT_EQ(s.queries, 15u);
  }
  EXPECT_EQ(report_.rows.size(), 5u * 15 * 2);
  const auto& val = report_.summary[0];
  EXPECT_EQ(val.engine, "VAL");
  for (const auto& s : report_.summary) EXPECT_NEAR(s.speedup_vs_exact, val.total_ms / s.total_ms, 1e-9);
}

TEST_F(BenchRun, ExactBaselineIsExact) {
  for (const auto& r : report_.rows) {
    if (r.engine != "VAL") continue;
    EXPECT_EQ(r.eps_actual, 0.0);
    EXPECT_TRUE(r.covered);
    EXPECT_TRUE(r.exact);
  }
}

TEST_F(BenchRun, ReportFiles) {
  auto files = report(report_, dir_->path() / "out");
  ASSERT_EQ(files.size(), 6u);
  EXPECT_EQ(line_count(files[0]), 1 + report_.rows.size());
  EXPECT_EQ(line_count(dir_->path() / "out" / "time_per_query.csv"), 1 + 5u * 15);
  EXPECT_EQ(line_count(dir_->path() / "out" / "total_time_vs_eps.csv"), 1 + 5u);
  auto summary = Json::parse(slurp(dir_->path() / "out" / "summary.json"));
  EXPECT_EQ(summary.size(), 5u);
}

TEST_F(BenchRun, JsonRoundTrip) {
  auto back = run_report_from_json(to_json(report_));
  ASSERT_EQ(back.rows.size(), report_.rows.size());
  EXPECT_EQ(back.rows[7].io_reads, report_.rows[7].io_reads);
  EXPECT_EQ(back.rows[7].value, report_.rows[7].value);
  EXPECT_EQ(back.summary[2].total_io, report_.summary[2].total_io);
  EXPECT_THROW(run_report_from_json(Json{{"rows", 3}}), InvalidArgument);
}

TEST_F(BenchRun, Deterministic) {
  auto again = run(cfg_, workload_, exact_);
  ASSERT_EQ(again.rows.size(), report_.rows.size());
  for (std::size_t i = 0; i < again.rows.size(); ++i) {
    EXPECT_EQ(again.rows[i].io_reads, report_.rows[i].io_reads);
    EXPECT_EQ(again.rows[i].value, report_.rows[i].value);
  }
}

TEST(EngineKinds, Configs) {
  EXPECT_TRUE(engine_config_for(EngineKind::Val, {}).exact_only);
  EXPECT_FALSE(engine_config_for(EngineKind::ValS, {}).reuse_metadata);
  auto a = engine_config_for(EngineKind::ValA, {});
  EXPECT_TRUE(a.reuse_metadata);
  EXPECT_FALSE(a.exact_only);
  EXPECT_EQ(parse_engine_kind("VAL-A"), EngineKind::ValA);
  EXPECT_THROW(parse_engine_kind("VAL-X"), InvalidArgument);
}
