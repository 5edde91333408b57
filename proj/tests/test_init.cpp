#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"
#include "tilescope/error.hpp"
#include "tilescope/init.hpp"

using namespace tilescope;
using tilescope::testing::TempDir;
using tilescope::testing::write_file;

namespace {

ExploratoryQuery window(Interval x, Interval y, std::vector<AggregateSpec> aggs) {
  ExploratoryQuery q;
  q.ix = x;
  q.iy = y;
  q.aggs = std::move(aggs);
  return q;
}

}  // namespace

TEST(Initialize, CornerObjectsOnTwoByTwoGrid) {
  TempDir dir;
  auto d = DatasetDescriptor::from_header(write_file(dir / "c.csv", "x,y,v\n0,0,1\n100,0,2\n0,100,3\n100,100,4\n"));
  InitConfig cfg;
  cfg.grid_x = cfg.grid_y = 2;
  cfg.extra_budget_fraction = 0;
  auto out = initialize(d, window({0, 100}, {0, 100}, {{AggregateFunc::Sum, 2}, {AggregateFunc::Count, 0}}), cfg);
  EXPECT_EQ(out.index.leaf_count(), 4u);
  out.index.for_each_leaf([](const Tile& t) {
    EXPECT_EQ(t.objects.size(), 1u);
    EXPECT_EQ(metadata_status(t, 2), MetadataStatus::Exact);
  });
  ASSERT_EQ(out.first_result.aggregates.size(), 2u);
  const Estimate& sum = *out.first_result.aggregates[0].estimate;
  EXPECT_EQ(sum.value, 10);
  EXPECT_EQ(sum.eps_est, 0);
  EXPECT_EQ(sum.ci_hi - sum.ci_lo, 0);
  EXPECT_EQ(out.first_result.aggregates[1].estimate->value, 4);
  EXPECT_EQ(out.stats.file_passes, 2u);
  EXPECT_TRUE(out.first_result.init.has_value());
}

TEST(Initialize, PerTileCountsMatchBinning) {
  TempDir dir;
  auto path = dir / "u.csv";
  auto rows = tilescope::testing::write_uniform_csv(path, 10000, 4, 21);
  auto d = DatasetDescriptor::from_header(path);
  InitConfig cfg;
  cfg.grid_x = cfg.grid_y = 10;
  cfg.extra_budget_fraction = 0;
  cfg.bounds_x = cfg.bounds_y = Interval{0, 100};
  auto out = initialize(d, window({10, 20}, {10, 20}, {{AggregateFunc::Mean, 3}}), cfg);
  EXPECT_EQ(out.stats.file_passes, 1u);
  EXPECT_EQ(out.stats.objects_scanned, 10000u);

  std::vector<std::size_t> counts(100, 0);
  std::vector<double> sums(100, 0.0);
  for (const auto& r : rows) {
    const auto c = static_cast<std::size_t>(r[0] / 10), w = static_cast<std::size_t>(r[1] / 10);
    ++counts[w * 10 + c];
    sums[w * 10 + c] += r[3];
  }
  for (std::size_t w = 0; w < 10; ++w) {
    for (std::size_t c = 0; c < 10; ++c) {
      const Tile& t = out.index.root(c, w);
      EXPECT_EQ(t.objects.size(), counts[w * 10 + c]);
      EXPECT_NEAR(t.find_metadata(3)->sum, sums[w * 10 + c], 1e-6);
      EXPECT_TRUE(t.bitmap.all());
    }
  }
  EXPECT_EQ(out.index.object_count(), 10000u);
}

TEST(Initialize, ErrorsAndRejections) {
  TempDir dir;
  auto d = DatasetDescriptor::from_header(write_file(dir / "e.csv", "x,y,v\n"));
  auto q = window({0, 1}, {0, 1}, {{AggregateFunc::Count, 0}});
  EXPECT_THROW(initialize(d, q, {}), Error);

  auto d2 = DatasetDescriptor::from_header(write_file(dir / "f.csv", "x,y,v\n1,1,1\n5,5,x\n50,50,3\n"));
  InitConfig cfg;
  cfg.bounds_x = cfg.bounds_y = Interval{0, 10};
  cfg.grid_x = cfg.grid_y = 2;
  auto out = initialize(d2, q, cfg);
  EXPECT_EQ(out.stats.rows_rejected, 2u);  // one malformed, one outside the bounds
  EXPECT_EQ(out.index.object_count(), 1u);

  InitConfig bad;
  bad.grid_x = 0;
  EXPECT_THROW(initialize(d2, q, bad), InvalidArgument);
}

TEST(Refine, Budgets) {
  auto q0 = window({0, 1}, {0, 1}, {{AggregateFunc::Count, 0}});
  TileIndex a({0, 100}, {0, 100}, 10, 10);
  EXPECT_EQ(query_driven_refine(a, q0, 0), 0u);
  EXPECT_EQ(a.leaf_count(), 100u);

  // Q0 [0,1]^2 grown to [-0.5,1.5]^2 touches only the corner tile.
  TileIndex b({0, 100}, {0, 100}, 10, 10);
  EXPECT_EQ(query_driven_refine(b, q0, 3), 3u);
  EXPECT_EQ(b.leaf_count(), 103u);
  EXPECT_EQ(b.root(0, 0).children.size(), 4u);

  auto big = window({400, 600}, {400, 600}, {{AggregateFunc::Count, 0}});
  TileIndex c({0, 1000}, {0, 1000}, 100, 100);
  const std::size_t added = query_driven_refine(c, big, 2000);
  EXPECT_LE(added, 2000u);
  EXPECT_GT(added, 0u);
  EXPECT_EQ(c.tile_count(), 10000u + added * 4 / 3);
  c.for_each_leaf([](const Tile& t) {
    if (t.depth > 0) {
      // Every refined tile descends from a root touching the grown window.
      const double root_x = std::floor(t.ix.lo / 10) * 10, root_y = std::floor(t.iy.lo / 10) * 10;
      EXPECT_LE(root_x, 700.0);
      EXPECT_GE(root_x + 10, 300.0);
      EXPECT_LE(root_y, 700.0);
      EXPECT_GE(root_y + 10, 300.0);
    }
  });
}
