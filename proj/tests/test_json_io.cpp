#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tilescope/error.hpp"
#include "tilescope/json_io.hpp"

using namespace tilescope;
using tilescope::testing::TempDir;
using tilescope::testing::write_file;

TEST(JsonIo, DatasetFromHeaderAndNames) {
  TempDir dir;
  auto path = write_file(dir / "a.csv", "lon,lat,fare\n1,2,3\n");
  auto d = dataset_from_json(Json{{"file_path", path.string()}, {"axis_x", "lon"}, {"axis_y", "lat"}});
  ASSERT_EQ(d.attributes.size(), 3u);
  EXPECT_EQ(d.axis_y, 1u);
  auto back = dataset_from_json(to_json(d));
  EXPECT_EQ(back.attributes.size(), 3u);
  EXPECT_EQ(back.file_path, d.file_path);
  EXPECT_THROW(dataset_from_json(Json{{"file_path", path.string()}, {"axis_x", 1}, {"axis_y", 1}}), InvalidArgument);
  EXPECT_THROW(dataset_from_json(Json{{"delimiter", ","}}), InvalidArgument);
}

TEST(JsonIo, QueryRoundTrip) {
  DatasetDescriptor d;
  d.attributes = {{"x"}, {"y"}, {"v"}};
  Json j = {{"ix", {{"lo", 1}, {"hi", 2}}},
            {"iy", {{"lo", 3}, {"hi", 4}}},
            {"aggregates", {{{"func", "avg"}, {"attribute", "v"}}, {{"func", "count"}}}},
            {"eps_max", 0.02},
            {"gamma", 0.9}};
  auto q = query_from_json(j, d);
  EXPECT_EQ(q.aggs[0].func, AggregateFunc::Mean);
  EXPECT_EQ(q.aggs[0].attribute, 2u);
  EXPECT_EQ(q.aggs[1].func, AggregateFunc::Count);
  auto again = query_from_json(to_json(q), d);
  EXPECT_EQ(again.ix, q.ix);
  EXPECT_EQ(again.aggs, q.aggs);
  EXPECT_EQ(again.gamma, 0.9);

  Json bad = j;
  bad["ix"] = {{"lo", 5}, {"hi", 1}};
  EXPECT_THROW(query_from_json(bad, d), InvalidArgument);
  bad = j;
  bad["aggregates"] = {{{"func", "median"}, {"attribute", 2}}};
  EXPECT_THROW(query_from_json(bad, d), InvalidArgument);
}

TEST(JsonIo, ConfigOverridesArePartial) {
  EngineConfig base;
  base.min_batch = 7;
  auto c = engine_config_from_json(Json{{"initial_rate", 0.1}}, base);
  EXPECT_EQ(c.initial_rate, 0.1);
  EXPECT_EQ(c.min_batch, 7u);
  auto round = engine_config_from_json(to_json(c));
  EXPECT_EQ(round.min_batch, 7u);
  EXPECT_THROW(engine_config_from_json(Json{{"min_batch", "many"}}), InvalidArgument);

  auto i = init_config_from_json(Json{{"grid_x", 10}, {"bounds_x", {{"lo", 0}, {"hi", 5}}}});
  EXPECT_EQ(i.grid_x, 10u);
  EXPECT_EQ(i.grid_y, 100u);
  ASSERT_TRUE(i.bounds_x.has_value());
  EXPECT_EQ(i.bounds_x->hi, 5);
}
