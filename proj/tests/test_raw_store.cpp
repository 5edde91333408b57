#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "tilescope/error.hpp"
#include "tilescope/raw_store.hpp"

using namespace tilescope;
using tilescope::testing::TempDir;
using tilescope::testing::write_file;

namespace {

std::vector<ObjectRecord> scan_all(const DatasetDescriptor& d, std::vector<std::size_t> wanted,
                                   ScanOptions opts = {}, ScanResult* out = nullptr) {
  std::vector<ObjectRecord> recs;
  ScanResult r = scan(d, wanted, [&](const ObjectRecord& rec) { recs.push_back(rec); }, opts);
  if (out) *out = r;
  return recs;
}

}  // namespace

TEST(Scan, TwoRowFileOffsets) {
  TempDir dir;
  auto d = DatasetDescriptor::from_header(write_file(dir / "a.csv", "x,y\n1,2\n3,4\n"));
  auto recs = scan_all(d, {0, 1});
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].offset, 4u);
  EXPECT_EQ(recs[1].offset, 8u);
  EXPECT_EQ(recs[0].x, 1.0);
  EXPECT_EQ(recs[0].y, 2.0);
  EXPECT_EQ(recs[1].x, 3.0);
  EXPECT_EQ(recs[1].y, 4.0);
}

TEST(Scan, HeaderOnlyYieldsNothing) {
  TempDir dir;
  auto d = DatasetDescriptor::from_header(write_file(dir / "a.csv", "x,y\n"));
  ScanResult r;
  EXPECT_TRUE(scan_all(d, {}, {}, &r).empty());
  EXPECT_EQ(r.records, 0u);
}

TEST(Scan, LenientSkipsMalformedRow) {
  TempDir dir;
  auto d = DatasetDescriptor::from_header(write_file(dir / "a.csv", "x,y,v\n1,2,3\na,b,4\n5,6,7\n"));
  ScanResult r;
  auto recs = scan_all(d, {2}, {}, &r);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(r.records, 2u);
  EXPECT_EQ(r.rejected, 1u);
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].offset, 12u);
  EXPECT_EQ(recs[1].values[0], 7.0);
}

TEST(Scan, StrictModeThrowsWithPosition) {
  TempDir dir;
  auto d = DatasetDescriptor::from_header(write_file(dir / "a.csv", "x,y\n1,2\n1,zz\n"));
  ScanOptions strict;
  strict.strict = true;
  try {
    scan_all(d, {}, strict);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 8u);
  }
}

TEST(Scan, HandlesBomCrlfBlankLinesAndMissingNewline) {
  TempDir dir;
  auto d = DatasetDescriptor::from_header(write_file(dir / "a.csv", "\xEF\xBB\xBFx,y\r\n1,2\r\n\r\n3,4"));
  EXPECT_EQ(d.attributes[0].name, "x");
  auto recs = scan_all(d, {1});
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].values[0], 4.0);

  RawReader reader(d);
  IoCounter io;
  std::vector<std::uint64_t> offs{recs[0].offset, recs[1].offset};
  std::vector<std::size_t> wanted{0, 1};
  auto t = reader.read_objects(offs, wanted, io);
  EXPECT_EQ(t.row_vector(1), (std::vector<double>{3, 4}));
}

TEST(Scan, RejectsNonFiniteValues) {
  TempDir dir;
  auto d = DatasetDescriptor::from_header(write_file(dir / "a.csv", "x,y\n1,2\ninf,2\n1,nan\n"));
  ScanResult r;
  EXPECT_EQ(scan_all(d, {}, {}, &r).size(), 1u);
  EXPECT_EQ(r.rejected, 2u);
}

TEST(Scan, MissingFileIsNotFound) {
  DatasetDescriptor d;
  d.file_path = "/nonexistent/file.csv";
  d.attributes = {{"x"}, {"y"}};
  EXPECT_THROW(scan_all(d, {}), NotFound);
  EXPECT_THROW(RawReader{d}, NotFound);
}

TEST(ReadObjects, ReadsByOffset) {
  TempDir dir;
  auto d = DatasetDescriptor::from_header(write_file(dir / "a.csv", "x,y\n1,2\n3,4\n"));
  IoCounter io;
  std::vector<std::uint64_t> offs{4, 8};
  std::vector<std::size_t> wanted{0, 1};
  auto t = read_objects(d, offs, wanted, io);
  ASSERT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.row_vector(0), (std::vector<double>{1, 2}));
  EXPECT_EQ(t.row_vector(1), (std::vector<double>{3, 4}));
  EXPECT_EQ(io.reads(), 2u);
}

TEST(ReadObjects, EmptyOffsets) {
  TempDir dir;
  auto d = DatasetDescriptor::from_header(write_file(dir / "a.csv", "x,y\n1,2\n3,4\n"));
  IoCounter io;
  std::vector<std::size_t> wanted{0};
  auto t = read_objects(d, {}, wanted, io);
  EXPECT_EQ(t.rows(), 0u);
  EXPECT_EQ(io.reads(), 0u);
}

TEST(ReadObjects, RejectsBadOffsets) {
  TempDir dir;
  auto d = DatasetDescriptor::from_header(write_file(dir / "a.csv", "x,y\n1,2\n3,4\n"));
  IoCounter io;
  std::vector<std::size_t> wanted{0};
  std::vector<std::uint64_t> unsorted{8, 4};
  EXPECT_THROW(read_objects(d, unsorted, wanted, io), InvalidArgument);
  std::vector<std::uint64_t> mid_row{5};
  EXPECT_THROW(read_objects(d, mid_row, wanted, io), ParseError);
  std::vector<std::uint64_t> past_end{100};
  EXPECT_THROW(read_objects(d, past_end, wanted, io), ParseError);
}

TEST(ReadObjects, DuplicateWantedColumns) {
  TempDir dir;
  auto d = DatasetDescriptor::from_header(write_file(dir / "a.csv", "x,y,v\n1,2,3\n"));
  IoCounter io;
  std::vector<std::uint64_t> offs{6};
  std::vector<std::size_t> wanted{2, 0, 2};
  EXPECT_EQ(read_objects(d, offs, wanted, io).row_vector(0), (std::vector<double>{3, 1, 3}));
}

TEST(ReadObjects, RandomRowsMatchSequentialScan) {
  TempDir dir;
  auto path = dir / "g.csv";
  tilescope::testing::write_uniform_csv(path, 5000, 6, 11);
  auto d = DatasetDescriptor::from_header(path);
  std::vector<std::size_t> wanted{5, 2, 3};
  auto recs = scan_all(d, wanted);
  ASSERT_EQ(recs.size(), 5000u);

  std::mt19937_64 rng(3);
  std::vector<std::size_t> pick(recs.size());
  std::iota(pick.begin(), pick.end(), 0);
  std::shuffle(pick.begin(), pick.end(), rng);
  pick.resize(1000);
  std::sort(pick.begin(), pick.end());
  std::vector<std::uint64_t> offs;
  for (auto i : pick) offs.push_back(recs[i].offset);

  RawReader reader(d);
  std::uint64_t last_pos = 0;
  bool backwards = false;
  reader.set_access_probe([&](std::uint64_t pos, std::size_t) {
    if (pos < last_pos) backwards = true;
    last_pos = pos;
  });
  IoCounter io;
  auto t = reader.read_objects(offs, wanted, io);
  EXPECT_EQ(io.reads(), 1000u);
  EXPECT_FALSE(backwards);
  for (std::size_t k = 0; k < pick.size(); ++k) EXPECT_EQ(t.row_vector(k), recs[pick[k]].values) << "row " << k;
}

TEST(Descriptor, Validation) {
  DatasetDescriptor d;
  d.attributes = {{"x"}, {"y"}, {"name", AttributeKind::Other}};
  EXPECT_NO_THROW(d.validate());
  d.axis_y = 0;
  EXPECT_THROW(d.validate(), InvalidArgument);
  d.axis_y = 2;
  EXPECT_THROW(d.validate(), InvalidArgument);
  d.axis_y = 7;
  EXPECT_THROW(d.validate(), InvalidArgument);
  d.axis_y = 1;
  d.attributes.push_back({"x"});
  EXPECT_THROW(d.validate(), InvalidArgument);
}

TEST(Descriptor, NonNumericColumnIsNotParsed) {
  TempDir dir;
  DatasetDescriptor d;
  d.file_path = write_file(dir / "a.csv", "x,y,label\n1,2,hello\n");
  d.attributes = {{"x"}, {"y"}, {"label", AttributeKind::Other}};
  EXPECT_EQ(scan_all(d, {}).size(), 1u);
  std::vector<std::size_t> bad{2};
  EXPECT_THROW(scan_all(d, bad), InvalidArgument);
}
