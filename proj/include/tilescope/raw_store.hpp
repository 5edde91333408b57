#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tilescope {

enum class AttributeKind { Numeric, Other };

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::Numeric;
};

// Schema and file identity of a raw CSV file. The two axis attributes span
// the explored 2D space.
struct DatasetDescriptor {
  std::filesystem::path file_path;
  char delimiter = ',';
  bool has_header = true;
  std::vector<Attribute> attributes;
  std::size_t axis_x = 0;
  std::size_t axis_y = 1;

  // Throws InvalidArgument when an invariant is violated. Does not touch the
  // file system.
  void validate() const;

  std::optional<std::size_t> find(std::string_view name) const;
  bool is_numeric(std::size_t attribute) const {
    return attribute < attributes.size() && attributes[attribute].kind == AttributeKind::Numeric;
  }

  // Reads the header line and declares every column numeric.
  static DatasetDescriptor from_header(const std::filesystem::path& path, char delimiter = ',',
                                       std::size_t axis_x = 0, std::size_t axis_y = 1);
};

struct ObjectRecord {
  std::uint64_t offset = 0;
  double x = 0.0;
  double y = 0.0;
  std::vector<double> values;  // one per requested attribute, in request order
};

// Counts objects whose attribute values were fetched from the file. One read
// is one object, no matter how many of its attributes were parsed.
class IoCounter {
 public:
  void add(std::uint64_t n) { reads_ += n; }
  void reset() { reads_ = 0; }
  std::uint64_t reads() const { return reads_; }

 private:
  std::uint64_t reads_ = 0;
};

struct ScanDiagnostic {
  std::uint64_t line = 0;
  std::uint64_t offset = 0;
  std::string message;
};

struct ScanOptions {
  bool strict = false;
  std::size_t max_diagnostics = 64;
};

struct ScanResult {
  std::uint64_t records = 0;
  std::uint64_t rejected = 0;
  std::uint64_t bytes = 0;
  std::vector<ScanDiagnostic> diagnostics;
};

// Sequential parse of the whole file. The sink sees one record per accepted
// data row; the record object is reused between calls.
ScanResult scan(const DatasetDescriptor& dataset, std::span<const std::size_t> wanted,
                const std::function<void(const ObjectRecord&)>& sink, const ScanOptions& options = {});

// Row-major table of values, one row per object and one column per requested
// attribute.
class ValueTable {
 public:
  ValueTable() = default;
  ValueTable(std::size_t rows, std::size_t width) : rows_(rows), width_(width), data_(rows * width) {}

  std::size_t rows() const { return rows_; }
  std::size_t width() const { return width_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * width_, width_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * width_, width_}; }
  std::vector<double> row_vector(std::size_t i) const {
    auto r = row(i);
    return {r.begin(), r.end()};
  }

 private:
  std::size_t rows_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

// Random access to rows by byte offset. Offsets handed to read_objects must be
// ascending; the underlying file is then only ever read forward.
class RawReader {
 public:
  explicit RawReader(DatasetDescriptor dataset);
  ~RawReader();
  RawReader(const RawReader&) = delete;
  RawReader& operator=(const RawReader&) = delete;
  RawReader(RawReader&& other) noexcept;
  RawReader& operator=(RawReader&& other) noexcept;

  ValueTable read_objects(std::span<const std::uint64_t> offsets, std::span<const std::size_t> wanted,
                          IoCounter& counter);

  // Called with (file position, length) for every physical read.
  void set_access_probe(std::function<void(std::uint64_t, std::size_t)> probe) { probe_ = std::move(probe); }

  const DatasetDescriptor& dataset() const { return dataset_; }
  std::uint64_t data_start() const { return data_start_; }

 private:
  bool fill(std::uint64_t position, std::size_t length);

  DatasetDescriptor dataset_;
  int fd_ = -1;
  std::uint64_t file_size_ = 0;
  std::uint64_t data_start_ = 0;
  std::vector<char> buffer_;
  std::uint64_t buffer_pos_ = 0;
  std::size_t buffer_len_ = 0;
  std::function<void(std::uint64_t, std::size_t)> probe_;
};

// Convenience wrapper opening a reader for a single batch.
ValueTable read_objects(const DatasetDescriptor& dataset, std::span<const std::uint64_t> offsets,
                        std::span<const std::size_t> wanted, IoCounter& counter);

}  // namespace tilescope
