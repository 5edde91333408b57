#include "tilescope/raw_store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <unordered_set>

#include "tilescope/error.hpp"

namespace tilescope {

namespace {

constexpr std::string_view kBom = "\xEF\xBB\xBF";
constexpr std::size_t kScanChunk = 1 << 20;
constexpr std::size_t kReadChunk = 4096;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

// Splits a row and parses the numeric columns that matter. Columns mapped to
// a slot land in out[slot]; axis columns land in x/y when requested.
class RowParser {
 public:
  RowParser(const DatasetDescriptor& dataset, std::span<const std::size_t> wanted, bool with_axes,
            bool validate_all)
      : delimiter_(dataset.delimiter),
        columns_(dataset.attributes.size()),
        slot_(columns_, -1),
        check_(columns_, 0),
        axis_x_(with_axes ? static_cast<long>(dataset.axis_x) : -1),
        axis_y_(with_axes ? static_cast<long>(dataset.axis_y) : -1) {
    for (std::size_t i = 0; i < wanted.size(); ++i) {
      if (wanted[i] >= columns_) throw InvalidArgument("unknown attribute index " + std::to_string(wanted[i]));
      if (!dataset.is_numeric(wanted[i]))
        throw InvalidArgument("attribute '" + dataset.attributes[wanted[i]].name + "' is not numeric");
      slot_[wanted[i]] = static_cast<int>(i);
      check_[wanted[i]] = 1;
    }
    for (std::size_t c = 0; c < columns_; ++c) {
      if (validate_all && dataset.is_numeric(c)) check_[c] = 1;
    }
    if (with_axes) check_[dataset.axis_x] = check_[dataset.axis_y] = 1;
    // Duplicate entries in wanted: every slot must still be filled.
    for (std::size_t i = 0; i < wanted.size(); ++i) {
      if (slot_[wanted[i]] != static_cast<int>(i)) duplicates_.emplace_back(i, slot_[wanted[i]]);
    }
  }

  // Returns an empty string on success, a diagnostic otherwise.
  std::string parse(std::string_view line, double* out, double* x, double* y) const {
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t stop = line.find(delimiter_, start);
      std::string_view field = line.substr(start, stop == std::string_view::npos ? std::string_view::npos : stop - start);
      if (col >= columns_) return "expected " + std::to_string(columns_) + " fields, got more";
      if (check_[col]) {
        double v = 0.0;
        if (!parse_double(field, v)) {
          return "non-numeric value '" + std::string(field.substr(0, 32)) + "' in column " + std::to_string(col);
        }
        if (slot_[col] >= 0) out[slot_[col]] = v;
        if (static_cast<long>(col) == axis_x_) *x = v;
        if (static_cast<long>(col) == axis_y_) *y = v;
      }
      ++col;
      if (stop == std::string_view::npos) break;
      start = stop + 1;
    }
    if (col != columns_) return "expected " + std::to_string(columns_) + " fields, got " + std::to_string(col);
    for (auto [dst, src] : duplicates_) out[dst] = out[src];
    return {};
  }

 private:
  char delimiter_;
  std::size_t columns_;
  std::vector<int> slot_;
  std::vector<char> check_;
  long axis_x_;
  long axis_y_;
  std::vector<std::pair<std::size_t, int>> duplicates_;
};

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw NotFound("cannot open " + path.string());
  return f;
}

}  // namespace

void DatasetDescriptor::validate() const {
  if (attributes.empty()) throw InvalidArgument("dataset has no attributes");
  if (delimiter == '\n' || delimiter == '\r' || delimiter == '"') throw InvalidArgument("invalid delimiter");
  std::unordered_set<std::string> names;
  for (const auto& a : attributes) {
    if (!names.insert(a.name).second) throw InvalidArgument("duplicate attribute name '" + a.name + "'");
  }
  if (axis_x >= attributes.size() || axis_y >= attributes.size()) throw InvalidArgument("axis attribute out of range");
  if (axis_x == axis_y) throw InvalidArgument("axis_x and axis_y must differ");
  if (!is_numeric(axis_x) || !is_numeric(axis_y)) throw InvalidArgument("axis attributes must be numeric");
}

std::optional<std::size_t> DatasetDescriptor::find(std::string_view name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].name == name) return i;
  }
  return std::nullopt;
}

DatasetDescriptor DatasetDescriptor::from_header(const std::filesystem::path& path, char delimiter,
                                                 std::size_t axis_x, std::size_t axis_y) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  if (header.starts_with(kBom)) header.erase(0, kBom.size());
  if (!header.empty() && header.back() == '\r') header.pop_back();
  DatasetDescriptor d;
  d.file_path = path;
  d.delimiter = delimiter;
  d.axis_x = axis_x;
  d.axis_y = axis_y;
  std::size_t start = 0;
  while (true) {
    std::size_t stop = header.find(delimiter, start);
    d.attributes.push_back({std::string(trim(std::string_view(header).substr(start, stop - start))),
                            AttributeKind::Numeric});
    if (stop == std::string::npos) break;
    start = stop + 1;
  }
  d.validate();
  return d;
}

ScanResult scan(const DatasetDescriptor& dataset, std::span<const std::size_t> wanted,
                const std::function<void(const ObjectRecord&)>& sink, const ScanOptions& options) {
  dataset.validate();
  RowParser parser(dataset, wanted, /*with_axes=*/true, /*validate_all=*/true);
  FilePtr file = open_or_throw(dataset.file_path);

  ScanResult result;
  ObjectRecord record;
  record.values.resize(wanted.size());

  std::vector<char> buf(kScanChunk);
  std::size_t filled = 0;
  std::uint64_t base = 0;  // file offset of buf[0]
  std::uint64_t line_no = 0;
  bool first_chunk = true;
  bool header_pending = dataset.has_header;
  bool eof = false;

  auto reject = [&](std::uint64_t offset, std::string message) {
    if (options.strict) throw ParseError("line " + std::to_string(line_no) + ": " + message, line_no, offset);
    ++result.rejected;
    if (result.diagnostics.size() < options.max_diagnostics) {
      result.diagnostics.push_back({line_no, offset, std::move(message)});
    }
  };

  auto handle_line = [&](std::string_view line, std::uint64_t offset) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (header_pending) {
      header_pending = false;
      return;
    }
    if (trim(line).empty()) return;
    if (options.strict && line.find('"') != std::string_view::npos) {
      reject(offset, "quoted fields are not supported");
      return;
    }
    std::string err = parser.parse(line, record.values.data(), &record.x, &record.y);
    if (!err.empty()) {
      reject(offset, std::move(err));
      return;
    }
    record.offset = offset;
    ++result.records;
    sink(record);
  };

  while (!eof) {
    if (filled == buf.size()) buf.resize(buf.size() * 2);  // a single line longer than the buffer
    std::size_t got = std::fread(buf.data() + filled, 1, buf.size() - filled, file.get());
    if (got == 0) {
      if (std::ferror(file.get())) throw IoError("read failed on " + dataset.file_path.string());
      eof = true;
    }
    filled += got;
    std::size_t pos = 0;
    if (first_chunk && (filled >= kBom.size() || eof)) {
      first_chunk = false;
      if (std::string_view(buf.data(), std::min(filled, kBom.size())) == kBom) pos = kBom.size();
    }
    while (pos < filled) {
      const void* nl = std::memchr(buf.data() + pos, '\n', filled - pos);
      if (nl == nullptr) {
        if (!eof) break;
        handle_line(std::string_view(buf.data() + pos, filled - pos), base + pos);
        pos = filled;
        break;
      }
      std::size_t end = static_cast<const char*>(nl) - buf.data();
      handle_line(std::string_view(buf.data() + pos, end - pos), base + pos);
      pos = end + 1;
    }
    std::memmove(buf.data(), buf.data() + pos, filled - pos);
    filled -= pos;
    base += pos;
  }
  result.bytes = base + filled;
  return result;
}

RawReader::RawReader(DatasetDescriptor dataset) : dataset_(std::move(dataset)) {
  dataset_.validate();
  fd_ = ::open(dataset_.file_path.c_str(), O_RDONLY);
  if (fd_ < 0) throw NotFound("cannot open " + dataset_.file_path.string());
  struct stat st {};
  if (::fstat(fd_, &st) != 0) {
    ::close(fd_);
    throw IoError("cannot stat " + dataset_.file_path.string());
  }
  file_size_ = static_cast<std::uint64_t>(st.st_size);

  std::uint64_t pos = 0;
  std::size_t want = kReadChunk;
  while (true) {
    fill(0, want);
    std::string_view view(buffer_.data(), buffer_len_);
    pos = view.starts_with(kBom) ? kBom.size() : 0;
    if (!dataset_.has_header) break;
    std::size_t nl = view.find('\n', pos);
    if (nl != std::string_view::npos) {
      pos = nl + 1;
      break;
    }
    if (buffer_len_ < want) {  // header without trailing newline: no data rows
      pos = buffer_len_;
      break;
    }
    want *= 2;
  }
  data_start_ = pos;
  buffer_len_ = 0;
}

RawReader::~RawReader() {
  if (fd_ >= 0) ::close(fd_);
}

RawReader::RawReader(RawReader&& other) noexcept
    : dataset_(std::move(other.dataset_)),
      fd_(std::exchange(other.fd_, -1)),
      file_size_(other.file_size_),
      data_start_(other.data_start_),
      buffer_(std::move(other.buffer_)),
      buffer_pos_(other.buffer_pos_),
      buffer_len_(other.buffer_len_),
      probe_(std::move(other.probe_)) {}

RawReader& RawReader::operator=(RawReader&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    dataset_ = std::move(other.dataset_);
    fd_ = std::exchange(other.fd_, -1);
    file_size_ = other.file_size_;
    data_start_ = other.data_start_;
    buffer_ = std::move(other.buffer_);
    buffer_pos_ = other.buffer_pos_;
    buffer_len_ = other.buffer_len_;
    probe_ = std::move(other.probe_);
  }
  return *this;
}

bool RawReader::fill(std::uint64_t position, std::size_t length) {
  if (buffer_.size() < length) buffer_.resize(length);
  std::size_t total = 0;
  while (total < length) {
    ssize_t got = ::pread(fd_, buffer_.data() + total, length - total, static_cast<off_t>(position + total));
    if (got < 0) {
      if (errno == EINTR) continue;
      throw IoError("pread failed on " + dataset_.file_path.string() + ": " + std::strerror(errno));
    }
    if (got == 0) break;
    total += static_cast<std::size_t>(got);
  }
  if (probe_) probe_(position, total);
  buffer_pos_ = position;
  buffer_len_ = total;
  return total == length;
}

ValueTable RawReader::read_objects(std::span<const std::uint64_t> offsets, std::span<const std::size_t> wanted,
                                   IoCounter& counter) {
  if (!std::is_sorted(offsets.begin(), offsets.end())) throw InvalidArgument("offsets must be ascending");
  RowParser parser(dataset_, wanted, /*with_axes=*/false, /*validate_all=*/false);
  ValueTable table(offsets.size(), wanted.size());

  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const std::uint64_t offset = offsets[i];
    auto not_a_row = [&] {
      return ParseError("offset " + std::to_string(offset) + " is not a row start", 0, offset);
    };
    if (offset < data_start_ || offset >= file_size_) throw not_a_row();
    const std::uint64_t from = offset == 0 ? 0 : offset - 1;

    // Find the row end, refilling forward from `from` when the cached window
    // does not hold the whole row.
    std::size_t want = kReadChunk;
    std::size_t line_end = 0;
    while (true) {
      bool covered = buffer_len_ > 0 && from >= buffer_pos_ && offset < buffer_pos_ + buffer_len_;
      if (covered) {
        std::size_t begin = static_cast<std::size_t>(offset - buffer_pos_);
        const void* nl = std::memchr(buffer_.data() + begin, '\n', buffer_len_ - begin);
        bool at_eof = buffer_pos_ + buffer_len_ >= file_size_;
        if (nl != nullptr || at_eof) {
          line_end = nl != nullptr ? static_cast<const char*>(nl) - buffer_.data() : buffer_len_;
          break;
        }
        if (buffer_pos_ == from) want = std::max(want, buffer_len_ * 2);
      }
      fill(from, want);
    }

    std::size_t begin = static_cast<std::size_t>(offset - buffer_pos_);
    if (offset != data_start_ && buffer_[begin - 1] != '\n') throw not_a_row();
    std::string_view line(buffer_.data() + begin, line_end - begin);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::string err = parser.parse(line, table.row(i).data(), nullptr, nullptr);
    if (!err.empty()) throw ParseError("offset " + std::to_string(offset) + ": " + err, 0, offset);
  }
  counter.add(offsets.size());
  return table;
}

ValueTable read_objects(const DatasetDescriptor& dataset, std::span<const std::uint64_t> offsets,
                        std::span<const std::size_t> wanted, IoCounter& counter) {
  RawReader reader(dataset);
  return reader.read_objects(offsets, wanted, counter);
}

}  // namespace tilescope
