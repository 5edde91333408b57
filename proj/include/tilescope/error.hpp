#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tilescope {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

// Malformed CSV content. line is 1-based (0 when unknown), offset is the
// byte position of the row start when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t line, std::uint64_t offset)
      : Error(what), line_(line), offset_(offset) {}
  std::uint64_t line() const { return line_; }
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t line_;
  std::uint64_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A non-exact stratum reached the estimator with fewer than two samples.
class InsufficientSample : public Error {
 public:
  InsufficientSample(const std::string& what, std::size_t stratum)
      : Error(what), stratum_(stratum) {}
  std::size_t stratum() const { return stratum_; }

 private:
  std::size_t stratum_;
};

class EmptyRegion : public Error {
 public:
  using Error::Error;
};

}  // namespace tilescope
