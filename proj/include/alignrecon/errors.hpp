#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace alignrecon {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite samples or otherwise malformed data.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Grid shapes that do not match or are too small.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Scalar parameters out of their admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Mask specification that cannot be realized.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

// Iterative routine failed to meet its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed grid file; carries the byte offset where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace alignrecon
