#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace octbd {

/// Root of every exception thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration violates its documented invariants.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of an operation (e.g. bit depth 13).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An input does not satisfy an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Two images or matrices that must agree in shape do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Missing, empty or inconsistent data (not-found entries, empty reports).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. Carries the byte offset where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Filesystem failure; the message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace octbd
