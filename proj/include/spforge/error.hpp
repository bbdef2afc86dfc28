#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace spforge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter failed validation. `field()` names the offending SpParams member.
class ParamError : public Error {
 public:
  ParamError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Input had the wrong width, length or shape.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A persisted model or data file could not be decoded.
class FormatError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace detail
}  // namespace spforge
