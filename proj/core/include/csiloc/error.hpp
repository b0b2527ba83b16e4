#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csiloc {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its mathematical domain (negative variance,
/// Nakagami m < 0.5, zero pilot, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A byte stream does not follow the documented file/record layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

class TruncationError : public FormatError {
 public:
  TruncationError(const std::string& what, std::size_t needed, std::size_t got)
      : FormatError(what + " (needed " + std::to_string(needed) + " bytes, got " +
                    std::to_string(got) + ")"),
        needed_(needed),
        got_(got) {}

  std::size_t needed() const noexcept { return needed_; }
  std::size_t got() const noexcept { return got_; }

 private:
  std::size_t needed_;
  std::size_t got_;
};

/// A packet violates an invariant and cannot be serialized.
class EncodeError : public Error {
 public:
  EncodeError(const std::string& field, const std::string& detail)
      : Error("cannot encode packet: field '" + field + "' " + detail), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Tensor or layer shapes do not chain.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input does not satisfy an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace csiloc
