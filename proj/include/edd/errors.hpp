#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edd {

// Base for every error raised by the library. `code()` is a stable kebab-case
// tag used by the session protocol.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& message) : Error("bounds", message) {}
};

class InvalidBrushError : public Error {
 public:
  explicit InvalidBrushError(const std::string& message) : Error("invalid-brush", message) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error("parse", "line " + std::to_string(line) + ", column " + std::to_string(column) +
                           ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message) : Error("not-found", message) {}
};

class SelfLoopError : public Error {
 public:
  explicit SelfLoopError(const std::string& message) : Error("self-loop", message) {}
};

class OccupiedEndpointError : public Error {
 public:
  explicit OccupiedEndpointError(const std::string& message)
      : Error("occupied-endpoint", message) {}
};

class InvalidEndpointError : public Error {
 public:
  explicit InvalidEndpointError(const std::string& message)
      : Error("invalid-endpoint", message) {}
};

class NoPathError : public Error {
 public:
  explicit NoPathError(const std::string& message) : Error("no-path", message) {}
};

// A caller broke a documented precondition (missing initial room, size mismatch...).
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message) : Error("precondition", message) {}
};

// Internal contract violated by a caller inside the engine (e.g. mixed parents).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& message) : Error("contract", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace edd
