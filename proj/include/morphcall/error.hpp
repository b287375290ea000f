#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace morphcall {

// Base class for every error raised by the library. The kind string is
// stable and is what the CLI puts into its machine-readable error report.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& msg)
      : Error("parse", source + ":" + std::to_string(line) + ": " + msg), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& msg) : Error("generation", msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error("config", msg) {}
};

class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& msg) : Error("integrity", msg) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error("format", msg) {}
};

class BindingError : public Error {
 public:
  explicit BindingError(const std::string& msg) : Error("binding", msg) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& msg) : Error("shape", msg) {}
};

class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& msg) : Error("bounds", msg) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& msg) : Error("input", msg) {}
};

}  // namespace morphcall
