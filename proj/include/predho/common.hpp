#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace predho {

// Error hierarchy. The CLI maps each family onto its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class EmptyTraceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Derives an independent 64-bit seed for a labeled sub-stream, e.g.
// derive_seed(root, "trace/s1/r0"). Same (root, label) -> same seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);

// Strict full-string parse; throws std::invalid_argument on junk.
double parse_double(std::string_view text);

}  // namespace predho
