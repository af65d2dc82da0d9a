#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace genrestack {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input; line is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Binary model file with a wrong magic string or an invalid structure.
class FormatError : public Error {
 public:
  using Error::Error;
};

class CorruptFileError : public FormatError {
 public:
  using FormatError::FormatError;
};

class UnsupportedVersionError : public FormatError {
 public:
  UnsupportedVersionError(std::uint32_t found, std::uint32_t supported)
      : FormatError("unsupported model file version " + std::to_string(found) +
                    " (this build reads version " + std::to_string(supported) + ")"),
        found_(found) {}

  std::uint32_t found() const noexcept { return found_; }

 private:
  std::uint32_t found_;
};

// Stacked features built against one layout but consumed under another.
class LayoutMismatchError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace genrestack
