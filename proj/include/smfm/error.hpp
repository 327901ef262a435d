#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smfm {

/// Base class for every error raised by the library. The category maps
/// directly onto the CLI exit codes.
class Error : public std::runtime_error {
public:
  enum class Category { validation = 1, io = 2, numerical = 3 };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

private:
  Category category_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what)
      : Error(Category::validation, what) {}
};

/// Malformed sparse-text input. Line and column are 1-based; zero means
/// "not known" (e.g. parsing a single detached line).
class ParseError : public ValidationError {
public:
  ParseError(const std::string& what, std::size_t line, std::size_t column, const std::string& source = {})
      : ValidationError((source.empty() ? std::string() : source + ": ") + format(what, line, column)),
        detail_(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    std::string out;
    if (line != 0) out += "line " + std::to_string(line) + ", ";
    out += "column " + std::to_string(column) + ": " + what;
    return out;
  }

  std::string detail_;
  std::size_t line_;
  std::size_t column_;
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(Category::io, what) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what) : Error(Category::numerical, what) {}
};

}  // namespace smfm
