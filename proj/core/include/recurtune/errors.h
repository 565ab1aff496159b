#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace recurtune {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value or bundle violates one or more invariants. Carries every problem
// found, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems);

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Malformed input text. `line` is 1-based; 0 means "whole file".
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what);

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised when an algorithm cannot proceed, e.g. every batch size was pruned.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace recurtune
