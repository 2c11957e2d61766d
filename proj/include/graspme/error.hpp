#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace graspme {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition or invariant of a caller-supplied value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed line-oriented text input (e.g. Wavefront OBJ).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Structured document (JSON) that does not match its schema. `path` locates
// the offending node, e.g. "annotations[3].bbox".
class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(path) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace graspme
