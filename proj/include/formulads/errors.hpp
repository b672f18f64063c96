#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace formulads {

// Base of every recoverable error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& what)
      : Error("syntax error at " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Errors that carry a name or a gate path ("root/left/child").
class PathError : public Error {
 public:
  PathError(const std::string& kind, std::string path)
      : Error(kind + " at " + path), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class UndeclaredInput : public PathError {
 public:
  explicit UndeclaredInput(std::string name)
      : PathError("undeclared input", std::move(name)) {}
};
class DimensionMismatch : public PathError {
 public:
  explicit DimensionMismatch(std::string path)
      : PathError("dimension mismatch", std::move(path)) {}
};
class NonSquareInversion : public PathError {
 public:
  explicit NonSquareInversion(std::string path)
      : PathError("non-square inversion", std::move(path)) {}
};
class SingularInversion : public PathError {
 public:
  explicit SingularInversion(std::string path)
      : PathError("singular inversion", std::move(path)) {}
};

class NonSquareOutput : public Error {
 public:
  NonSquareOutput() : Error("formula output is not square") {}
};
class UnknownLeaf : public Error {
 public:
  explicit UnknownLeaf(std::size_t leaf)
      : Error("unknown leaf id " + std::to_string(leaf)) {}
};
class SingularMatrix : public Error {
 public:
  SingularMatrix() : Error("matrix is singular to working precision") {}
};
class SingularUpdate : public Error {
 public:
  SingularUpdate() : Error("update makes the matrix singular") {}
};
class ZeroDeterminant : public Error {
 public:
  ZeroDeterminant() : Error("update would make the determinant zero") {}
};
class EmptyUndoLog : public Error {
 public:
  EmptyUndoLog() : Error("nothing to revert") {}
};
class DivisionByZero : public Error {
 public:
  DivisionByZero() : Error("fixed-point division by zero") {}
};
class ZeroInverse : public Error {
 public:
  ZeroInverse() : Error("zero has no inverse") {}
};
class InvalidVertex : public Error {
 public:
  explicit InvalidVertex(const std::string& what)
      : Error("invalid vertex: " + what) {}
};
class TooLarge : public Error {
 public:
  explicit TooLarge(const std::string& what) : Error("too large: " + what) {}
};
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error("config error: " + what) {}
};
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what)
      : Error("internal consistency: " + what) {}
};

}  // namespace formulads
