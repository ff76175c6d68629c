// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fel {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class GridTooShort : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class SpecNotFitted : public Error {
 public:
  using Error::Error;
};

class InvalidComponents : public Error {
 public:
  using Error::Error;
};

/// No training curve has positive kernel weight at the query point.
/// Carries the smallest observed distance so callers can report how far
/// the nearest neighbor was, and the sample index when the failure is
/// tied to a specific training sample.
class EmptyNeighborhood : public Error {
 public:
  EmptyNeighborhood(const std::string& what, double min_distance,
                    std::ptrdiff_t index = -1)
      : Error(what), min_distance_(min_distance), index_(index) {}

  double min_distance() const { return min_distance_; }
  std::ptrdiff_t index() const { return index_; }

 private:
  double min_distance_;
  std::ptrdiff_t index_;
};

class DegenerateDistances : public Error {
 public:
  using Error::Error;
};

class DegenerateScores : public Error {
 public:
  using Error::Error;
};

class BracketingFailed : public Error {
 public:
  using Error::Error;
};

class SingularDesign : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Lines and columns are 1-based; column 0 means
/// the error concerns the whole line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class MissingColumn : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

}  // namespace fel
