#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nmfem {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree (e.g. dataset has M columns, model another M).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A precondition on an argument value was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Every mixture component assigns zero probability to one observation.
class DegenerateObservationError : public Error {
 public:
  explicit DegenerateObservationError(std::size_t row)
      : Error("observation " + std::to_string(row) +
              " has zero probability under every component"),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// NaN or infinity appeared in an iterative update.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, int iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

// Too few points to carry out a statistical procedure.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Input source contained no usable records.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// Malformed input files (bad CSV, bad JSON, bad-row budget exceeded).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace nmfem
