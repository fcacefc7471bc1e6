#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chainscope {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated wire data. `offset()` is the absolute byte offset
/// of the field that failed to decode.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Bad input data (CSV rows, series files, degenerate statistics).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what) {}
  DataError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::optional<std::size_t> line_;
};

/// Invalid parameters or violated preconditions on the caller's side.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver ran out of iterations. Carries the last iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations,
                   std::vector<double> last_iterate)
      : Error(what + ": residual " + std::to_string(residual) + " after " +
              std::to_string(iterations) + " iterations"),
        residual_(residual),
        iterations_(iterations),
        last_iterate_(std::move(last_iterate)) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }
  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

 private:
  double residual_;
  int iterations_;
  std::vector<double> last_iterate_;
};

}  // namespace chainscope
