#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kernelflow {

/// Invalid argument or malformed input (dimension mismatch, bad flag value, ...).
struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure during a computation.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Symmetric matrix had an eigenvalue below the PSD tolerance.
struct not_psd_error : numeric_error {
  explicit not_psd_error(double eigenvalue)
      : numeric_error("matrix is not positive semi-definite: eigenvalue " +
                      std::to_string(eigenvalue)),
        eigenvalue(eigenvalue) {}
  double eigenvalue;
};

/// Iterative solver residual exploded; `step` is the offending iteration.
struct divergence_error : numeric_error {
  divergence_error(std::size_t step, double residual_norm)
      : numeric_error("descent diverged at step " + std::to_string(step) +
                      " (residual norm " + std::to_string(residual_norm) + ")"),
        step(step),
        residual_norm(residual_norm) {}
  std::size_t step;
  double residual_norm;
};

/// CSV parsing failure with 1-based row/column location.
struct parse_error : std::runtime_error {
  parse_error(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(what + " (row " + std::to_string(row) + ", column " +
                           std::to_string(column) + ")"),
        row(row),
        column(column) {}
  std::size_t row;
  std::size_t column;
};

}  // namespace kernelflow
