#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace snl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No architecture with at least one hidden unit fits the parameter budget.
class SizingError : public Error {
 public:
  using Error::Error;
};

/// Dimension or length mismatch between arguments.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared during evaluation.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, int layer)
      : Error(what + " (layer " + std::to_string(layer) + ")"), layer_(layer) {}
  explicit NumericError(const std::string& what) : Error(what), layer_(-1) {}

  /// Index of the offending weight matrix, or -1 when not layer-specific.
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

/// Training diverged; carries the objective trace up to the failure.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}

  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Invalid parameters, configuration, or API misuse.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Log-log regression could not be fitted.
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace snl
