#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "snl/losses.hpp"

namespace snl {

/// n samples in R^d with targets. For classification tasks `y` holds integral
/// labels: {0, 1} for binary and {1..K} for multiclass.
struct Dataset {
  Eigen::MatrixXd x;  // n x d
  Eigen::VectorXd y;  // n
  TaskKind task;
  std::uint64_t seed = 0;

  Index size() const { return x.rows(); }
  Index dim() const { return x.cols(); }
  /// Throws ShapeError / UsageError when shapes or labels are inconsistent.
  void validate() const;
};

/// `%.17g` formatting used by every CSV writer.
std::string format_double(double value);

/// Header `x1,...,xd,y`, one row per sample in dataset order.
void write_csv(std::ostream& out, const Dataset& data);

}  // namespace snl
