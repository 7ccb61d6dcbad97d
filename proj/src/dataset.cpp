#include "snl/dataset.hpp"

#include <cmath>
#include <cstdio>

#include "snl/errors.hpp"

namespace snl {

void Dataset::validate() const {
  if (x.rows() < 1) throw ShapeError("dataset is empty");
  if (y.size() != x.rows()) throw ShapeError("targets and features disagree on n");
  if (!x.allFinite()) throw NumericError("non-finite feature value");
  for (Index i = 0; i < y.size(); ++i) {
    const double label = y[i];
    switch (task.type) {
      case TaskKind::Type::regression:
        if (!std::isfinite(label)) throw NumericError("non-finite response");
        break;
      case TaskKind::Type::binary:
        if (label != 0.0 && label != 1.0) throw UsageError("binary labels must be 0 or 1");
        break;
      case TaskKind::Type::multiclass:
        if (label != std::floor(label) || label < 1.0 || label > task.classes) {
          throw UsageError("multiclass labels must lie in 1..K");
        }
        break;
    }
  }
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(std::ostream& out, const Dataset& data) {
  for (Index j = 0; j < data.dim(); ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < data.dim(); ++j) out << format_double(data.x(i, j)) << ',';
    out << format_double(data.y[i]) << '\n';
  }
}

}  // namespace snl
