#include "snl/penalties.hpp"

#include <cmath>

#include "snl/errors.hpp"

namespace snl {

namespace {

// Visits every node group: `fn(row_offset, cols, bias_offset)` where the row
// occupies [row_offset, row_offset + cols) of the flat vector and the node's
// bias sits at bias_offset (or -1 when biases are excluded).
template <class Fn>
void for_each_node(const Architecture& arch, Fn&& fn) {
  Index pos = 0;
  for (Index l = 0; l < arch.depth(); ++l) {
    const Index rows = arch.dims[l + 1];
    const Index cols = arch.dims[l];
    const Index bias_at = pos + rows * cols;
    for (Index r = 0; r < rows; ++r) {
      fn(pos + r * cols, cols, arch.bias_included ? bias_at + r : Index{-1});
    }
    pos = bias_at + (arch.bias_included ? rows : 0);
  }
}

// Visits every layer block [offset, offset + length), bias included.
template <class Fn>
void for_each_layer(const Architecture& arch, Fn&& fn) {
  Index pos = 0;
  for (Index l = 0; l < arch.depth(); ++l) {
    const Index len = arch.dims[l + 1] * (arch.dims[l] + (arch.bias_included ? 1 : 0));
    fn(pos, len);
    pos += len;
  }
}

double node_norm(const Eigen::VectorXd& v, Index row, Index cols, Index bias) {
  double sq = v.segment(row, cols).squaredNorm();
  if (bias >= 0) sq += v[bias] * v[bias];
  return std::sqrt(sq);
}

double node_group_sum(const Architecture& arch, const Eigen::VectorXd& v) {
  double total = 0.0;
  for_each_node(arch, [&](Index row, Index cols, Index bias) { total += node_norm(v, row, cols, bias); });
  return total;
}

void shrink_nodes(const Architecture& arch, Eigen::VectorXd& v, double threshold) {
  for_each_node(arch, [&](Index row, Index cols, Index bias) {
    const double norm = node_norm(v, row, cols, bias);
    const double factor = norm > threshold ? 1.0 - threshold / norm : 0.0;
    if (factor == 0.0) {
      v.segment(row, cols).setZero();
      if (bias >= 0) v[bias] = 0.0;
    } else {
      v.segment(row, cols) *= factor;
      if (bias >= 0) v[bias] *= factor;
    }
  });
}

void check_lambda(double value, const char* what) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw UsageError(std::string(what) + " must be finite and >= 0");
  }
}

}  // namespace

PenaltyKind PenaltyKind::make(Type type, double lambda, double lambda2) {
  check_lambda(lambda, "lambda");
  check_lambda(lambda2, "lambda2");
  return PenaltyKind{type, lambda, lambda2};
}

PenaltyKind PenaltyKind::scaled(double factor) const {
  return make(type, lambda * factor, lambda2 * factor);
}

std::string PenaltyKind::name() const {
  switch (type) {
    case Type::l1:
      return "l1";
    case Type::group_node:
      return "group_node";
    case Type::group_layer:
      return "group_layer";
    case Type::sparse_group:
      return "sparse_group";
  }
  return "unknown";
}

PenaltyKind::Type parse_penalty_type(const std::string& name) {
  if (name == "l1") return PenaltyKind::Type::l1;
  if (name == "group_node") return PenaltyKind::Type::group_node;
  if (name == "group_layer") return PenaltyKind::Type::group_layer;
  if (name == "sparse_group") return PenaltyKind::Type::sparse_group;
  throw UsageError("unknown penalty '" + name + "'");
}

double penalty_value(const Architecture& arch, const ParamVector& v, const PenaltyKind& kind) {
  if (v.size() != arch.param_count()) throw ShapeError("parameter vector length mismatch");
  switch (kind.type) {
    case PenaltyKind::Type::l1:
      return kind.lambda * v.values.lpNorm<1>();
    case PenaltyKind::Type::group_node:
      return kind.lambda * node_group_sum(arch, v.values);
    case PenaltyKind::Type::group_layer: {
      double total = 0.0;
      for_each_layer(arch, [&](Index at, Index len) { total += v.values.segment(at, len).norm(); });
      return kind.lambda * total;
    }
    case PenaltyKind::Type::sparse_group:
      return kind.lambda * node_group_sum(arch, v.values) + kind.lambda2 * v.values.lpNorm<1>();
  }
  return 0.0;
}

double penalty_value(const Network& net, const PenaltyKind& kind) {
  return penalty_value(net.arch(), flatten(net), kind);
}

ParamVector prox_step(const Architecture& arch, const ParamVector& v, const PenaltyKind& kind,
                      double t) {
  if (!(t > 0.0)) throw UsageError("prox step size must be positive");
  if (v.size() != arch.param_count()) throw ShapeError("parameter vector length mismatch");
  ParamVector u = v;
  switch (kind.type) {
    case PenaltyKind::Type::l1: {
      const double thr = t * kind.lambda;
      if (thr > 0.0) u.values = u.values.unaryExpr([thr](double x) { return soft_threshold(x, thr); });
      break;
    }
    case PenaltyKind::Type::group_node:
      if (kind.lambda > 0.0) shrink_nodes(arch, u.values, t * kind.lambda);
      break;
    case PenaltyKind::Type::group_layer: {
      const double thr = t * kind.lambda;
      if (thr <= 0.0) break;
      for_each_layer(arch, [&](Index at, Index len) {
        auto block = u.values.segment(at, len);
        const double norm = block.norm();
        if (norm > thr) {
          block *= 1.0 - thr / norm;
        } else {
          block.setZero();
        }
      });
      break;
    }
    case PenaltyKind::Type::sparse_group: {
      // The prox of (group norm + l1) is the group shrink applied to the l1 prox.
      const double thr1 = t * kind.lambda2;
      if (thr1 > 0.0) u.values = u.values.unaryExpr([thr1](double x) { return soft_threshold(x, thr1); });
      if (kind.lambda > 0.0) shrink_nodes(arch, u.values, t * kind.lambda);
      break;
    }
  }
  return u;
}

double lambda_theory(Index n, const TaskKind& task, double c0) {
  if (n < 2) throw UsageError("lambda_theory needs n >= 2");
  if (!(c0 > 0.0)) throw UsageError("C0 must be positive");
  const double log_n = std::log(static_cast<double>(n));
  const double classes_factor = task.type == TaskKind::Type::multiclass ? task.classes - 1.0 : 1.0;
  return c0 * std::sqrt(classes_factor * log_n / static_cast<double>(n));
}

}  // namespace snl
