#pragma once

#include <array>
#include <string>

#include "snl/losses.hpp"
#include "snl/network.hpp"

namespace snl {

/// Sparsity-inducing penalty on the full parameter vector (weights and biases).
///
///  - l1:           λ ||θ||_1
///  - group_node:   λ Σ_nodes ||(row of W_l, b_l entry)||_2
///  - group_layer:  λ Σ_l ||(W_l, b_l)||_F
///  - sparse_group: λ · node groups + λ2 ||θ||_1
struct PenaltyKind {
  enum class Type { l1, group_node, group_layer, sparse_group };

  Type type = Type::l1;
  double lambda = 0.0;
  double lambda2 = 0.0;  // only used by sparse_group

  static PenaltyKind l1(double lambda) { return make(Type::l1, lambda, 0.0); }
  static PenaltyKind group_node(double lambda) { return make(Type::group_node, lambda, 0.0); }
  static PenaltyKind group_layer(double lambda) { return make(Type::group_layer, lambda, 0.0); }
  static PenaltyKind sparse_group(double lambda_group, double lambda_l1) {
    return make(Type::sparse_group, lambda_group, lambda_l1);
  }
  static PenaltyKind make(Type type, double lambda, double lambda2);

  /// Same kind with every λ scaled by `factor`.
  PenaltyKind scaled(double factor) const;
  std::string name() const;
};

PenaltyKind::Type parse_penalty_type(const std::string& name);

double penalty_value(const Architecture& arch, const ParamVector& v, const PenaltyKind& kind);
double penalty_value(const Network& net, const PenaltyKind& kind);

/// Exact proximal map argmin_u ½||u - v||² + t·Pen(u). Zeros it produces are exactly 0.0.
ParamVector prox_step(const Architecture& arch, const ParamVector& v, const PenaltyKind& kind,
                      double t);

/// Entrywise soft threshold sign(x) max(|x| - threshold, 0).
inline double soft_threshold(double x, double threshold) {
  if (x > threshold) return x - threshold;
  if (x < -threshold) return x + threshold;
  return 0.0;
}

/// C0 √(ln n / n) for regression and binary; C0 √((K-1) ln n / n) for multiclass.
double lambda_theory(Index n, const TaskKind& task, double c0);

/// Geometric C0 grid used for validation-based selection.
inline constexpr std::array<double, 5> kC0Grid = {0.25, 0.5, 1.0, 2.0, 4.0};

}  // namespace snl
