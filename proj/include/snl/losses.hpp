#pragma once

#include <string>

#include <Eigen/Dense>

namespace snl {

using Index = Eigen::Index;

/// Response type of a learning problem. Binary is handled by its own loss;
/// multiclass uses K-1 logits with class K as the zero-logit reference.
struct TaskKind {
  enum class Type { regression, binary, multiclass };

  Type type = Type::regression;
  int classes = 0;  // K; only meaningful for multiclass

  static TaskKind regression() { return {Type::regression, 0}; }
  static TaskKind binary() { return {Type::binary, 2}; }
  static TaskKind multiclass(int k);

  /// Network output width d_L: 1 for regression/binary, K-1 for multiclass.
  int output_dim() const { return type == Type::multiclass ? classes - 1 : 1; }
  bool is_classification() const { return type != Type::regression; }
  std::string name() const;

  bool operator==(const TaskKind&) const = default;
};

/// Loss value and its gradient with respect to the network output.
struct LossEval {
  double value = 0.0;
  Eigen::VectorXd grad;
};

/// log(1 + e^t) without overflow.
double softplus(double t);
/// 1 / (1 + e^{-t}) without overflow.
double sigmoid(double t);

/// (y - g)^2.
LossEval quad_loss(double y, double g);

/// ln(1 + e^{-y* g}) with y* = 2y - 1; y in {0, 1}.
LossEval binary_logistic_loss(int y, double g);

/// Negative log-likelihood of the reference-class softmax model:
///   log(1 + Σ_k e^{g_k}) - Σ_k 1{y = k} g_k,   y in {1..K}, K = g.size() + 1.
/// Throws UsageError when y is out of range.
LossEval multinomial_logistic_loss(int y, const Eigen::Ref<const Eigen::VectorXd>& g);

/// p_k = e^{g_k} / (1 + Σ e^{g_k'}) for k < K and p_K = 1 / (1 + Σ e^{g_k'}).
Eigen::VectorXd probs_with_reference(const Eigen::Ref<const Eigen::VectorXd>& g);

/// Plug-in rule: binary 1{g >= 0} (labels 0/1); multiclass argmax over
/// (g_1..g_{K-1}, 0) with the smallest index winning ties (labels 1..K).
int plugin_classify(const Eigen::Ref<const Eigen::VectorXd>& g, const TaskKind& task);

/// Generic per-sample loss dispatch; `y` holds a real response or an integral label.
LossEval evaluate_loss(const TaskKind& task, double y, const Eigen::Ref<const Eigen::VectorXd>& g);

}  // namespace snl
