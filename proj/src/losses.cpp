#include "snl/losses.hpp"

#include <cmath>

#include "snl/errors.hpp"

namespace snl {

TaskKind TaskKind::multiclass(int k) {
  if (k < 3) throw UsageError("multiclass needs K >= 3, got " + std::to_string(k));
  return {Type::multiclass, k};
}

std::string TaskKind::name() const {
  switch (type) {
    case Type::regression:
      return "regression";
    case Type::binary:
      return "binary";
    case Type::multiclass:
      return "multiclass";
  }
  return "unknown";
}

double softplus(double t) {
  // max(t, 0) + log1p(e^{-|t|})
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

LossEval quad_loss(double y, double g) {
  const double r = g - y;
  return {r * r, Eigen::VectorXd::Constant(1, 2.0 * r)};
}

LossEval binary_logistic_loss(int y, double g) {
  if (y != 0 && y != 1) throw UsageError("binary label must be 0 or 1");
  const double signed_y = 2.0 * y - 1.0;
  return {softplus(-signed_y * g), Eigen::VectorXd::Constant(1, sigmoid(g) - y)};
}

Eigen::VectorXd probs_with_reference(const Eigen::Ref<const Eigen::VectorXd>& g) {
  const Index k1 = g.size();
  const double shift = std::max(0.0, k1 > 0 ? g.maxCoeff() : 0.0);
  Eigen::VectorXd p(k1 + 1);
  p.head(k1) = (g.array() - shift).exp();
  p[k1] = std::exp(-shift);
  return p / p.sum();
}

LossEval multinomial_logistic_loss(int y, const Eigen::Ref<const Eigen::VectorXd>& g) {
  const Index k1 = g.size();
  if (y < 1 || y > k1 + 1) {
    throw UsageError("class label " + std::to_string(y) + " outside 1.." + std::to_string(k1 + 1));
  }
  const double shift = std::max(0.0, k1 > 0 ? g.maxCoeff() : 0.0);
  const double log_partition = shift + std::log(std::exp(-shift) + (g.array() - shift).exp().sum());
  LossEval out;
  out.value = log_partition - (y <= k1 ? g[y - 1] : 0.0);
  out.grad = probs_with_reference(g).head(k1);
  if (y <= k1) out.grad[y - 1] -= 1.0;
  return out;
}

int plugin_classify(const Eigen::Ref<const Eigen::VectorXd>& g, const TaskKind& task) {
  switch (task.type) {
    case TaskKind::Type::regression:
      throw UsageError("plug-in classification is undefined for regression");
    case TaskKind::Type::binary:
      return g[0] >= 0.0 ? 1 : 0;
    case TaskKind::Type::multiclass: {
      int best = task.classes;
      double best_val = 0.0;
      for (int k = task.classes - 1; k >= 1; --k) {
        if (g[k - 1] >= best_val) {
          best_val = g[k - 1];
          best = k;
        }
      }
      return best;
    }
  }
  return -1;
}

LossEval evaluate_loss(const TaskKind& task, double y, const Eigen::Ref<const Eigen::VectorXd>& g) {
  switch (task.type) {
    case TaskKind::Type::regression:
      return quad_loss(y, g[0]);
    case TaskKind::Type::binary:
      return binary_logistic_loss(static_cast<int>(y), g[0]);
    case TaskKind::Type::multiclass:
      return multinomial_logistic_loss(static_cast<int>(y), g);
  }
  return {};
}

}  // namespace snl
