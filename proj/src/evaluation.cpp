#include "snl/evaluation.hpp"

#include <cmath>

#include "snl/errors.hpp"

namespace snl {

namespace {

struct Draw {
  Eigen::MatrixXd x;
  Eigen::MatrixXd truth;
  Eigen::MatrixXd estimate;
};

Draw draw(const Predictor& estimate, const GroundTruth& gt, FeatureSampler& sampler, Index m) {
  if (m < 1) throw UsageError("Monte Carlo sample size must be >= 1");
  if (sampler.dim() != gt.input_dim()) throw ShapeError("sampler and ground truth disagree on d");
  Draw out;
  out.x = sampler.sample(m);
  out.truth = gt.evaluate(out.x);
  out.estimate = estimate(out.x);
  if (out.estimate.rows() != m || out.estimate.cols() != gt.output_dim()) {
    throw ShapeError("estimator output shape does not match the ground truth");
  }
  return out;
}

void require_scalar(const GroundTruth& gt, const char* what) {
  if (gt.output_dim() != 1) throw UsageError(std::string(what) + " needs a binary (scalar-logit) ground truth");
}

}  // namespace

Predictor as_predictor(const Network& net) {
  return [net](const Eigen::MatrixXd& x) { return predict(net, x); };
}

Predictor as_predictor(const GroundTruth& gt) {
  return [gt](const Eigen::MatrixXd& x) { return gt.evaluate(x); };
}

RiskEstimate summarize(const Eigen::Ref<const Eigen::VectorXd>& integrand, RiskKind kind) {
  RiskEstimate out;
  out.kind = kind;
  out.m = integrand.size();
  if (out.m == 0) return out;
  out.value = integrand.mean();
  if (out.m > 1) {
    const double var = (integrand.array() - out.value).square().sum() / static_cast<double>(out.m - 1);
    out.std_error = std::sqrt(var / static_cast<double>(out.m));
  }
  if (!std::isfinite(out.value)) throw NumericError("risk estimate is not finite");
  return out;
}

RiskEstimate mc_l2_risk(const Predictor& estimate, const GroundTruth& gt, FeatureSampler& sampler, Index m) {
  const auto d = draw(estimate, gt, sampler, m);
  const Eigen::VectorXd integrand = (d.estimate - d.truth).rowwise().squaredNorm();
  return summarize(integrand, RiskKind::l2);
}

double logistic_excess_integrand(double true_logit, double estimated_logit) {
  if (true_logit == estimated_logit) return 0.0;
  const double value = sigmoid(true_logit) * (true_logit - estimated_logit) + softplus(estimated_logit) -
                       softplus(true_logit);
  // Nonnegative in exact arithmetic; clamp cancellation error.
  return std::max(value, 0.0);
}

RiskEstimate logistic_excess_risk(const Predictor& estimate, const GroundTruth& gt,
                                  FeatureSampler& sampler, Index m) {
  require_scalar(gt, "logistic excess risk");
  const auto d = draw(estimate, gt, sampler, m);
  Eigen::VectorXd integrand(m);
  for (Index i = 0; i < m; ++i) integrand[i] = logistic_excess_integrand(d.truth(i, 0), d.estimate(i, 0));
  return summarize(integrand, RiskKind::logistic_excess);
}

namespace {

Eigen::VectorXd binary_misclass_integrand(const Draw& d) {
  Eigen::VectorXd integrand(d.x.rows());
  for (Index i = 0; i < d.x.rows(); ++i) {
    const bool bayes = d.truth(i, 0) >= 0.0;
    const bool plug_in = d.estimate(i, 0) >= 0.0;
    // |2 sigmoid(g) - 1| = tanh(|g| / 2)
    integrand[i] = bayes == plug_in ? 0.0 : std::tanh(0.5 * std::abs(d.truth(i, 0)));
  }
  return integrand;
}

}  // namespace

RiskEstimate misclass_excess_binary(const Predictor& estimate, const GroundTruth& gt,
                                    FeatureSampler& sampler, Index m) {
  require_scalar(gt, "binary misclassification excess");
  return summarize(binary_misclass_integrand(draw(estimate, gt, sampler, m)), RiskKind::misclass_excess);
}

RiskEstimate misclass_excess_multiclass(const Predictor& estimate, const GroundTruth& gt,
                                        FeatureSampler& sampler, Index m, int classes) {
  const auto task = TaskKind::multiclass(classes);
  if (gt.output_dim() != classes - 1) throw ShapeError("ground truth must have K-1 logits");
  const auto d = draw(estimate, gt, sampler, m);
  Eigen::VectorXd integrand(m);
  for (Index i = 0; i < m; ++i) {
    const Eigen::VectorXd p = probs_with_reference(d.truth.row(i).transpose());
    const int chosen = plugin_classify(d.estimate.row(i).transpose(), task);
    const int bayes = plugin_classify(d.truth.row(i).transpose(), task);
    integrand[i] = chosen == bayes ? 0.0 : std::max(p.maxCoeff() - p[chosen - 1], 0.0);
  }
  return summarize(integrand, RiskKind::misclass_excess);
}

RiskEstimate bayes_risk_binary(const GroundTruth& gt, FeatureSampler& sampler, Index m) {
  require_scalar(gt, "binary Bayes risk");
  const auto d = draw(as_predictor(gt), gt, sampler, m);
  Eigen::VectorXd integrand(m);
  for (Index i = 0; i < m; ++i) {
    const double p = sigmoid(d.truth(i, 0));
    integrand[i] = std::min(p, 1.0 - p);
  }
  return summarize(integrand, RiskKind::bayes_risk);
}

int bayes_classify(const GroundTruth& gt, const Eigen::Ref<const Eigen::VectorXd>& x, const TaskKind& task) {
  return plugin_classify(gt(x), task);
}

ComparisonCheck comparison_check(const Predictor& estimate, const GroundTruth& gt,
                                 FeatureSampler& sampler, Index m) {
  require_scalar(gt, "comparison check");
  const auto d = draw(estimate, gt, sampler, m);
  Eigen::VectorXd logistic(m);
  for (Index i = 0; i < m; ++i) logistic[i] = logistic_excess_integrand(d.truth(i, 0), d.estimate(i, 0));

  ComparisonCheck out;
  out.misclass = summarize(binary_misclass_integrand(d), RiskKind::misclass_excess);
  out.logistic = summarize(logistic, RiskKind::logistic_excess);
  out.lhs = out.misclass.value;
  out.rhs = std::sqrt(2.0 * out.logistic.value);
  // Delta method: sd(√(2E)) ≈ sd(E) / √(2E). Summing the two standard errors
  // bounds the sd of their difference regardless of correlation.
  const double rhs_se = out.logistic.value > 0.0 ? out.logistic.std_error / out.rhs : 0.0;
  out.slack = 3.0 * (out.misclass.std_error + rhs_se);
  out.pass = out.lhs <= out.rhs + out.slack;
  return out;
}

std::string to_string(RiskKind kind) {
  switch (kind) {
    case RiskKind::l2:
      return "l2";
    case RiskKind::logistic_excess:
      return "logistic_excess";
    case RiskKind::misclass_excess:
      return "misclass_excess";
    case RiskKind::bayes_risk:
      return "bayes_risk";
  }
  return "unknown";
}

}  // namespace snl
