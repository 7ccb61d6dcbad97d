#pragma once

// Monte Carlo risk estimators. Excess risks are computed from the true
// conditional probabilities, so no test labels are drawn:
//
//   misclassification (binary)     E |2p*(X) - 1| 1{η̂(X) != η*(X)}
//   misclassification (multiclass) E [max_k p*_k(X) - p*_{η̂(X)}(X)]
//   logistic excess                E [p*(X)(g*(X) - ĝ(X)) + ln((1 + e^{ĝ(X)}) / (1 + e^{g*(X)}))]
//
// Every estimator returns exactly 0 when the estimate coincides with the truth.

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "snl/network.hpp"
#include "snl/synthetic.hpp"

namespace snl {

/// Maps an n x d batch of inputs to an n x out_dim matrix of outputs (logits for classifiers).
using Predictor = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

Predictor as_predictor(const Network& net);
Predictor as_predictor(const GroundTruth& gt);

enum class RiskKind { l2, logistic_excess, misclass_excess, bayes_risk };

struct RiskEstimate {
  double value = 0.0;
  double std_error = 0.0;
  Index m = 0;
  RiskKind kind = RiskKind::l2;
};

/// Mean and standard error (sample sd / √m) of per-draw integrand values.
RiskEstimate summarize(const Eigen::Ref<const Eigen::VectorXd>& integrand, RiskKind kind);

/// E ||ĝ(X) - g*(X)||² (squared components summed for vector outputs).
RiskEstimate mc_l2_risk(const Predictor& estimate, const GroundTruth& gt, FeatureSampler& sampler, Index m);

/// Pointwise logistic excess-risk integrand; a Bregman divergence of softplus, so >= 0.
double logistic_excess_integrand(double true_logit, double estimated_logit);

RiskEstimate logistic_excess_risk(const Predictor& estimate, const GroundTruth& gt,
                                  FeatureSampler& sampler, Index m);

RiskEstimate misclass_excess_binary(const Predictor& estimate, const GroundTruth& gt,
                                    FeatureSampler& sampler, Index m);

RiskEstimate misclass_excess_multiclass(const Predictor& estimate, const GroundTruth& gt,
                                        FeatureSampler& sampler, Index m, int classes);

/// E min(p*(X), 1 - p*(X)).
RiskEstimate bayes_risk_binary(const GroundTruth& gt, FeatureSampler& sampler, Index m);

/// Bayes rule: the plug-in classifier applied to the true logits.
int bayes_classify(const GroundTruth& gt, const Eigen::Ref<const Eigen::VectorXd>& x, const TaskKind& task);

/// misclass excess <= √(2 · logistic excess), both estimated on the same draws.
struct ComparisonCheck {
  double lhs = 0.0;        // misclassification excess
  double rhs = 0.0;        // √(2 · logistic excess)
  double slack = 0.0;      // 3 × combined standard error
  bool pass = false;
  RiskEstimate misclass;
  RiskEstimate logistic;
};

ComparisonCheck comparison_check(const Predictor& estimate, const GroundTruth& gt,
                                 FeatureSampler& sampler, Index m);

std::string to_string(RiskKind kind);

}  // namespace snl
