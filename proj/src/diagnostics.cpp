#include "snl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "snl/errors.hpp"

namespace snl {

double golowich_bound(Index depth, Index input_dim, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.rows() < 1) throw UsageError("golowich_bound needs n >= 1");
  const double n = static_cast<double>(x.rows());
  const double column_max = x.colwise().squaredNorm().maxCoeff();
  return std::sqrt(2.0 * (static_cast<double>(depth) + 1.0 + std::log(static_cast<double>(input_dim))) / n) *
         std::sqrt(column_max);
}

Eigen::VectorXd project_l1_ball(const Eigen::Ref<const Eigen::VectorXd>& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> mags(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(v[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cumulative += mags[k];
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (mags[k] > candidate) threshold = candidate;
  }
  return v.unaryExpr([threshold](double t) {
    const double mag = std::abs(t) - threshold;
    return mag > 0.0 ? std::copysign(mag, t) : 0.0;
  });
}

double linear_rademacher_sup(const Eigen::Ref<const Eigen::MatrixXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& signs) {
  if (signs.size() != x.rows()) throw ShapeError("sign vector length must equal n");
  return (x.transpose() * signs).cwiseAbs().maxCoeff() / std::sqrt(static_cast<double>(x.rows()));
}

double rademacher_sup(const Architecture& arch, const Eigen::Ref<const Eigen::MatrixXd>& x,
                      const Eigen::Ref<const Eigen::MatrixXd>& signs, Index restarts, Index iters,
                      std::uint64_t seed) {
  if (x.cols() != arch.input_dim()) throw ShapeError("design dimension does not match architecture input");
  if (signs.rows() != arch.output_dim() || signs.cols() != x.rows()) throw ShapeError("sign matrix must be d_L x n");
  if (restarts < 1 || iters < 1) throw UsageError("ascent needs positive restart and iteration counts");
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(x.rows()));
  const Eigen::MatrixXd inputs_t = x.transpose();
  const Eigen::MatrixXd out_grads = inv_sqrt_n * signs;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto value_and_grad = [&](const ParamVector& theta, ParamVector* grad) {
    const Network net = unflatten(arch, theta);
    const auto cache = forward_batch(net, inputs_t);
    if (grad) *grad = backward_batch(net, cache, out_grads);
    return (out_grads.array() * cache.output().array()).sum();
  };

  double best = 0.0;  // Θ = 0 is feasible
  for (Index start = 0; start < restarts; ++start) {
    ParamVector theta{Eigen::VectorXd(arch.param_count())};
    for (Index i = 0; i < theta.size(); ++i) theta.values[i] = normal(rng);
    theta.values /= theta.values.lpNorm<1>();
    ParamVector grad;
    double value = value_and_grad(theta, &grad);
    // Adaptive step: grow after an accepted ascent step, shrink after a rejected one.
    // The ball has l2 diameter 2, so steps beyond a few units only cost precision.
    double step = 0.5;
    for (Index it = 0; it < iters && step > 1e-12; ++it) {
      const double gnorm = grad.values.norm();
      if (gnorm == 0.0) break;
      ParamVector trial{project_l1_ball(theta.values + (step / gnorm) * grad.values)};
      ParamVector trial_grad;
      const double trial_value = value_and_grad(trial, &trial_grad);
      if (trial_value >= value) {
        theta = std::move(trial);
        grad = std::move(trial_grad);
        value = trial_value;
        step = std::min(2.0 * step, 10.0);
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, value);
  }
  return best;
}

DiagnosticReport empirical_rademacher(const Architecture& arch, const Eigen::Ref<const Eigen::MatrixXd>& x,
                                      const RademacherOptions& options) {
  if (options.sign_draws < 1) throw UsageError("Rademacher estimation needs sign_draws >= 1");
  const Index n = x.rows();
  std::mt19937_64 rng(options.seed);
  std::bernoulli_distribution coin(0.5);

  Eigen::VectorXd per_draw(options.sign_draws);
  for (Index draw = 0; draw < options.sign_draws; ++draw) {
    Eigen::MatrixXd signs(arch.output_dim(), n);
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k < arch.output_dim(); ++k) signs(k, i) = coin(rng) ? 1.0 : -1.0;
    per_draw[draw] = rademacher_sup(arch, x, signs, options.ascent_restarts, options.ascent_iters, rng());
  }

  DiagnosticReport report;
  report.name = "empirical_rademacher";
  report.estimate = per_draw.mean();
  if (options.sign_draws > 1) {
    report.std_error = std::sqrt((per_draw.array() - report.estimate).square().sum() /
                                 static_cast<double>(options.sign_draws - 1) /
                                 static_cast<double>(options.sign_draws));
  }
  report.bound = golowich_bound(arch.depth(), arch.input_dim(), x);
  report.trials = options.sign_draws;
  report.notes = "lower estimate (feasible-point ascent over the l1 unit ball); bound applies to bias-free networks";
  return report;
}

DiagnosticReport gsre_kappa_estimate(const Architecture& arch, Index sparsity, double cone_constant,
                                     SamplerKind sampler, const GsreOptions& options) {
  if (!(cone_constant > 0.0)) throw UsageError("cone constant c0 must be positive");
  if (sparsity < 1) throw UsageError("sparsity level S0 must be >= 1");
  if (options.pair_draws < 1) throw UsageError("no cone-feasible pair requested (pair_draws < 1)");
  if (options.mc_points < 1) throw UsageError("mc_points must be >= 1");

  FeatureSampler design(sampler, arch.input_dim(), options.seed);
  const Eigen::MatrixXd inputs_t = design.sample(options.mc_points).transpose();
  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_scale(std::log(1e-3), 0.0);

  const Index S = arch.param_count();
  const Index support = std::min(sparsity, S);
  const double cone = cone_constant * std::sqrt(static_cast<double>(sparsity));
  std::vector<Index> coords(static_cast<std::size_t>(S));

  auto sparse_direction = [&] {
    std::iota(coords.begin(), coords.end(), Index{0});
    std::shuffle(coords.begin(), coords.end(), rng);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
    for (Index k = 0; k < support; ++k) v[coords[static_cast<std::size_t>(k)]] = normal(rng);
    return v;
  };

  double kappa = std::numeric_limits<double>::infinity();
  Index feasible = 0;
  for (Index draw = 0; draw < options.pair_draws; ++draw) {
    const ParamVector base = flatten(init_network(arch, 1.0, rng()));
    Eigen::VectorXd direction;
    if (draw % 2 == 0) {
      direction = sparse_direction();
    } else {
      for (int attempt = 0; attempt < 100 && direction.size() == 0; ++attempt) {
        Eigen::VectorXd v(S);
        for (Index i = 0; i < S; ++i) v[i] = normal(rng);
        if (v.lpNorm<1>() <= cone * v.norm()) direction = std::move(v);
      }
      if (direction.size() == 0) direction = sparse_direction();
    }
    const double dnorm = direction.norm();
    if (dnorm == 0.0) continue;
    const double radius = std::exp(log_scale(rng)) * std::max(base.values.norm(), 1.0);
    direction *= radius / dnorm;

    const Network first = unflatten(arch, base);
    const Network second = unflatten(arch, ParamVector{base.values + direction});
    const Eigen::MatrixXd diff = forward_batch(second, inputs_t).output() - forward_batch(first, inputs_t).output();
    const double l2_sq = diff.colwise().squaredNorm().mean();
    kappa = std::min(kappa, l2_sq / direction.squaredNorm());
    ++feasible;
  }
  if (feasible == 0) throw Error("no cone-feasible parameter pair found within the draw budget");

  DiagnosticReport report;
  report.name = "gsre_kappa";
  report.estimate = kappa;
  report.trials = feasible;
  report.notes = "upper estimate of kappa(S0): minimum over sampled cone pairs; the infimum is not certified";
  return report;
}

DiagnosticReport moment_condition_check(SamplerKind sampler, Index n, Index dim, Index reps,
                                        std::uint64_t seed) {
  if (reps < 10) throw UsageError("moment check needs reps >= 10");
  if (n < 1) throw UsageError("moment check needs n >= 1");
  FeatureSampler features(sampler, dim, seed);
  Eigen::VectorXd values(reps);
  for (Index r = 0; r < reps; ++r) {
    const Eigen::MatrixXd x = features.sample(n);
    values[r] = x.colwise().squaredNorm().maxCoeff() / static_cast<double>(n);
  }
  DiagnosticReport report;
  report.name = "moment_condition";
  report.estimate = values.mean();
  report.std_error = std::sqrt((values.array() - report.estimate).square().sum() /
                               static_cast<double>(reps - 1) / static_cast<double>(reps));
  report.trials = reps;
  report.notes = "estimate of E max_j (1/n) sum_i X_ij^2 (" + to_string(sampler) + ")";
  return report;
}

double vc_scale(double depth, double sparsity) {
  if (sparsity < 2.0) throw UsageError("vc_scale needs S0 >= 2");
  return sparsity * depth * std::log(sparsity);
}

}  // namespace snl
