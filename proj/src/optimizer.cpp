#include "snl/optimizer.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "snl/errors.hpp"

namespace snl {

namespace {

constexpr double kSufficientDecrease = 1e-4;
constexpr int kMaxBacktracks = 80;

// Mean loss and the d_L x n matrix of per-sample output gradients (already divided by n).
double mean_loss(const TaskKind& task, const Eigen::MatrixXd& outputs, const Eigen::VectorXd& y,
                 Eigen::MatrixXd* out_grads) {
  const Index n = outputs.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  if (out_grads) out_grads->resize(outputs.rows(), n);
  switch (task.type) {
    case TaskKind::Type::regression: {
      const Eigen::ArrayXd resid = outputs.row(0).transpose().array() - y.array();
      total = resid.square().sum();
      if (out_grads) out_grads->row(0) = (2.0 * inv_n) * resid.matrix().transpose();
      break;
    }
    case TaskKind::Type::binary:
      for (Index i = 0; i < n; ++i) {
        const double g = outputs(0, i);
        total += softplus(g) - y[i] * g;
        if (out_grads) (*out_grads)(0, i) = inv_n * (sigmoid(g) - y[i]);
      }
      break;
    case TaskKind::Type::multiclass:
      for (Index i = 0; i < n; ++i) {
        const auto eval = multinomial_logistic_loss(static_cast<int>(y[i]), outputs.col(i));
        total += eval.value;
        if (out_grads) out_grads->col(i) = inv_n * eval.grad;
      }
      break;
  }
  return total * inv_n;
}

class Problem {
 public:
  Problem(const Dataset& data, const TaskKind& task, const Architecture& arch, const PenaltyKind& kind)
      : inputs_t_(data.x.transpose()), y_(data.y), task_(task), arch_(arch), kind_(kind) {
    if (!(data.task == task)) throw UsageError("dataset task does not match the requested task");
    if (data.dim() != arch.input_dim()) throw ShapeError("dataset dimension does not match network input");
    if (arch.output_dim() != task.output_dim()) throw ShapeError("network output width does not match task");
    data.validate();
  }

  double smooth(const ParamVector& theta, ParamVector* grad) const {
    const Network net = unflatten(arch_, theta);
    const auto cache = forward_batch(net, inputs_t_);
    Eigen::MatrixXd out_grads;
    const double value = mean_loss(task_, cache.output(), y_, grad ? &out_grads : nullptr);
    if (grad) *grad = backward_batch(net, cache, out_grads);
    return value;
  }

  // Smooth value, or +inf when evaluation overflows.
  double smooth_or_inf(const ParamVector& theta, ParamVector* grad) const {
    try {
      const double v = smooth(theta, grad);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const NumericError&) {
      return std::numeric_limits<double>::infinity();
    }
  }

  double penalty(const ParamVector& theta) const { return penalty_value(arch_, theta, kind_); }
  ParamVector prox(const ParamVector& v, double t) const { return prox_step(arch_, v, kind_, t); }
  const Architecture& arch() const { return arch_; }

 private:
  Eigen::MatrixXd inputs_t_;
  Eigen::VectorXd y_;
  TaskKind task_;
  Architecture arch_;
  PenaltyKind kind_;
};

struct Candidate {
  ParamVector theta;
  double smooth = 0.0;
  double composite = 0.0;
};

// Backtracking prox step from `base` (smooth value f_base, gradient grad_base).
// Returns nullopt when no step in the budget passes the tests; `fixed_point`
// is set when the prox map returns `base` unchanged.
std::optional<Candidate> backtrack(const Problem& problem, const ParamVector& base, double f_base,
                                   const ParamVector& grad_base, double reference_composite,
                                   double& step, double shrink, bool& fixed_point) {
  fixed_point = false;
  for (int attempt = 0; attempt < kMaxBacktracks; ++attempt) {
    ParamVector trial = problem.prox(ParamVector{base.values - step * grad_base.values}, step);
    const Eigen::VectorXd delta = trial.values - base.values;
    const double delta_sq = delta.squaredNorm();
    if (delta_sq == 0.0) {
      fixed_point = true;
      return std::nullopt;
    }
    const double f_trial = problem.smooth_or_inf(trial, nullptr);
    const double upper = f_base + grad_base.values.dot(delta) + delta_sq / (2.0 * step);
    if (f_trial <= upper) {
      const double composite = f_trial + problem.penalty(trial);
      if (composite <= reference_composite - kSufficientDecrease * delta_sq / (2.0 * step)) {
        return Candidate{std::move(trial), f_trial, composite};
      }
    }
    step *= shrink;
  }
  return std::nullopt;
}

}  // namespace

void TrainConfig::validate() const {
  if (max_iters < 1) throw UsageError("max_iters must be >= 1");
  if (!(tol > 0.0)) throw UsageError("tol must be positive");
  if (!(step0 > 0.0)) throw UsageError("step0 must be positive");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw UsageError("backtrack_factor must lie in (0, 1)");
  }
  if (restarts < 1) throw UsageError("restarts must be >= 1");
  if (!(init_scale >= 0.0)) throw UsageError("init_scale must be >= 0");
  if (window < 1) throw UsageError("window must be >= 1");
}

SmoothEval empirical_loss(const Network& net, const Dataset& data, bool with_grad) {
  if (data.size() < 1) throw ShapeError("dataset is empty");
  if (data.dim() != net.arch().input_dim()) throw ShapeError("dataset dimension does not match network input");
  const auto cache = forward_batch(net, data.x.transpose());
  Eigen::MatrixXd out_grads;
  SmoothEval out;
  out.value = mean_loss(data.task, cache.output(), data.y, with_grad ? &out_grads : nullptr);
  if (with_grad) out.grad = backward_batch(net, cache, out_grads);
  return out;
}

double objective(const Network& net, const Dataset& data, const TaskKind& task,
                 const PenaltyKind& kind) {
  if (!(data.task == task)) throw UsageError("dataset task does not match the requested task");
  if (net.arch().output_dim() != task.output_dim()) throw ShapeError("network output width does not match task");
  return empirical_loss(net, data, false).value + penalty_value(net, kind);
}

TrainResult ista_train(const Network& net0, const Dataset& data, const TaskKind& task,
                       const PenaltyKind& kind, const TrainConfig& cfg) {
  cfg.validate();
  const Problem problem(data, task, net0.arch(), kind);

  ParamVector theta = flatten(net0);
  ParamVector grad;
  double f = problem.smooth_or_inf(theta, &grad);
  bool grad_current = true;  // whether `grad` was evaluated at `theta`
  double composite = f + problem.penalty(theta);
  TrainReport report;
  report.objective_trace.push_back(composite);
  if (!std::isfinite(composite)) {
    throw TrainingError("objective is not finite at the starting point", report.objective_trace);
  }

  const double grow = 1.0 / cfg.backtrack_factor;
  double step = cfg.step0;
  // Momentum state (accelerated mode only).
  ParamVector previous = theta;
  double momentum_t = 1.0;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const double step_before = step;
    bool fixed_point = false;
    std::optional<Candidate> accepted;

    if (cfg.accelerated) {
      const double next_t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_t * momentum_t));
      const double beta = (momentum_t - 1.0) / next_t;
      bool restart = false;
      if (beta > 0.0) {
        ParamVector extrapolated{theta.values + beta * (theta.values - previous.values)};
        ParamVector grad_y;
        const double f_y = problem.smooth_or_inf(extrapolated, &grad_y);
        if (std::isfinite(f_y)) {
          double trial_step = step;
          bool unused = false;
          accepted = backtrack(problem, extrapolated, f_y, grad_y, composite, trial_step,
                               cfg.backtrack_factor, unused);
          if (accepted) step = trial_step;
        }
        restart = !accepted;
      }
      momentum_t = restart ? 1.0 : next_t;
    }

    if (!accepted) {
      if (!grad_current) {
        f = problem.smooth_or_inf(theta, &grad);
        grad_current = true;
      }
      accepted = backtrack(problem, theta, f, grad, composite, step, cfg.backtrack_factor, fixed_point);
    }
    if (!accepted) {
      // Either prox(θ - s∇f) = θ (stationary) or no decrease is representable.
      report.converged = fixed_point;
      break;
    }

    previous = std::move(theta);
    theta = std::move(accepted->theta);
    composite = accepted->composite;
    f = accepted->smooth;
    grad_current = false;
    report.objective_trace.push_back(composite);
    ++report.iterations;

    if (step == step_before) step *= grow;

    const auto len = report.objective_trace.size();
    if (len > static_cast<std::size_t>(cfg.window)) {
      const double older = report.objective_trace[len - 1 - static_cast<std::size_t>(cfg.window)];
      const double scale = std::max(std::abs(composite), std::numeric_limits<double>::min());
      if (older - composite <= cfg.tol * scale) {
        report.converged = true;
        break;
      }
    }
  }

  report.final_objective = composite;
  report.nonzero_params = param_norms(theta).l0;
  return TrainResult{unflatten(net0.arch(), theta), std::move(report)};
}

TrainResult multi_restart_train(const Architecture& arch, const Dataset& data, const TaskKind& task,
                                const PenaltyKind& kind, const TrainConfig& cfg) {
  cfg.validate();
  std::optional<TrainResult> best;
  std::optional<TrainingError> last_error;
  for (int r = 0; r < cfg.restarts; ++r) {
    const Network start = init_network(arch, cfg.init_scale, cfg.seed + static_cast<std::uint64_t>(r));
    try {
      auto run = ista_train(start, data, task, kind, cfg);
      run.report.restart_index_of_best = r;
      if (!best || run.report.final_objective < best->report.final_objective) best = std::move(run);
    } catch (const TrainingError& e) {
      last_error = e;
    }
  }
  if (!best) throw *last_error;
  return std::move(*best);
}

}  // namespace snl
