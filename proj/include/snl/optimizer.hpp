#pragma once

#include <cstdint>
#include <vector>

#include "snl/dataset.hpp"
#include "snl/losses.hpp"
#include "snl/network.hpp"
#include "snl/penalties.hpp"

namespace snl {

struct TrainConfig {
  int max_iters = 2000;
  double tol = 1e-7;              // relative objective change over `window` accepted steps
  double step0 = 1.0;
  double backtrack_factor = 0.5;
  int restarts = 1;
  double init_scale = 1.0;
  std::uint64_t seed = 0;
  bool accelerated = false;       // momentum with objective-based restart
  int window = 10;

  /// Throws UsageError when a field is out of range.
  void validate() const;
};

struct TrainReport {
  double final_objective = 0.0;
  std::vector<double> objective_trace;  // initial value, then one entry per accepted step
  int iterations = 0;
  Index nonzero_params = 0;
  bool converged = false;
  int restart_index_of_best = 0;
};

struct TrainResult {
  Network net;
  TrainReport report;
};

/// Mean loss over the sample and, optionally, its parameter gradient.
struct SmoothEval {
  double value = 0.0;
  ParamVector grad;
};

/// (1/n) Σ ℓ(Y_i, g(X_i)).
SmoothEval empirical_loss(const Network& net, const Dataset& data, bool with_grad);

/// (1/n) Σ ℓ(Y_i, g(X_i)) + Pen(θ).
double objective(const Network& net, const Dataset& data, const TaskKind& task,
                 const PenaltyKind& kind);

/// Proximal gradient descent with backtracking on the composite objective.
/// Every accepted step satisfies the quadratic upper-bound test on the smooth
/// part and does not increase the composite objective. Throws TrainingError
/// if the starting objective is not finite.
TrainResult ista_train(const Network& net0, const Dataset& data, const TaskKind& task,
                       const PenaltyKind& kind, const TrainConfig& cfg);

/// Runs ista_train from cfg.restarts initializations (seed + index) and keeps
/// the run with the lowest final objective (ties go to the lower index).
TrainResult multi_restart_train(const Architecture& arch, const Dataset& data, const TaskKind& task,
                                const PenaltyKind& kind, const TrainConfig& cfg);

}  // namespace snl
