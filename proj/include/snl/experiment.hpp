#pragma once

// Config-driven rate experiments over an n-grid.
//
// Config files are flat `key = value` text; `#` starts a comment. Every key
// must be one of the ExperimentConfig keys listed in config_keys().

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "snl/losses.hpp"
#include "snl/optimizer.hpp"
#include "snl/penalties.hpp"
#include "snl/synthetic.hpp"

namespace snl {

struct ExperimentConfig {
  TaskKind task = TaskKind::regression();
  GroundTruthSpec truth{FunctionClass::smooth, 2.0, 1.0, 2, CompositionStructure::additive, 3.0, 0.0};
  Index d = 1;
  SamplerKind sampler = SamplerKind::uniform_scaled;
  double rho = 0.0;
  std::vector<Index> n_grid = {256, 512, 1024, 2048, 4096};
  int replicates = 10;
  PenaltyKind::Type penalty = PenaltyKind::Type::l1;
  std::optional<double> c0;            // nullopt: chosen by validation over kC0Grid
  std::optional<double> lambda;        // overrides lambda_theory when set
  double lambda2_ratio = 1.0;          // sparse_group: λ2 = ratio · λ
  bool bias = true;
  double noise_sd = 0.5;
  Index mc_m = 100000;
  TrainConfig train{1500, 1e-7, 1.0, 0.5, 1, 1.0, 0, true, 10};
  std::uint64_t seed = 1;
  std::string output;

  // diagnose subcommand
  Index sign_draws = 10;
  Index pair_draws = 200;
  Index sparsity = 10;
  double cone = 10.0;

  /// Throws UsageError on inconsistent settings.
  void validate() const;
};

const std::vector<std::string>& config_keys();

/// Parses `key = value` lines; unknown or repeated keys are UsageErrors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Sampler and ground truth shared by every cell of an experiment.
FeatureSampler make_sampler(const ExperimentConfig& cfg, std::uint64_t seed);
GroundTruth experiment_ground_truth(const ExperimentConfig& cfg);
Dataset generate_data(const ExperimentConfig& cfg, const GroundTruth& gt, Index n, std::uint64_t seed);
PenaltyKind experiment_penalty(const ExperimentConfig& cfg, Index n, double c0);

/// Regression: -2/(2+τ). Classification: -1/(2+τ). Log factors are ignored.
double theoretical_exponent(const GroundTruthSpec& spec, Index dim, const TaskKind& task);

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
};

/// OLS of ln(risk) on ln(n). Throws FitError with fewer than 3 points or a risk <= 0.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);

/// Risks at or below this are treated as exact zeros by the rate fit.
inline constexpr double kRiskFloor = 1e-12;

/// splitmix64-derived seed for grid cell (n, replicate).
std::uint64_t cell_seed(std::uint64_t base, Index n, int replicate);

struct CellResult {
  Index n = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  std::optional<double> risk_l2;
  std::optional<double> misclass_excess;
  std::optional<double> logistic_excess;
  Index nonzero_params = 0;
  std::string error;  // non-empty for a failed cell
};

struct RateReport {
  std::vector<CellResult> rows;          // ordered by (n, replicate)
  std::vector<std::pair<double, double>> medians;  // (n, median primary risk)
  double c0 = 0.0;
  std::vector<std::pair<double, double>> validation;  // (C0, validation loss); empty when C0 was fixed
  std::optional<SlopeFit> fit;
  std::string fit_error;
  double theoretical_exponent = 0.0;
  double tau = 0.0;
  std::string risk_name;                 // risk_l2 or misclass_excess
  /// Fraction of adjacent n pairs whose median risk decreases.
  double monotone_fraction = 0.0;

  std::optional<double> gap() const;
};

/// Number of worker threads: SNL_THREADS when set (>= 1), else hardware concurrency.
unsigned worker_count();

/// Trains one cell: sizes the network, draws fresh data, fits and evaluates.
CellResult run_cell(const ExperimentConfig& cfg, const GroundTruth& gt, Index n, int replicate, double c0);

/// Picks C0 from kC0Grid by held-out empirical loss at the middle grid size
/// (ties go to the smaller C0).
double select_c0(const ExperimentConfig& cfg, const GroundTruth& gt,
                 std::vector<std::pair<double, double>>* scores);

RateReport run_rate_experiment(const ExperimentConfig& cfg);

/// Exact header: class,d,s,beta,K,tau,n,replicate,lambda,risk_l2,misclass_excess,logistic_excess,nonzero_params,seed
void write_rate_csv(std::ostream& out, const ExperimentConfig& cfg, const RateReport& report);
std::string summary_json(const ExperimentConfig& cfg, const RateReport& report);
/// `slope=… theory=… gap=…`
std::string summary_line(const RateReport& report);

}  // namespace snl
