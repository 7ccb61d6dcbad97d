#pragma once

// Synthetic designs, ground-truth functions and data generators.
//
// Each ground truth is a concrete representative of an abstract function
// class, tagged with the (tau, r) pair governing how fast sparse ReLU
// networks approximate that class:
//
//   class         representative                                  tau                    r
//   smooth(s)     decaying random cosine series                   d/s                    1
//   analytic      Gaussian-envelope sinusoid                      0                      d+1
//   besov(s)      Doppler-type chirp on x_1 (d = 1)               d/s                    1
//   piecewise     smooth pieces glued along x_2 = h(x_1)          max(d/s, 2(d-1)/beta)  1
//   composition   additive or single-index of smooth components   max_l t_l / s*_l       1
//   constant      g* = c (degenerate inputs)                      0                      0

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "snl/dataset.hpp"
#include "snl/losses.hpp"

namespace snl {

enum class SamplerKind { uniform_scaled, gaussian_truncated_scaled, correlated_gaussian };

SamplerKind parse_sampler_kind(const std::string& name);
std::string to_string(SamplerKind kind);

/// Draws i.i.d. feature rows whose coordinates all have second moment 1.
///   uniform_scaled            Uniform(-√3, √3)
///   gaussian_truncated_scaled N(0,1) truncated to [-6, 6], rescaled to unit second moment
///   correlated_gaussian       equicorrelated N(0, (1-ρ)I + ρ11ᵀ), 0 <= ρ < 1; the
///                             coordinates already have unit variance
class FeatureSampler {
 public:
  FeatureSampler(SamplerKind kind, Index dim, std::uint64_t seed, double rho = 0.0);

  Eigen::MatrixXd sample(Index n);

  SamplerKind kind() const { return kind_; }
  Index dim() const { return dim_; }
  double rho() const { return rho_; }

 private:
  double truncated_normal();

  SamplerKind kind_;
  Index dim_;
  double rho_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Second moment of N(0,1) conditioned on [-6, 6].
double truncated_normal_second_moment();

enum class FunctionClass { smooth, analytic, besov, piecewise, composition, constant };
enum class CompositionStructure { additive, single_index };

FunctionClass parse_function_class(const std::string& name);
std::string to_string(FunctionClass cls);
CompositionStructure parse_composition_structure(const std::string& name);
std::string to_string(CompositionStructure structure);

/// One layer of a composition: t inputs actually used, effective smoothness s*.
/// Linear maps carry s* = +infinity.
struct CompositionLayer {
  double active_inputs;
  double effective_smoothness;
};

struct GroundTruthSpec {
  FunctionClass cls = FunctionClass::smooth;
  double s = 2.0;
  double beta = 1.0;
  int pieces = 2;  // M
  CompositionStructure structure = CompositionStructure::additive;
  double bound = 1.0;      // sup-norm bound B
  double constant = 0.0;   // value for FunctionClass::constant
};

/// Approximation exponents (tau, r) for a class at input dimension d.
struct ApproximationRate {
  double tau;
  double r;
};
ApproximationRate approximation_rate(const GroundTruthSpec& spec, Index dim);

/// τ = max_l t_l / s*_l, skipping layers with infinite s*.
double composition_tau(const std::vector<CompositionLayer>& layers);

/// Scalar component of a ground truth, evaluated on a batch of rows.
class ScalarFunction {
 public:
  virtual ~ScalarFunction() = default;
  virtual Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const = 0;
};

class GroundTruth {
 public:
  GroundTruth(GroundTruthSpec spec, Index dim, std::vector<std::shared_ptr<const ScalarFunction>> components,
              double truncation_tail);

  const GroundTruthSpec& spec() const { return spec_; }
  FunctionClass function_class() const { return spec_.cls; }
  std::string tag() const { return to_string(spec_.cls); }
  Index input_dim() const { return dim_; }
  Index output_dim() const { return static_cast<Index>(components_.size()); }
  double bound() const { return spec_.bound; }
  double tau() const { return rate_.tau; }
  double r() const { return rate_.r; }
  /// Sup-norm of the discarded series tail (0 when nothing was truncated).
  double truncation_tail() const { return truncation_tail_; }

  /// n x output_dim matrix of g*(x_i).
  Eigen::MatrixXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  Eigen::VectorXd operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  GroundTruthSpec spec_;
  Index dim_;
  ApproximationRate rate_;
  std::vector<std::shared_ptr<const ScalarFunction>> components_;
  double truncation_tail_;
};

/// Builds the class representative with `output_dim` independent components
/// (1 for regression/binary, K-1 for multiclass). Throws UsageError on invalid parameters.
GroundTruth make_ground_truth(const GroundTruthSpec& spec, Index dim, Index output_dim,
                              std::uint64_t seed);

/// Y = g*(X) + N(0, noise_sd²).
Dataset gen_regression(const GroundTruth& gt, const Eigen::MatrixXd& x, double noise_sd,
                       std::uint64_t seed);
/// Y ~ Bernoulli(sigmoid(g*(X))).
Dataset gen_binary(const GroundTruth& gt, const Eigen::MatrixXd& x, std::uint64_t seed);
/// Y ~ Multinomial(probs_with_reference(g*(X))), labels 1..K.
Dataset gen_multiclass(const GroundTruth& gt, const Eigen::MatrixXd& x, int classes,
                       std::uint64_t seed);

}  // namespace snl
