#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "snl/network.hpp"
#include "snl/synthetic.hpp"

namespace snl {

struct DiagnosticReport {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> bound;
  Index trials = 0;
  std::string notes;
};

/// √(2(L + 1 + ln d) / n) · √(max_j Σ_i x_ij²) for an n x d design.
double golowich_bound(Index depth, Index input_dim, const Eigen::Ref<const Eigen::MatrixXd>& x);

/// Euclidean projection onto {u : ||u||_1 <= radius} (sort-based, O(S log S)).
Eigen::VectorXd project_l1_ball(const Eigen::Ref<const Eigen::VectorXd>& v, double radius = 1.0);

struct RademacherOptions {
  Index sign_draws = 20;
  Index ascent_restarts = 4;
  Index ascent_iters = 200;
  std::uint64_t seed = 0;
};

/// Lower estimate of the empirical Rademacher complexity of {g_Θ : ||Θ||_1 <= 1}
/// with the 1/√n normalization: per sign draw, the best value found by multi-start
/// projected gradient ascent of (1/√n) Σ_i <σ_i, g_Θ(x_i)>, averaged over draws.
/// The bound field carries golowich_bound, which applies to bias-free networks.
DiagnosticReport empirical_rademacher(const Architecture& arch, const Eigen::Ref<const Eigen::MatrixXd>& x,
                                      const RademacherOptions& options);

/// Best value of (1/√n) Σ_i <σ_i, g_Θ(x_i)> over ||Θ||_1 <= 1 found by projected
/// gradient ascent from `restarts` random starts on the l1 sphere; `signs` is d_L x n.
double rademacher_sup(const Architecture& arch, const Eigen::Ref<const Eigen::MatrixXd>& x,
                      const Eigen::Ref<const Eigen::MatrixXd>& signs, Index restarts, Index iters,
                      std::uint64_t seed);

/// Closed form for a single linear layer without bias: (1/√n) max_j |Σ_i σ_i x_ij|.
double linear_rademacher_sup(const Eigen::Ref<const Eigen::MatrixXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& signs);

struct GsreOptions {
  Index pair_draws = 200;
  Index mc_points = 100000;
  std::uint64_t seed = 0;
};

/// Upper estimate of κ(S0): the smallest ||g_Θ2 - g_Θ1||²_{L2(P_X)} / ||Θ2 - Θ1||²_2
/// over sampled pairs with ||Θ2 - Θ1||_1 <= c0 √S0 ||Θ2 - Θ1||_2. The L2 norm uses
/// one fixed Monte Carlo design drawn before any pair, so the estimate is
/// non-increasing in pair_draws.
DiagnosticReport gsre_kappa_estimate(const Architecture& arch, Index sparsity, double cone_constant,
                                     SamplerKind sampler, const GsreOptions& options);

/// Monte Carlo estimate of E max_j (1/n) Σ_i X_ij² over `reps` independent designs.
DiagnosticReport moment_condition_check(SamplerKind sampler, Index n, Index dim, Index reps,
                                        std::uint64_t seed);

/// S0 · L0 · ln S0 (scale only).
double vc_scale(double depth, double sparsity);

}  // namespace snl
