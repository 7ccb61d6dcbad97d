#pragma once

// Reference computations used by the tests. None of these call into the
// library code they check.

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <Eigen/Dense>

namespace oracle {

/// Central finite-difference gradient of a scalar function.
inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& at, double h) {
  Eigen::VectorXd grad(at.size());
  Eigen::VectorXd probe = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    probe[i] = at[i] + h;
    const double up = f(probe);
    probe[i] = at[i] - h;
    const double down = f(probe);
    probe[i] = at[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// |a - b| / max(|a|, |b|, floor) for each coordinate; returns the worst.
inline double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

/// Consensus ADMM for argmin_u ½||u - v||² + a||u||_2 + b||u||_1, built only from
/// the separate proximal maps of the two norms.
inline Eigen::VectorXd sparse_group_prox_admm(const Eigen::VectorXd& v, double a, double b,
                                              int iters = 200000, double rho = 1.0) {
  const Eigen::Index n = v.size();
  Eigen::VectorXd z = v, x1 = v, x2 = v, x3 = v;
  Eigen::VectorXd u1 = Eigen::VectorXd::Zero(n), u2 = u1, u3 = u1;
  for (int it = 0; it < iters; ++it) {
    // ½||x - v||² + (ρ/2)||x - z + u||²
    x1 = (v + rho * (z - u1)) / (1.0 + rho);
    // a||x||_2 block shrink
    const Eigen::VectorXd w2 = z - u2;
    const double nw = w2.norm();
    x2 = nw > a / rho ? Eigen::VectorXd((1.0 - a / (rho * nw)) * w2) : Eigen::VectorXd::Zero(n);
    // b||x||_1 entrywise shrink
    const Eigen::VectorXd w3 = z - u3;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = std::abs(w3[i]) - b / rho;
      x3[i] = m > 0.0 ? std::copysign(m, w3[i]) : 0.0;
    }
    const Eigen::VectorXd z_old = z;
    z = (x1 + u1 + x2 + u2 + x3 + u3) / 3.0;
    u1 += x1 - z;
    u2 += x2 - z;
    u3 += x3 - z;
    const double primal = std::max({(x1 - z).norm(), (x2 - z).norm(), (x3 - z).norm()});
    if (primal < 1e-14 && (z - z_old).norm() < 1e-14) break;
  }
  // Recover exact zeros in the l1 block where the consensus has converged there.
  return x3;
}

/// Trapezoid rule for ∫_a^b f with `nodes` equally spaced nodes.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, long nodes) {
  const double h = (b - a) / static_cast<double>(nodes - 1);
  double sum = 0.5 * (f(a) + f(b));
  for (long i = 1; i < nodes - 1; ++i) sum += f(a + h * static_cast<double>(i));
  return sum * h;
}

inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace oracle

namespace oracle {

/// Objective of a 1-3-1 ReLU net with biases under squared loss plus λ||θ||_1,
/// written out by hand. θ layout: w0[3], b0[3], w1[3], b1.
struct TinyNet {
  const Eigen::VectorXd& x;
  const Eigen::VectorXd& y;
  double lambda;

  double value(const double* t) const {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double out = t[9];
      for (int k = 0; k < 3; ++k) out += t[6 + k] * std::max(t[k] * x[i] + t[3 + k], 0.0);
      loss += (out - y[i]) * (out - y[i]);
    }
    double l1 = 0.0;
    for (int j = 0; j < 10; ++j) l1 += std::abs(t[j]);
    return loss / static_cast<double>(x.size()) + lambda * l1;
  }

  // Gradient of the smooth part plus λ·sign(θ) as a subgradient of the penalty.
  void gradient(const double* t, double* g) const {
    for (int j = 0; j < 10; ++j) g[j] = 0.0;
    const double scale = 2.0 / static_cast<double>(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double hidden[3];
      double out = t[9];
      for (int k = 0; k < 3; ++k) {
        hidden[k] = t[k] * x[i] + t[3 + k];
        out += t[6 + k] * std::max(hidden[k], 0.0);
      }
      const double r = scale * (out - y[i]);
      g[9] += r;
      for (int k = 0; k < 3; ++k) {
        g[6 + k] += r * std::max(hidden[k], 0.0);
        if (hidden[k] > 0.0) {
          g[k] += r * t[6 + k] * x[i];
          g[3 + k] += r * t[6 + k];
        }
      }
    }
    for (int j = 0; j < 10; ++j) g[j] += lambda * (t[j] > 0.0 ? 1.0 : (t[j] < 0.0 ? -1.0 : 0.0));
  }
};

/// Best objective over `draws` uniform points in [-box, box]^10, each polished
/// by `polish` fixed-step (sub)gradient steps.
inline double random_search_polish(const TinyNet& net, long draws, int polish, double box, double step,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-box, box);
  double best = std::numeric_limits<double>::infinity();
  double t[10], g[10];
  for (long draw = 0; draw < draws; ++draw) {
    for (double& v : t) v = unif(rng);
    best = std::min(best, net.value(t));
    for (int it = 0; it < polish; ++it) {
      net.gradient(t, g);
      for (int j = 0; j < 10; ++j) t[j] -= step * g[j];
      const double v = net.value(t);
      if (!std::isfinite(v)) break;
      best = std::min(best, v);
    }
  }
  return best;
}

}  // namespace oracle
