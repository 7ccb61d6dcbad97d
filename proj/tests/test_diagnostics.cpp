#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "snl/diagnostics.hpp"
#include "snl/errors.hpp"

using namespace snl;

namespace {

Eigen::MatrixXd random_signs(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  Eigen::MatrixXd s(rows, cols);
  for (Index i = 0; i < s.size(); ++i) s.data()[i] = coin(rng) ? 1.0 : -1.0;
  return s;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("golowich bound") {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(100, 4);
  CHECK(golowich_bound(2, 4, ones) == doctest::Approx(std::sqrt(2.0 * (3.0 + std::log(4.0)) / 100.0) * 10.0));
  CHECK(golowich_bound(2, 4, ones) == doctest::Approx(2.96184).epsilon(1e-5));
  CHECK(golowich_bound(2, 4, Eigen::MatrixXd::Zero(100, 4)) == 0.0);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(40, 3);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  CHECK(golowich_bound(4, 3, 2.0 * x) == doctest::Approx(2.0 * golowich_bound(4, 3, x)).epsilon(1e-14));
}

TEST_CASE("l1 ball projection") {
  Eigen::VectorXd v(3);
  v << 0.2, -0.3, 0.1;
  CHECK(project_l1_ball(v) == v);
  v << 3.0, -1.0, 0.0;
  const Eigen::VectorXd p = project_l1_ball(v);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == 0.0);
  CHECK(p.lpNorm<1>() == doctest::Approx(1.0));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd w(8);
    for (Index i = 0; i < 8; ++i) w[i] = normal(rng);
    const Eigen::VectorXd q = project_l1_ball(w);
    CHECK(q.lpNorm<1>() <= 1.0 + 1e-12);
    // Projection optimality: <w - q, u - q> <= 0 for feasible u (checked at the vertices ±e_i).
    for (Index i = 0; i < 8; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(8);
        u[i] = sgn;
        CHECK((w - q).dot(u - q) <= 1e-10);
      }
    }
  }
}

TEST_CASE("rademacher with zero design") {
  const auto arch = Architecture::make({3, 4, 1}, false);
  RademacherOptions opts;
  opts.sign_draws = 5;
  const auto report = empirical_rademacher(arch, Eigen::MatrixXd::Zero(30, 3), opts);
  CHECK(report.estimate == 0.0);
  CHECK(report.bound.value() == 0.0);
}

TEST_CASE("rademacher estimate never exceeds the bound") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1.7, 1.7);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Index d = 1 + static_cast<Index>(seed % 3);
    Eigen::MatrixXd x(40, d);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = unif(rng);
    const auto arch = Architecture::make({d, 5, 5, 1}, false);
    RademacherOptions opts;
    opts.sign_draws = 5;
    opts.seed = seed;
    const auto report = empirical_rademacher(arch, x, opts);
    CHECK(report.bound.has_value());
    CHECK(report.estimate <= *report.bound);
    CHECK(report.estimate >= 0.0);
    CHECK(report.trials == 5);
  }
}

TEST_CASE("linear rademacher matches the closed form") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const Index n = 50, d = 6;
    Eigen::MatrixXd x(n, d);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    const Eigen::MatrixXd signs = random_signs(1, n, 10 + trial);
    // sup over ||w||_1 <= 1 of <w, Xᵀσ>/√n is the largest |entry| of Xᵀσ/√n.
    const double closed = (x.transpose() * signs.row(0).transpose()).cwiseAbs().maxCoeff() / std::sqrt(double(n));
    CHECK(linear_rademacher_sup(x, signs.row(0).transpose()) == doctest::Approx(closed).epsilon(1e-12));
    const double ascent = rademacher_sup(Architecture::make({d, 1}, false), x, signs, 4, 200, trial);
    CHECK(std::abs(ascent - closed) <= 0.01 * closed);
    CHECK(ascent <= closed * (1.0 + 1e-12));
  }
}

TEST_CASE("gsre on a linear model") {
  const auto arch = Architecture::make({5, 1}, false);
  GsreOptions opts;
  opts.seed = 6;
  const auto report = gsre_kappa_estimate(arch, 3, 3.0, SamplerKind::uniform_scaled, opts);
  CHECK(report.estimate >= 0.8);
  CHECK(report.estimate <= 1.0);
  CHECK(report.trials == 200);
}

TEST_CASE("gsre estimate is non-increasing in pair draws") {
  const auto arch = Architecture::make({2, 4, 1}, true);
  GsreOptions opts;
  opts.mc_points = 5000;
  opts.seed = 8;
  double previous = std::numeric_limits<double>::infinity();
  for (Index draws : {10, 40, 160}) {
    opts.pair_draws = draws;
    const double kappa = gsre_kappa_estimate(arch, 4, 2.0, SamplerKind::uniform_scaled, opts).estimate;
    CHECK(kappa <= previous);
    CHECK(kappa >= 0.0);
    previous = kappa;
  }
}

TEST_CASE("moment condition") {
  const auto wide = moment_condition_check(SamplerKind::uniform_scaled, 1000, 100, 50, 1);
  CHECK(wide.estimate >= 1.0 - 3.0 * wide.std_error);
  CHECK(wide.estimate <= 1.5);
  const auto single = moment_condition_check(SamplerKind::uniform_scaled, 1000, 1, 200, 2);
  CHECK(std::abs(single.estimate - 1.0) <= 3.0 * single.std_error);
  CHECK_THROWS_AS(moment_condition_check(SamplerKind::uniform_scaled, 1000, 1, 5, 2), UsageError);
}

TEST_CASE("vc scale") {
  CHECK(vc_scale(1.0, std::numbers::e) == doctest::Approx(std::numbers::e));
  CHECK(vc_scale(2.0, 10.0) == doctest::Approx(46.0517).epsilon(1e-6));
  CHECK(vc_scale(3.0, 10.0) > vc_scale(2.0, 10.0));
  CHECK(vc_scale(2.0, 11.0) > vc_scale(2.0, 10.0));
}

}  // TEST_SUITE
