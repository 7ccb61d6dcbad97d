#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <sstream>

#include "doctest.h"
#include "snl/errors.hpp"
#include "snl/experiment.hpp"

using namespace snl;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig tiny_config() {
  return parse(
      "task = regression\n"
      "class = smooth\n"
      "n_grid = 32,64,128\n"
      "replicates = 2\n"
      "C0 = 1\n"
      "mc_m = 2000\n"
      "max_iters = 60\n"
      "seed = 11\n");
}

std::string csv_of(const ExperimentConfig& cfg, const RateReport& report) {
  std::ostringstream out;
  write_rate_csv(out, cfg, report);
  return out.str();
}

GroundTruthSpec spec_of(FunctionClass cls, double s = 2.0, double beta = 1.0) {
  GroundTruthSpec spec;
  spec.cls = cls;
  spec.s = s;
  spec.beta = beta;
  return spec;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("config parsing") {
  const auto cfg = parse(
      "# comment\n"
      "task = binary\n"
      "class = piecewise\n"
      "s = 3\n"
      "beta = 1.5\n"
      "d = 2\n"
      "n_grid = 100, 200, 400\n"
      "C0 = auto\n"
      "penalty = group_node\n"
      "accelerated = false\n");
  CHECK(cfg.task == TaskKind::binary());
  CHECK(cfg.truth.cls == FunctionClass::piecewise);
  CHECK(cfg.truth.s == 3.0);
  CHECK(cfg.truth.beta == 1.5);
  CHECK(cfg.d == 2);
  CHECK(cfg.n_grid == std::vector<Index>{100, 200, 400});
  CHECK_FALSE(cfg.c0.has_value());
  CHECK(cfg.penalty == PenaltyKind::Type::group_node);
  CHECK_FALSE(cfg.train.accelerated);

  CHECK(parse("task = multiclass\nK = 4\n").task == TaskKind::multiclass(4));
  CHECK(parse("C0 = 2\n").c0.value() == 2.0);
  CHECK_THROWS_AS(parse("colour = red\n"), UsageError);
  CHECK_THROWS_AS(parse("seed = 1\nseed = 2\n"), UsageError);
  CHECK_THROWS_AS(parse("n_grid = 400,200,800\n"), UsageError);
  CHECK_THROWS_AS(parse("n_grid = 100,200\n"), UsageError);
  CHECK_THROWS_AS(parse("replicates = 0\n"), UsageError);
  CHECK_THROWS_AS(parse("d = two\n"), UsageError);
  CHECK_THROWS_AS(parse("seed\n"), UsageError);
  CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), UsageError);
}

TEST_CASE("theoretical exponent examples") {
  CHECK(theoretical_exponent(spec_of(FunctionClass::smooth), 1, TaskKind::regression()) == doctest::Approx(-0.8));
  CHECK(theoretical_exponent(spec_of(FunctionClass::smooth), 1, TaskKind::binary()) == doctest::Approx(-0.4));
  for (Index d : {1, 2, 5})
    CHECK(theoretical_exponent(spec_of(FunctionClass::analytic), d, TaskKind::regression()) == -1.0);
}

TEST_CASE("exponent table") {
  // Approximation exponents and rates written out per class.
  struct Row {
    GroundTruthSpec spec;
    Index d;
    double tau;
  };
  std::vector<Row> rows;
  for (double s : {1.0, 2.0, 3.5})
    for (Index d : {1, 2, 4}) rows.push_back({spec_of(FunctionClass::smooth, s), d, double(d) / s});
  for (Index d : {1, 3}) rows.push_back({spec_of(FunctionClass::analytic), d, 0.0});
  for (double s : {1.0, 2.0, 4.0}) rows.push_back({spec_of(FunctionClass::besov, s), 1, 1.0 / s});
  for (double s : {1.0, 4.0})
    for (double beta : {0.5, 1.0, 3.0})
      for (Index d : {2, 3})
        rows.push_back({spec_of(FunctionClass::piecewise, s, beta), d,
                        std::max(double(d) / s, 2.0 * double(d - 1) / beta)});
  // Composition of one-dimensional smooth(s) components: t = 1, s* = s.
  for (double s : {1.0, 2.0, 5.0})
    for (Index d : {2, 6}) rows.push_back({spec_of(FunctionClass::composition, s), d, 1.0 / s});

  for (const auto& row : rows) {
    CAPTURE(to_string(row.spec.cls));
    CAPTURE(row.spec.s);
    CAPTURE(row.d);
    CHECK(approximation_rate(row.spec, row.d).tau == doctest::Approx(row.tau).epsilon(1e-15));
    CHECK(theoretical_exponent(row.spec, row.d, TaskKind::regression()) ==
          doctest::Approx(-2.0 / (2.0 + row.tau)).epsilon(1e-15));
    CHECK(theoretical_exponent(row.spec, row.d, TaskKind::binary()) ==
          doctest::Approx(-1.0 / (2.0 + row.tau)).epsilon(1e-15));
    CHECK(theoretical_exponent(row.spec, row.d, TaskKind::multiclass(3)) ==
          doctest::Approx(-1.0 / (2.0 + row.tau)).epsilon(1e-15));
    if (row.spec.cls == FunctionClass::smooth) {
      const double s = row.spec.s, d = double(row.d);
      CHECK(theoretical_exponent(row.spec, row.d, TaskKind::regression()) ==
            doctest::Approx(-2.0 * s / (2.0 * s + d)).epsilon(1e-15));
      CHECK(theoretical_exponent(row.spec, row.d, TaskKind::binary()) ==
            doctest::Approx(-s / (2.0 * s + d)).epsilon(1e-15));
    }
  }
}

TEST_CASE("slope fit") {
  std::vector<std::pair<double, double>> power, flat, scaled;
  for (double n : {256.0, 512.0, 1024.0, 2048.0, 4096.0}) {
    power.emplace_back(n, std::pow(n, -0.8));
    flat.emplace_back(n, 0.3);
    scaled.emplace_back(n, 4.0 * std::pow(n, -0.5));
  }
  const auto p = fit_slope(power);
  CHECK(p.slope == doctest::Approx(-0.8).epsilon(1e-12));
  CHECK(p.std_error <= 1e-12);
  CHECK(std::abs(fit_slope(flat).slope) <= 1e-12);
  const auto s = fit_slope(scaled);
  CHECK(s.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(s.intercept == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  CHECK_THROWS_AS(fit_slope({{1.0, 1.0}, {2.0, 0.5}}), FitError);
  CHECK_THROWS_AS(fit_slope({{1.0, 1.0}, {2.0, 0.0}, {4.0, 0.25}}), FitError);

  // Noisy points: compare with the textbook standard error.
  const std::vector<std::pair<double, double>> noisy = {{100, 0.5}, {200, 0.3}, {400, 0.22}, {800, 0.1}};
  double mx = 0, my = 0;
  for (auto [n, r] : noisy) {
    mx += std::log(n) / 4;
    my += std::log(r) / 4;
  }
  double sxx = 0, sxy = 0;
  for (auto [n, r] : noisy) {
    sxx += (std::log(n) - mx) * (std::log(n) - mx);
    sxy += (std::log(n) - mx) * (std::log(r) - my);
  }
  const double b = sxy / sxx;
  double rss = 0;
  for (auto [n, r] : noisy) rss += std::pow(std::log(r) - my - b * (std::log(n) - mx), 2);
  const auto fit = fit_slope(noisy);
  CHECK(fit.slope == doctest::Approx(b).epsilon(1e-12));
  CHECK(fit.std_error == doctest::Approx(std::sqrt(rss / 2.0 / sxx)).epsilon(1e-12));
}

TEST_CASE("cell seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (Index n : {256, 512, 1024})
    for (int r = 0; r < 10; ++r) seen.insert(cell_seed(1, n, r));
  CHECK(seen.size() == 30);
  CHECK(cell_seed(1, 256, 0) == cell_seed(1, 256, 0));
  CHECK(cell_seed(1, 256, 0) != cell_seed(2, 256, 0));
}

TEST_CASE("rows carry the theory lambda") {
  const auto cfg = tiny_config();
  const auto report = run_rate_experiment(cfg);
  REQUIRE(report.rows.size() == 6);
  for (const auto& row : report.rows) {
    CHECK(row.error.empty());
    CHECK(row.lambda == lambda_theory(row.n, cfg.task, 1.0));
    CHECK(row.risk_l2.has_value());
    CHECK_FALSE(row.misclass_excess.has_value());
  }
  CHECK(report.medians.size() == 3);
  CHECK(report.fit.has_value());
  CHECK(report.theoretical_exponent == doctest::Approx(-0.8));
  CHECK(report.gap().value() == doctest::Approx(report.fit->slope + 0.8));

  const std::string csv = csv_of(cfg, report);
  CHECK(csv.rfind("class,d,s,beta,K,tau,n,replicate,lambda,risk_l2,misclass_excess,logistic_excess,nonzero_params,seed\n", 0) == 0);
  CHECK(csv.find("\nsmooth,1,2,,,0.5,32,0,") != std::string::npos);
  CHECK(summary_line(report).rfind("slope=", 0) == 0);
}

TEST_CASE("binary cells report classification risks") {
  auto cfg = tiny_config();
  cfg.task = TaskKind::binary();
  const auto report = run_rate_experiment(cfg);
  CHECK(report.risk_name == "misclass_excess");
  for (const auto& row : report.rows) {
    CHECK(row.misclass_excess.has_value());
    CHECK(row.logistic_excess.has_value());
    CHECK(*row.misclass_excess >= 0.0);
  }
  CHECK(report.theoretical_exponent == doctest::Approx(-0.4));
}

TEST_CASE("results do not depend on the thread count") {
  const auto cfg = tiny_config();
  setenv("SNL_THREADS", "1", 1);
  CHECK(worker_count() == 1);
  const std::string one = csv_of(cfg, run_rate_experiment(cfg));
  setenv("SNL_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  const std::string three = csv_of(cfg, run_rate_experiment(cfg));
  unsetenv("SNL_THREADS");
  CHECK(one == three);
}

TEST_CASE("degenerate zero truth without noise") {
  auto cfg = tiny_config();
  cfg.truth.cls = FunctionClass::constant;
  cfg.truth.constant = 0.0;
  cfg.noise_sd = 0.0;
  cfg.train.max_iters = 1500;
  const auto report = run_rate_experiment(cfg);
  for (const auto& row : report.rows) CHECK(*row.risk_l2 <= kRiskFloor);
  CHECK_FALSE(report.fit.has_value());
  CHECK_FALSE(report.fit_error.empty());
  CHECK_FALSE(report.gap().has_value());
  CHECK(summary_json(cfg, report).find("\"fit_error\"") != std::string::npos);
}

}  // TEST_SUITE
