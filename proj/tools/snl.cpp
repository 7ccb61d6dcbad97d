// Command-line front end: train, rates, classify-rates, diagnose, gen.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "snl/diagnostics.hpp"
#include "snl/errors.hpp"
#include "snl/evaluation.hpp"
#include "snl/experiment.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<long long> n;
};

snl::ExperimentConfig load(const Options& opt) {
  auto cfg = snl::load_config(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.out.empty()) cfg.output = opt.out;
  return cfg;
}

std::string default_output(const Options& opt, const std::string& suffix) {
  return std::filesystem::path(opt.config).stem().string() + suffix;
}

std::string sibling(const std::string& path, const std::string& extension) {
  return std::filesystem::path(path).replace_extension(extension).string();
}

void write_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw snl::UsageError("cannot write '" + path + "'");
  out << text;
}

snl::Index single_n(const Options& opt, const snl::ExperimentConfig& cfg) {
  if (!opt.n) return cfg.n_grid.front();
  if (*opt.n < 1) throw snl::UsageError("--n must be >= 1");
  return static_cast<snl::Index>(*opt.n);
}

int cmd_rates(const Options& opt, bool classification) {
  auto cfg = load(opt);
  if (cfg.task.is_classification() != classification) {
    throw snl::UsageError(classification ? "classify-rates needs task = binary or multiclass"
                                         : "rates needs task = regression (use classify-rates)");
  }
  if (cfg.output.empty()) cfg.output = default_output(opt, ".csv");
  const auto report = snl::run_rate_experiment(cfg);
  std::ostringstream csv;
  snl::write_rate_csv(csv, cfg, report);
  write_file(cfg.output, csv.str());
  write_file(sibling(cfg.output, ".summary.json"), snl::summary_json(cfg, report));
  std::cout << snl::summary_line(report) << "\n";
  return 0;
}

int cmd_train(const Options& opt) {
  auto cfg = load(opt);
  if (cfg.output.empty()) cfg.output = default_output(opt, ".model.json");
  const snl::Index n = single_n(opt, cfg);
  const auto gt = snl::experiment_ground_truth(cfg);
  double c0 = 0.0;
  if (cfg.c0) c0 = *cfg.c0;
  else if (!cfg.lambda) c0 = snl::select_c0(cfg, gt, nullptr);

  const auto data = snl::generate_data(cfg, gt, n, cfg.seed);
  const auto kind = snl::experiment_penalty(cfg, n, c0);
  const auto arch = snl::size_architecture(n, cfg.d, cfg.task.output_dim(), cfg.bias);
  auto train = cfg.train;
  train.seed = cfg.seed;
  const auto fit = snl::multi_restart_train(arch, data, cfg.task, kind, train);

  nlohmann::ordered_json metrics;
  metrics["n"] = n;
  metrics["dims"] = arch.dims;
  metrics["penalty"] = kind.name();
  metrics["lambda"] = kind.lambda;
  metrics["C0"] = c0;
  metrics["final_objective"] = fit.report.final_objective;
  metrics["iterations"] = fit.report.iterations;
  metrics["converged"] = fit.report.converged;
  metrics["nonzero_params"] = fit.report.nonzero_params;
  metrics["param_count"] = arch.param_count();
  metrics["restart_index_of_best"] = fit.report.restart_index_of_best;
  const auto estimate = snl::as_predictor(fit.net);
  auto sampler = snl::make_sampler(cfg, cfg.seed + 1);
  metrics["risk_l2"] = snl::mc_l2_risk(estimate, gt, sampler, cfg.mc_m).value;
  if (cfg.task.type == snl::TaskKind::Type::binary) {
    auto s = snl::make_sampler(cfg, cfg.seed + 1);
    const auto check = snl::comparison_check(estimate, gt, s, cfg.mc_m);
    metrics["misclass_excess"] = check.misclass.value;
    metrics["logistic_excess"] = check.logistic.value;
  } else if (cfg.task.type == snl::TaskKind::Type::multiclass) {
    auto s = snl::make_sampler(cfg, cfg.seed + 1);
    metrics["misclass_excess"] = snl::misclass_excess_multiclass(estimate, gt, s, cfg.mc_m, cfg.task.classes).value;
  }

  write_file(cfg.output, snl::to_json(fit.net));
  write_file(sibling(cfg.output, ".metrics.json"), metrics.dump(2) + "\n");
  std::cout << "objective=" << fit.report.final_objective << " nonzero=" << fit.report.nonzero_params << "/"
            << arch.param_count() << " risk_l2=" << metrics["risk_l2"].get<double>() << "\n";
  return 0;
}

nlohmann::ordered_json report_json(const snl::DiagnosticReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["estimate"] = r.estimate;
  j["std_error"] = r.std_error;
  j["bound"] = r.bound ? nlohmann::ordered_json(*r.bound) : nlohmann::ordered_json();
  j["trials"] = r.trials;
  j["notes"] = r.notes;
  return j;
}

int cmd_diagnose(const Options& opt) {
  auto cfg = load(opt);
  if (cfg.output.empty()) cfg.output = default_output(opt, ".diagnostics.json");
  const snl::Index n = single_n(opt, cfg);
  const snl::Index out_dim = cfg.task.output_dim();

  auto sampler = snl::make_sampler(cfg, cfg.seed);
  const Eigen::MatrixXd x = sampler.sample(n);
  const auto bias_free = snl::size_architecture(n, cfg.d, out_dim, false);
  snl::RademacherOptions rad;
  rad.sign_draws = cfg.sign_draws;
  rad.seed = cfg.seed;
  const auto arch = snl::size_architecture(n, cfg.d, out_dim, cfg.bias);
  snl::GsreOptions gsre;
  gsre.pair_draws = cfg.pair_draws;
  gsre.mc_points = cfg.mc_m;
  gsre.seed = cfg.seed;

  nlohmann::ordered_json j;
  j["n"] = n;
  j["d"] = cfg.d;
  j["sampler"] = snl::to_string(cfg.sampler);
  j["reports"] = {
      report_json(snl::moment_condition_check(cfg.sampler, n, cfg.d, 50, cfg.seed)),
      report_json(snl::empirical_rademacher(bias_free, x, rad)),
      report_json(snl::gsre_kappa_estimate(arch, cfg.sparsity, cfg.cone, cfg.sampler, gsre)),
  };
  j["vc_scale"] = snl::vc_scale(static_cast<double>(arch.depth()), static_cast<double>(std::max<snl::Index>(cfg.sparsity, 2)));
  write_file(cfg.output, j.dump(2) + "\n");
  for (const auto& r : j["reports"]) {
    std::cout << r["name"].get<std::string>() << "=" << r["estimate"].get<double>();
    if (!r["bound"].is_null()) std::cout << " bound=" << r["bound"].get<double>();
    std::cout << "\n";
  }
  return 0;
}

int cmd_gen(const Options& opt) {
  const auto cfg = load(opt);
  const auto gt = snl::experiment_ground_truth(cfg);
  const auto data = snl::generate_data(cfg, gt, single_n(opt, cfg), cfg.seed);
  if (cfg.output.empty()) {
    snl::write_csv(std::cout, data);
  } else {
    std::ostringstream csv;
    snl::write_csv(csv, data);
    write_file(cfg.output, csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse ReLU network estimators: training, rate experiments and diagnostics"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub, bool with_n) {
    sub->add_option("--config", opt.config, "experiment config (key = value)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--out", opt.out, "override the output path");
    if (with_n) sub->add_option("--n", opt.n, "sample size (default: first n_grid entry)");
  };
  auto* train = app.add_subcommand("train", "fit one estimator; writes model and metrics JSON");
  auto* rates = app.add_subcommand("rates", "regression rate experiment; writes CSV and summary");
  auto* classify = app.add_subcommand("classify-rates", "classification rate experiment; writes CSV and summary");
  auto* diagnose = app.add_subcommand("diagnose", "Rademacher, GSRE and moment diagnostics");
  auto* gen = app.add_subcommand("gen", "emit a synthetic dataset as CSV");
  add_common(train, true);
  add_common(rates, false);
  add_common(classify, false);
  add_common(diagnose, true);
  add_common(gen, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(opt);
    if (*rates) return cmd_rates(opt, false);
    if (*classify) return cmd_rates(opt, true);
    if (*diagnose) return cmd_diagnose(opt);
    if (*gen) return cmd_gen(opt);
  } catch (const snl::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const snl::SizingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const snl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
