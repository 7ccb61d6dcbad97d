#include "snl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "snl/errors.hpp"
#include "snl/evaluation.hpp"

namespace snl {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw UsageError("key '" + key + "': expected a number, got '" + value + "'");
  return out;
}

long long parse_integer(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw UsageError("key '" + key + "': expected an integer, got '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw UsageError("key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<Index> parse_grid(const std::string& key, const std::string& value) {
  std::vector<Index> out;
  std::string token;
  std::istringstream in(value);
  while (std::getline(in, token, ',')) {
    token = trim(token);
    if (!token.empty()) out.push_back(static_cast<Index>(parse_integer(key, token)));
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent sub-streams of one cell seed.
enum Stream : std::uint64_t { kFeatures = 1, kLabels = 2, kInit = 3, kEval = 4, kValidation = 5 };

std::uint64_t substream(std::uint64_t seed, Stream stream) { return splitmix64(seed ^ (stream * 0xd1b54a32d192ed03ULL)); }

bool uses_s(FunctionClass cls) {
  return cls == FunctionClass::smooth || cls == FunctionClass::besov || cls == FunctionClass::piecewise ||
         cls == FunctionClass::composition;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size();
  return k % 2 == 1 ? values[k / 2] : 0.5 * (values[k / 2 - 1] + values[k / 2]);
}

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "task",   "class",          "d",          "s",          "beta",      "M",          "structure",
      "B",      "constant",       "K",          "sampler",    "rho",       "n_grid",     "replicates",
      "penalty", "C0",            "lambda",     "lambda2_ratio", "bias",   "noise_sd",   "mc_m",
      "max_iters", "tol",         "step0",      "backtrack_factor", "restarts", "init_scale", "accelerated",
      "window", "seed",           "output",     "sign_draws", "pair_draws", "S0",        "cone"};
  return keys;
}

void ExperimentConfig::validate() const {
  if (d < 1) throw UsageError("d must be >= 1");
  if (n_grid.size() < 3) throw UsageError("n_grid needs at least 3 sizes for the slope fit");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw UsageError("n_grid entries must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw UsageError("n_grid must be strictly increasing");
  }
  if (replicates < 1) throw UsageError("replicates must be >= 1");
  if (c0 && !(*c0 > 0.0)) throw UsageError("C0 must be positive");
  if (lambda && !(*lambda >= 0.0)) throw UsageError("lambda must be >= 0");
  if (!(lambda2_ratio >= 0.0)) throw UsageError("lambda2_ratio must be >= 0");
  if (!(noise_sd >= 0.0)) throw UsageError("noise_sd must be >= 0");
  if (mc_m < 2) throw UsageError("mc_m must be >= 2");
  if (!(rho >= 0.0 && rho < 1.0)) throw UsageError("rho must lie in [0, 1)");
  if (sign_draws < 1 || pair_draws < 1 || sparsity < 1) throw UsageError("diagnostic counts must be >= 1");
  if (!(cone > 0.0)) throw UsageError("cone must be positive");
  train.validate();
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw UsageError("unknown config key '" + key + "'");
    if (!entries.emplace(key, value).second) throw UsageError("config key '" + key + "' given twice");
  }

  std::string task = "regression";
  long long classes = 3;
  for (const auto& [key, value] : entries) {
    if (key == "task") task = value;
    else if (key == "class") cfg.truth.cls = parse_function_class(value);
    else if (key == "d") cfg.d = static_cast<Index>(parse_integer(key, value));
    else if (key == "s") cfg.truth.s = parse_real(key, value);
    else if (key == "beta") cfg.truth.beta = parse_real(key, value);
    else if (key == "M") cfg.truth.pieces = static_cast<int>(parse_integer(key, value));
    else if (key == "structure") cfg.truth.structure = parse_composition_structure(value);
    else if (key == "B") cfg.truth.bound = parse_real(key, value);
    else if (key == "constant") cfg.truth.constant = parse_real(key, value);
    else if (key == "K") classes = parse_integer(key, value);
    else if (key == "sampler") cfg.sampler = parse_sampler_kind(value);
    else if (key == "rho") cfg.rho = parse_real(key, value);
    else if (key == "n_grid") cfg.n_grid = parse_grid(key, value);
    else if (key == "replicates") cfg.replicates = static_cast<int>(parse_integer(key, value));
    else if (key == "penalty") cfg.penalty = parse_penalty_type(value);
    else if (key == "C0") cfg.c0 = value == "auto" ? std::nullopt : std::optional<double>(parse_real(key, value));
    else if (key == "lambda") cfg.lambda = parse_real(key, value);
    else if (key == "lambda2_ratio") cfg.lambda2_ratio = parse_real(key, value);
    else if (key == "bias") cfg.bias = parse_bool(key, value);
    else if (key == "noise_sd") cfg.noise_sd = parse_real(key, value);
    else if (key == "mc_m") cfg.mc_m = static_cast<Index>(parse_integer(key, value));
    else if (key == "max_iters") cfg.train.max_iters = static_cast<int>(parse_integer(key, value));
    else if (key == "tol") cfg.train.tol = parse_real(key, value);
    else if (key == "step0") cfg.train.step0 = parse_real(key, value);
    else if (key == "backtrack_factor") cfg.train.backtrack_factor = parse_real(key, value);
    else if (key == "restarts") cfg.train.restarts = static_cast<int>(parse_integer(key, value));
    else if (key == "init_scale") cfg.train.init_scale = parse_real(key, value);
    else if (key == "accelerated") cfg.train.accelerated = parse_bool(key, value);
    else if (key == "window") cfg.train.window = static_cast<int>(parse_integer(key, value));
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_integer(key, value));
    else if (key == "output") cfg.output = value;
    else if (key == "sign_draws") cfg.sign_draws = static_cast<Index>(parse_integer(key, value));
    else if (key == "pair_draws") cfg.pair_draws = static_cast<Index>(parse_integer(key, value));
    else if (key == "S0") cfg.sparsity = static_cast<Index>(parse_integer(key, value));
    else if (key == "cone") cfg.cone = parse_real(key, value);
  }

  if (task == "regression") cfg.task = TaskKind::regression();
  else if (task == "binary") cfg.task = TaskKind::binary();
  else if (task == "multiclass") cfg.task = TaskKind::multiclass(static_cast<int>(classes));
  else throw UsageError("unknown task '" + task + "' (regression, binary, multiclass)");
  if (entries.count("K") && task != "multiclass") throw UsageError("K is only valid for task = multiclass");

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return parse_config(in);
}

FeatureSampler make_sampler(const ExperimentConfig& cfg, std::uint64_t seed) {
  return FeatureSampler(cfg.sampler, cfg.d, seed, cfg.rho);
}

GroundTruth experiment_ground_truth(const ExperimentConfig& cfg) {
  return make_ground_truth(cfg.truth, cfg.d, cfg.task.output_dim(), cfg.seed);
}

Dataset generate_data(const ExperimentConfig& cfg, const GroundTruth& gt, Index n, std::uint64_t seed) {
  FeatureSampler sampler = make_sampler(cfg, substream(seed, kFeatures));
  const Eigen::MatrixXd x = sampler.sample(n);
  const std::uint64_t label_seed = substream(seed, kLabels);
  Dataset data;
  switch (cfg.task.type) {
    case TaskKind::Type::regression:
      data = gen_regression(gt, x, cfg.noise_sd, label_seed);
      break;
    case TaskKind::Type::binary:
      data = gen_binary(gt, x, label_seed);
      break;
    case TaskKind::Type::multiclass:
      data = gen_multiclass(gt, x, cfg.task.classes, label_seed);
      break;
  }
  data.seed = seed;
  return data;
}

PenaltyKind experiment_penalty(const ExperimentConfig& cfg, Index n, double c0) {
  const double lambda = cfg.lambda ? *cfg.lambda : lambda_theory(n, cfg.task, c0);
  return PenaltyKind::make(cfg.penalty, lambda,
                           cfg.penalty == PenaltyKind::Type::sparse_group ? cfg.lambda2_ratio * lambda : 0.0);
}

double theoretical_exponent(const GroundTruthSpec& spec, Index dim, const TaskKind& task) {
  const double tau = approximation_rate(spec, dim).tau;
  return (task.is_classification() ? -1.0 : -2.0) / (2.0 + tau);
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw FitError("slope fit needs at least 3 points");
  const double k = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  std::vector<std::pair<double, double>> logs;
  for (const auto& [n, risk] : points) {
    if (!(risk > 0.0) || !std::isfinite(risk)) throw FitError("slope fit needs positive finite risks");
    if (!(n > 0.0)) throw FitError("slope fit needs positive n");
    logs.emplace_back(std::log(n), std::log(risk));
    mx += logs.back().first;
    my += logs.back().second;
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
  }
  if (!(sxx > 0.0)) throw FitError("slope fit needs distinct n values");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (const auto& [lx, ly] : logs) {
    const double resid = ly - fit.intercept - fit.slope * lx;
    ssr += resid * resid;
  }
  fit.std_error = std::sqrt(ssr / (k - 2.0) / sxx);
  return fit;
}

std::uint64_t cell_seed(std::uint64_t base, Index n, int replicate) {
  return splitmix64(splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(n))) +
                    static_cast<std::uint64_t>(static_cast<std::int64_t>(replicate)));
}

std::optional<double> RateReport::gap() const {
  if (!fit) return std::nullopt;
  return fit->slope - theoretical_exponent;
}

unsigned worker_count() {
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SNL_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) workers = static_cast<unsigned>(cap);
  }
  return workers;
}

namespace {

TrainResult fit_cell(const ExperimentConfig& cfg, const Dataset& data, const PenaltyKind& kind,
                     std::uint64_t seed) {
  const Architecture arch = size_architecture(data.size(), cfg.d, cfg.task.output_dim(), cfg.bias);
  TrainConfig train = cfg.train;
  train.seed = substream(seed, kInit);
  return multi_restart_train(arch, data, cfg.task, kind, train);
}

}  // namespace

CellResult run_cell(const ExperimentConfig& cfg, const GroundTruth& gt, Index n, int replicate, double c0) {
  CellResult cell;
  cell.n = n;
  cell.replicate = replicate;
  cell.seed = cell_seed(cfg.seed, n, replicate);
  const PenaltyKind kind = experiment_penalty(cfg, n, c0);
  cell.lambda = kind.lambda;
  try {
    const Dataset data = generate_data(cfg, gt, n, cell.seed);
    const TrainResult fit = fit_cell(cfg, data, kind, cell.seed);
    cell.nonzero_params = fit.report.nonzero_params;

    const Predictor estimate = as_predictor(fit.net);
    const std::uint64_t eval_seed = substream(cell.seed, kEval);
    // Each estimator gets a sampler on the same stream, so all risks share one design.
    auto sampler = [&] { return make_sampler(cfg, eval_seed); };
    {
      auto s = sampler();
      cell.risk_l2 = mc_l2_risk(estimate, gt, s, cfg.mc_m).value;
    }
    if (cfg.task.type == TaskKind::Type::binary) {
      auto s1 = sampler();
      cell.misclass_excess = misclass_excess_binary(estimate, gt, s1, cfg.mc_m).value;
      auto s2 = sampler();
      cell.logistic_excess = logistic_excess_risk(estimate, gt, s2, cfg.mc_m).value;
    } else if (cfg.task.type == TaskKind::Type::multiclass) {
      auto s1 = sampler();
      cell.misclass_excess = misclass_excess_multiclass(estimate, gt, s1, cfg.mc_m, cfg.task.classes).value;
    }
  } catch (const Error& e) {
    cell.error = e.what();
  }
  return cell;
}

double select_c0(const ExperimentConfig& cfg, const GroundTruth& gt,
                 std::vector<std::pair<double, double>>* scores) {
  const Index n = cfg.n_grid[cfg.n_grid.size() / 2];
  const std::uint64_t seed = substream(cfg.seed, kValidation);
  const Dataset train = generate_data(cfg, gt, n, seed);
  const Dataset held_out = generate_data(cfg, gt, n, splitmix64(seed));

  std::vector<double> losses(kC0Grid.size(), std::numeric_limits<double>::infinity());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < kC0Grid.size(); i = next++) {
      try {
        const auto fit = fit_cell(cfg, train, experiment_penalty(cfg, n, kC0Grid[i]), seed);
        losses[i] = empirical_loss(fit.net, held_out, false).value;
      } catch (const Error&) {
        // leave +inf: this C0 cannot be selected
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(kC0Grid.size()));
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::size_t best = 0;
  for (std::size_t i = 1; i < losses.size(); ++i)
    if (losses[i] < losses[best]) best = i;
  if (!std::isfinite(losses[best])) throw TrainingError("C0 validation failed for every grid value", {});
  if (scores) {
    scores->clear();
    for (std::size_t i = 0; i < losses.size(); ++i) scores->emplace_back(kC0Grid[i], losses[i]);
  }
  return kC0Grid[best];
}

RateReport run_rate_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const GroundTruth gt = experiment_ground_truth(cfg);
  RateReport report;
  report.tau = gt.tau();
  report.theoretical_exponent = theoretical_exponent(cfg.truth, cfg.d, cfg.task);
  report.risk_name = cfg.task.is_classification() ? "misclass_excess" : "risk_l2";
  if (cfg.c0) {
    report.c0 = *cfg.c0;
  } else if (cfg.lambda) {
    report.c0 = 0.0;  // λ overridden; C0 unused
  } else {
    report.c0 = select_c0(cfg, gt, &report.validation);
  }

  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
  report.rows.resize(cfg.n_grid.size() * reps);
  // Largest n first so long cells do not trail at the end of the schedule.
  std::vector<std::size_t> order(report.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < order.size(); k = next++) {
      const std::size_t slot = order[k];
      report.rows[slot] = run_cell(cfg, gt, cfg.n_grid[slot / reps], static_cast<int>(slot % reps), report.c0);
    }
  };
  std::vector<std::thread> pool;
  const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(order.size()));
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    std::vector<double> risks;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& row = report.rows[i * reps + r];
      const auto& risk = cfg.task.is_classification() ? row.misclass_excess : row.risk_l2;
      if (row.error.empty() && risk) risks.push_back(*risk);
    }
    if (!risks.empty()) report.medians.emplace_back(static_cast<double>(cfg.n_grid[i]), median(risks));
  }

  if (report.medians.size() > 1) {
    std::size_t decreasing = 0;
    for (std::size_t i = 1; i < report.medians.size(); ++i)
      if (report.medians[i].second < report.medians[i - 1].second) ++decreasing;
    report.monotone_fraction = static_cast<double>(decreasing) / static_cast<double>(report.medians.size() - 1);
  }

  try {
    for (const auto& [n, risk] : report.medians) {
      if (risk <= kRiskFloor) throw FitError("median risk at n=" + format_double(n) + " is zero or below the floor");
    }
    report.fit = fit_slope(report.medians);
  } catch (const FitError& e) {
    report.fit_error = e.what();
  }
  return report;
}

void write_rate_csv(std::ostream& out, const ExperimentConfig& cfg, const RateReport& report) {
  out << "class,d,s,beta,K,tau,n,replicate,lambda,risk_l2,misclass_excess,logistic_excess,nonzero_params,seed\n";
  const std::string s = uses_s(cfg.truth.cls) ? format_double(cfg.truth.s) : "";
  const std::string beta = cfg.truth.cls == FunctionClass::piecewise ? format_double(cfg.truth.beta) : "";
  const std::string k = cfg.task.type == TaskKind::Type::multiclass ? std::to_string(cfg.task.classes) : "";
  for (const auto& row : report.rows) {
    out << to_string(cfg.truth.cls) << ',' << cfg.d << ',' << s << ',' << beta << ',' << k << ','
        << format_double(report.tau) << ',' << row.n << ',' << row.replicate << ',' << format_double(row.lambda)
        << ',' << optional_field(row.risk_l2) << ',' << optional_field(row.misclass_excess) << ','
        << optional_field(row.logistic_excess) << ',';
    if (row.error.empty()) out << row.nonzero_params;
    out << ',' << row.seed << '\n';
  }
}

std::string summary_json(const ExperimentConfig& cfg, const RateReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["task"] = cfg.task.name();
  j["class"] = to_string(cfg.truth.cls);
  j["d"] = cfg.d;
  j["tau"] = report.tau;
  j["risk"] = report.risk_name;
  j["C0"] = report.c0;
  if (!report.validation.empty()) {
    ordered_json scores = ordered_json::array();
    for (const auto& [c0, loss] : report.validation) {
      scores.push_back({{"C0", c0}, {"validation_loss", std::isfinite(loss) ? ordered_json(loss) : ordered_json()}});
    }
    j["C0_validation"] = scores;
  }
  ordered_json medians = ordered_json::array();
  for (const auto& [n, risk] : report.medians) medians.push_back({{"n", n}, {"median_risk", risk}});
  j["medians"] = medians;
  j["fitted_slope"] = report.fit ? ordered_json(report.fit->slope) : ordered_json();
  j["slope_std_error"] = report.fit ? ordered_json(report.fit->std_error) : ordered_json();
  j["theoretical_exponent"] = report.theoretical_exponent;
  const auto gap = report.gap();
  j["gap"] = gap ? ordered_json(*gap) : ordered_json();
  j["within_band"] = gap ? ordered_json(std::abs(*gap) <= 0.25) : ordered_json();
  j["monotone_fraction"] = report.monotone_fraction;
  j["fit_error"] = report.fit_error.empty() ? ordered_json() : ordered_json(report.fit_error);
  ordered_json failed = ordered_json::array();
  for (const auto& row : report.rows) {
    if (!row.error.empty()) failed.push_back({{"n", row.n}, {"replicate", row.replicate}, {"error", row.error}});
  }
  j["failed_cells"] = failed;
  return j.dump(2) + "\n";
}

std::string summary_line(const RateReport& report) {
  std::ostringstream out;
  out.precision(4);
  if (report.fit) {
    out << "slope=" << report.fit->slope << " theory=" << report.theoretical_exponent << " gap=" << *report.gap();
  } else {
    out << "slope=NA theory=" << report.theoretical_exponent << " gap=NA (" << report.fit_error << ")";
  }
  return out.str();
}

}  // namespace snl
