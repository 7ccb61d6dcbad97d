#include "snl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "snl/errors.hpp"

namespace snl {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kTruncation = 6.0;
constexpr double kTailTarget = 1e-4;
constexpr Index kMaxSeriesTerms = 2000;
constexpr Index kEvalBlock = 2048;
// Keeps Σ|a_j| strictly below B so rounding cannot push |g*| past the bound.
constexpr double kBoundSlack = 1.0 - 1e-12;

// Σ_j a_j cos(<ω_j, x> + φ_j), evaluated in row blocks to bound memory.
class CosineSeries final : public ScalarFunction {
 public:
  CosineSeries(Eigen::MatrixXd freq, Eigen::VectorXd amp, Eigen::VectorXd phase)
      : freq_(std::move(freq)), amp_(std::move(amp)), phase_(std::move(phase)) {}

  void append(const CosineSeries& other) {
    const Index old = amp_.size();
    const Index extra = other.amp_.size();
    freq_.conservativeResize(old + extra, Eigen::NoChange);
    freq_.bottomRows(extra) = other.freq_;
    amp_.conservativeResize(old + extra);
    amp_.tail(extra) = other.amp_;
    phase_.conservativeResize(old + extra);
    phase_.tail(extra) = other.phase_;
  }

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
    Eigen::VectorXd out(x.rows());
    for (Index start = 0; start < x.rows(); start += kEvalBlock) {
      const Index len = std::min(kEvalBlock, x.rows() - start);
      Eigen::MatrixXd arg = x.middleRows(start, len) * freq_.transpose();
      arg.rowwise() += phase_.transpose();
      out.segment(start, len) = arg.array().cos().matrix() * amp_;
    }
    return out;
  }

 private:
  Eigen::MatrixXd freq_;  // J x d
  Eigen::VectorXd amp_;
  Eigen::VectorXd phase_;
};

class GaussianSinusoid final : public ScalarFunction {
 public:
  GaussianSinusoid(Eigen::VectorXd w, double bound) : w_(std::move(w)), bound_(bound) {}

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
    const Eigen::ArrayXd envelope = (-0.5 * x.rowwise().squaredNorm().array()).exp();
    return (bound_ * kBoundSlack * envelope * (x * w_).array().sin()).matrix();
  }

 private:
  Eigen::VectorXd w_;
  double bound_;
};

// 2B √(u(1-u)) sin(2π·1.05 / (u + 0.05)) with u = (x_1 + √3) / (2√3) clamped to [0, 1].
class Doppler final : public ScalarFunction {
 public:
  explicit Doppler(double bound) : bound_(bound) {}

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
    Eigen::VectorXd out(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
      const double u = std::clamp((x(i, 0) + kSqrt3) / (2.0 * kSqrt3), 0.0, 1.0);
      out[i] = 2.0 * bound_ * kBoundSlack * std::sqrt(u * (1.0 - u)) *
               std::sin(2.0 * std::numbers::pi * 1.05 / (u + 0.05));
    }
    return out;
  }

 private:
  double bound_;
};

// Region m = #{k : x_2 >= h(x_1) + offset_k}; piece m is used on region m.
class Piecewise final : public ScalarFunction {
 public:
  Piecewise(CosineSeries boundary, std::vector<double> offsets, std::vector<CosineSeries> pieces)
      : boundary_(std::move(boundary)), offsets_(std::move(offsets)), pieces_(std::move(pieces)) {}

  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
    const Eigen::VectorXd h = boundary_.evaluate(x);
    std::vector<Eigen::VectorXd> values;
    values.reserve(pieces_.size());
    for (const auto& piece : pieces_) values.push_back(piece.evaluate(x));
    Eigen::VectorXd out(x.rows());
    for (Index i = 0; i < x.rows(); ++i) {
      std::size_t region = 0;
      for (double off : offsets_) {
        if (x(i, 1) >= h[i] + off) ++region;
      }
      out[i] = values[region][i];
    }
    return out;
  }

 private:
  CosineSeries boundary_;
  std::vector<double> offsets_;
  std::vector<CosineSeries> pieces_;
};

class ConstantFunction final : public ScalarFunction {
 public:
  explicit ConstantFunction(double value) : value_(value) {}
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const override {
    return Eigen::VectorXd::Constant(x.rows(), value_);
  }

 private:
  double value_;
};

struct SeriesPlan {
  Index terms;
  double norm;  // Σ_{j<=terms} j^{-p}
  double tail;  // bound on sup of the discarded tail for sup-norm `bound`
};

// Smallest J with the (integral-bounded) relative tail below kTailTarget, capped.
SeriesPlan plan_series(double decay, double bound) {
  double norm = 0.0;
  for (Index j = 1;; ++j) {
    norm += std::pow(static_cast<double>(j), -decay);
    // Σ_{i>j} i^{-p} diverges for p <= 1; only the term cap applies then.
    const double tail = decay > 1.0
                            ? bound * std::pow(static_cast<double>(j), 1.0 - decay) / ((decay - 1.0) * norm)
                            : std::numeric_limits<double>::infinity();
    if (tail < kTailTarget || j == kMaxSeriesTerms) return {j, norm, tail};
  }
}

Eigen::VectorXd random_unit(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (Index k = 0; k < dim; ++k) v[k] = normal(rng);
  } while (v.norm() == 0.0);
  return v.normalized();
}

// Series with a_j ∝ j^{-decay}, |ω_j| = jπ/√3 along `direction` (or a fresh random
// unit direction per term when `direction` is empty), Σ|a_j| = bound.
CosineSeries make_series(Index dim, double decay, double bound, const Eigen::VectorXd* direction,
                         std::mt19937_64& rng, double* tail_out) {
  const auto plan = plan_series(decay, bound);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  Eigen::MatrixXd freq(plan.terms, dim);
  Eigen::VectorXd amp(plan.terms);
  Eigen::VectorXd phase(plan.terms);
  for (Index j = 1; j <= plan.terms; ++j) {
    const Eigen::VectorXd dir = direction ? *direction : random_unit(dim, rng);
    freq.row(j - 1) = (static_cast<double>(j) * std::numbers::pi / kSqrt3) * dir.transpose();
    amp[j - 1] = bound * kBoundSlack * std::pow(static_cast<double>(j), -decay) / plan.norm;
    phase[j - 1] = phase_dist(rng);
  }
  if (tail_out) *tail_out = std::max(*tail_out, plan.tail);
  return CosineSeries(std::move(freq), std::move(amp), std::move(phase));
}

double smooth_decay(double s) { return s + 0.5 + 0.01; }

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

}  // namespace

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "uniform_scaled" || name == "uniform") return SamplerKind::uniform_scaled;
  if (name == "gaussian_truncated_scaled" || name == "gaussian") return SamplerKind::gaussian_truncated_scaled;
  if (name == "correlated_gaussian") return SamplerKind::correlated_gaussian;
  throw UsageError("unknown sampler '" + name + "'");
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::uniform_scaled:
      return "uniform_scaled";
    case SamplerKind::gaussian_truncated_scaled:
      return "gaussian_truncated_scaled";
    case SamplerKind::correlated_gaussian:
      return "correlated_gaussian";
  }
  return "unknown";
}

double truncated_normal_second_moment() {
  // E[Z² | |Z| <= a] = 1 - 2aφ(a) / (2Φ(a) - 1)
  const double a = kTruncation;
  const double density = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
  const double mass = std::erf(a / std::numbers::sqrt2);
  return 1.0 - 2.0 * a * density / mass;
}

FeatureSampler::FeatureSampler(SamplerKind kind, Index dim, std::uint64_t seed, double rho)
    : kind_(kind), dim_(dim), rho_(rho), rng_(seed) {
  require(dim >= 1, "sampler dimension must be >= 1");
  require(rho >= 0.0 && rho < 1.0, "equicorrelation must lie in [0, 1)");
}

double FeatureSampler::truncated_normal() {
  for (;;) {
    const double z = normal_(rng_);
    if (std::abs(z) <= kTruncation) return z;
  }
}

Eigen::MatrixXd FeatureSampler::sample(Index n) {
  require(n >= 1, "sample size must be >= 1");
  Eigen::MatrixXd x(n, dim_);
  switch (kind_) {
    case SamplerKind::uniform_scaled: {
      std::uniform_real_distribution<double> unif(-kSqrt3, kSqrt3);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < dim_; ++j) x(i, j) = unif(rng_);
      break;
    }
    case SamplerKind::gaussian_truncated_scaled: {
      const double scale = 1.0 / std::sqrt(truncated_normal_second_moment());
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < dim_; ++j) x(i, j) = scale * truncated_normal();
      break;
    }
    case SamplerKind::correlated_gaussian: {
      const double shared = std::sqrt(rho_);
      const double own = std::sqrt(1.0 - rho_);
      for (Index i = 0; i < n; ++i) {
        const double common = normal_(rng_);
        for (Index j = 0; j < dim_; ++j) x(i, j) = shared * common + own * normal_(rng_);
      }
      break;
    }
  }
  return x;
}

FunctionClass parse_function_class(const std::string& name) {
  if (name == "smooth") return FunctionClass::smooth;
  if (name == "analytic") return FunctionClass::analytic;
  if (name == "besov") return FunctionClass::besov;
  if (name == "piecewise") return FunctionClass::piecewise;
  if (name == "composition") return FunctionClass::composition;
  if (name == "constant") return FunctionClass::constant;
  throw UsageError("unknown function class '" + name + "'");
}

std::string to_string(FunctionClass cls) {
  switch (cls) {
    case FunctionClass::smooth:
      return "smooth";
    case FunctionClass::analytic:
      return "analytic";
    case FunctionClass::besov:
      return "besov";
    case FunctionClass::piecewise:
      return "piecewise";
    case FunctionClass::composition:
      return "composition";
    case FunctionClass::constant:
      return "constant";
  }
  return "unknown";
}

CompositionStructure parse_composition_structure(const std::string& name) {
  if (name == "additive") return CompositionStructure::additive;
  if (name == "single_index") return CompositionStructure::single_index;
  throw UsageError("unknown composition structure '" + name + "'");
}

std::string to_string(CompositionStructure structure) {
  return structure == CompositionStructure::additive ? "additive" : "single_index";
}

double composition_tau(const std::vector<CompositionLayer>& layers) {
  double tau = 0.0;
  for (const auto& layer : layers) {
    if (std::isfinite(layer.effective_smoothness)) {
      tau = std::max(tau, layer.active_inputs / layer.effective_smoothness);
    }
  }
  return tau;
}

namespace {

// Additive: a linear summation layer (t = d, s* = ∞) on top of univariate
// smooth(s) components (t = 1, s* = s). Single index: a linear projection
// (t = d, s* = ∞) followed by a univariate smooth(s) link (t = 1, s* = s).
std::vector<CompositionLayer> composition_layers(const GroundTruthSpec& spec, Index dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return {{static_cast<double>(dim), inf}, {1.0, spec.s}};
}

void validate_spec(const GroundTruthSpec& spec, Index dim) {
  require(dim >= 1, "input dimension must be >= 1");
  require(std::isfinite(spec.bound) && spec.bound > 0.0, "bound B must be positive");
  switch (spec.cls) {
    case FunctionClass::smooth:
    case FunctionClass::composition:
      require(spec.s > 0.0, "smoothness s must be positive");
      break;
    case FunctionClass::besov:
      require(spec.s > 0.0, "smoothness s must be positive");
      require(dim == 1, "the besov representative is defined for d = 1");
      break;
    case FunctionClass::piecewise:
      require(spec.s > 0.0, "smoothness s must be positive");
      require(spec.beta > 0.0, "boundary smoothness beta must be positive");
      require(spec.pieces >= 2, "piecewise needs M >= 2 pieces");
      require(dim >= 2, "piecewise needs d >= 2");
      break;
    case FunctionClass::analytic:
      break;
    case FunctionClass::constant:
      require(std::isfinite(spec.constant), "constant must be finite");
      break;
  }
}

}  // namespace

ApproximationRate approximation_rate(const GroundTruthSpec& spec, Index dim) {
  const double d = static_cast<double>(dim);
  switch (spec.cls) {
    case FunctionClass::smooth:
    case FunctionClass::besov:
      return {d / spec.s, 1.0};
    case FunctionClass::analytic:
      return {0.0, d + 1.0};
    case FunctionClass::piecewise:
      return {std::max(d / spec.s, 2.0 * (d - 1.0) / spec.beta), 1.0};
    case FunctionClass::composition:
      return {composition_tau(composition_layers(spec, dim)), 1.0};
    case FunctionClass::constant:
      return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

GroundTruth::GroundTruth(GroundTruthSpec spec, Index dim,
                         std::vector<std::shared_ptr<const ScalarFunction>> components,
                         double truncation_tail)
    : spec_(spec),
      dim_(dim),
      rate_(approximation_rate(spec, dim)),
      components_(std::move(components)),
      truncation_tail_(truncation_tail) {
  require(!components_.empty(), "ground truth needs at least one component");
}

Eigen::MatrixXd GroundTruth::evaluate(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.cols() != dim_) throw ShapeError("ground truth input dimension mismatch");
  Eigen::MatrixXd out(x.rows(), output_dim());
  for (Index k = 0; k < output_dim(); ++k) {
    out.col(k) = components_[static_cast<std::size_t>(k)]->evaluate(x);
  }
  return out;
}

Eigen::VectorXd GroundTruth::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return evaluate(x.transpose()).row(0).transpose();
}

GroundTruth make_ground_truth(const GroundTruthSpec& spec, Index dim, Index output_dim,
                              std::uint64_t seed) {
  validate_spec(spec, dim);
  require(output_dim >= 1, "output dimension must be >= 1");
  GroundTruthSpec effective = spec;
  if (spec.cls == FunctionClass::constant) effective.bound = std::max(std::abs(spec.constant), 0.0);

  std::mt19937_64 rng(seed);
  double tail = 0.0;
  std::vector<std::shared_ptr<const ScalarFunction>> components;
  for (Index k = 0; k < output_dim; ++k) {
    switch (spec.cls) {
      case FunctionClass::smooth:
        components.push_back(std::make_shared<CosineSeries>(
            make_series(dim, smooth_decay(spec.s), spec.bound, nullptr, rng, &tail)));
        break;
      case FunctionClass::analytic: {
        Eigen::VectorXd w = 2.0 * random_unit(dim, rng);
        components.push_back(std::make_shared<GaussianSinusoid>(std::move(w), spec.bound));
        break;
      }
      case FunctionClass::besov:
        components.push_back(std::make_shared<Doppler>(spec.bound));
        break;
      case FunctionClass::piecewise: {
        const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(dim, 0);
        double boundary_tail = 0.0;
        auto boundary = make_series(dim, smooth_decay(spec.beta), 0.8, &e1, rng, &boundary_tail);
        std::vector<double> offsets;
        for (int m = 1; m < spec.pieces; ++m) {
          offsets.push_back(-kSqrt3 + 2.0 * kSqrt3 * m / spec.pieces);
        }
        std::vector<CosineSeries> pieces;
        for (int m = 0; m < spec.pieces; ++m) {
          pieces.push_back(make_series(dim, smooth_decay(spec.s), spec.bound, nullptr, rng, &tail));
        }
        components.push_back(
            std::make_shared<Piecewise>(std::move(boundary), std::move(offsets), std::move(pieces)));
        break;
      }
      case FunctionClass::composition: {
        if (spec.structure == CompositionStructure::single_index) {
          const Eigen::VectorXd w = random_unit(dim, rng);
          components.push_back(std::make_shared<CosineSeries>(
              make_series(dim, smooth_decay(spec.s), spec.bound, &w, rng, &tail)));
        } else {
          // (1/d) Σ_j f_j(x_j): one univariate series per coordinate, concatenated.
          std::optional<CosineSeries> sum;
          double part_tail = 0.0;
          for (Index j = 0; j < dim; ++j) {
            const Eigen::VectorXd ej = Eigen::VectorXd::Unit(dim, j);
            double tail_j = 0.0;
            auto part = make_series(dim, smooth_decay(spec.s), spec.bound / static_cast<double>(dim),
                                    &ej, rng, &tail_j);
            part_tail += tail_j;
            if (sum) {
              sum->append(part);
            } else {
              sum = std::move(part);
            }
          }
          tail = std::max(tail, part_tail);
          components.push_back(std::make_shared<CosineSeries>(std::move(*sum)));
        }
        break;
      }
      case FunctionClass::constant:
        components.push_back(std::make_shared<ConstantFunction>(spec.constant));
        break;
    }
  }
  return GroundTruth(effective, dim, std::move(components), tail);
}

Dataset gen_regression(const GroundTruth& gt, const Eigen::MatrixXd& x, double noise_sd,
                       std::uint64_t seed) {
  require(gt.output_dim() == 1, "regression needs a scalar ground truth");
  require(noise_sd >= 0.0 && std::isfinite(noise_sd), "noise_sd must be finite and >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset data{x, gt.evaluate(x).col(0), TaskKind::regression(), seed};
  if (noise_sd > 0.0) {
    for (Index i = 0; i < data.size(); ++i) data.y[i] += noise_sd * normal(rng);
  }
  return data;
}

Dataset gen_binary(const GroundTruth& gt, const Eigen::MatrixXd& x, std::uint64_t seed) {
  require(gt.output_dim() == 1, "binary classification needs a scalar logit");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::VectorXd logits = gt.evaluate(x).col(0);
  Dataset data{x, Eigen::VectorXd(x.rows()), TaskKind::binary(), seed};
  for (Index i = 0; i < data.size(); ++i) data.y[i] = unif(rng) < sigmoid(logits[i]) ? 1.0 : 0.0;
  return data;
}

Dataset gen_multiclass(const GroundTruth& gt, const Eigen::MatrixXd& x, int classes,
                       std::uint64_t seed) {
  const auto task = TaskKind::multiclass(classes);
  require(gt.output_dim() == classes - 1, "multiclass ground truth must have K-1 logits");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::MatrixXd logits = gt.evaluate(x);
  Dataset data{x, Eigen::VectorXd(x.rows()), task, seed};
  for (Index i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd p = probs_with_reference(logits.row(i).transpose());
    const double u = unif(rng);
    double cumulative = 0.0;
    int label = classes;
    for (int k = 0; k < classes - 1; ++k) {
      cumulative += p[k];
      if (u < cumulative) {
        label = k + 1;
        break;
      }
    }
    data.y[i] = label;
  }
  return data;
}

}  // namespace snl
