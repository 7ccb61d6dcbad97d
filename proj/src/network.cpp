#include "snl/network.hpp"

#include <cmath>
#include <random>

#include "json.hpp"

#include "snl/errors.hpp"

namespace snl {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string dims_to_string(const std::vector<Index>& dims) {
  std::string out = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(dims[i]);
  }
  return out + "]";
}

}  // namespace

Architecture Architecture::make(std::vector<Index> dims, bool bias_included) {
  if (dims.size() < 2) throw UsageError("architecture needs at least one weight matrix");
  for (auto w : dims) {
    if (w < 1) throw UsageError("layer widths must be >= 1, got " + dims_to_string(dims));
  }
  return Architecture{std::move(dims), bias_included};
}

Index Architecture::param_count() const {
  Index s = 0;
  for (std::size_t l = 1; l < dims.size(); ++l) {
    s += dims[l] * (dims[l - 1] + (bias_included ? 1 : 0));
  }
  return s;
}

Index param_count_for_width(Index depth, Index width, Index input_dim, Index output_dim,
                            bool bias_included) {
  std::vector<Index> dims(static_cast<std::size_t>(depth + 1), width);
  dims.front() = input_dim;
  dims.back() = output_dim;
  return Architecture{std::move(dims), bias_included}.param_count();
}

Architecture size_architecture(Index n_train, Index input_dim, Index output_dim,
                               bool bias_included) {
  if (input_dim < 1 || output_dim < 1) throw UsageError("input and output dims must be >= 1");
  if (n_train < 8) {
    throw SizingError("n_train = " + std::to_string(n_train) + " is below the minimum of 8");
  }
  const auto depth =
      std::max<Index>(2, static_cast<Index>(std::ceil(std::log(static_cast<double>(n_train)))));
  auto count = [&](Index w) {
    return param_count_for_width(depth, w, input_dim, output_dim, bias_included);
  };
  if (count(1) > n_train) {
    throw SizingError("no hidden width fits S <= " + std::to_string(n_train) + " at depth " +
                      std::to_string(depth));
  }
  // S(w) is increasing in w; grow an upper bracket then bisect.
  Index lo = 1;
  Index hi = 2;
  while (count(hi) <= n_train) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const Index mid = lo + (hi - lo) / 2;
    (count(mid) <= n_train ? lo : hi) = mid;
  }
  std::vector<Index> dims(static_cast<std::size_t>(depth + 1), lo);
  dims.front() = input_dim;
  dims.back() = output_dim;
  return Architecture::make(std::move(dims), bias_included);
}

ParamNorms param_norms(const Eigen::Ref<const Eigen::VectorXd>& v) {
  ParamNorms out;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) ++out.l0;
  }
  out.l1 = v.lpNorm<1>();
  out.l2 = v.norm();
  return out;
}

Network::Network(Architecture arch) : arch_(std::move(arch)) {
  const auto L = static_cast<std::size_t>(arch_.depth());
  weights_.reserve(L);
  biases_.reserve(L);
  for (std::size_t l = 0; l < L; ++l) {
    weights_.push_back(Eigen::MatrixXd::Zero(arch_.dims[l + 1], arch_.dims[l]));
    biases_.push_back(Eigen::VectorXd::Zero(arch_.dims[l + 1]));
  }
}

Network::Network(Architecture arch, std::vector<Eigen::MatrixXd> weights,
                 std::vector<Eigen::VectorXd> biases)
    : arch_(std::move(arch)), weights_(std::move(weights)), biases_(std::move(biases)) {
  validate();
}

void Network::validate() const {
  const auto L = static_cast<std::size_t>(arch_.depth());
  if (weights_.size() != L || biases_.size() != L) {
    throw ShapeError("expected " + std::to_string(L) + " layers");
  }
  for (std::size_t l = 0; l < L; ++l) {
    if (weights_[l].rows() != arch_.dims[l + 1] || weights_[l].cols() != arch_.dims[l]) {
      throw ShapeError("weight " + std::to_string(l) + " shape mismatch");
    }
    if (biases_[l].size() != arch_.dims[l + 1]) {
      throw ShapeError("bias " + std::to_string(l) + " length mismatch");
    }
    if (!arch_.bias_included && !biases_[l].isZero(0.0)) {
      throw ShapeError("bias-free architecture with nonzero bias at layer " + std::to_string(l));
    }
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) {
      throw NumericError("non-finite parameter", static_cast<int>(l));
    }
  }
}

bool Network::operator==(const Network& other) const {
  if (!(arch_ == other.arch_)) return false;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) return false;
  }
  return true;
}

Network init_network(const Architecture& arch, double scale, std::uint64_t seed) {
  if (!(scale >= 0.0)) throw UsageError("init scale must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Network net(arch);
  for (Index l = 0; l < arch.depth(); ++l) {
    const double sd = scale * std::sqrt(2.0 / static_cast<double>(arch.dims[l]));
    auto& w = net.weight(l);
    // Row-major draw order so the stream matches the flat layout.
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) w(r, c) = sd * normal(rng);
    }
  }
  return net;
}

ParamVector flatten(const Network& net) {
  const auto& arch = net.arch();
  ParamVector out{Eigen::VectorXd(arch.param_count())};
  Index pos = 0;
  for (Index l = 0; l < arch.depth(); ++l) {
    const auto& w = net.weight(l);
    Eigen::Map<RowMajorMatrix>(out.values.data() + pos, w.rows(), w.cols()) = w;
    pos += w.size();
    if (arch.bias_included) {
      out.values.segment(pos, w.rows()) = net.bias(l);
      pos += w.rows();
    }
  }
  return out;
}

Network unflatten(const Architecture& arch, const ParamVector& v) {
  if (v.size() != arch.param_count()) {
    throw ShapeError("flat vector has length " + std::to_string(v.size()) + ", expected " +
                     std::to_string(arch.param_count()));
  }
  Network net(arch);
  Index pos = 0;
  for (Index l = 0; l < arch.depth(); ++l) {
    auto& w = net.weight(l);
    w = Eigen::Map<const RowMajorMatrix>(v.values.data() + pos, w.rows(), w.cols());
    pos += w.size();
    if (arch.bias_included) {
      net.bias(l) = v.values.segment(pos, w.rows());
      pos += w.rows();
    }
  }
  return net;
}

ForwardCache forward_batch(const Network& net, const Eigen::Ref<const Eigen::MatrixXd>& inputs_t) {
  const auto& arch = net.arch();
  if (inputs_t.rows() != arch.input_dim()) {
    throw ShapeError("input has " + std::to_string(inputs_t.rows()) + " features, expected " +
                     std::to_string(arch.input_dim()));
  }
  const Index L = arch.depth();
  ForwardCache cache;
  cache.activations.reserve(static_cast<std::size_t>(L + 1));
  cache.activations.emplace_back(inputs_t);
  for (Index l = 0; l < L; ++l) {
    Eigen::MatrixXd z = net.weight(l) * cache.activations.back();
    if (arch.bias_included) z.colwise() += net.bias(l);
    if (!z.allFinite()) throw NumericError("non-finite activation", static_cast<int>(l));
    if (l + 1 < L) z = z.cwiseMax(0.0);
    cache.activations.push_back(std::move(z));
  }
  return cache;
}

ParamVector backward_batch(const Network& net, const ForwardCache& cache,
                           const Eigen::Ref<const Eigen::MatrixXd>& out_grads) {
  const auto& arch = net.arch();
  const Index L = arch.depth();
  if (static_cast<Index>(cache.activations.size()) != L + 1) {
    throw ShapeError("forward cache does not match network depth");
  }
  if (out_grads.rows() != arch.output_dim() || out_grads.cols() != cache.output().cols()) {
    throw ShapeError("output gradient shape mismatch");
  }
  ParamVector grad{Eigen::VectorXd(arch.param_count())};
  // Offsets of each layer's block in the flat layout.
  std::vector<Index> offset(static_cast<std::size_t>(L));
  Index pos = 0;
  for (Index l = 0; l < L; ++l) {
    offset[static_cast<std::size_t>(l)] = pos;
    pos += arch.dims[l + 1] * (arch.dims[l] + (arch.bias_included ? 1 : 0));
  }

  Eigen::MatrixXd delta = out_grads;
  for (Index l = L - 1; l >= 0; --l) {
    const auto& a_in = cache.activations[static_cast<std::size_t>(l)];
    const auto& w = net.weight(l);
    const Index at = offset[static_cast<std::size_t>(l)];
    Eigen::Map<RowMajorMatrix>(grad.values.data() + at, w.rows(), w.cols()).noalias() =
        delta * a_in.transpose();
    if (arch.bias_included) grad.values.segment(at + w.size(), w.rows()) = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = w.transpose() * delta;
      delta = (a_in.array() > 0.0).select(back, 0.0);
    }
  }
  return grad;
}

Eigen::VectorXd forward(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!x.allFinite()) throw NumericError("non-finite input");
  return forward_batch(net, x).output().col(0);
}

Eigen::MatrixXd predict(const Network& net, const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  return forward_batch(net, inputs.transpose()).output().transpose();
}

ParamVector backward(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& out_grad) {
  if (out_grad.size() != net.arch().output_dim()) throw ShapeError("output gradient length mismatch");
  const auto cache = forward_batch(net, x);
  return backward_batch(net, cache, out_grad);
}

std::string to_json(const Network& net) {
  using nlohmann::json;
  const auto& arch = net.arch();
  json doc;
  doc["dims"] = arch.dims;
  doc["bias_included"] = arch.bias_included;
  json weights = json::array();
  json biases = json::array();
  for (Index l = 0; l < arch.depth(); ++l) {
    const auto& w = net.weight(l);
    std::vector<double> flat(static_cast<std::size_t>(w.size()));
    Eigen::Map<RowMajorMatrix>(flat.data(), w.rows(), w.cols()) = w;
    weights.push_back(flat);
    const auto& b = net.bias(l);
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  return doc.dump(2);
}

Network network_from_json(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
    auto arch = Architecture::make(doc.at("dims").get<std::vector<Index>>(),
                                   doc.at("bias_included").get<bool>());
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (weights.size() != static_cast<std::size_t>(arch.depth()) ||
        biases.size() != static_cast<std::size_t>(arch.depth())) {
      throw ShapeError("layer count does not match dims");
    }
    std::vector<Eigen::MatrixXd> ws;
    std::vector<Eigen::VectorXd> bs;
    for (Index l = 0; l < arch.depth(); ++l) {
      const auto flat = weights[static_cast<std::size_t>(l)].get<std::vector<double>>();
      const Index rows = arch.dims[l + 1];
      const Index cols = arch.dims[l];
      if (static_cast<Index>(flat.size()) != rows * cols) {
        throw ShapeError("weight " + std::to_string(l) + " has wrong entry count");
      }
      ws.emplace_back(Eigen::Map<const RowMajorMatrix>(flat.data(), rows, cols));
      const auto b = biases[static_cast<std::size_t>(l)].get<std::vector<double>>();
      if (static_cast<Index>(b.size()) != rows) {
        throw ShapeError("bias " + std::to_string(l) + " has wrong length");
      }
      bs.emplace_back(Eigen::Map<const Eigen::VectorXd>(b.data(), rows));
    }
    return Network(std::move(arch), std::move(ws), std::move(bs));
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace snl
