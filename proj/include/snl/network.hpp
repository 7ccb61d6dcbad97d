#pragma once

// Feed-forward ReLU networks
//
//   g(x) = W_{L-1} σ( ... σ(W_0 x + b_0) ... ) + b_{L-1},   σ(t) = max(t, 0)
//
// with L weight matrices, layer widths d_0..d_L and no activation on the
// output layer. Parameters are stored per layer as Eigen matrices; the flat
// ParamVector view is what penalties and proximal steps operate on.
//
// Flat layout (fixed, relied upon by serialization and tests):
//   for l = 0..L-1:  W_l row-major (d_l * d_{l-1} entries), then b_l (d_l
//   entries, only when biases are included).

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace snl {

using Index = Eigen::Index;

struct Architecture {
  std::vector<Index> dims;  // d_0 .. d_L
  bool bias_included = true;

  /// Validates L >= 1 and all widths >= 1.
  static Architecture make(std::vector<Index> dims, bool bias_included);

  Index depth() const { return static_cast<Index>(dims.size()) - 1; }
  Index input_dim() const { return dims.front(); }
  Index output_dim() const { return dims.back(); }
  /// S = Σ_l d_l (d_{l-1} + [bias]).
  Index param_count() const;

  bool operator==(const Architecture&) const = default;
};

/// Parameter count of a depth-`depth` net with all hidden widths equal to `width`.
Index param_count_for_width(Index depth, Index width, Index input_dim, Index output_dim,
                            bool bias_included);

/// Sizes the network class used by the estimator: L = max(2, ceil(ln n)) weight
/// matrices and the widest equal hidden width w with S(w) <= n_train.
/// Throws SizingError when no w >= 1 fits.
Architecture size_architecture(Index n_train, Index input_dim, Index output_dim,
                               bool bias_included);

struct ParamVector {
  Eigen::VectorXd values;

  Index size() const { return values.size(); }
  bool operator==(const ParamVector& other) const {
    return values.size() == other.values.size() && values == other.values;
  }
};

struct ParamNorms {
  Index l0 = 0;
  double l1 = 0.0;
  double l2 = 0.0;
};

/// l0 counts entries that are not exactly 0.0; no tolerance is applied.
ParamNorms param_norms(const Eigen::Ref<const Eigen::VectorXd>& v);
inline ParamNorms param_norms(const ParamVector& v) { return param_norms(v.values); }

class Network {
 public:
  /// All-zero network of the given architecture.
  explicit Network(Architecture arch);
  Network(Architecture arch, std::vector<Eigen::MatrixXd> weights,
          std::vector<Eigen::VectorXd> biases);

  const Architecture& arch() const { return arch_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }
  Eigen::MatrixXd& weight(Index l) { return weights_[static_cast<std::size_t>(l)]; }
  Eigen::VectorXd& bias(Index l) { return biases_[static_cast<std::size_t>(l)]; }
  const Eigen::MatrixXd& weight(Index l) const { return weights_[static_cast<std::size_t>(l)]; }
  const Eigen::VectorXd& bias(Index l) const { return biases_[static_cast<std::size_t>(l)]; }

  bool operator==(const Network& other) const;

 private:
  void validate() const;

  Architecture arch_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// He-style initialization: W_l entries i.i.d. N(0, (scale * sqrt(2 / d_{l-1}))^2),
/// biases zero. Deterministic in `seed`.
Network init_network(const Architecture& arch, double scale, std::uint64_t seed);

ParamVector flatten(const Network& net);
Network unflatten(const Architecture& arch, const ParamVector& v);

/// Single-input evaluation. Throws NumericError on a non-finite layer output.
Eigen::VectorXd forward(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Batched evaluation: `inputs` has one sample per row (n x d_0); returns n x d_L.
Eigen::MatrixXd predict(const Network& net, const Eigen::Ref<const Eigen::MatrixXd>& inputs);

/// Cached activations of a batched forward pass, column-per-sample.
struct ForwardCache {
  // activations[0] is the input (d_0 x n); activations[l] is the
  // post-activation output of layer l-1; activations[L] is the network output.
  std::vector<Eigen::MatrixXd> activations;

  const Eigen::MatrixXd& output() const { return activations.back(); }
};

/// `inputs_t` is d_0 x n (one sample per column).
ForwardCache forward_batch(const Network& net, const Eigen::Ref<const Eigen::MatrixXd>& inputs_t);

/// Gradient of Σ_i <out_grads[:, i], g(x_i)> with respect to all parameters,
/// returned in flat layout. `out_grads` is d_L x n. The ReLU derivative at 0 is 0.
ParamVector backward_batch(const Network& net, const ForwardCache& cache,
                           const Eigen::Ref<const Eigen::MatrixXd>& out_grads);

/// Gradient of <out_grad, g(x)> for a single input.
ParamVector backward(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& out_grad);

std::string to_json(const Network& net);
Network network_from_json(const std::string& text);

}  // namespace snl
