#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "mulab/rng.hpp"

namespace mulab {

using Matrix = Eigen::MatrixXd;

// Flat 64-bit parameter / gradient storage. Both views of the same layout;
// the distinction is by role, not representation.
using ParamVector = std::vector<double>;
using GradVector = std::vector<double>;

enum class Activation { tanh, relu };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

// Dense MLP architecture: layer_widths = {input, hidden..., output}.
// The activation applies to hidden layers only; the last layer is linear.
struct ModelSpec {
  std::vector<int> layer_widths;
  Activation activation = Activation::tanh;

  int input_dim() const { return layer_widths.front(); }
  int output_dim() const { return layer_widths.back(); }
  int num_layers() const { return static_cast<int>(layer_widths.size()) - 1; }

  // throws std::invalid_argument if widths are malformed
  void validate() const;
};

int param_count(const ModelSpec& spec);

// Glorot-uniform weights, zero biases.
ParamVector init_params(const ModelSpec& spec, Rng& rng);

// Per-layer activations cached during a forward pass; consumed by backward().
struct ForwardCache {
  std::vector<Matrix> post;  // post[0] = input, post[l] = activation output of layer l
  std::vector<Matrix> pre;   // pre[l-1] = pre-activation of layer l
};

// Batched forward pass: features is n x input_dim, returns n x output_dim logits.
Matrix forward(const ModelSpec& spec, const ParamVector& params, const Matrix& features,
               ForwardCache* cache = nullptr);

// Reverse pass from dL/dlogits to dL/dparams. Optionally also emits dL/dinput
// (needed when this net sits inside a larger differentiable chain).
GradVector backward(const ModelSpec& spec, const ParamVector& params, const ForwardCache& cache,
                    const Matrix& dlogits, Matrix* dinput = nullptr);

// out = params - lr * grad; inputs untouched.
ParamVector sgd_step(const ParamVector& params, const GradVector& grad, double lr);

// Labeled minibatch fed to the loss evaluators.
struct Batch {
  Matrix features;          // n x d
  std::vector<int> labels;  // n entries in [0, C)
};

namespace detail {
// Maps into the flat parameter layout: [W1 row-major (in x out), b1, W2, b2, ...].
struct LayerView {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W;
  Eigen::Map<const Eigen::VectorXd> b;
};
LayerView layer_view(const ModelSpec& spec, const double* params, int layer);
int layer_offset(const ModelSpec& spec, int layer);
}  // namespace detail

}  // namespace mulab
