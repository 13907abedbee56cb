#include "mulab/model.hpp"

#include <cmath>
#include <stdexcept>

namespace mulab {

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "relu") return Activation::relu;
  throw std::invalid_argument("unknown activation '" + s + "' (expected tanh or relu)");
}

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

void ModelSpec::validate() const {
  if (layer_widths.size() < 2)
    throw std::invalid_argument("ModelSpec: need at least input and output widths");
  for (std::size_t i = 0; i < layer_widths.size(); ++i) {
    if (layer_widths[i] < 1)
      throw std::invalid_argument("ModelSpec: width of layer " + std::to_string(i) +
                                  " must be >= 1, got " + std::to_string(layer_widths[i]));
  }
}

int param_count(const ModelSpec& spec) {
  spec.validate();
  int total = 0;
  for (int l = 1; l < static_cast<int>(spec.layer_widths.size()); ++l)
    total += spec.layer_widths[l - 1] * spec.layer_widths[l] + spec.layer_widths[l];
  return total;
}

ParamVector init_params(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  ParamVector params(static_cast<std::size_t>(param_count(spec)), 0.0);
  std::size_t at = 0;
  for (int l = 1; l < static_cast<int>(spec.layer_widths.size()); ++l) {
    const int fan_in = spec.layer_widths[l - 1];
    const int fan_out = spec.layer_widths[l];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_in * fan_out; ++i) params[at++] = rng.uniform(-bound, bound);
    at += static_cast<std::size_t>(fan_out);  // biases stay zero
  }
  return params;
}

namespace detail {

int layer_offset(const ModelSpec& spec, int layer) {
  int off = 0;
  for (int l = 1; l < layer; ++l)
    off += spec.layer_widths[l - 1] * spec.layer_widths[l] + spec.layer_widths[l];
  return off;
}

LayerView layer_view(const ModelSpec& spec, const double* params, int layer) {
  const int in = spec.layer_widths[layer - 1];
  const int out = spec.layer_widths[layer];
  const int off = layer_offset(spec, layer);
  return LayerView{
      {params + off, in, out},
      {params + off + in * out, out},
  };
}

}  // namespace detail

namespace {

void check_params(const ModelSpec& spec, const ParamVector& params) {
  const int expect = param_count(spec);
  if (static_cast<int>(params.size()) != expect)
    throw std::invalid_argument("parameter vector has " + std::to_string(params.size()) +
                                " entries, model needs " + std::to_string(expect));
}

Matrix apply_activation(const ModelSpec& spec, const Matrix& z) {
  if (spec.activation == Activation::tanh) return z.array().tanh();
  return z.array().max(0.0);
}

Matrix activation_derivative(const ModelSpec& spec, const Matrix& z) {
  if (spec.activation == Activation::tanh) {
    Matrix t = z.array().tanh();
    return 1.0 - t.array().square();
  }
  return (z.array() > 0.0).cast<double>();
}

}  // namespace

Matrix forward(const ModelSpec& spec, const ParamVector& params, const Matrix& features,
               ForwardCache* cache) {
  check_params(spec, params);
  if (features.cols() != spec.input_dim())
    throw std::invalid_argument("forward: features have " + std::to_string(features.cols()) +
                                " columns, layer 0 expects " + std::to_string(spec.input_dim()));
  const int L = spec.num_layers();
  if (cache) {
    cache->post.assign(1, features);
    cache->pre.clear();
  }
  Matrix a = features;
  for (int l = 1; l <= L; ++l) {
    const auto layer = detail::layer_view(spec, params.data(), l);
    Matrix z = (a * layer.W).rowwise() + layer.b.transpose();
    if (!z.allFinite())
      throw std::runtime_error("forward: non-finite pre-activation at layer " + std::to_string(l));
    if (l < L)
      a = apply_activation(spec, z);
    else
      a = z;  // linear head
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(a);
    }
  }
  return a;
}

GradVector backward(const ModelSpec& spec, const ParamVector& params, const ForwardCache& cache,
                    const Matrix& dlogits, Matrix* dinput) {
  check_params(spec, params);
  const int L = spec.num_layers();
  if (static_cast<int>(cache.pre.size()) != L)
    throw std::invalid_argument("backward: cache does not match model depth");
  GradVector grad(params.size(), 0.0);
  Matrix delta = dlogits;  // dL/dz for the current layer
  for (int l = L; l >= 1; --l) {
    const auto layer = detail::layer_view(spec, params.data(), l);
    const int in = spec.layer_widths[l - 1];
    const int out = spec.layer_widths[l];
    const int off = detail::layer_offset(spec, l);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gW(
        grad.data() + off, in, out);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + off + in * out, out);
    gW = cache.post[static_cast<std::size_t>(l - 1)].transpose() * delta;
    gb = delta.colwise().sum();
    if (l > 1) {
      Matrix da = delta * layer.W.transpose();
      delta = da.array() * activation_derivative(spec, cache.pre[static_cast<std::size_t>(l - 2)]).array();
    } else if (dinput) {
      *dinput = delta * layer.W.transpose();
    }
  }
  return grad;
}

ParamVector sgd_step(const ParamVector& params, const GradVector& grad, double lr) {
  if (!std::isfinite(lr)) throw std::invalid_argument("sgd_step: learning rate must be finite");
  if (params.size() != grad.size())
    throw std::invalid_argument("sgd_step: dimension mismatch (" + std::to_string(params.size()) +
                                " vs " + std::to_string(grad.size()) + ")");
  ParamVector out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) out[i] = params[i] - lr * grad[i];
  return out;
}

}  // namespace mulab
