#include "mulab/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mulab {

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    p.row(i) = e / e.sum();
  }
  return p;
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows())
    throw std::invalid_argument("cross_entropy: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(logits.rows()) + " rows");
  const int C = static_cast<int>(logits.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= C)
      throw std::invalid_argument("cross_entropy: label " + std::to_string(y) +
                                  " out of range [0, " + std::to_string(C) + ")");
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    total += lse - logits(i, y);
  }
  return total / static_cast<double>(logits.rows());
}

double bce(double prob, int target) {
  constexpr double eps = 1e-12;
  const double p = std::min(1.0 - eps, std::max(eps, prob));
  return target == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double accuracy(const ModelSpec& spec, const ParamVector& params, const Matrix& features,
                const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("accuracy: empty batch");
  const Matrix logits = forward(spec, params, features);
  int hits = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index pred;
    logits.row(i).maxCoeff(&pred);
    if (static_cast<int>(pred) == labels[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

GradVector LossEvaluator::hvp(const ParamVector& params, const GradVector& v) const {
  return hvp_fd(*this, params, v);
}

GradVector hvp_fd(const LossEvaluator& f, const ParamVector& params, const GradVector& v) {
  if (params.size() != v.size()) throw std::invalid_argument("hvp_fd: dimension mismatch");
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  GradVector out(params.size(), 0.0);
  if (norm < 1e-300) return out;
  const double h = 1e-4 / norm;
  ParamVector plus(params), minus(params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    plus[i] += h * v[i];
    minus[i] -= h * v[i];
  }
  const GradVector gp = f.grad(plus);
  const GradVector gm = f.grad(minus);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (gp[i] - gm[i]) / (2.0 * h);
  return out;
}

namespace {

// Shared forward-over-reverse machinery. The head supplies delta = dL/dz_L
// and its tangent d(delta) given z_L and zdot_L; everything below the head is
// architecture-generic.
struct TangentState {
  std::vector<Matrix> post_dot;  // tangents of cache.post
  std::vector<Matrix> pre_dot;   // tangents of cache.pre
};

void tangent_forward(const ModelSpec& spec, const ParamVector& params, const GradVector& v,
                     const ForwardCache& cache, TangentState* t) {
  const int L = spec.num_layers();
  t->post_dot.assign(1, Matrix::Zero(cache.post[0].rows(), cache.post[0].cols()));
  t->pre_dot.clear();
  for (int l = 1; l <= L; ++l) {
    const auto layer = detail::layer_view(spec, params.data(), l);
    const auto vlayer = detail::layer_view(spec, v.data(), l);
    Matrix zdot = t->post_dot.back() * layer.W + cache.post[static_cast<std::size_t>(l - 1)] * vlayer.W;
    zdot.rowwise() += vlayer.b.transpose();
    Matrix adot;
    if (l < L) {
      const Matrix& z = cache.pre[static_cast<std::size_t>(l - 1)];
      if (spec.activation == Activation::tanh) {
        Matrix th = z.array().tanh();
        adot = (1.0 - th.array().square()) * zdot.array();
      } else {
        adot = (z.array() > 0.0).cast<double>() * zdot.array();
      }
    } else {
      adot = zdot;
    }
    t->pre_dot.push_back(std::move(zdot));
    t->post_dot.push_back(std::move(adot));
  }
}

GradVector tangent_backward(const ModelSpec& spec, const ParamVector& params, const GradVector& v,
                            const ForwardCache& cache, const TangentState& t, Matrix delta,
                            Matrix delta_dot) {
  const int L = spec.num_layers();
  GradVector hv(params.size(), 0.0);
  for (int l = L; l >= 1; --l) {
    const auto layer = detail::layer_view(spec, params.data(), l);
    const auto vlayer = detail::layer_view(spec, v.data(), l);
    const int in = spec.layer_widths[l - 1];
    const int out = spec.layer_widths[l];
    const int off = detail::layer_offset(spec, l);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> hW(
        hv.data() + off, in, out);
    Eigen::Map<Eigen::VectorXd> hb(hv.data() + off + in * out, out);
    const Matrix& a_prev = cache.post[static_cast<std::size_t>(l - 1)];
    const Matrix& a_prev_dot = t.post_dot[static_cast<std::size_t>(l - 1)];
    hW = a_prev_dot.transpose() * delta + a_prev.transpose() * delta_dot;
    hb = delta_dot.colwise().sum();
    if (l > 1) {
      const Matrix& z = cache.pre[static_cast<std::size_t>(l - 2)];
      const Matrix& zdot = t.pre_dot[static_cast<std::size_t>(l - 2)];
      Matrix da = delta * layer.W.transpose();
      Matrix da_dot = delta_dot * layer.W.transpose() + delta * vlayer.W.transpose();
      if (spec.activation == Activation::tanh) {
        Matrix th = z.array().tanh();
        Matrix phi1 = 1.0 - th.array().square();
        Matrix phi2 = -2.0 * th.array() * phi1.array();
        delta_dot = da_dot.array() * phi1.array() + da.array() * phi2.array() * zdot.array();
        delta = da.array() * phi1.array();
      } else {
        Matrix phi1 = (z.array() > 0.0).cast<double>();
        delta_dot = da_dot.array() * phi1.array();
        delta = da.array() * phi1.array();
      }
    }
  }
  return hv;
}

void check_dim(const ParamVector& params, const GradVector& v, const char* where) {
  if (params.size() != v.size()) throw std::invalid_argument(std::string(where) + ": dimension mismatch");
}

}  // namespace

CeBatchLoss::CeBatchLoss(ModelSpec spec, Batch batch) : spec_(std::move(spec)), batch_(std::move(batch)) {
  spec_.validate();
  if (batch_.features.rows() < 1) throw std::invalid_argument("CeBatchLoss: empty batch");
  if (static_cast<Eigen::Index>(batch_.labels.size()) != batch_.features.rows())
    throw std::invalid_argument("CeBatchLoss: label count does not match feature rows");
}

double CeBatchLoss::loss(const ParamVector& params) const {
  return cross_entropy(forward(spec_, params, batch_.features), batch_.labels);
}

GradVector CeBatchLoss::grad(const ParamVector& params) const {
  ForwardCache cache;
  const Matrix logits = forward(spec_, params, batch_.features, &cache);
  Matrix delta = softmax_rows(logits);
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i)
    delta(i, batch_.labels[static_cast<std::size_t>(i)]) -= 1.0;
  delta *= inv_n;
  return backward(spec_, params, cache, delta);
}

GradVector CeBatchLoss::hvp(const ParamVector& params, const GradVector& v) const {
  check_dim(params, v, "CeBatchLoss::hvp");
  ForwardCache cache;
  const Matrix logits = forward(spec_, params, batch_.features, &cache);
  TangentState t;
  tangent_forward(spec_, params, v, cache, &t);
  const Matrix p = softmax_rows(logits);
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  Matrix delta = p;
  for (Eigen::Index i = 0; i < logits.rows(); ++i)
    delta(i, batch_.labels[static_cast<std::size_t>(i)]) -= 1.0;
  delta *= inv_n;
  // tangent of softmax rows: p .* zdot - p * (p . zdot)
  const Matrix& zdot = t.pre_dot.back();
  Matrix delta_dot(p.rows(), p.cols());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double dot = p.row(i).dot(zdot.row(i));
    delta_dot.row(i) = (p.row(i).array() * zdot.row(i).array() - p.row(i).array() * dot) * inv_n;
  }
  return tangent_backward(spec_, params, v, cache, t, std::move(delta), std::move(delta_dot));
}

BceBatchLoss::BceBatchLoss(ModelSpec spec, Matrix features, std::vector<double> targets)
    : spec_(std::move(spec)), features_(std::move(features)), targets_(std::move(targets)) {
  spec_.validate();
  if (spec_.output_dim() != 1) throw std::invalid_argument("BceBatchLoss: model must have one output");
  if (static_cast<Eigen::Index>(targets_.size()) != features_.rows())
    throw std::invalid_argument("BceBatchLoss: target count does not match feature rows");
  if (features_.rows() < 1) throw std::invalid_argument("BceBatchLoss: empty batch");
}

double BceBatchLoss::loss(const ParamVector& params) const {
  const Matrix logits = forward(spec_, params, features_);
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i)
    total += bce_with_logit(logits(i, 0), targets_[static_cast<std::size_t>(i)]);
  return total / static_cast<double>(logits.rows());
}

GradVector BceBatchLoss::grad(const ParamVector& params) const {
  ForwardCache cache;
  const Matrix logits = forward(spec_, params, features_, &cache);
  Matrix delta(logits.rows(), 1);
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i)
    delta(i, 0) = (sigmoid(logits(i, 0)) - targets_[static_cast<std::size_t>(i)]) * inv_n;
  return backward(spec_, params, cache, delta);
}

GradVector BceBatchLoss::hvp(const ParamVector& params, const GradVector& v) const {
  check_dim(params, v, "BceBatchLoss::hvp");
  ForwardCache cache;
  const Matrix logits = forward(spec_, params, features_, &cache);
  TangentState t;
  tangent_forward(spec_, params, v, cache, &t);
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  Matrix delta(logits.rows(), 1), delta_dot(logits.rows(), 1);
  const Matrix& zdot = t.pre_dot.back();
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double s = sigmoid(logits(i, 0));
    delta(i, 0) = (s - targets_[static_cast<std::size_t>(i)]) * inv_n;
    delta_dot(i, 0) = s * (1.0 - s) * zdot(i, 0) * inv_n;
  }
  return tangent_backward(spec_, params, v, cache, t, std::move(delta), std::move(delta_dot));
}

}  // namespace mulab
