#pragma once

#include <cmath>
#include <vector>

#include "mulab/model.hpp"

namespace mulab {

// Row-wise stable softmax (max subtraction).
Matrix softmax_rows(const Matrix& logits);

// Mean cross-entropy over the batch. Throws if a label is out of [0, C).
double cross_entropy(const Matrix& logits, const std::vector<int>& labels);

// Binary cross-entropy on a probability; prob is clamped to [1e-12, 1-1e-12].
double bce(double prob, int target);

inline double sigmoid(double u) { return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u)); }

// BCE expressed on the logit; numerically stable for large |u|.
inline double bce_with_logit(double u, double target) {
  // softplus(u) - target*u
  const double sp = u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
  return sp - target * u;
}

// Fraction of rows whose argmax logit equals the label (first max wins ties).
double accuracy(const ModelSpec& spec, const ParamVector& params, const Matrix& features,
                const std::vector<int>& labels);

// A differentiable scalar objective over a fixed captured task. loss/grad/hvp
// must be mutually consistent; hvp defaults to central differences of grad
// with step 1e-4/|v|, which is adequate for the model sizes used here.
class LossEvaluator {
 public:
  virtual ~LossEvaluator() = default;
  virtual double loss(const ParamVector& params) const = 0;
  virtual GradVector grad(const ParamVector& params) const = 0;
  virtual GradVector hvp(const ParamVector& params, const GradVector& v) const;
};

// H*v by central differences of the exact gradient: (g(p+hv) - g(p-hv)) / 2h.
// Returns zero for zero-norm v.
GradVector hvp_fd(const LossEvaluator& f, const ParamVector& params, const GradVector& v);

// Mean cross-entropy of an MLP on a fixed batch. grad is exact backprop,
// hvp is exact forward-over-reverse.
class CeBatchLoss : public LossEvaluator {
 public:
  CeBatchLoss(ModelSpec spec, Batch batch);
  double loss(const ParamVector& params) const override;
  GradVector grad(const ParamVector& params) const override;
  GradVector hvp(const ParamVector& params, const GradVector& v) const override;

 private:
  ModelSpec spec_;
  Batch batch_;
};

// Mean BCE of a single-logit MLP against 0/1 targets; same exactness as
// CeBatchLoss. Used for membership-attacker training and synthetic tasks.
class BceBatchLoss : public LossEvaluator {
 public:
  BceBatchLoss(ModelSpec spec, Matrix features, std::vector<double> targets);
  double loss(const ParamVector& params) const override;
  GradVector grad(const ParamVector& params) const override;
  GradVector hvp(const ParamVector& params, const GradVector& v) const override;

 private:
  ModelSpec spec_;
  Matrix features_;
  std::vector<double> targets_;
};

}  // namespace mulab
