#pragma once

#include <cmath>
#include <vector>

#include "mulab/loss.hpp"
#include "mulab/rng.hpp"

namespace mulab::testutil {

// Central-difference gradient of any scalar objective; the independent
// oracle for every analytic gradient in the library.
inline GradVector fd_gradient(const LossEvaluator& f, const ParamVector& params, double h = 1e-5) {
  GradVector g(params.size());
  ParamVector p = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + h;
    const double up = f.loss(p);
    p[i] = orig - h;
    const double down = f.loss(p);
    p[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Central differences of the *analytic* gradient; oracle for HVP routes.
inline GradVector fd_hvp(const LossEvaluator& f, const ParamVector& params, const GradVector& v,
                         double h = 1e-5) {
  ParamVector plus = params, minus = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    plus[i] += h * v[i];
    minus[i] -= h * v[i];
  }
  const GradVector gp = f.grad(plus);
  const GradVector gm = f.grad(minus);
  GradVector out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) out[i] = (gp[i] - gm[i]) / (2.0 * h);
  return out;
}

inline double norm(const GradVector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(const GradVector& a, const GradVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// norm-wise relative error |a-b| / max(|b|, floor)
inline double rel_err(const GradVector& got, const GradVector& want, double floor_ = 1e-10) {
  GradVector diff(got.size());
  for (std::size_t i = 0; i < got.size(); ++i) diff[i] = got[i] - want[i];
  return norm(diff) / std::max(norm(want), floor_);
}

// worst per-coordinate error scaled by max(1, |want_i|)
inline double coord_err(const GradVector& got, const GradVector& want) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i)
    worst = std::max(worst, std::abs(got[i] - want[i]) / std::max(1.0, std::abs(want[i])));
  return worst;
}

// L = 1/2 sum c_i x_i^2 (+ optional linear term); hessian is diag(c)
class QuadraticLoss : public LossEvaluator {
 public:
  explicit QuadraticLoss(std::vector<double> curvature, std::vector<double> linear = {})
      : c_(std::move(curvature)), b_(std::move(linear)) {
    if (b_.empty()) b_.assign(c_.size(), 0.0);
  }
  double loss(const ParamVector& p) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += 0.5 * c_[i] * p[i] * p[i] + b_[i] * p[i];
    return s;
  }
  GradVector grad(const ParamVector& p) const override {
    GradVector g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = c_[i] * p[i] + b_[i];
    return g;
  }

 private:
  std::vector<double> c_, b_;
};

// L = 1/2 sum c_i (x_i - t_i)^2; keeps the constant term so objective values
// (not just gradients) match hand computations.
class ShiftedQuadratic : public LossEvaluator {
 public:
  ShiftedQuadratic(std::vector<double> curvature, std::vector<double> target)
      : c_(std::move(curvature)), t_(std::move(target)) {}
  double loss(const ParamVector& p) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += 0.5 * c_[i] * (p[i] - t_[i]) * (p[i] - t_[i]);
    return s;
  }
  GradVector grad(const ParamVector& p) const override {
    GradVector g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = c_[i] * (p[i] - t_[i]);
    return g;
  }

 private:
  std::vector<double> c_, t_;
};

// L = b . x (zero Hessian)
class LinearLoss : public LossEvaluator {
 public:
  explicit LinearLoss(std::vector<double> slope) : b_(std::move(slope)) {}
  double loss(const ParamVector& p) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += b_[i] * p[i];
    return s;
  }
  GradVector grad(const ParamVector&) const override { return b_; }

 private:
  std::vector<double> b_;
};

class ConstantLoss : public LossEvaluator {
 public:
  explicit ConstantLoss(std::size_t dim, double value = 3.5) : dim_(dim), value_(value) {}
  double loss(const ParamVector&) const override { return value_; }
  GradVector grad(const ParamVector& p) const override { return GradVector(p.size(), 0.0); }

 private:
  std::size_t dim_;
  double value_;
};

inline Batch random_batch(Rng& rng, int n, int d, int C) {
  Batch b;
  b.features.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) b.features(i, j) = rng.uniform(-2.0, 2.0);
  b.labels.resize(static_cast<std::size_t>(n));
  for (auto& y : b.labels) y = rng.uniform_int(0, C - 1);
  return b;
}

inline GradVector random_direction(Rng& rng, std::size_t dim) {
  GradVector v(dim);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace mulab::testutil
