#include "mulab/harmonize.hpp"

#include <cmath>
#include <stdexcept>

namespace mulab {

namespace {

void check_dims(const GradVector& a, const GradVector& b, const char* where) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

double dot(const GradVector& a, const GradVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double cosine(const GradVector& a, const GradVector& b) {
  check_dims(a, b, "cosine");
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return dot(a, b) / (na * nb);
}

GradVector harmonize(const GradVector& g_r, const GradVector& g_f) {
  check_dims(g_r, g_f, "harmonize");
  if (cosine(g_r, g_f) >= 0.0) return g_f;
  const double rr = dot(g_r, g_r);
  const double scale = dot(g_f, g_r) / rr;
  GradVector out(g_f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g_f[i] - scale * g_r[i];
  // re-orthogonalize: rounding can leave a tiny conflicting residual along g_r
  const double residual = dot(out, g_r);
  if (residual < 0.0) {
    const double fix = residual / rr;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= fix * g_r[i];
  }
  return out;
}

GradVector combine(const GradVector& g_r, const GradVector& g_f_prime) {
  check_dims(g_r, g_f_prime, "combine");
  GradVector out(g_r.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g_r[i] + g_f_prime[i];
  return out;
}

}  // namespace mulab
