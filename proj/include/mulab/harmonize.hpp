#pragma once

#include "mulab/model.hpp"

namespace mulab {

// Cosine similarity; 0 when either vector has norm below 1e-12 (degenerate
// inputs count as non-conflicting).
double cosine(const GradVector& a, const GradVector& b);

// Conflict-aware projection of the forgetting gradient: when cos(g_r, g_f) < 0
// the component of g_f along g_r is removed, otherwise g_f passes unchanged.
// Only g_f is ever projected; the remembering direction is protected.
GradVector harmonize(const GradVector& g_r, const GradVector& g_f);

// G = g_r + g_f_prime.
GradVector combine(const GradVector& g_r, const GradVector& g_f_prime);

}  // namespace mulab
