#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mulab/harmonize.hpp"
#include "mulab/rng.hpp"
#include "test_util.hpp"

using namespace mulab;
namespace tu = mulab::testutil;

TEST_CASE("cosine basics") {
  const GradVector a{1.0, 2.0};
  CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine({1.0, 0.0}, {0.0, 1.0}) == 0.0);
  // hand arithmetic: (1*3 + 2*-1) / (sqrt(5)*sqrt(10)) = 1/sqrt(50)
  CHECK(cosine({1.0, 2.0}, {3.0, -1.0}) == doctest::Approx(1.0 / std::sqrt(50.0)).epsilon(1e-12));
  CHECK(cosine({0.0, 0.0}, {1.0, 1.0}) == 0.0);  // zero-norm guard
  CHECK_THROWS_AS(cosine({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("harmonize leaves orthogonal and agreeing gradients untouched") {
  const GradVector g_r{1.0, 0.0};
  const GradVector g_f{0.0, 1.0};
  CHECK(harmonize(g_r, g_f) == g_f);  // exact value copy
  CHECK(harmonize(g_r, GradVector{2.0, 3.0}) == GradVector{2.0, 3.0});
}

TEST_CASE("harmonize annihilates the anti-parallel case") {
  const GradVector out = harmonize({1.0, 0.0}, {-1.0, 0.0});
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
}

TEST_CASE("harmonize projects the worked conflict example") {
  const GradVector g_r{1.0, 0.0};
  const GradVector g_f{-1.0, 1.0};
  const GradVector g_fp = harmonize(g_r, g_f);
  CHECK(g_fp[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(g_fp[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(tu::dot(g_fp, g_r)) <= 1e-15);  // orthogonal after projection
  const GradVector G = combine(g_r, g_fp);
  CHECK(G[0] == doctest::Approx(1.0));
  CHECK(G[1] == doctest::Approx(1.0));
}

TEST_CASE("combine identities") {
  const GradVector g{0.5, -2.0, 3.0};
  CHECK(combine(g, GradVector(3, 0.0)) == g);
  CHECK(combine(GradVector(3, 0.0), g) == g);
  CHECK_THROWS_AS(combine(g, GradVector(2, 0.0)), std::invalid_argument);
}

TEST_CASE("projection invariants over random pairs") {
  Rng rng(77);
  for (int trial = 0; trial < 2000; ++trial) {
    const int dim = rng.uniform_int(1, 128);
    GradVector g_r = tu::random_direction(rng, static_cast<std::size_t>(dim));
    GradVector g_f = tu::random_direction(rng, static_cast<std::size_t>(dim));
    const GradVector g_fp = harmonize(g_r, g_f);

    // post-projection non-conflict
    CHECK(tu::dot(g_fp, g_r) >= -1e-9 * tu::norm(g_fp) * tu::norm(g_r));
    // no-op when not conflicting
    if (cosine(g_r, g_f) >= 0.0) CHECK(g_fp == g_f);
    // idempotence
    const GradVector twice = harmonize(g_r, g_fp);
    for (std::size_t i = 0; i < twice.size(); ++i) CHECK(std::abs(twice[i] - g_fp[i]) <= 1e-12);
    // contraction
    CHECK(tu::norm(g_fp) <= tu::norm(g_f) + 1e-12);
  }
}

TEST_CASE("conflict test is scale equivariant in g_r") {
  Rng rng(78);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = rng.uniform_int(2, 64);
    GradVector g_r = tu::random_direction(rng, static_cast<std::size_t>(dim));
    GradVector g_f = tu::random_direction(rng, static_cast<std::size_t>(dim));
    const double c = std::exp(rng.uniform(-3.0, 3.0));
    GradVector scaled = g_r;
    for (double& x : scaled) x *= c;
    const GradVector a = harmonize(g_r, g_f);
    const GradVector b = harmonize(scaled, g_f);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10);
  }
}
