#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mulab/meta.hpp"
#include "test_util.hpp"

using namespace mulab;
namespace tu = mulab::testutil;

namespace {

// FD of the meta objective itself; independent route for the meta gradient.
GradVector fd_meta_gradient(const ParamVector& params, const MetaTask& task, const MetaConfig& cfg,
                            double h = 1e-5) {
  GradVector g(params.size());
  ParamVector p = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = p[i];
    p[i] = orig + h;
    const double up = meta_objective(p, task, cfg);
    p[i] = orig - h;
    const double down = meta_objective(p, task, cfg);
    p[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("meta_tune: identity at alpha=0, arithmetic, and sgd_step equivalence") {
  tu::ShiftedQuadratic support({1.0, 1.0}, {0.0, 0.0});  // 1/2 |theta|^2
  tu::ShiftedQuadratic query({1.0, 1.0}, {1.0, 1.0});
  MetaTask task{&support, {&query}};
  const ParamVector theta{1.0, 2.0};

  CHECK(meta_tune(theta, task, {0.0, MetaMode::exact}) == theta);

  const ParamVector tuned = meta_tune(theta, task, {0.5, MetaMode::exact});
  CHECK(tuned == ParamVector{0.5, 1.0});
  CHECK(theta == ParamVector{1.0, 2.0});  // input untouched

  CHECK(tuned == sgd_step(theta, support.grad(theta), 0.5));
}

TEST_CASE("meta_test_losses evaluates queries at the tuned parameters") {
  tu::ShiftedQuadratic support({1.0}, {0.0});
  tu::ShiftedQuadratic query({1.0}, {0.5});
  MetaTask task{&support, {&query}};
  const ParamVector theta{1.0};
  const ParamVector tuned = meta_tune(theta, task, {0.5, MetaMode::exact});  // 0.5
  const auto losses = meta_test_losses(tuned, task);
  REQUIRE(losses.size() == 1);
  CHECK(losses[0] == doctest::Approx(query.loss(tuned)).epsilon(1e-15));
  CHECK(losses[0] == doctest::Approx(0.0).epsilon(1e-12));  // tuned params minimize this query
}

TEST_CASE("meta_objective: alpha=0 collapse and the 1-D closed form") {
  tu::ShiftedQuadratic support({1.0}, {0.0});  // 1/2 theta^2
  tu::ShiftedQuadratic query({1.0}, {1.0});    // 1/2 (theta-1)^2
  MetaTask task{&support, {&query}};
  const ParamVector theta{1.0};

  CHECK(meta_objective(theta, task, {0.0, MetaMode::exact}) ==
        doctest::Approx(support.loss(theta) + query.loss(theta)).epsilon(1e-15));

  // theta^tau = 0.5: 0.5 + 1/2 (0.5-1)^2 = 0.625
  CHECK(meta_objective(theta, task, {0.5, MetaMode::exact}) == doctest::Approx(0.625).epsilon(1e-12));
}

TEST_CASE("meta_objective is additive over identical queries") {
  tu::ShiftedQuadratic support({1.0}, {0.0});
  tu::ShiftedQuadratic query({1.0}, {1.0});
  MetaTask one{&support, {&query}};
  MetaTask three{&support, {&query, &query, &query}};
  const ParamVector theta{0.7};
  const MetaConfig cfg{0.1, MetaMode::exact};
  const double single_term = meta_objective(theta, one, cfg) - support.loss(theta);
  CHECK(meta_objective(theta, three, cfg) ==
        doctest::Approx(support.loss(theta) + 3.0 * single_term).epsilon(1e-12));
}

TEST_CASE("meta_gradient: 1-D symbolic value 0.75") {
  tu::ShiftedQuadratic support({1.0}, {0.0});
  tu::ShiftedQuadratic query({1.0}, {1.0});
  MetaTask task{&support, {&query}};
  // d/dtheta [1/2 theta^2 + 1/2 ((1-a) theta - 1)^2] at theta=1, a=0.5:
  // theta + (1-a)((1-a)theta - 1) = 1 + 0.5*(-0.5) = 0.75
  const GradVector g = meta_gradient({1.0}, task, {0.5, MetaMode::exact});
  CHECK(g[0] == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("alpha=0 makes exact, first-order, and plain sums coincide") {
  Rng rng(21);
  ModelSpec spec{{2, 4, 3}, Activation::tanh};
  const ParamVector params = init_params(spec, rng);
  CeBatchLoss support(spec, tu::random_batch(rng, 5, 2, 3));
  CeBatchLoss q1(spec, tu::random_batch(rng, 5, 2, 3));
  CeBatchLoss q2(spec, tu::random_batch(rng, 4, 2, 3));
  MetaTask task{&support, {&q1, &q2}};

  const GradVector exact = meta_gradient(params, task, {0.0, MetaMode::exact});
  const GradVector first = meta_gradient(params, task, {0.0, MetaMode::first_order});
  GradVector plain = support.grad(params);
  const GradVector g1 = q1.grad(params), g2 = q2.grad(params);
  for (std::size_t i = 0; i < plain.size(); ++i) plain[i] += g1[i] + g2[i];

  CHECK(exact == first);
  CHECK(tu::rel_err(exact, plain) <= 1e-14);
}

TEST_CASE("exact meta_gradient matches FD of the objective on a random 2-8-3 MLP") {
  Rng rng(22);
  ModelSpec spec{{2, 8, 3}, Activation::tanh};
  const ParamVector params = init_params(spec, rng);
  CeBatchLoss support(spec, tu::random_batch(rng, 6, 2, 3));
  CeBatchLoss q1(spec, tu::random_batch(rng, 6, 2, 3));
  CeBatchLoss q2(spec, tu::random_batch(rng, 6, 2, 3));
  CeBatchLoss q3(spec, tu::random_batch(rng, 6, 2, 3));
  MetaTask task{&support, {&q1, &q2, &q3}};
  for (double alpha : {0.01, 0.1}) {
    const MetaConfig cfg{alpha, MetaMode::exact};
    const GradVector exact = meta_gradient(params, task, cfg);
    const GradVector fd = fd_meta_gradient(params, task, cfg);
    CHECK(tu::rel_err(exact, fd) <= 1e-4);
  }
}

TEST_CASE("first_order equals exact when the support Hessian is zero") {
  tu::LinearLoss support({0.3, -0.7, 1.1});
  tu::ShiftedQuadratic query({1.0, 2.0, 0.5}, {0.2, -0.1, 0.4});
  MetaTask task{&support, {&query}};
  const ParamVector theta{0.5, 0.5, 0.5};
  const MetaConfig exact_cfg{0.2, MetaMode::exact};
  const MetaConfig first_cfg{0.2, MetaMode::first_order};
  const GradVector a = meta_gradient(theta, task, exact_cfg);
  const GradVector b = meta_gradient(theta, task, first_cfg);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10);
}

TEST_CASE("one small meta-update strictly decreases a convex 1-D objective") {
  tu::ShiftedQuadratic support({1.0}, {0.0});
  tu::ShiftedQuadratic query({1.0}, {1.0});
  MetaTask task{&support, {&query}};
  const MetaConfig cfg{0.1, MetaMode::exact};
  const ParamVector theta{2.0};
  const double before = meta_objective(theta, task, cfg);
  const ParamVector after = sgd_step(theta, meta_gradient(theta, task, cfg), 0.05);
  CHECK(meta_objective(after, task, cfg) < before);
}

TEST_CASE("meta_tune surfaces non-finite gradients as errors") {
  struct BadLoss : LossEvaluator {
    double loss(const ParamVector&) const override { return 0.0; }
    GradVector grad(const ParamVector& p) const override {
      return GradVector(p.size(), std::numeric_limits<double>::quiet_NaN());
    }
  } bad;
  tu::ShiftedQuadratic query({1.0}, {0.0});
  MetaTask task{&bad, {&query}};
  CHECK_THROWS_AS(meta_tune({1.0}, task, {0.1, MetaMode::exact}), std::runtime_error);
}
