#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mulab/model.hpp"
#include "mulab/rng.hpp"

using namespace mulab;

namespace {

// Independent forward oracle: plain nested loops, no Eigen, no shared code
// with the implementation path.
std::vector<double> oracle_forward(const ModelSpec& spec, const ParamVector& params,
                                   const std::vector<double>& input) {
  std::vector<double> a = input;
  std::size_t at = 0;
  for (int l = 1; l < static_cast<int>(spec.layer_widths.size()); ++l) {
    const int in = spec.layer_widths[l - 1];
    const int out = spec.layer_widths[l];
    std::vector<double> z(static_cast<std::size_t>(out), 0.0);
    for (int i = 0; i < in; ++i)
      for (int j = 0; j < out; ++j)
        z[static_cast<std::size_t>(j)] += a[static_cast<std::size_t>(i)] * params[at + static_cast<std::size_t>(i * out + j)];
    at += static_cast<std::size_t>(in * out);
    for (int j = 0; j < out; ++j) z[static_cast<std::size_t>(j)] += params[at + static_cast<std::size_t>(j)];
    at += static_cast<std::size_t>(out);
    if (l + 1 < static_cast<int>(spec.layer_widths.size())) {
      for (double& v : z) v = spec.activation == Activation::tanh ? std::tanh(v) : std::max(0.0, v);
    }
    a = std::move(z);
  }
  return a;
}

}  // namespace

TEST_CASE("param_count matches layer arithmetic") {
  ModelSpec spec{{2, 4, 3}, Activation::tanh};
  CHECK(param_count(spec) == 2 * 4 + 4 + 4 * 3 + 3);
  CHECK_THROWS_AS(param_count(ModelSpec{{5}, Activation::tanh}), std::invalid_argument);
  CHECK_THROWS_AS(param_count(ModelSpec{{2, 0, 3}, Activation::tanh}), std::invalid_argument);
}

TEST_CASE("all-zero params give all-zero logits") {
  ModelSpec spec{{3, 5, 4}, Activation::tanh};
  ParamVector params(static_cast<std::size_t>(param_count(spec)), 0.0);
  Matrix x(2, 3);
  x << 1.0, -2.0, 0.5, 0.0, 3.0, -1.0;
  const Matrix logits = forward(spec, params, x);
  CHECK(logits.rows() == 2);
  CHECK(logits.cols() == 4);
  CHECK(logits.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single linear layer with identity weight maps e1 to e1") {
  ModelSpec spec{{3, 3}, Activation::tanh};
  ParamVector params(static_cast<std::size_t>(param_count(spec)), 0.0);
  for (int i = 0; i < 3; ++i) params[static_cast<std::size_t>(i * 3 + i)] = 1.0;  // identity, zero bias
  Matrix e1 = Matrix::Zero(1, 3);
  e1(0, 0) = 1.0;
  const Matrix logits = forward(spec, params, e1);
  CHECK(logits(0, 0) == 1.0);
  CHECK(logits(0, 1) == 0.0);
  CHECK(logits(0, 2) == 0.0);
}

TEST_CASE("forward matches an independently coded oracle on a random 2-4-3 tanh MLP") {
  ModelSpec spec{{2, 4, 3}, Activation::tanh};
  Rng rng(42);
  const ParamVector params = init_params(spec, rng);
  Matrix x(5, 2);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 2; ++j) x(i, j) = rng.uniform(-2.0, 2.0);
  const Matrix logits = forward(spec, params, x);
  for (int i = 0; i < 5; ++i) {
    const std::vector<double> want = oracle_forward(spec, params, {x(i, 0), x(i, 1)});
    for (int j = 0; j < 3; ++j) CHECK(std::abs(logits(i, j) - want[static_cast<std::size_t>(j)]) <= 1e-12);
  }
}

TEST_CASE("forward is deterministic") {
  ModelSpec spec{{4, 8, 8, 3}, Activation::relu};
  Rng rng(7);
  const ParamVector params = init_params(spec, rng);
  Matrix x(6, 4);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 4; ++j) x(i, j) = rng.normal();
  const Matrix a = forward(spec, params, x);
  const Matrix b = forward(spec, params, x);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);  // bitwise identical
}

TEST_CASE("forward rejects mismatched input width, naming the layer") {
  ModelSpec spec{{3, 2}, Activation::tanh};
  ParamVector params(static_cast<std::size_t>(param_count(spec)), 0.0);
  Matrix x(1, 4);
  x.setZero();
  CHECK_THROWS_WITH_AS(forward(spec, params, x), doctest::Contains("layer 0"), std::invalid_argument);
}

TEST_CASE("init_params stays within the Glorot bound, biases zero") {
  ModelSpec spec{{10, 6, 2}, Activation::tanh};
  Rng rng(3);
  const ParamVector params = init_params(spec, rng);
  const double bound1 = std::sqrt(6.0 / (10 + 6));
  for (int i = 0; i < 60; ++i) CHECK(std::abs(params[static_cast<std::size_t>(i)]) <= bound1);
  for (int i = 60; i < 66; ++i) CHECK(params[static_cast<std::size_t>(i)] == 0.0);
  Rng rng2(3);
  CHECK(init_params(spec, rng2) == params);  // seeded determinism
}

TEST_CASE("sgd_step arithmetic and input preservation") {
  const ParamVector params{1.0, 1.0};
  const GradVector grad{1.0, -1.0};
  const ParamVector out = sgd_step(params, grad, 0.5);
  CHECK(out[0] == 0.5);
  CHECK(out[1] == 1.5);
  CHECK(params[0] == 1.0);  // untouched
  CHECK(sgd_step(params, grad, 0.0) == params);
  CHECK_THROWS_AS(sgd_step(params, grad, std::numeric_limits<double>::infinity()), std::invalid_argument);
  CHECK_THROWS_AS(sgd_step(params, GradVector{1.0}, 0.1), std::invalid_argument);
}
