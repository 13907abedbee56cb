#include "mulab/meta.hpp"

#include <cmath>
#include <stdexcept>

namespace mulab {

namespace {

void check_task(const MetaTask& task) {
  if (!task.support) throw std::invalid_argument("meta: task has no support evaluator");
  if (task.queries.empty()) throw std::invalid_argument("meta: task needs at least one query evaluator");
  for (const auto* q : task.queries)
    if (!q) throw std::invalid_argument("meta: null query evaluator");
}

void check_finite(const GradVector& g, const char* what) {
  for (double x : g)
    if (!std::isfinite(x)) throw std::runtime_error(std::string("meta: non-finite ") + what);
}

}  // namespace

ParamVector meta_tune(const ParamVector& params, const MetaTask& task, const MetaConfig& cfg) {
  check_task(task);
  const GradVector g = task.support->grad(params);
  check_finite(g, "support gradient");
  return sgd_step(params, g, cfg.alpha);
}

std::vector<double> meta_test_losses(const ParamVector& temp_params, const MetaTask& task) {
  check_task(task);
  std::vector<double> out;
  out.reserve(task.queries.size());
  for (const auto* q : task.queries) out.push_back(q->loss(temp_params));
  return out;
}

double meta_objective(const ParamVector& params, const MetaTask& task, const MetaConfig& cfg) {
  check_task(task);
  const ParamVector tuned = meta_tune(params, task, cfg);
  double total = task.support->loss(params);
  for (const auto* q : task.queries) total += q->loss(tuned);
  return total;
}

GradVector meta_gradient(const ParamVector& params, const MetaTask& task, const MetaConfig& cfg) {
  check_task(task);
  const GradVector g_support = task.support->grad(params);
  check_finite(g_support, "support gradient");
  const ParamVector tuned = sgd_step(params, g_support, cfg.alpha);

  GradVector total = g_support;
  for (const auto* q : task.queries) {
    const GradVector q_grad = q->grad(tuned);
    check_finite(q_grad, "query gradient");
    // chain rule through the tune step: (I - alpha*H_support) * q_grad
    if (cfg.mode == MetaMode::exact && cfg.alpha != 0.0) {
      const GradVector hq = task.support->hvp(params, q_grad);
      for (std::size_t i = 0; i < total.size(); ++i)
        total[i] += q_grad[i] - cfg.alpha * hq[i];
    } else {
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += q_grad[i];
    }
  }
  return total;
}

}  // namespace mulab
