#pragma once

#include <vector>

#include "mulab/loss.hpp"

namespace mulab {

// One meta-optimization task: a support objective that drives the simulated
// tune step and N query objectives that score the temporarily updated
// parameters. Evaluators are non-owning; callers keep them alive.
struct MetaTask {
  const LossEvaluator* support = nullptr;
  std::vector<const LossEvaluator*> queries;
};

enum class MetaMode { exact, first_order };

struct MetaConfig {
  double alpha = 0.05;  // inner (tune) learning rate; 0 degenerates to plain summed gradients
  MetaMode mode = MetaMode::exact;
};

// Temporary tune step: theta_tau = theta - alpha * grad(support). The input
// parameters are never modified.
ParamVector meta_tune(const ParamVector& params, const MetaTask& task, const MetaConfig& cfg);

// Query losses evaluated at the tuned parameters, in task order.
std::vector<double> meta_test_losses(const ParamVector& temp_params, const MetaTask& task);

// support.loss(theta) + sum_i queries[i].loss(theta - alpha*grad(support)).
double meta_objective(const ParamVector& params, const MetaTask& task, const MetaConfig& cfg);

// Gradient of meta_objective w.r.t. theta. Exact mode differentiates through
// the tune step (needs support Hessian-vector products); first_order drops
// that term and treats theta_tau as constant w.r.t. theta.
GradVector meta_gradient(const ParamVector& params, const MetaTask& task, const MetaConfig& cfg);

}  // namespace mulab
