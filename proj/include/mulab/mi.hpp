#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mulab/dataset.hpp"
#include "mulab/loss.hpp"

namespace mulab {

// A differentiable membership attacker: input is the target model's
// descending-sorted class-probability vector, output one membership logit.
struct MiModel {
  ModelSpec spec;
  ParamVector params;
  std::string arch_tag;
};

// K guidance attackers plus one attacker held out for evaluation only.
struct MiEnsemble {
  std::vector<MiModel> guidance;
  MiModel eval_model;

  void validate() const;  // K >= 2 and eval_model not among guidance
};

// Forget-set inputs scored for membership during unlearning; the BCE target
// is "non-member" for every element.
struct AuditSet {
  Matrix features;
  int membership_target = 0;
};

AuditSet audit_set(const Dataset& forget);

// Descending-sorted softmax rows of the target model on the given inputs;
// sorting makes the attacker input invariant to class permutations.
Matrix attack_features(const ModelSpec& target_spec, const ParamVector& target_params,
                       const Matrix& inputs);

// Membership probabilities (sigmoid of the attacker logit), one per row of
// pre-computed attack features.
std::vector<double> membership_probabilities(const MiModel& mi, const Matrix& attack_feats);

// Trains K guidance attackers plus the held-out eval attacker on the target
// model's outputs: members labeled 1, nonmembers 0. Architectures and seeds
// cycle so the attackers capture different membership signals. Full-batch
// gradient descent until the BCE plateaus or 500 steps.
MiEnsemble train_mi_ensemble(const ModelSpec& target_spec, const ParamVector& target_params,
                             const Dataset& member_pool, const Dataset& nonmember_pool, int K,
                             std::uint64_t seed);

// Mean BCE between the attacker's membership probability on the audit set
// (pushed through the target model at the given parameters) and the audit
// membership target. Differentiable in the target parameters with the
// attacker frozen; descending on it drives audit outputs toward non-member.
class MiBceLoss : public LossEvaluator {
 public:
  MiBceLoss(ModelSpec target_spec, const MiModel& attacker, const AuditSet& audit,
            std::size_t* eval_counter = nullptr);
  double loss(const ParamVector& target_params) const override;
  GradVector grad(const ParamVector& target_params) const override;

 private:
  ModelSpec target_spec_;
  const MiModel* attacker_;
  Matrix audit_features_;
  double target_;
  std::size_t* eval_counter_;
};

double forgetting_loss(const ModelSpec& target_spec, const ParamVector& target_params,
                       const MiModel& mi, const AuditSet& audit);
GradVector forgetting_gradient(const ModelSpec& target_spec, const ParamVector& target_params,
                               const MiModel& mi, const AuditSet& audit);

// Fraction of member samples the eval attacker flags as member (probability
// above 0.5) under the current target parameters. The nonmember set is only
// used to sanity-check attacker calibration.
double mi_accuracy(const MiModel& eval_model, const ModelSpec& target_spec,
                   const ParamVector& target_params, const Dataset& members,
                   const Dataset& nonmembers);

// JSON persistence for reuse across runs.
void save_ensemble(const MiEnsemble& ensemble, const std::string& path);
MiEnsemble load_ensemble(const std::string& path);

}  // namespace mulab
