#include "mulab/mi.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "mulab/rng.hpp"

namespace mulab {

void MiEnsemble::validate() const {
  if (guidance.size() < 2) throw std::invalid_argument("MiEnsemble: need at least 2 guidance attackers");
  for (const auto& g : guidance) {
    if (g.spec.layer_widths == eval_model.spec.layer_widths && g.params == eval_model.params)
      throw std::invalid_argument("MiEnsemble: eval attacker duplicated in guidance");
  }
}

AuditSet audit_set(const Dataset& forget) {
  forget.validate();
  AuditSet a;
  a.features = forget.features_matrix();
  a.membership_target = 0;
  return a;
}

Matrix attack_features(const ModelSpec& target_spec, const ParamVector& target_params,
                       const Matrix& inputs) {
  Matrix p = softmax_rows(forward(target_spec, target_params, inputs));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    std::vector<double> row(p.cols());
    for (Eigen::Index j = 0; j < p.cols(); ++j) row[static_cast<std::size_t>(j)] = p(i, j);
    std::sort(row.begin(), row.end(), std::greater<double>());
    for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = row[static_cast<std::size_t>(j)];
  }
  return p;
}

std::vector<double> membership_probabilities(const MiModel& mi, const Matrix& attack_feats) {
  const Matrix logits = forward(mi.spec, mi.params, attack_feats);
  std::vector<double> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out[static_cast<std::size_t>(i)] = sigmoid(logits(i, 0));
  return out;
}

namespace {

bool same_example(const Example& a, const Example& b) { return a.y == b.y && a.x == b.x; }

ModelSpec attacker_arch(int input_dim, int which) {
  ModelSpec spec;
  spec.activation = Activation::tanh;
  switch (which % 3) {
    case 0: spec.layer_widths = {input_dim, 8, 1}; break;
    case 1: spec.layer_widths = {input_dim, 16, 8, 1}; break;
    default: spec.layer_widths = {input_dim, 4, 4, 1}; break;
  }
  return spec;
}

std::string arch_tag_of(const ModelSpec& spec, std::uint64_t seed) {
  std::string tag;
  for (std::size_t i = 0; i < spec.layer_widths.size(); ++i) {
    if (i) tag += 'x';
    tag += std::to_string(spec.layer_widths[i]);
  }
  tag += "/s" + std::to_string(seed);
  return tag;
}

// Full-batch descent with halving on loss increase; stops on plateau.
ParamVector fit_attacker(const ModelSpec& spec, const Matrix& feats, const std::vector<double>& targets,
                         std::uint64_t seed) {
  Rng rng(seed);
  ParamVector params = init_params(spec, rng);
  BceBatchLoss objective(spec, feats, targets);
  double lr = 0.25;
  double prev = objective.loss(params);
  for (int step = 0; step < 500; ++step) {
    const ParamVector next = sgd_step(params, objective.grad(params), lr);
    const double cur = objective.loss(next);
    if (cur > prev) {
      lr *= 0.5;
      if (lr < 1e-6) break;
      continue;  // retry the step at the smaller rate
    }
    params = next;
    if (prev - cur < 1e-7 * std::max(1.0, prev)) break;
    prev = cur;
  }
  return params;
}

}  // namespace

MiEnsemble train_mi_ensemble(const ModelSpec& target_spec, const ParamVector& target_params,
                             const Dataset& member_pool, const Dataset& nonmember_pool, int K,
                             std::uint64_t seed) {
  member_pool.validate();
  nonmember_pool.validate();
  if (K < 2) throw std::invalid_argument("train_mi_ensemble: K must be at least 2");
  for (const auto& m : member_pool.examples)
    for (const auto& n : nonmember_pool.examples)
      if (same_example(m, n))
        throw std::invalid_argument("train_mi_ensemble: member and nonmember pools overlap");

  const Matrix member_feats = attack_features(target_spec, target_params, member_pool.features_matrix());
  const Matrix nonmember_feats =
      attack_features(target_spec, target_params, nonmember_pool.features_matrix());
  Matrix feats(member_feats.rows() + nonmember_feats.rows(), member_feats.cols());
  feats << member_feats, nonmember_feats;
  std::vector<double> targets(static_cast<std::size_t>(feats.rows()), 0.0);
  std::fill(targets.begin(), targets.begin() + member_feats.rows(), 1.0);

  Rng rng(seed);
  MiEnsemble ensemble;
  const int input_dim = target_spec.output_dim();
  for (int k = 0; k <= K; ++k) {
    const ModelSpec arch = attacker_arch(input_dim, k);
    const std::uint64_t attacker_seed = rng.next();
    MiModel model{arch, fit_attacker(arch, feats, targets, attacker_seed), arch_tag_of(arch, attacker_seed)};
    if (k < K)
      ensemble.guidance.push_back(std::move(model));
    else
      ensemble.eval_model = std::move(model);
  }
  ensemble.validate();
  return ensemble;
}

MiBceLoss::MiBceLoss(ModelSpec target_spec, const MiModel& attacker, const AuditSet& audit,
                     std::size_t* eval_counter)
    : target_spec_(std::move(target_spec)),
      attacker_(&attacker),
      audit_features_(audit.features),
      target_(static_cast<double>(audit.membership_target)),
      eval_counter_(eval_counter) {
  if (audit_features_.rows() < 1) throw std::invalid_argument("MiBceLoss: empty audit set");
  if (attacker_->spec.input_dim() != target_spec_.output_dim())
    throw std::invalid_argument("MiBceLoss: attacker input width does not match target class count");
}

double MiBceLoss::loss(const ParamVector& target_params) const {
  if (eval_counter_) ++*eval_counter_;
  const Matrix feats = attack_features(target_spec_, target_params, audit_features_);
  const Matrix logits = forward(attacker_->spec, attacker_->params, feats);
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) total += bce_with_logit(logits(i, 0), target_);
  return total / static_cast<double>(logits.rows());
}

GradVector MiBceLoss::grad(const ParamVector& target_params) const {
  if (eval_counter_) ++*eval_counter_;
  // chain: target logits -> softmax -> descending sort -> attacker -> BCE
  ForwardCache target_cache;
  const Matrix z = forward(target_spec_, target_params, audit_features_, &target_cache);
  const Matrix p = softmax_rows(z);
  const Eigen::Index n = p.rows(), C = p.cols();

  Matrix sorted(n, C);
  std::vector<std::vector<int>> perm(static_cast<std::size_t>(n));  // perm[i][k] = class at sorted slot k
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<int> order(static_cast<std::size_t>(C));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p(i, a) > p(i, b); });
    for (Eigen::Index k = 0; k < C; ++k) sorted(i, k) = p(i, order[static_cast<std::size_t>(k)]);
    perm[static_cast<std::size_t>(i)] = std::move(order);
  }

  ForwardCache attacker_cache;
  const Matrix u = forward(attacker_->spec, attacker_->params, sorted, &attacker_cache);
  Matrix du(n, 1);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) du(i, 0) = (sigmoid(u(i, 0)) - target_) * inv_n;

  Matrix dsorted;
  backward(attacker_->spec, attacker_->params, attacker_cache, du, &dsorted);

  // undo the sort, then pull back through the softmax Jacobian
  Matrix dz(n, C);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd dp(C);
    for (Eigen::Index k = 0; k < C; ++k) dp(perm[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]) = dsorted(i, k);
    const double inner = p.row(i).dot(dp);
    dz.row(i) = p.row(i).array() * (dp.array() - inner);
  }
  return backward(target_spec_, target_params, target_cache, dz);
}

double forgetting_loss(const ModelSpec& target_spec, const ParamVector& target_params,
                       const MiModel& mi, const AuditSet& audit) {
  return MiBceLoss(target_spec, mi, audit).loss(target_params);
}

GradVector forgetting_gradient(const ModelSpec& target_spec, const ParamVector& target_params,
                               const MiModel& mi, const AuditSet& audit) {
  return MiBceLoss(target_spec, mi, audit).grad(target_params);
}

double mi_accuracy(const MiModel& eval_model, const ModelSpec& target_spec,
                   const ParamVector& target_params, const Dataset& members,
                   const Dataset& nonmembers) {
  members.validate();
  nonmembers.validate();
  const Matrix feats = attack_features(target_spec, target_params, members.features_matrix());
  const std::vector<double> probs = membership_probabilities(eval_model, feats);
  int flagged = 0;
  for (double m : probs)
    if (m > 0.5) ++flagged;
  return static_cast<double>(flagged) / static_cast<double>(probs.size());
}

namespace {

nlohmann::json model_to_json(const MiModel& m) {
  return nlohmann::json{{"layer_widths", m.spec.layer_widths},
                        {"activation", to_string(m.spec.activation)},
                        {"arch_tag", m.arch_tag},
                        {"params", m.params}};
}

MiModel model_from_json(const nlohmann::json& j) {
  MiModel m;
  m.spec.layer_widths = j.at("layer_widths").get<std::vector<int>>();
  m.spec.activation = activation_from_string(j.at("activation").get<std::string>());
  m.arch_tag = j.at("arch_tag").get<std::string>();
  m.params = j.at("params").get<ParamVector>();
  m.spec.validate();
  if (static_cast<int>(m.params.size()) != param_count(m.spec))
    throw std::runtime_error("MiModel: parameter count does not match spec");
  return m;
}

}  // namespace

void save_ensemble(const MiEnsemble& ensemble, const std::string& path) {
  ensemble.validate();
  nlohmann::json j;
  for (const auto& g : ensemble.guidance) j["guidance"].push_back(model_to_json(g));
  j["eval_model"] = model_to_json(ensemble.eval_model);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_ensemble: cannot open " + path);
  out << j.dump(2) << '\n';
}

MiEnsemble load_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_ensemble: cannot open " + path);
  nlohmann::json j;
  in >> j;
  MiEnsemble ensemble;
  for (const auto& g : j.at("guidance")) ensemble.guidance.push_back(model_from_json(g));
  ensemble.eval_model = model_from_json(j.at("eval_model"));
  ensemble.validate();
  return ensemble;
}

}  // namespace mulab
