#include "mulab/engine.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "mulab/harmonize.hpp"

namespace mulab {

namespace {

Batch gather_batch(const Dataset& ds, const std::vector<int>& idx) {
  Batch b;
  b.features.resize(static_cast<Eigen::Index>(idx.size()), ds.dim);
  b.labels.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& e = ds.examples[static_cast<std::size_t>(idx[r])];
    for (int j = 0; j < ds.dim; ++j) b.features(static_cast<Eigen::Index>(r), j) = e.x[static_cast<std::size_t>(j)];
    b.labels.push_back(e.y);
  }
  return b;
}

ParamVector sgd_epochs(const ModelSpec& spec, ParamVector params, const Dataset& data,
                       const TrainConfig& cfg, Rng& rng, ReadAudit* audit, const std::string& role) {
  data.validate();
  const int n = data.size();
  const int batch = std::min(cfg.batch, n);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  const Batch full = gather_batch(data, order);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (int at = 0; at < n; at += batch) {
      const int take = std::min(batch, n - at);
      std::vector<int> idx(order.begin() + at, order.begin() + at + take);
      if (audit) audit->record(role, &data, idx.size());
      CeBatchLoss loss(spec, gather_batch(data, idx));
      GradVector g = loss.grad(params);
      if (cfg.weight_decay > 0.0)
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += cfg.weight_decay * params[i];
      params = sgd_step(params, g, cfg.lr);
    }
    if (cfg.loss_tol > 0.0 && (epoch + 1) % cfg.check_every == 0) {
      if (cross_entropy(forward(spec, params, full.features), full.labels) < cfg.loss_tol) break;
    }
  }
  return params;
}

}  // namespace

ParamVector train_classifier(const ModelSpec& spec, const Dataset& data, const TrainConfig& cfg,
                             std::uint64_t seed, ReadAudit* audit, const std::string& role) {
  Rng rng(seed);
  ParamVector params = init_params(spec, rng);
  return sgd_epochs(spec, std::move(params), data, cfg, rng, audit, role);
}

ParamVector train_from(const ModelSpec& spec, const ParamVector& start, const Dataset& data,
                       const TrainConfig& cfg, std::uint64_t seed, ReadAudit* audit,
                       const std::string& role) {
  Rng rng(seed);
  return sgd_epochs(spec, start, data, cfg, rng, audit, role);
}

CombinePolicy combine_policy_from_string(const std::string& s) {
  if (s == "project") return CombinePolicy::project;
  if (s == "add") return CombinePolicy::add;
  if (s == "alternate") return CombinePolicy::alternate;
  throw std::invalid_argument("unknown combine policy '" + s + "' (expected project, add, or alternate)");
}

std::string to_string(CombinePolicy p) {
  switch (p) {
    case CombinePolicy::project: return "project";
    case CombinePolicy::add: return "add";
    default: return "alternate";
  }
}

UnlearnResult ltu_unlearn(const ModelSpec& spec, const ParamVector& original_params,
                          const UnlearnSplit& split, const MiEnsemble& ensemble,
                          const FeatureExtractor& extractor, const LabelVectorizer& vectorizer,
                          const LtuConfig& cfg, LtuInstrumentation* instr) {
  spec.validate();
  if (static_cast<int>(original_params.size()) != param_count(spec))
    throw std::invalid_argument("ltu_unlearn: parameter vector does not match model spec");
  if (cfg.iterations < 0) throw std::invalid_argument("ltu_unlearn: negative iteration count");
  if (cfg.beta <= 0.0 || !std::isfinite(cfg.beta) || cfg.alpha < 0.0 || !std::isfinite(cfg.alpha))
    throw std::invalid_argument("ltu_unlearn: alpha/beta must be finite and positive");
  if (cfg.combine_policy == CombinePolicy::alternate &&
      !(cfg.remember_feedback && cfg.forget_feedback))
    throw std::invalid_argument("ltu_unlearn: alternate policy requires both feedback channels");
  if (cfg.forget_feedback && ensemble.guidance.size() < 2)
    throw std::invalid_argument("ltu_unlearn: forgetting feedback needs at least 2 guidance attackers");

  const int C = spec.output_dim();
  Rng rng(cfg.seed);
  const std::uint64_t support_seed = rng.next();
  const std::uint64_t bundle_seed = rng.next();

  SupportSet support;
  QueryBundle bundle;
  AuditSet audit;
  if (cfg.remember_feedback) {
    support = build_support(split.forget, C, support_seed);
    const int k_eff = std::min(cfg.k, split.remain_subset.size());
    bundle = build_query_bundle(split, extractor, vectorizer, k_eff, bundle_seed);
    if (instr)
      for (const auto& q : bundle.query_sets) instr->remain_subset_reads += static_cast<std::size_t>(q.size());
  }
  if (cfg.forget_feedback) audit = audit_set(split.forget);

  const MetaConfig meta_cfg{cfg.meta_opt ? cfg.alpha : 0.0, cfg.meta_mode};
  const GradVector zero(original_params.size(), 0.0);

  UnlearnResult result;
  result.final_params = original_params;
  result.trajectory.reserve(static_cast<std::size_t>(cfg.iterations));

  const auto t0 = std::chrono::steady_clock::now();
  for (int it = 0; it < cfg.iterations; ++it) {
    const bool want_remember =
        cfg.remember_feedback && !(cfg.combine_policy == CombinePolicy::alternate && it % 2 == 1);
    const bool want_forget =
        cfg.forget_feedback && !(cfg.combine_policy == CombinePolicy::alternate && it % 2 == 0);

    GradVector g_r = zero;
    double remember_loss = 0.0;
    if (want_remember) {
      const int n_support = std::min(cfg.batch_support, support.size());
      CeBatchLoss support_loss(spec, support.batch(rng.sample_without_replacement(support.size(), n_support)));
      std::vector<CeBatchLoss> query_losses;
      query_losses.reserve(bundle.query_sets.size());
      for (const auto& q : bundle.query_sets) {
        const int n_query = std::min(cfg.batch_query, q.size());
        const std::vector<int> idx = rng.sample_without_replacement(q.size(), n_query);
        if (instr) instr->remain_subset_reads += idx.size();
        query_losses.emplace_back(spec, gather_batch(q, idx));
      }
      MetaTask task;
      task.support = &support_loss;
      for (const auto& q : query_losses) task.queries.push_back(&q);
      g_r = meta_gradient(result.final_params, task, meta_cfg);
      for (const auto& q : query_losses) remember_loss += q.loss(result.final_params);
      remember_loss /= static_cast<double>(query_losses.size());
    }

    GradVector g_f = zero;
    double forget_loss_val = 0.0;
    if (want_forget) {
      const int K = static_cast<int>(ensemble.guidance.size());
      const int i = rng.uniform_int(0, K - 1);
      int j = rng.uniform_int(0, K - 2);
      if (j >= i) ++j;
      std::size_t* counter = instr ? &instr->mi_evaluations : nullptr;
      MiBceLoss support_loss(spec, ensemble.guidance[static_cast<std::size_t>(i)], audit, counter);
      MiBceLoss query_loss(spec, ensemble.guidance[static_cast<std::size_t>(j)], audit, counter);
      MetaTask task;
      task.support = &support_loss;
      task.queries.push_back(&query_loss);
      g_f = meta_gradient(result.final_params, task, meta_cfg);
      forget_loss_val = support_loss.loss(result.final_params);
    }

    GradVector G;
    double cos_rf = 0.0;
    switch (cfg.combine_policy) {
      case CombinePolicy::project:
        cos_rf = cosine(g_r, g_f);
        G = combine(g_r, harmonize(g_r, g_f));
        if (instr) instr->min_combined_cosine = std::min(instr->min_combined_cosine, cosine(G, g_r));
        break;
      case CombinePolicy::add:
        cos_rf = cosine(g_r, g_f);
        G = combine(g_r, g_f);
        break;
      case CombinePolicy::alternate:
        G = want_remember ? g_r : g_f;
        break;
    }

    result.final_params = sgd_step(result.final_params, G, cfg.beta);

    double norm = 0.0;
    for (double x : G) norm += x * x;
    result.trajectory.push_back({it, remember_loss, forget_loss_val, cos_rf, std::sqrt(norm)});
  }
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

ParamVector retrain_gold(const ModelSpec& spec, const UnlearnSplit& split, const TrainConfig& cfg,
                         std::uint64_t seed, ReadAudit* audit) {
  return train_classifier(spec, split.remain, cfg, seed, audit, "gold:remain");
}

ParamVector finetune_baseline(const ModelSpec& spec, const ParamVector& original_params,
                              const Dataset& retained, int epochs, double lr, int batch,
                              std::uint64_t seed, ReadAudit* audit) {
  if (epochs == 0) return original_params;
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.lr = lr;
  cfg.batch = batch;
  return train_from(spec, original_params, retained, cfg, seed, audit, "finetune:retained");
}

ParamVector randlabel_baseline(const ModelSpec& spec, const ParamVector& original_params,
                               const UnlearnSplit& split, int epochs, double lr, int batch,
                               std::uint64_t seed) {
  if (epochs == 0) return original_params;
  Rng rng(seed);
  const SupportSet relabeled = build_support(split.forget, spec.output_dim(), rng.next());
  Dataset mixed = split.remain_subset;
  for (const auto& se : relabeled.examples) mixed.examples.push_back({se.x, se.assigned_label});
  mixed.num_classes = std::max(mixed.num_classes, spec.output_dim());
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.lr = lr;
  cfg.batch = batch;
  return train_from(spec, original_params, mixed, cfg, rng.next(), nullptr, "randlabel:mixed");
}

ParamVector ga_baseline(const ModelSpec& spec, const ParamVector& original_params,
                        const Dataset& forget, int steps, double lr) {
  if (steps == 0) return original_params;
  forget.validate();
  CeBatchLoss loss(spec, forget.as_batch());
  ParamVector params = original_params;
  for (int s = 0; s < steps; ++s) params = sgd_step(params, loss.grad(params), -lr);
  return params;
}

}  // namespace mulab
