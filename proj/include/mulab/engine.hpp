#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mulab/meta.hpp"
#include "mulab/mi.hpp"
#include "mulab/sampling.hpp"

namespace mulab {

// Records which datasets a training loop touched; lets tests assert that the
// forget set never feeds gold retraining or fine-tuning.
struct ReadAudit {
  std::map<std::string, std::size_t> reads;   // role -> examples served
  std::set<const void*> sources;              // identity of datasets read

  void record(const std::string& role, const void* source, std::size_t n) {
    reads[role] += n;
    sources.insert(source);
  }
  bool touched(const void* source) const { return sources.count(source) > 0; }
};

struct TrainConfig {
  int epochs = 300;
  int batch = 64;
  double lr = 0.1;
  double weight_decay = 0.0;  // L2 coefficient added to the CE gradient
  double loss_tol = 0.0;      // stop early when full-data CE drops below; 0 disables
  int check_every = 20;       // epochs between early-stop checks
};

// Minibatch SGD with cross-entropy from a fresh Glorot init.
ParamVector train_classifier(const ModelSpec& spec, const Dataset& data, const TrainConfig& cfg,
                             std::uint64_t seed, ReadAudit* audit = nullptr,
                             const std::string& role = "train");

// Same loop but starting from the given parameters.
ParamVector train_from(const ModelSpec& spec, const ParamVector& start, const Dataset& data,
                       const TrainConfig& cfg, std::uint64_t seed, ReadAudit* audit = nullptr,
                       const std::string& role = "finetune");

enum class CombinePolicy { project, add, alternate };

CombinePolicy combine_policy_from_string(const std::string& s);
std::string to_string(CombinePolicy p);

struct LtuConfig {
  double alpha = 0.05;  // meta-tune rate
  double beta = 0.05;   // meta-update rate
  int iterations = 300;
  int batch_support = 32;
  int batch_query = 32;
  int k = 64;       // query set size (clamped to |remain_subset|)
  int K = 3;        // guidance attackers
  bool remember_feedback = true;
  bool forget_feedback = true;
  bool meta_opt = true;  // false: plain summed gradients on both channels
  CombinePolicy combine_policy = CombinePolicy::project;
  MetaMode meta_mode = MetaMode::exact;
  std::uint64_t seed = 0;
};

struct TrajectoryPoint {
  int iter = 0;
  double remember_loss = 0.0;  // mean query-batch CE at the pre-update parameters
  double forget_loss = 0.0;    // audit BCE via the support attacker at the pre-update parameters
  double cosine_rf = 0.0;      // cos(g_r, g_f)
  double grad_norm = 0.0;      // |G|
};

struct UnlearnResult {
  ParamVector final_params;
  std::vector<TrajectoryPoint> trajectory;
  double wall_time_seconds = 0.0;
};

struct LtuInstrumentation {
  std::size_t mi_evaluations = 0;       // attacker loss/grad calls
  std::size_t remain_subset_reads = 0;  // examples served from the remain subset
  double min_combined_cosine = 1.0;     // min over iterations of cos(G, g_r) under project policy
};

// The meta-optimized unlearning loop: per iteration a remembering gradient
// (support = randomly relabeled forget batch, queries = the three fixed query
// sets) and a forgetting gradient (support/query = two distinct guidance
// attackers scoring the audit set) are combined per policy and applied.
UnlearnResult ltu_unlearn(const ModelSpec& spec, const ParamVector& original_params,
                          const UnlearnSplit& split, const MiEnsemble& ensemble,
                          const FeatureExtractor& extractor, const LabelVectorizer& vectorizer,
                          const LtuConfig& cfg, LtuInstrumentation* instr = nullptr);

// Exact unlearning reference: fresh model trained on the remain set only.
ParamVector retrain_gold(const ModelSpec& spec, const UnlearnSplit& split, const TrainConfig& cfg,
                         std::uint64_t seed, ReadAudit* audit = nullptr);

// Fine-tunes the original model on the given retained data only.
ParamVector finetune_baseline(const ModelSpec& spec, const ParamVector& original_params,
                              const Dataset& retained, int epochs, double lr, int batch,
                              std::uint64_t seed, ReadAudit* audit = nullptr);

// Fine-tunes on remain_subset plus the forget set under random wrong labels.
ParamVector randlabel_baseline(const ModelSpec& spec, const ParamVector& original_params,
                               const UnlearnSplit& split, int epochs, double lr, int batch,
                               std::uint64_t seed);

// Gradient ascent on the forget-set cross-entropy.
ParamVector ga_baseline(const ModelSpec& spec, const ParamVector& original_params,
                        const Dataset& forget, int steps, double lr);

}  // namespace mulab
