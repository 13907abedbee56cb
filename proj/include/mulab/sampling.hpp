#pragma once

#include <vector>

#include "mulab/dataset.hpp"

namespace mulab {

// The unlearning partition: forget / remain are disjoint halves of the
// training data, remain_subset is the rho-fraction of remain available at
// unlearning time, test is held out.
struct UnlearnSplit {
  Dataset forget;
  Dataset remain;
  Dataset remain_subset;
  Dataset test;
  double rho = 0.0;
};

// Uniform random-sample split of the training data. |forget| =
// round(forget_ratio*|train|), |remain_subset| = round(rho*|remain|).
UnlearnSplit make_split(const Dataset& train, const Dataset& test, double forget_ratio, double rho,
                        std::uint64_t seed);

// Forget example paired with a deliberately wrong label.
struct SupportExample {
  std::vector<double> x;
  int assigned_label = 0;
  int original_label = 0;
};

struct SupportSet {
  std::vector<SupportExample> examples;
  int dim = 0;
  int num_classes = 0;

  int size() const { return static_cast<int>(examples.size()); }
  Batch batch(const std::vector<int>& indices) const;
};

// Every forget example once, with a label drawn uniformly from Y minus its
// original label. Needs at least two classes.
SupportSet build_support(const Dataset& forget, int num_classes, std::uint64_t seed);

// Embedding = activations feeding the final layer of a frozen reference
// model (the inputs themselves for a single-layer model).
struct FeatureExtractor {
  ModelSpec spec;
  ParamVector params;

  int dim() const;
  std::vector<double> embed(const std::vector<double>& x) const;
  Matrix embed_all(const Dataset& ds) const;  // one row per example
};

// One-hot label embedding.
struct LabelVectorizer {
  int num_classes = 0;
  std::vector<double> embed(int label) const;
};

// Feature-space nearest neighbors: forget anchors are cycled to length k and
// each contributes its closest remain_subset point by embedding distance
// (lowest index wins ties; repeats across anchors allowed).
Dataset sample_z1(const Dataset& remain_subset, const Dataset& forget, const FeatureExtractor& extractor,
                  int k, std::uint64_t seed);

// Label-space nearest neighbors; equidistant candidates are tie-broken
// uniformly at random under the seed.
Dataset sample_z2(const Dataset& remain_subset, const Dataset& forget, const LabelVectorizer& vectorizer,
                  int k, std::uint64_t seed);

// Uniform draw of k examples without replacement.
Dataset sample_z3(const Dataset& remain_subset, int k, std::uint64_t seed);

enum class QueryProvenance { feature_nn, label_nn, random };

// The three fixed query sets, one per sampling function, in fixed order.
struct QueryBundle {
  std::vector<Dataset> query_sets;
  std::vector<QueryProvenance> provenance;
};

QueryBundle build_query_bundle(const UnlearnSplit& split, const FeatureExtractor& extractor,
                               const LabelVectorizer& vectorizer, int k, std::uint64_t seed);

}  // namespace mulab
