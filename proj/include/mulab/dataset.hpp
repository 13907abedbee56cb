#pragma once

#include <string>
#include <vector>

#include "mulab/model.hpp"

namespace mulab {

struct Example {
  std::vector<double> x;
  int y = 0;
};

// Labeled point set with label space Y = {0..num_classes-1}.
struct Dataset {
  std::vector<Example> examples;
  int dim = 0;
  int num_classes = 0;

  int size() const { return static_cast<int>(examples.size()); }
  bool empty() const { return examples.empty(); }

  // n x dim feature matrix / label column for batched evaluation
  Matrix features_matrix() const;
  std::vector<int> labels() const;

  Batch as_batch() const { return Batch{features_matrix(), labels()}; }
  Dataset subset(const std::vector<int>& indices) const;

  // throws std::invalid_argument on broken invariants
  void validate() const;
};

// Gaussian clusters, one per class. Centers sit on a circle of radius 4 in
// the first two coordinates (evenly spaced on a line for dim == 1), so class
// geometry is deterministic and spread alone controls overlap.
Dataset gen_blobs(int n_per_class, int num_classes, int dim, double spread, std::uint64_t seed);

// Two interleaved half-moons (dim 2, 2 classes) with isotropic noise.
Dataset gen_moons(int n, double noise, std::uint64_t seed);

// CSV: one example per line, dim comma-separated reals then one integer
// label. A header line is skipped when its first token is not numeric.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

// Plumbing for carving a held-out test set before unlearning splits.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed);

}  // namespace mulab
