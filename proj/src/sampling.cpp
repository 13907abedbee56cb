#include "mulab/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace mulab {

UnlearnSplit make_split(const Dataset& train, const Dataset& test, double forget_ratio, double rho,
                        std::uint64_t seed) {
  train.validate();
  test.validate();
  if (forget_ratio <= 0.0 || forget_ratio >= 1.0)
    throw std::invalid_argument("make_split: forget_ratio must be in (0,1)");
  if (rho <= 0.0 || rho >= 1.0) throw std::invalid_argument("make_split: rho must be in (0,1)");

  const int n = train.size();
  const int n_forget = static_cast<int>(std::lround(forget_ratio * n));
  if (n_forget == 0 || n_forget == n)
    throw std::invalid_argument("make_split: forget_ratio produces an empty set");

  Rng rng(seed);
  std::vector<int> idx = rng.sample_without_replacement(n, n);
  std::vector<int> forget_idx(idx.begin(), idx.begin() + n_forget);
  std::vector<int> remain_idx(idx.begin() + n_forget, idx.end());

  UnlearnSplit split;
  split.forget = train.subset(forget_idx);
  split.remain = train.subset(remain_idx);
  const int n_sub = static_cast<int>(std::lround(rho * split.remain.size()));
  if (n_sub == 0) throw std::invalid_argument("make_split: rho produces an empty remain subset");
  split.remain_subset = split.remain.subset(rng.sample_without_replacement(split.remain.size(), n_sub));
  split.test = test;
  split.rho = rho;
  return split;
}

Batch SupportSet::batch(const std::vector<int>& indices) const {
  Batch b;
  b.features.resize(static_cast<Eigen::Index>(indices.size()), dim);
  b.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& e = examples.at(static_cast<std::size_t>(indices[r]));
    for (int j = 0; j < dim; ++j) b.features(static_cast<Eigen::Index>(r), j) = e.x[static_cast<std::size_t>(j)];
    b.labels.push_back(e.assigned_label);
  }
  return b;
}

SupportSet build_support(const Dataset& forget, int num_classes, std::uint64_t seed) {
  forget.validate();
  if (num_classes < 2)
    throw std::invalid_argument("build_support: need at least 2 classes to reassign labels");
  Rng rng(seed);
  SupportSet s;
  s.dim = forget.dim;
  s.num_classes = num_classes;
  s.examples.reserve(forget.examples.size());
  for (const auto& e : forget.examples) {
    SupportExample se;
    se.x = e.x;
    se.original_label = e.y;
    int pick = rng.uniform_int(0, num_classes - 2);
    if (pick >= e.y) ++pick;  // skip the original label
    se.assigned_label = pick;
    s.examples.push_back(std::move(se));
  }
  return s;
}

int FeatureExtractor::dim() const {
  return spec.layer_widths[static_cast<std::size_t>(spec.num_layers() - 1)];
}

std::vector<double> FeatureExtractor::embed(const std::vector<double>& x) const {
  Matrix row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) row(0, static_cast<Eigen::Index>(j)) = x[j];
  ForwardCache cache;
  forward(spec, params, row, &cache);
  const Matrix& pen = cache.post[static_cast<std::size_t>(spec.num_layers() - 1)];
  std::vector<double> out(static_cast<std::size_t>(pen.cols()));
  for (Eigen::Index j = 0; j < pen.cols(); ++j) out[static_cast<std::size_t>(j)] = pen(0, j);
  return out;
}

Matrix FeatureExtractor::embed_all(const Dataset& ds) const {
  ForwardCache cache;
  forward(spec, params, ds.features_matrix(), &cache);
  return cache.post[static_cast<std::size_t>(spec.num_layers() - 1)];
}

std::vector<double> LabelVectorizer::embed(int label) const {
  if (label < 0 || label >= num_classes)
    throw std::invalid_argument("LabelVectorizer: label " + std::to_string(label) + " out of range");
  std::vector<double> v(static_cast<std::size_t>(num_classes), 0.0);
  v[static_cast<std::size_t>(label)] = 1.0;
  return v;
}

namespace {

// anchor index into forget for slot t: cycle deterministically
inline int anchor_at(const Dataset& forget, int t) { return t % forget.size(); }

void check_query_sizes(const Dataset& remain_subset, int k, const char* where) {
  if (remain_subset.empty()) throw std::invalid_argument(std::string(where) + ": remain subset is empty");
  if (k < 1) throw std::invalid_argument(std::string(where) + ": k must be positive");
  if (k > remain_subset.size())
    throw std::invalid_argument(std::string(where) + ": k=" + std::to_string(k) + " exceeds |remain_subset|=" +
                                std::to_string(remain_subset.size()));
}

}  // namespace

Dataset sample_z1(const Dataset& remain_subset, const Dataset& forget, const FeatureExtractor& extractor,
                  int k, std::uint64_t seed) {
  (void)seed;  // selection is fully deterministic (lowest-index tie break)
  check_query_sizes(remain_subset, k, "sample_z1");
  forget.validate();
  const Matrix pool = extractor.embed_all(remain_subset);
  const Matrix anchors = extractor.embed_all(forget);
  std::vector<int> picks;
  picks.reserve(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t) {
    const Eigen::Index a = anchor_at(forget, t);
    int best = 0;
    double best_d = (pool.row(0) - anchors.row(a)).squaredNorm();
    for (int j = 1; j < remain_subset.size(); ++j) {
      const double d = (pool.row(j) - anchors.row(a)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    picks.push_back(best);
  }
  return remain_subset.subset(picks);
}

Dataset sample_z2(const Dataset& remain_subset, const Dataset& forget, const LabelVectorizer& vectorizer,
                  int k, std::uint64_t seed) {
  check_query_sizes(remain_subset, k, "sample_z2");
  forget.validate();
  Rng rng(seed);
  // With one-hot labels the distance is 0 for a shared label and sqrt(2)
  // otherwise, so the argmin reduces to: same-label candidates if any exist,
  // else the whole subset. Candidates are precomputed per class.
  std::vector<std::vector<int>> by_label(static_cast<std::size_t>(vectorizer.num_classes));
  for (int j = 0; j < remain_subset.size(); ++j)
    by_label.at(static_cast<std::size_t>(remain_subset.examples[static_cast<std::size_t>(j)].y)).push_back(j);
  std::vector<int> all(static_cast<std::size_t>(remain_subset.size()));
  for (int j = 0; j < remain_subset.size(); ++j) all[static_cast<std::size_t>(j)] = j;

  std::vector<int> picks;
  picks.reserve(static_cast<std::size_t>(k));
  for (int t = 0; t < k; ++t) {
    const int a = anchor_at(forget, t);
    const int label = forget.examples[static_cast<std::size_t>(a)].y;
    const std::vector<int>& ties =
        (label < vectorizer.num_classes && !by_label[static_cast<std::size_t>(label)].empty())
            ? by_label[static_cast<std::size_t>(label)]
            : all;
    picks.push_back(ties[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(ties.size()) - 1))]);
  }
  return remain_subset.subset(picks);
}

Dataset sample_z3(const Dataset& remain_subset, int k, std::uint64_t seed) {
  check_query_sizes(remain_subset, k, "sample_z3");
  Rng rng(seed);
  return remain_subset.subset(rng.sample_without_replacement(remain_subset.size(), k));
}

QueryBundle build_query_bundle(const UnlearnSplit& split, const FeatureExtractor& extractor,
                               const LabelVectorizer& vectorizer, int k, std::uint64_t seed) {
  Rng rng(seed);
  const std::uint64_t s1 = rng.next(), s2 = rng.next(), s3 = rng.next();
  QueryBundle bundle;
  bundle.query_sets.push_back(sample_z1(split.remain_subset, split.forget, extractor, k, s1));
  bundle.query_sets.push_back(sample_z2(split.remain_subset, split.forget, vectorizer, k, s2));
  bundle.query_sets.push_back(sample_z3(split.remain_subset, k, s3));
  bundle.provenance = {QueryProvenance::feature_nn, QueryProvenance::label_nn, QueryProvenance::random};
  return bundle;
}

}  // namespace mulab
