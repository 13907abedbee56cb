#include "mulab/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mulab {

Matrix Dataset::features_matrix() const {
  Matrix X(size(), dim);
  for (int i = 0; i < size(); ++i)
    for (int j = 0; j < dim; ++j) X(i, j) = examples[static_cast<std::size_t>(i)].x[static_cast<std::size_t>(j)];
  return X;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) out[i] = examples[i].y;
  return out;
}

Dataset Dataset::subset(const std::vector<int>& indices) const {
  Dataset out;
  out.dim = dim;
  out.num_classes = num_classes;
  out.examples.reserve(indices.size());
  for (int i : indices) out.examples.push_back(examples.at(static_cast<std::size_t>(i)));
  return out;
}

void Dataset::validate() const {
  if (examples.empty()) throw std::invalid_argument("Dataset: empty");
  if (dim < 1 || num_classes < 1) throw std::invalid_argument("Dataset: bad dim/num_classes");
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (static_cast<int>(examples[i].x.size()) != dim)
      throw std::invalid_argument("Dataset: example " + std::to_string(i) + " has dimension " +
                                  std::to_string(examples[i].x.size()) + ", expected " +
                                  std::to_string(dim));
    if (examples[i].y < 0 || examples[i].y >= num_classes)
      throw std::invalid_argument("Dataset: example " + std::to_string(i) + " has label " +
                                  std::to_string(examples[i].y) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
  }
}

Dataset gen_blobs(int n_per_class, int num_classes, int dim, double spread, std::uint64_t seed) {
  if (n_per_class < 1 || num_classes < 1 || dim < 1)
    throw std::invalid_argument("gen_blobs: sizes must be positive");
  Rng rng(seed);
  Dataset ds;
  ds.dim = dim;
  ds.num_classes = num_classes;
  constexpr double radius = 4.0;
  for (int c = 0; c < num_classes; ++c) {
    std::vector<double> center(static_cast<std::size_t>(dim), 0.0);
    if (dim == 1) {
      center[0] = num_classes == 1 ? 0.0 : radius * (2.0 * c / (num_classes - 1) - 1.0);
    } else {
      const double angle = 2.0 * M_PI * c / num_classes;
      center[0] = radius * std::cos(angle);
      center[1] = radius * std::sin(angle);
    }
    for (int i = 0; i < n_per_class; ++i) {
      Example e;
      e.y = c;
      e.x.resize(static_cast<std::size_t>(dim));
      for (int j = 0; j < dim; ++j) e.x[static_cast<std::size_t>(j)] = center[static_cast<std::size_t>(j)] + spread * rng.normal();
      ds.examples.push_back(std::move(e));
    }
  }
  return ds;
}

Dataset gen_moons(int n, double noise, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_moons: need at least 2 points");
  Rng rng(seed);
  Dataset ds;
  ds.dim = 2;
  ds.num_classes = 2;
  const int n0 = n / 2;
  for (int i = 0; i < n; ++i) {
    const bool outer = i < n0;
    const int cnt = outer ? n0 : n - n0;
    const int j = outer ? i : i - n0;
    const double t = M_PI * (cnt == 1 ? 0.5 : static_cast<double>(j) / (cnt - 1));
    Example e;
    e.y = outer ? 0 : 1;
    if (outer)
      e.x = {std::cos(t), std::sin(t)};
    else
      e.x = {1.0 - std::cos(t), 0.5 - std::sin(t)};
    e.x[0] += noise * rng.normal();
    e.x[1] += noise * rng.normal();
    ds.examples.push_back(std::move(e));
  }
  return ds;
}

namespace {

bool parse_double(const std::string& tok, double* out) {
  try {
    std::size_t pos = 0;
    *out = std::stod(tok, &pos);
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
    return pos == tok.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  Dataset ds;
  std::string line;
  int lineno = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> toks;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) toks.push_back(tok);
    if (toks.empty()) continue;
    double probe;
    if (lineno == 1 && !parse_double(toks[0], &probe)) continue;  // header
    if (toks.size() < 2)
      throw std::runtime_error("load_csv: line " + std::to_string(lineno) +
                               ": need at least one feature and a label");
    Example e;
    e.x.reserve(toks.size() - 1);
    for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
      double v;
      if (!parse_double(toks[i], &v))
        throw std::runtime_error("load_csv: line " + std::to_string(lineno) + ": bad value '" +
                                 toks[i] + "'");
      e.x.push_back(v);
    }
    double lab;
    if (!parse_double(toks.back(), &lab) || lab != std::floor(lab) || lab < 0)
      throw std::runtime_error("load_csv: line " + std::to_string(lineno) +
                               ": label must be a non-negative integer, got '" + toks.back() + "'");
    e.y = static_cast<int>(lab);
    if (ds.examples.empty()) {
      ds.dim = static_cast<int>(e.x.size());
    } else if (static_cast<int>(e.x.size()) != ds.dim) {
      throw std::runtime_error("load_csv: line " + std::to_string(lineno) + ": expected " +
                               std::to_string(ds.dim) + " features, got " +
                               std::to_string(e.x.size()));
    }
    max_label = std::max(max_label, e.y);
    ds.examples.push_back(std::move(e));
  }
  if (ds.examples.empty()) throw std::runtime_error("load_csv: no data rows in " + path);
  ds.num_classes = max_label + 1;
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open " + path);
  out.precision(17);
  for (const auto& e : ds.examples) {
    for (double v : e.x) out << v << ',';
    out << e.y << '\n';
  }
  if (!out) throw std::runtime_error("save_csv: write failed for " + path);
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double test_fraction,
                                             std::uint64_t seed) {
  ds.validate();
  if (test_fraction <= 0.0 || test_fraction >= 1.0)
    throw std::invalid_argument("split_train_test: fraction must be in (0,1)");
  const int n_test = static_cast<int>(std::lround(test_fraction * ds.size()));
  if (n_test == 0 || n_test == ds.size())
    throw std::invalid_argument("split_train_test: fraction produces an empty side");
  Rng rng(seed);
  std::vector<int> idx = rng.sample_without_replacement(ds.size(), ds.size());
  std::vector<int> test_idx(idx.begin(), idx.begin() + n_test);
  std::vector<int> train_idx(idx.begin() + n_test, idx.end());
  return {ds.subset(train_idx), ds.subset(test_idx)};
}

}  // namespace mulab
