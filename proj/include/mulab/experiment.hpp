#pragma once

#include <string>
#include <vector>

#include "mulab/engine.hpp"
#include "mulab/metrics.hpp"

namespace mulab {

// Source of the train/test datasets: a seeded generator or CSV files.
struct DatasetSpec {
  std::string kind = "blobs";  // blobs | moons | csv
  // blobs
  int n_per_class = 250;
  int classes = 8;
  int dim = 2;
  double spread = 0.6;
  int test_n_per_class = 63;
  // moons
  int n = 1000;
  double noise = 0.1;
  int test_n = 250;
  // csv
  std::string train_path;
  std::string test_path;
  std::uint64_t gen_seed = 9000;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<int> hidden = {32, 32};
  Activation activation = Activation::tanh;
  TrainConfig train;  // original model and gold retraining
  double forget_ratio = 0.1;
  double rho = 0.3;
  LtuConfig ltu;  // seed overridden per run
  std::vector<std::string> methods = {"ltu", "ft", "randl", "ga"};
  int ft_epochs = 40;
  double ft_lr = 0.05;
  int ft_batch = 32;
  int randl_epochs = 40;
  double randl_lr = 0.05;
  int randl_batch = 32;
  int ga_steps = 30;
  double ga_lr = 0.02;
  std::vector<std::uint64_t> seeds = {1};
  std::string outdir = "runs";
};

// Parses the sectioned key=value config format; unknown sections or keys are
// rejected with the offending name.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical serialization of everything that affects results (64-bit FNV-1a,
// 16 hex chars). Seeds are included; the output directory is not.
std::string config_hash(const ExperimentConfig& cfg);

// Materializes the configured train/test datasets.
std::pair<Dataset, Dataset> build_datasets(const DatasetSpec& ds);

ModelSpec model_spec_for(const ExperimentConfig& cfg, const Dataset& train);

// Full pipeline: original model, attacker ensemble, gold retrain, every
// selected method for every seed. Writes <outdir>/<hash>/<seed>/result.json
// per seed plus aggregate.csv and table.txt, and returns the run directory.
std::string run_experiment(const ExperimentConfig& cfg);

// Rebuilds aggregate.csv and table.txt from the per-seed result files.
void write_aggregates(const std::string& run_dir);

// Classifier persistence (spec + flat parameters) as JSON.
void save_model(const ModelSpec& spec, const ParamVector& params, const std::string& path);
std::pair<ModelSpec, ParamVector> load_model(const std::string& path);

}  // namespace mulab
