#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"
#include "mulab/experiment.hpp"

using namespace mulab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string tiny_config(const std::string& outdir, const std::string& seeds) {
  return
      "# desk-scale smoke experiment\n"
      "[dataset]\n"
      "kind = blobs\n"
      "n_per_class = 25\n"
      "classes = 3\n"
      "dim = 2\n"
      "spread = 0.5\n"
      "test_n_per_class = 8\n"
      "gen_seed = 77\n"
      "[model]\n"
      "hidden = 8\n"
      "activation = tanh\n"
      "train_epochs = 60\n"
      "train_lr = 0.2\n"
      "train_batch = 32\n"
      "[split]\n"
      "forget_ratio = 0.15\n"
      "rho = 0.4\n"
      "[ltu]\n"
      "iterations = 8\n"
      "k = 16\n"
      "[baselines]\n"
      "methods = ltu, ft\n"
      "ft_epochs = 5\n"
      "[runs]\n"
      "seeds = " + seeds + "\n"
      "outdir = " + outdir + "\n";
}

json load_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

void strip_wall_times(json& j) {
  if (j.is_object()) {
    j.erase("ut_seconds");
    for (auto& [k, v] : j.items()) strip_wall_times(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_wall_times(v);
  }
}

std::map<std::string, std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);  // header
  std::map<std::string, std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string method, cell;
    std::getline(ss, method, ',');
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    rows[method] = values;
  }
  return rows;
}

}  // namespace

TEST_CASE("config parsing: values, defaults, comments") {
  const ExperimentConfig cfg = parse_config_text(tiny_config("/tmp/x", "3, 4"));
  CHECK(cfg.dataset.kind == "blobs");
  CHECK(cfg.dataset.classes == 3);
  CHECK(cfg.hidden == std::vector<int>{8});
  CHECK(cfg.train.epochs == 60);
  CHECK(cfg.forget_ratio == 0.15);
  CHECK(cfg.ltu.iterations == 8);
  CHECK(cfg.ltu.alpha == 0.05);  // default preserved
  CHECK(cfg.methods == std::vector<std::string>{"ltu", "ft"});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(cfg.outdir == "/tmp/x");
}

TEST_CASE("config parsing rejects unknown keys, sections, and methods") {
  CHECK_THROWS_WITH_AS(parse_config_text("[split]\nforget_ratio = 0.1\ntypo_key = 3\n"),
                       doctest::Contains("typo_key"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text("[splitz]\nforget_ratio = 0.1\n"),
                       doctest::Contains("splitz"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config_text("[baselines]\nmethods = ltu, warp\n"),
                       doctest::Contains("warp"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("[split]\nrho = 0.1\nrho = 0.2\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("rho = 0.1\n"), std::invalid_argument);  // key outside section
}

TEST_CASE("config hash is stable and input-sensitive") {
  const ExperimentConfig a = parse_config_text(tiny_config("/tmp/x", "3"));
  const ExperimentConfig b = parse_config_text(tiny_config("/tmp/different_outdir", "3"));
  ExperimentConfig c = a;
  c.forget_ratio = 0.2;
  CHECK(config_hash(a) == config_hash(b));  // outdir does not change results
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("model JSON round trip") {
  ModelSpec spec{{2, 5, 3}, Activation::relu};
  Rng rng(12);
  const ParamVector params = init_params(spec, rng);
  const std::string path = "/tmp/mulab_test_model_" + std::to_string(::getpid()) + ".json";
  save_model(spec, params, path);
  const auto [spec2, params2] = load_model(path);
  CHECK(spec2.layer_widths == spec.layer_widths);
  CHECK(spec2.activation == spec.activation);
  CHECK(params2 == params);
  std::remove(path.c_str());
}

TEST_CASE("run_experiment: artifacts, aggregation oracle, determinism") {
  const std::string outdir = "/tmp/mulab_exp_" + std::to_string(::getpid());
  const ExperimentConfig cfg = parse_config_text(tiny_config(outdir, "3, 4"));
  const std::string run_dir = run_experiment(cfg);

  CHECK(fs::exists(fs::path(run_dir) / "3" / "result.json"));
  CHECK(fs::exists(fs::path(run_dir) / "4" / "result.json"));
  CHECK(fs::exists(fs::path(run_dir) / "aggregate.csv"));
  CHECK(fs::exists(fs::path(run_dir) / "table.txt"));

  // aggregate mean equals the hand-computed mean of the per-run records
  const json r3 = load_json(fs::path(run_dir) / "3" / "result.json");
  const json r4 = load_json(fs::path(run_dir) / "4" / "result.json");
  const auto rows = read_csv(fs::path(run_dir) / "aggregate.csv");
  for (const std::string method : {"gold", "ltu", "ft"}) {
    REQUIRE(rows.count(method));
    const double ua3 = r3.at("methods").at(method).at("metrics").at("ua").get<double>();
    const double ua4 = r4.at("methods").at(method).at("metrics").at("ua").get<double>();
    const double want_mean = 100.0 * 0.5 * (ua3 + ua4);
    CHECK(rows.at(method)[0] == doctest::Approx(want_mean).epsilon(1e-12));
    const double want_std = 100.0 * 0.5 * std::abs(ua3 - ua4);  // population std of two points
    CHECK(rows.at(method)[1] == doctest::Approx(want_std).epsilon(1e-9));
  }

  // reruns reproduce the records bit for bit once wall times are stripped
  const std::string outdir2 = outdir + "_rerun";
  ExperimentConfig again = cfg;
  again.outdir = outdir2;
  const std::string run_dir2 = run_experiment(again);
  json a = load_json(fs::path(run_dir) / "3" / "result.json");
  json b = load_json(fs::path(run_dir2) / "3" / "result.json");
  strip_wall_times(a);
  strip_wall_times(b);
  CHECK(a == b);

  fs::remove_all(outdir);
  fs::remove_all(outdir2);
}

TEST_CASE("single seed yields zero standard deviations") {
  const std::string outdir = "/tmp/mulab_exp1_" + std::to_string(::getpid());
  ExperimentConfig cfg = parse_config_text(tiny_config(outdir, "9"));
  cfg.methods = {"ft"};
  const std::string run_dir = run_experiment(cfg);
  const auto rows = read_csv(fs::path(run_dir) / "aggregate.csv");
  for (const auto& [method, values] : rows) {
    // std columns are 1,3,5,7,9 in the wide layout
    for (std::size_t i : {1u, 3u, 5u, 7u, 9u}) CHECK(values.at(i) == 0.0);
  }
  fs::remove_all(outdir);
}
