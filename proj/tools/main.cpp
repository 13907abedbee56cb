// Command-line front end for the unlearning lab: dataset generation, model
// and attacker training, the unlearning methods, metric evaluation, and the
// full multi-seed experiment runner.

#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mulab/experiment.hpp"

using namespace mulab;

namespace {

struct SplitArgs {
  std::string train_path;
  std::string test_path;
  double forget_ratio = 0.1;
  double rho = 0.3;
  std::uint64_t split_seed = 1;

  void attach(CLI::App* app) {
    app->add_option("--train", train_path, "training CSV")->required();
    app->add_option("--test", test_path, "test CSV")->required();
    app->add_option("--forget-ratio", forget_ratio, "fraction of training data to forget");
    app->add_option("--rho", rho, "fraction of the remain set available at unlearning time");
    app->add_option("--split-seed", split_seed, "seed for the forget/remain partition");
  }

  UnlearnSplit build() const {
    Dataset train = load_csv(train_path);
    Dataset test = load_csv(test_path);
    test.num_classes = train.num_classes = std::max(train.num_classes, test.num_classes);
    return make_split(train, test, forget_ratio, rho, split_seed);
  }
};

struct TrainArgs {
  TrainConfig cfg;
  std::vector<int> hidden = {32, 32};
  std::string activation = "tanh";

  void attach(CLI::App* app) {
    app->add_option("--hidden", hidden, "hidden layer widths");
    app->add_option("--activation", activation, "tanh or relu");
    app->add_option("--epochs", cfg.epochs, "training epochs");
    app->add_option("--lr", cfg.lr, "learning rate");
    app->add_option("--batch", cfg.batch, "minibatch size");
    app->add_option("--tol", cfg.loss_tol, "early-stop CE threshold (0 disables)");
  }

  ModelSpec spec_for(const Dataset& ds) const {
    ModelSpec spec;
    spec.layer_widths.push_back(ds.dim);
    for (int h : hidden) spec.layer_widths.push_back(h);
    spec.layer_widths.push_back(ds.num_classes);
    spec.activation = activation_from_string(activation);
    return spec;
  }
};

void write_metrics_json(const MetricsReport& m, const DeltaReport* delta, const std::string& path) {
  nlohmann::json j;
  j["metrics"] = {{"ua", m.ua}, {"ra", m.ra}, {"ta", m.ta}, {"mi", m.mi}, {"ut_seconds", m.ut_seconds}};
  j["rendered"] = render_metrics_row(m);
  if (delta) {
    j["delta"] = {{"ua", delta->ua}, {"ra", delta->ra}, {"ta", delta->ta}, {"mi", delta->mi}};
    j["rendered_with_delta"] = render_delta_row(*delta);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale machine-unlearning lab"};
  app.require_subcommand(1);

  // ------------------------------------------------------------- gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset CSV");
  std::string gen_kind = "blobs", gen_out = "data.csv";
  int gen_npc = 250, gen_classes = 8, gen_dim = 2, gen_n = 1000;
  double gen_spread = 0.55, gen_noise = 0.1;
  std::uint64_t gen_seed = 9000;
  gen->add_option("--kind", gen_kind, "blobs or moons");
  gen->add_option("--n-per-class", gen_npc, "examples per class (blobs)");
  gen->add_option("--classes", gen_classes, "class count (blobs)");
  gen->add_option("--dim", gen_dim, "feature dimension (blobs)");
  gen->add_option("--spread", gen_spread, "cluster standard deviation (blobs)");
  gen->add_option("--n", gen_n, "total examples (moons)");
  gen->add_option("--noise", gen_noise, "noise level (moons)");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output CSV path")->required();

  // ------------------------------------------------------- train-original
  auto* train_cmd = app.add_subcommand("train-original", "train the pre-unlearning model");
  std::string to_train_path, to_out = "original.json";
  std::uint64_t to_seed = 1;
  TrainArgs to_args;
  train_cmd->add_option("--train", to_train_path, "training CSV")->required();
  train_cmd->add_option("--seed", to_seed, "training seed");
  train_cmd->add_option("--out", to_out, "output model JSON")->required();
  to_args.attach(train_cmd);

  // ------------------------------------------------------------- train-mi
  auto* mi_cmd = app.add_subcommand("train-mi", "train the membership-attacker ensemble");
  std::string mi_train, mi_test, mi_model, mi_out = "ensemble.json";
  int mi_K = 3;
  std::uint64_t mi_seed = 1;
  mi_cmd->add_option("--train", mi_train, "member pool CSV (training data)")->required();
  mi_cmd->add_option("--test", mi_test, "nonmember pool CSV (held-out data)")->required();
  mi_cmd->add_option("--model", mi_model, "target model JSON")->required();
  mi_cmd->add_option("--K", mi_K, "guidance attacker count");
  mi_cmd->add_option("--seed", mi_seed, "training seed");
  mi_cmd->add_option("--out", mi_out, "output ensemble JSON")->required();

  // --------------------------------------------------------- retrain-gold
  auto* gold_cmd = app.add_subcommand("retrain-gold", "retrain from scratch on the remain set");
  SplitArgs gold_split;
  TrainArgs gold_args;
  std::string gold_out = "gold.json";
  std::uint64_t gold_seed = 1;
  gold_split.attach(gold_cmd);
  gold_args.attach(gold_cmd);
  gold_cmd->add_option("--seed", gold_seed, "training seed");
  gold_cmd->add_option("--out", gold_out, "output model JSON")->required();

  // -------------------------------------------------------------- unlearn
  auto* unlearn_cmd = app.add_subcommand("unlearn", "run an unlearning method");
  std::string un_method, un_model, un_ensemble, un_out = "unlearned.json", un_traj;
  SplitArgs un_split;
  LtuConfig un_ltu;
  int un_epochs = 40, un_steps = 30, un_batch = 32;
  double un_lr = 0.05;
  std::string un_combine = "project", un_meta_mode = "exact";
  unlearn_cmd->add_option("method", un_method, "ltu, ltu_noforfeed, ltu_noremfeed, ltu_nometaopt, "
                                               "ltu_gradadd, ltu_alternate, ft, randl, or ga")
      ->required();
  un_split.attach(unlearn_cmd);
  unlearn_cmd->add_option("--model", un_model, "original model JSON")->required();
  unlearn_cmd->add_option("--ensemble", un_ensemble, "attacker ensemble JSON (ltu methods)");
  unlearn_cmd->add_option("--alpha", un_ltu.alpha, "meta-tune rate");
  unlearn_cmd->add_option("--beta", un_ltu.beta, "meta-update rate");
  unlearn_cmd->add_option("--iterations", un_ltu.iterations, "unlearning iterations");
  unlearn_cmd->add_option("--batch-support", un_ltu.batch_support, "support batch size");
  unlearn_cmd->add_option("--batch-query", un_ltu.batch_query, "query batch size");
  unlearn_cmd->add_option("--k", un_ltu.k, "query set size");
  unlearn_cmd->add_option("--combine", un_combine, "project, add, or alternate");
  unlearn_cmd->add_option("--meta-mode", un_meta_mode, "exact or first_order");
  unlearn_cmd->add_option("--seed", un_ltu.seed, "method seed");
  unlearn_cmd->add_option("--epochs", un_epochs, "epochs (ft / randl)");
  unlearn_cmd->add_option("--steps", un_steps, "ascent steps (ga)");
  unlearn_cmd->add_option("--batch", un_batch, "batch size (ft / randl)");
  unlearn_cmd->add_option("--lr", un_lr, "learning rate (ft / randl / ga)");
  unlearn_cmd->add_option("--out", un_out, "output model JSON")->required();
  unlearn_cmd->add_option("--trajectory", un_traj, "optional trajectory JSON (ltu methods)");

  // ------------------------------------------------------------- evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "compute UA/RA/TA/MI/UT for a model");
  SplitArgs ev_split;
  std::string ev_model, ev_ensemble, ev_gold, ev_out = "metrics.json";
  double ev_ut = 0.0;
  ev_split.attach(eval_cmd);
  eval_cmd->add_option("--model", ev_model, "model JSON to score")->required();
  eval_cmd->add_option("--ensemble", ev_ensemble, "attacker ensemble JSON")->required();
  eval_cmd->add_option("--gold", ev_gold, "gold metrics JSON for delta reporting");
  eval_cmd->add_option("--ut", ev_ut, "unlearning wall time in seconds");
  eval_cmd->add_option("--out", ev_out, "output metrics JSON")->required();

  // --------------------------------------------------------------- report
  auto* report_cmd = app.add_subcommand("report", "rebuild aggregate.csv and table.txt for a run");
  std::string rep_dir;
  report_cmd->add_option("run_dir", rep_dir, "runs/<hash> directory")->required();

  // -------------------------------------------------------------- run-all
  auto* runall_cmd = app.add_subcommand("run-all", "run the full experiment from a config file");
  std::string runall_config;
  runall_cmd->add_option("config", runall_config, "experiment config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      Dataset ds;
      if (gen_kind == "blobs")
        ds = gen_blobs(gen_npc, gen_classes, gen_dim, gen_spread, gen_seed);
      else if (gen_kind == "moons")
        ds = gen_moons(gen_n, gen_noise, gen_seed);
      else
        throw std::invalid_argument("gen-data: kind must be blobs or moons");
      save_csv(ds, gen_out);
      std::cout << "wrote " << ds.size() << " examples (" << ds.num_classes << " classes, dim "
                << ds.dim << ") to " << gen_out << '\n';
    } else if (*train_cmd) {
      const Dataset train = load_csv(to_train_path);
      const ModelSpec spec = to_args.spec_for(train);
      const ParamVector params = train_classifier(spec, train, to_args.cfg, to_seed);
      save_model(spec, params, to_out);
      std::cout << "trained model (" << param_count(spec) << " params), train acc "
                << format_percent(accuracy(spec, params, train.features_matrix(), train.labels()))
                << "%, saved to " << to_out << '\n';
    } else if (*mi_cmd) {
      const auto [spec, params] = load_model(mi_model);
      const Dataset members = load_csv(mi_train);
      const Dataset nonmembers = load_csv(mi_test);
      const MiEnsemble ensemble = train_mi_ensemble(spec, params, members, nonmembers, mi_K, mi_seed);
      save_ensemble(ensemble, mi_out);
      std::cout << "trained " << ensemble.guidance.size() << "+1 attackers, saved to " << mi_out << '\n';
    } else if (*gold_cmd) {
      const UnlearnSplit split = gold_split.build();
      const ModelSpec spec = gold_args.spec_for(split.remain);
      const auto t0 = std::chrono::steady_clock::now();
      const ParamVector params = retrain_gold(spec, split, gold_args.cfg, gold_seed);
      const double ut = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      save_model(spec, params, gold_out);
      std::cout << "gold model retrained in " << ut << " s, saved to " << gold_out << '\n';
    } else if (*unlearn_cmd) {
      const UnlearnSplit split = un_split.build();
      const auto [spec, original] = load_model(un_model);
      ParamVector result_params;
      double ut = 0.0;
      if (un_method.rfind("ltu", 0) == 0) {
        if (un_ensemble.empty()) throw std::invalid_argument("unlearn: ltu methods need --ensemble");
        const MiEnsemble ensemble = load_ensemble(un_ensemble);
        LtuConfig ltu = un_ltu;
        ltu.combine_policy = combine_policy_from_string(un_combine);
        ltu.meta_mode = un_meta_mode == "first_order" ? MetaMode::first_order : MetaMode::exact;
        if (un_method == "ltu_noforfeed") ltu.forget_feedback = false;
        if (un_method == "ltu_noremfeed") ltu.remember_feedback = false;
        if (un_method == "ltu_nometaopt") ltu.meta_opt = false;
        if (un_method == "ltu_gradadd") ltu.combine_policy = CombinePolicy::add;
        if (un_method == "ltu_alternate") ltu.combine_policy = CombinePolicy::alternate;
        const FeatureExtractor extractor{spec, original};
        const LabelVectorizer vectorizer{spec.output_dim()};
        const UnlearnResult r = ltu_unlearn(spec, original, split, ensemble, extractor, vectorizer, ltu);
        result_params = r.final_params;
        ut = r.wall_time_seconds;
        if (!un_traj.empty()) {
          nlohmann::json tj = nlohmann::json::array();
          for (const auto& p : r.trajectory)
            tj.push_back({{"iter", p.iter},
                          {"remember_loss", p.remember_loss},
                          {"forget_loss", p.forget_loss},
                          {"cosine", p.cosine_rf},
                          {"grad_norm", p.grad_norm}});
          std::ofstream out(un_traj);
          out << tj.dump(2) << '\n';
        }
      } else {
        const auto t0 = std::chrono::steady_clock::now();
        if (un_method == "ft")
          result_params = finetune_baseline(spec, original, split.remain_subset, un_epochs, un_lr,
                                            un_batch, un_ltu.seed);
        else if (un_method == "randl")
          result_params = randlabel_baseline(spec, original, split, un_epochs, un_lr, un_batch, un_ltu.seed);
        else if (un_method == "ga")
          result_params = ga_baseline(spec, original, split.forget, un_steps, un_lr);
        else
          throw std::invalid_argument("unlearn: unknown method '" + un_method + "'");
        ut = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
      save_model(spec, result_params, un_out);
      std::cout << un_method << " finished in " << ut << " s, saved to " << un_out << '\n';
    } else if (*eval_cmd) {
      const UnlearnSplit split = ev_split.build();
      const auto [spec, params] = load_model(ev_model);
      const MiEnsemble ensemble = load_ensemble(ev_ensemble);
      const MetricsReport m = compute_metrics(spec, params, split, ensemble.eval_model, ev_ut);
      if (!ev_gold.empty()) {
        std::ifstream in(ev_gold);
        if (!in) throw std::runtime_error("cannot open " + ev_gold);
        nlohmann::json gj;
        in >> gj;
        const auto& g = gj.at("metrics");
        const MetricsReport gold{g.at("ua"), g.at("ra"), g.at("ta"), g.at("mi"), g.at("ut_seconds")};
        const DeltaReport d = delta_report(m, gold);
        write_metrics_json(m, &d, ev_out);
        std::cout << render_delta_row(d) << " / UT " << m.ut_seconds << " s\n";
      } else {
        write_metrics_json(m, nullptr, ev_out);
        std::cout << render_metrics_row(m) << " / UT " << m.ut_seconds << " s\n";
      }
    } else if (*report_cmd) {
      write_aggregates(rep_dir);
      std::cout << "wrote " << rep_dir << "/aggregate.csv and table.txt\n";
    } else if (*runall_cmd) {
      const ExperimentConfig cfg = parse_config_file(runall_config);
      const std::string dir = run_experiment(cfg);
      std::cout << "experiment complete: " << dir << '\n';
      std::ifstream table(dir + "/table.txt");
      std::cout << table.rdbuf();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
