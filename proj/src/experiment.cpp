#include "mulab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mulab {

namespace {

// ---------------------------------------------------------------- ini parse

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

using Section = std::map<std::string, std::string>;

std::map<std::string, Section> parse_ini(const std::string& text) {
  std::map<std::string, Section> doc;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      doc[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": key outside any section");
    const std::string key = trim(line.substr(0, eq));
    if (doc[section].count(key))
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    doc[section][key] = trim(line.substr(eq + 1));
  }
  return doc;
}

// Typed readers; every consumed key is crossed off so leftovers can be rejected.
struct SectionReader {
  const std::string name;
  Section entries;

  bool has(const std::string& key) const { return entries.count(key) > 0; }

  std::string take(const std::string& key, const std::string& fallback) {
    auto it = entries.find(key);
    if (it == entries.end()) return fallback;
    std::string v = it->second;
    entries.erase(it);
    return v;
  }

  double take_double(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const std::string v = take(key, "");
    try {
      return std::stod(v);
    } catch (...) {
      throw std::invalid_argument("config [" + name + "] " + key + ": bad number '" + v + "'");
    }
  }

  long take_int(const std::string& key, long fallback) {
    if (!has(key)) return fallback;
    const std::string v = take(key, "");
    try {
      return std::stol(v);
    } catch (...) {
      throw std::invalid_argument("config [" + name + "] " + key + ": bad integer '" + v + "'");
    }
  }

  bool take_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string v = take(key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config [" + name + "] " + key + ": bad boolean '" + v + "'");
  }

  std::vector<std::string> take_list(const std::string& key) {
    std::vector<std::string> out;
    std::stringstream ss(take(key, ""));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (!tok.empty()) out.push_back(tok);
    }
    return out;
  }

  void reject_leftovers() const {
    if (!entries.empty())
      throw std::invalid_argument("config [" + name + "]: unknown key '" + entries.begin()->first + "'");
  }
};

const std::set<std::string> kKnownMethods = {"ltu",         "ltu_noforfeed", "ltu_noremfeed",
                                             "ltu_nometaopt", "ltu_gradadd",   "ltu_alternate",
                                             "ft",          "randl",         "ga"};

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t salt) {
  Rng rng(seed ^ (salt * 0x9e3779b97f4a7c15ull + 0xc2b2ae3d27d4eb4full));
  return rng.next();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  auto doc = parse_ini(text);
  const std::set<std::string> known_sections = {"dataset", "model", "split", "ltu", "baselines", "runs"};
  for (const auto& [name, _] : doc)
    if (!known_sections.count(name))
      throw std::invalid_argument("config: unknown section [" + name + "]");

  ExperimentConfig cfg;

  {
    SectionReader r{"dataset", doc["dataset"]};
    cfg.dataset.kind = r.take("kind", cfg.dataset.kind);
    if (cfg.dataset.kind != "blobs" && cfg.dataset.kind != "moons" && cfg.dataset.kind != "csv")
      throw std::invalid_argument("config [dataset] kind: expected blobs, moons, or csv");
    cfg.dataset.n_per_class = static_cast<int>(r.take_int("n_per_class", cfg.dataset.n_per_class));
    cfg.dataset.classes = static_cast<int>(r.take_int("classes", cfg.dataset.classes));
    cfg.dataset.dim = static_cast<int>(r.take_int("dim", cfg.dataset.dim));
    cfg.dataset.spread = r.take_double("spread", cfg.dataset.spread);
    cfg.dataset.test_n_per_class = static_cast<int>(r.take_int("test_n_per_class", cfg.dataset.test_n_per_class));
    cfg.dataset.n = static_cast<int>(r.take_int("n", cfg.dataset.n));
    cfg.dataset.noise = r.take_double("noise", cfg.dataset.noise);
    cfg.dataset.test_n = static_cast<int>(r.take_int("test_n", cfg.dataset.test_n));
    cfg.dataset.train_path = r.take("train_path", cfg.dataset.train_path);
    cfg.dataset.test_path = r.take("test_path", cfg.dataset.test_path);
    cfg.dataset.gen_seed = static_cast<std::uint64_t>(r.take_int("gen_seed", static_cast<long>(cfg.dataset.gen_seed)));
    r.reject_leftovers();
  }

  {
    SectionReader r{"model", doc["model"]};
    if (r.has("hidden")) {
      cfg.hidden.clear();
      for (const auto& tok : r.take_list("hidden")) cfg.hidden.push_back(std::stoi(tok));
    }
    cfg.activation = activation_from_string(r.take("activation", to_string(cfg.activation)));
    cfg.train.epochs = static_cast<int>(r.take_int("train_epochs", cfg.train.epochs));
    cfg.train.lr = r.take_double("train_lr", cfg.train.lr);
    cfg.train.batch = static_cast<int>(r.take_int("train_batch", cfg.train.batch));
    cfg.train.weight_decay = r.take_double("train_weight_decay", cfg.train.weight_decay);
    cfg.train.loss_tol = r.take_double("train_tol", cfg.train.loss_tol);
    r.reject_leftovers();
  }

  {
    SectionReader r{"split", doc["split"]};
    cfg.forget_ratio = r.take_double("forget_ratio", cfg.forget_ratio);
    cfg.rho = r.take_double("rho", cfg.rho);
    r.reject_leftovers();
  }

  {
    SectionReader r{"ltu", doc["ltu"]};
    cfg.ltu.alpha = r.take_double("alpha", cfg.ltu.alpha);
    cfg.ltu.beta = r.take_double("beta", cfg.ltu.beta);
    cfg.ltu.iterations = static_cast<int>(r.take_int("iterations", cfg.ltu.iterations));
    cfg.ltu.batch_support = static_cast<int>(r.take_int("batch_support", cfg.ltu.batch_support));
    cfg.ltu.batch_query = static_cast<int>(r.take_int("batch_query", cfg.ltu.batch_query));
    cfg.ltu.k = static_cast<int>(r.take_int("k", cfg.ltu.k));
    cfg.ltu.K = static_cast<int>(r.take_int("K", cfg.ltu.K));
    cfg.ltu.combine_policy = combine_policy_from_string(r.take("combine", to_string(cfg.ltu.combine_policy)));
    cfg.ltu.remember_feedback = r.take_bool("remember_feedback", cfg.ltu.remember_feedback);
    cfg.ltu.forget_feedback = r.take_bool("forget_feedback", cfg.ltu.forget_feedback);
    cfg.ltu.meta_opt = r.take_bool("meta_opt", cfg.ltu.meta_opt);
    const std::string mode = r.take("meta_mode", cfg.ltu.meta_mode == MetaMode::exact ? "exact" : "first_order");
    if (mode == "exact")
      cfg.ltu.meta_mode = MetaMode::exact;
    else if (mode == "first_order")
      cfg.ltu.meta_mode = MetaMode::first_order;
    else
      throw std::invalid_argument("config [ltu] meta_mode: expected exact or first_order");
    r.reject_leftovers();
  }

  {
    SectionReader r{"baselines", doc["baselines"]};
    if (r.has("methods")) {
      cfg.methods = r.take_list("methods");
      for (const auto& m : cfg.methods)
        if (!kKnownMethods.count(m))
          throw std::invalid_argument("config [baselines] methods: unknown method '" + m + "'");
    }
    cfg.ft_epochs = static_cast<int>(r.take_int("ft_epochs", cfg.ft_epochs));
    cfg.ft_lr = r.take_double("ft_lr", cfg.ft_lr);
    cfg.ft_batch = static_cast<int>(r.take_int("ft_batch", cfg.ft_batch));
    cfg.randl_epochs = static_cast<int>(r.take_int("randl_epochs", cfg.randl_epochs));
    cfg.randl_lr = r.take_double("randl_lr", cfg.randl_lr);
    cfg.randl_batch = static_cast<int>(r.take_int("randl_batch", cfg.randl_batch));
    cfg.ga_steps = static_cast<int>(r.take_int("ga_steps", cfg.ga_steps));
    cfg.ga_lr = r.take_double("ga_lr", cfg.ga_lr);
    r.reject_leftovers();
  }

  {
    SectionReader r{"runs", doc["runs"]};
    if (r.has("seeds")) {
      cfg.seeds.clear();
      for (const auto& tok : r.take_list("seeds")) cfg.seeds.push_back(std::stoull(tok));
      if (cfg.seeds.empty()) throw std::invalid_argument("config [runs] seeds: empty list");
    }
    cfg.outdir = r.take("outdir", cfg.outdir);
    r.reject_leftovers();
  }

  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::ostringstream s;
  s.precision(17);
  const auto& d = cfg.dataset;
  s << "kind=" << d.kind << ";npc=" << d.n_per_class << ";C=" << d.classes << ";d=" << d.dim
    << ";spread=" << d.spread << ";tnpc=" << d.test_n_per_class << ";n=" << d.n
    << ";noise=" << d.noise << ";tn=" << d.test_n << ";train=" << d.train_path
    << ";test=" << d.test_path << ";gseed=" << d.gen_seed << ";hidden=";
  for (int h : cfg.hidden) s << h << ',';
  s << ";act=" << to_string(cfg.activation) << ";ep=" << cfg.train.epochs << ";lr=" << cfg.train.lr
    << ";bs=" << cfg.train.batch << ";wd=" << cfg.train.weight_decay << ";tol=" << cfg.train.loss_tol
    << ";fr=" << cfg.forget_ratio
    << ";rho=" << cfg.rho << ";alpha=" << cfg.ltu.alpha << ";beta=" << cfg.ltu.beta
    << ";it=" << cfg.ltu.iterations << ";bsup=" << cfg.ltu.batch_support
    << ";bq=" << cfg.ltu.batch_query << ";k=" << cfg.ltu.k << ";K=" << cfg.ltu.K
    << ";comb=" << to_string(cfg.ltu.combine_policy) << ";rem=" << cfg.ltu.remember_feedback
    << ";for=" << cfg.ltu.forget_feedback << ";mo=" << cfg.ltu.meta_opt
    << ";mm=" << (cfg.ltu.meta_mode == MetaMode::exact ? "exact" : "first_order") << ";methods=";
  for (const auto& m : cfg.methods) s << m << ',';
  s << ";ft=" << cfg.ft_epochs << ',' << cfg.ft_lr << ',' << cfg.ft_batch
    << ";randl=" << cfg.randl_epochs << ',' << cfg.randl_lr << ',' << cfg.randl_batch
    << ";ga=" << cfg.ga_steps << ',' << cfg.ga_lr << ";seeds=";
  for (auto x : cfg.seeds) s << x << ',';

  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s.str()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::pair<Dataset, Dataset> build_datasets(const DatasetSpec& ds) {
  if (ds.kind == "blobs") {
    return {gen_blobs(ds.n_per_class, ds.classes, ds.dim, ds.spread, ds.gen_seed),
            gen_blobs(ds.test_n_per_class, ds.classes, ds.dim, ds.spread, ds.gen_seed ^ 0x7465737455ull)};
  }
  if (ds.kind == "moons") {
    return {gen_moons(ds.n, ds.noise, ds.gen_seed),
            gen_moons(ds.test_n, ds.noise, ds.gen_seed ^ 0x7465737455ull)};
  }
  Dataset train = load_csv(ds.train_path);
  Dataset test = load_csv(ds.test_path);
  test.num_classes = train.num_classes = std::max(train.num_classes, test.num_classes);
  return {train, test};
}

ModelSpec model_spec_for(const ExperimentConfig& cfg, const Dataset& train) {
  ModelSpec spec;
  spec.layer_widths.push_back(train.dim);
  for (int h : cfg.hidden) spec.layer_widths.push_back(h);
  spec.layer_widths.push_back(train.num_classes);
  spec.activation = cfg.activation;
  spec.validate();
  return spec;
}

namespace {

json metrics_to_json(const MetricsReport& r) {
  return json{{"ua", r.ua}, {"ra", r.ra}, {"ta", r.ta}, {"mi", r.mi}, {"ut_seconds", r.ut_seconds}};
}

MetricsReport metrics_from_json(const json& j) {
  return MetricsReport{j.at("ua"), j.at("ra"), j.at("ta"), j.at("mi"), j.at("ut_seconds")};
}

struct MethodOutcome {
  ParamVector params;
  double ut_seconds = 0.0;
  json extra;  // trajectory summary etc.
};

LtuConfig variant_config(const ExperimentConfig& cfg, const std::string& method, std::uint64_t seed) {
  LtuConfig ltu = cfg.ltu;
  ltu.seed = sub_seed(seed, 10);
  if (method == "ltu_noforfeed") ltu.forget_feedback = false;
  if (method == "ltu_noremfeed") ltu.remember_feedback = false;
  if (method == "ltu_nometaopt") ltu.meta_opt = false;
  if (method == "ltu_gradadd") ltu.combine_policy = CombinePolicy::add;
  if (method == "ltu_alternate") ltu.combine_policy = CombinePolicy::alternate;
  return ltu;
}

}  // namespace

std::string run_experiment(const ExperimentConfig& cfg) {
  const std::string hash = config_hash(cfg);
  const fs::path run_dir = fs::path(cfg.outdir) / hash;
  fs::create_directories(run_dir);

  const auto [train, test] = build_datasets(cfg.dataset);
  train.validate();
  test.validate();
  const ModelSpec spec = model_spec_for(cfg, train);

  for (const std::uint64_t seed : cfg.seeds) {
    const fs::path seed_dir = run_dir / std::to_string(seed);
    fs::create_directories(seed_dir);

    UnlearnSplit split = make_split(train, test, cfg.forget_ratio, cfg.rho, sub_seed(seed, 1));
    const ParamVector original = train_classifier(spec, train, cfg.train, sub_seed(seed, 2));

    // balanced attacker pools: members from the training data, nonmembers held out
    Rng pool_rng(sub_seed(seed, 3));
    const int pool_n = std::min(train.size(), test.size());
    const Dataset member_pool = train.subset(pool_rng.sample_without_replacement(train.size(), pool_n));
    const Dataset nonmember_pool = test.subset(pool_rng.sample_without_replacement(test.size(), pool_n));
    const MiEnsemble ensemble =
        train_mi_ensemble(spec, original, member_pool, nonmember_pool, cfg.ltu.K, sub_seed(seed, 4));

    const FeatureExtractor extractor{spec, original};
    const LabelVectorizer vectorizer{train.num_classes};

    json result;
    result["config_hash"] = hash;
    result["seed"] = seed;
    std::vector<std::string> order;

    const auto gold_t0 = std::chrono::steady_clock::now();
    const ParamVector gold_params = retrain_gold(spec, split, cfg.train, sub_seed(seed, 5));
    const double gold_ut = std::chrono::duration<double>(std::chrono::steady_clock::now() - gold_t0).count();
    const MetricsReport gold = compute_metrics(spec, gold_params, split, ensemble.eval_model, gold_ut);
    result["methods"]["gold"]["metrics"] = metrics_to_json(gold);
    order.push_back("gold");

    for (const std::string& method : cfg.methods) {
      MethodOutcome out;
      if (method.rfind("ltu", 0) == 0) {
        const LtuConfig ltu = variant_config(cfg, method, seed);
        UnlearnResult r = ltu_unlearn(spec, original, split, ensemble, extractor, vectorizer, ltu);
        out.params = std::move(r.final_params);
        out.ut_seconds = r.wall_time_seconds;
        double mean_cos = 0.0;
        for (const auto& p : r.trajectory) mean_cos += p.cosine_rf;
        if (!r.trajectory.empty()) mean_cos /= static_cast<double>(r.trajectory.size());
        out.extra["trajectory_summary"] = {
            {"iterations", r.trajectory.size()},
            {"final_remember_loss", r.trajectory.empty() ? 0.0 : r.trajectory.back().remember_loss},
            {"final_forget_loss", r.trajectory.empty() ? 0.0 : r.trajectory.back().forget_loss},
            {"mean_cosine", mean_cos}};
      } else {
        const auto t0 = std::chrono::steady_clock::now();
        if (method == "ft") {
          out.params = finetune_baseline(spec, original, split.remain_subset, cfg.ft_epochs, cfg.ft_lr,
                                         cfg.ft_batch, sub_seed(seed, 6));
        } else if (method == "randl") {
          out.params = randlabel_baseline(spec, original, split, cfg.randl_epochs, cfg.randl_lr,
                                          cfg.randl_batch, sub_seed(seed, 7));
        } else if (method == "ga") {
          out.params = ga_baseline(spec, original, split.forget, cfg.ga_steps, cfg.ga_lr);
        } else {
          throw std::invalid_argument("run_experiment: unknown method '" + method + "'");
        }
        out.ut_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }

      const MetricsReport metrics =
          compute_metrics(spec, out.params, split, ensemble.eval_model, out.ut_seconds);
      const DeltaReport delta = delta_report(metrics, gold);
      json entry;
      entry["metrics"] = metrics_to_json(metrics);
      entry["delta"] = {{"ua", delta.ua}, {"ra", delta.ra}, {"ta", delta.ta}, {"mi", delta.mi}};
      for (auto& [k, v] : out.extra.items()) entry[k] = v;
      result["methods"][method] = entry;
      order.push_back(method);
    }
    result["method_order"] = order;

    std::ofstream out(seed_dir / "result.json");
    if (!out) throw std::runtime_error("cannot write " + (seed_dir / "result.json").string());
    out << result.dump(2) << '\n';
  }

  write_aggregates(run_dir.string());
  return run_dir.string();
}

namespace {

struct Agg {
  std::vector<double> ua, ra, ta, mi, ut, dua, dra, dta, dmi;
};

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());  // population variance; single seed -> 0
  return {mean, std::sqrt(var)};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_aggregates(const std::string& run_dir) {
  std::vector<fs::path> seed_files;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "result.json"))
      seed_files.push_back(entry.path() / "result.json");
  }
  std::sort(seed_files.begin(), seed_files.end());
  if (seed_files.empty()) throw std::runtime_error("write_aggregates: no result.json under " + run_dir);

  std::vector<std::string> order;
  std::map<std::string, Agg> by_method;
  for (const auto& file : seed_files) {
    std::ifstream in(file);
    json j;
    in >> j;
    for (const auto& name : j.at("method_order").get<std::vector<std::string>>()) {
      if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
      const json& entry = j.at("methods").at(name);
      const MetricsReport m = metrics_from_json(entry.at("metrics"));
      Agg& a = by_method[name];
      a.ua.push_back(m.ua);
      a.ra.push_back(m.ra);
      a.ta.push_back(m.ta);
      a.mi.push_back(m.mi);
      a.ut.push_back(m.ut_seconds);
      if (entry.contains("delta")) {
        a.dua.push_back(entry.at("delta").at("ua").get<double>());
        a.dra.push_back(entry.at("delta").at("ra").get<double>());
        a.dta.push_back(entry.at("delta").at("ta").get<double>());
        a.dmi.push_back(entry.at("delta").at("mi").get<double>());
      } else {
        a.dua.push_back(0.0);
        a.dra.push_back(0.0);
        a.dta.push_back(0.0);
        a.dmi.push_back(0.0);
      }
    }
  }

  std::ofstream csv(fs::path(run_dir) / "aggregate.csv");
  csv << "method,ua_mean,ua_std,ra_mean,ra_std,ta_mean,ta_std,mi_mean,mi_std,"
         "ut_mean,ut_std,delta_ua_mean,delta_ua_std,delta_ra_mean,delta_ra_std,"
         "delta_ta_mean,delta_ta_std,delta_mi_mean,delta_mi_std\n";
  std::ofstream table(fs::path(run_dir) / "table.txt");
  table << "method          UA (d)                RA (d)                TA (d)                MI (d)                UT[s]\n";
  for (const auto& name : order) {
    const Agg& a = by_method.at(name);
    const auto [ua_m, ua_s] = mean_std(a.ua);
    const auto [ra_m, ra_s] = mean_std(a.ra);
    const auto [ta_m, ta_s] = mean_std(a.ta);
    const auto [mi_m, mi_s] = mean_std(a.mi);
    const auto [ut_m, ut_s] = mean_std(a.ut);
    const auto [dua_m, dua_s] = mean_std(a.dua);
    const auto [dra_m, dra_s] = mean_std(a.dra);
    const auto [dta_m, dta_s] = mean_std(a.dta);
    const auto [dmi_m, dmi_s] = mean_std(a.dmi);
    csv << name << ',' << fmt(ua_m * 100) << ',' << fmt(ua_s * 100) << ',' << fmt(ra_m * 100) << ','
        << fmt(ra_s * 100) << ',' << fmt(ta_m * 100) << ',' << fmt(ta_s * 100) << ','
        << fmt(mi_m * 100) << ',' << fmt(mi_s * 100) << ',' << fmt(ut_m) << ',' << fmt(ut_s) << ','
        << fmt(dua_m * 100) << ',' << fmt(dua_s * 100) << ',' << fmt(dra_m * 100) << ','
        << fmt(dra_s * 100) << ',' << fmt(dta_m * 100) << ',' << fmt(dta_s * 100) << ','
        << fmt(dmi_m * 100) << ',' << fmt(dmi_s * 100) << '\n';

    const auto cell = [](double m, double s, double d) {
      std::string c = fmt2(m * 100) + "±" + fmt2(s * 100) + " (" + fmt2(d * 100) + ")";
      c.resize(std::max<std::size_t>(c.size(), 21), ' ');
      return c;
    };
    std::string row = name;
    row.resize(std::max<std::size_t>(row.size(), 15), ' ');
    table << row << ' ' << cell(ua_m, ua_s, dua_m) << ' ' << cell(ra_m, ra_s, dra_m) << ' '
          << cell(ta_m, ta_s, dta_m) << ' ' << cell(mi_m, mi_s, dmi_m) << ' ' << fmt2(ut_m) << '\n';
  }
}

void save_model(const ModelSpec& spec, const ParamVector& params, const std::string& path) {
  spec.validate();
  if (static_cast<int>(params.size()) != param_count(spec))
    throw std::invalid_argument("save_model: parameter count does not match spec");
  json j{{"layer_widths", spec.layer_widths},
         {"activation", to_string(spec.activation)},
         {"params", params}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << j.dump(2) << '\n';
}

std::pair<ModelSpec, ParamVector> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  json j;
  in >> j;
  ModelSpec spec;
  spec.layer_widths = j.at("layer_widths").get<std::vector<int>>();
  spec.activation = activation_from_string(j.at("activation").get<std::string>());
  spec.validate();
  ParamVector params = j.at("params").get<ParamVector>();
  if (static_cast<int>(params.size()) != param_count(spec))
    throw std::runtime_error("load_model: parameter count does not match spec in " + path);
  return {spec, params};
}

}  // namespace mulab
