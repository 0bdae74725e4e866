#include "slateval/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "slateval/cli/config.hpp"
#include "slateval/diagnostics.hpp"
#include "slateval/error.hpp"
#include "slateval/estimators.hpp"
#include "slateval/io.hpp"
#include "slateval/numeric.hpp"
#include "slateval/piopt.hpp"
#include "slateval/semisynth.hpp"

#ifndef SLATEVAL_VERSION
#define SLATEVAL_VERSION "dev"
#endif

namespace slateval::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", v);
  return buffer;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

struct Common {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string out_dir = ".";
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void attach(CLI::App* app) {
    seed_opt = app->add_option("--seed", seed, "Base random seed");
    threads_opt = app->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app->add_option("--out-dir", out_dir, "Directory for outputs and the run manifest");
  }
};

class Run {
 public:
  Run(std::string command, const Common& common) : command_(std::move(command)), common_(common), started_(timestamp()) {
    fs::create_directories(common_.out_dir);
  }

  std::string path(const std::string& name) {
    const std::string p = (fs::path(common_.out_dir) / name).string();
    outputs_.push_back(p);
    return p;
  }

  void finish(const FlatConfig& config, std::uint64_t seed, std::size_t threads) const {
    std::ofstream out(fs::path(common_.out_dir) / "manifest.txt");
    out << "command = " << command_ << '\n'
        << "version = " << SLATEVAL_VERSION << '\n'
        << "seed = " << seed << '\n'
        << "threads = " << threads << '\n'
        << "started = " << started_ << '\n'
        << "finished = " << timestamp() << '\n';
    for (const auto& [key, value] : config.entries()) out << "config." << key << " = " << value << '\n';
    for (std::size_t i = 0; i < outputs_.size(); ++i) out << "output." << i << " = " << outputs_[i] << '\n';
    if (!out) throw std::ios_base::failure("cannot write manifest in '" + common_.out_dir + "'");
  }

 private:
  std::string command_;
  const Common& common_;
  std::string started_;
  std::vector<std::string> outputs_;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  return out;
}

Policy policy_arg(const std::string& spec) {
  if (spec == "uniform") return Policy::uniform();
  return load_explicit_policy(spec);
}

MapFeatureTable load_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open features '" + path + "'");
  std::string raw;
  std::size_t line = 0;
  std::optional<MapFeatureTable> table;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.empty() || raw[0] == '#') continue;
    std::istringstream fields(raw);
    std::string ctx, action, values;
    if (!std::getline(fields, ctx, '\t') || !std::getline(fields, action, '\t') || !std::getline(fields, values)) {
      throw ParseError("expected '<context>\\t<action>\\t<v1,v2,...>'", line);
    }
    std::vector<double> row;
    std::istringstream vs(values);
    std::string piece;
    while (std::getline(vs, piece, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(piece, &used));
      } catch (const std::exception&) {
        throw ParseError("bad feature value '" + piece + "'", line);
      }
    }
    int a = 0;
    try {
      a = std::stoi(action);
    } catch (const std::exception&) {
      throw ParseError("bad action id '" + action + "'", line);
    }
    if (!table) table.emplace(row.size());
    if (row.size() != table->dim()) throw ParseError("feature dimension differs from the first row", line);
    table->set(ContextId(ctx), a, std::move(row));
  }
  if (!table) throw ParseError("feature file is empty", line);
  return std::move(*table);
}

FeatureBlock block_field(const FlatConfig& cfg, const std::string& key, FeatureBlock fallback) {
  if (!cfg.has(key)) return fallback;
  const std::string v = cfg.get_string(key, "");
  const auto colon = v.find(':');
  auto number = [&](const std::string& s, std::size_t empty_value) -> std::size_t {
    if (s.empty()) return empty_value;
    std::size_t used = 0;
    try {
      const auto n = std::stoul(s, &used);
      if (used == s.size()) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError("field '" + key + "': expected '<begin>:<end>', got '" + v + "'");
  };
  if (colon == std::string::npos) throw ConfigError("field '" + key + "': expected '<begin>:<end>', got '" + v + "'");
  return {number(v.substr(0, colon), 0), number(v.substr(colon + 1), 0)};
}

constexpr std::string_view kDatasetKeys[] = {"dataset",          "synthetic.queries",  "synthetic.min_docs",
                                             "synthetic.max_docs", "synthetic.features", "synthetic.noise",
                                             "synthetic.seed",   "title_block",        "body_block"};

RankingDataset load_dataset(const FlatConfig& cfg, std::uint64_t seed) {
  const std::string source = cfg.get_string("dataset", "synthetic");
  if (source != "synthetic") return load_letor(source);
  SyntheticConfig sc;
  sc.num_queries = cfg.get_uint("synthetic.queries", sc.num_queries);
  sc.min_docs = cfg.get_uint("synthetic.min_docs", sc.min_docs);
  sc.max_docs = cfg.get_uint("synthetic.max_docs", std::max<std::size_t>(sc.max_docs, sc.min_docs));
  sc.num_features = cfg.get_uint("synthetic.features", sc.num_features);
  sc.label_noise = cfg.get_nonnegative("synthetic.noise", sc.label_noise);
  sc.seed = cfg.get_uint("synthetic.seed", seed);
  if (sc.num_queries == 0) throw ConfigError("field 'synthetic.queries': must be positive");
  if (sc.min_docs == 0) throw ConfigError("field 'synthetic.min_docs': must be positive");
  if (sc.max_docs < sc.min_docs) throw ConfigError("field 'synthetic.max_docs': must be at least synthetic.min_docs");
  if (sc.num_features == 0) throw ConfigError("field 'synthetic.features': must be positive");
  return generate_synthetic(sc);
}

FeatureBlocks blocks_from(const FlatConfig& cfg, std::size_t feature_dim) {
  FeatureBlocks blocks;
  blocks.title = block_field(cfg, "title_block", blocks.title);
  blocks.body = block_field(cfg, "body_block", blocks.body);
  try {
    return blocks.resolved(feature_dim);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("field 'title_block'/'body_block': ") + e.what());
  }
}

InstanceConfig instance_from(const FlatConfig& cfg, InstanceConfig fallback) {
  InstanceConfig ic = fallback;
  ic.m = static_cast<int>(cfg.get_uint("m", ic.m));
  ic.l = static_cast<int>(cfg.get_uint("l", ic.l));
  ic.alpha = cfg.get_nonnegative("alpha", ic.alpha);
  ic.reward_jitter = cfg.get_bool("jitter", ic.reward_jitter);
  if (ic.l < 1) throw ConfigError("field 'l': must be at least 1");
  if (ic.m < ic.l) throw ConfigError("field 'l': must not exceed m");
  return ic;
}

MomentOptions moments_from(const FlatConfig& cfg, std::uint64_t seed) {
  MomentOptions mo;
  mo.enumeration_cap = cfg.get_uint("enumeration_cap", mo.enumeration_cap);
  mo.gamma_samples = cfg.get_uint("gamma_samples", mo.gamma_samples);
  mo.indicator_samples = cfg.get_uint("indicator_samples", mo.indicator_samples);
  mo.support_samples = cfg.get_uint("support_samples", mo.support_samples);
  mo.seed = derive_seed(seed, 0x6d6f);
  return mo;
}

void resolve_common(FlatConfig& cfg, const Common& common, std::uint64_t& seed, std::size_t& threads) {
  seed = *common.seed_opt ? common.seed : cfg.get_uint("seed", 1);
  threads = *common.threads_opt ? common.threads : cfg.get_uint("threads", 1);
  if (threads == 0) throw ConfigError("field 'threads': must be positive");
  cfg.set("seed", std::to_string(seed));
  cfg.set("threads", std::to_string(threads));
}

FlatConfig gather_config(const std::string& path, const std::vector<std::string>& overrides) {
  FlatConfig cfg = path.empty() ? FlatConfig{} : FlatConfig::load(path);
  for (const auto& o : overrides) cfg.apply_override(o);
  return cfg;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string logs, logging = "uniform", target, space, features;
  std::vector<std::string> estimators;
  double delta = 0.0;
  double dm_lambda = 1.0;
  CLI::Option* delta_opt = nullptr;
};

int cmd_evaluate(const EvaluateArgs& a, const Common& common, std::ostream& out) {
  Run run("evaluate", common);
  FlatConfig cfg;
  cfg.set("logs", a.logs);
  cfg.set("logging", a.logging);
  cfg.set("target", a.target);
  cfg.set("space", a.space);
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  resolve_common(cfg, common, seed, threads);

  std::vector<EstimatorKind> kinds;
  for (const auto& name : a.estimators.empty() ? std::vector<std::string>{"pi"} : a.estimators) {
    const EstimatorKind k = parse_estimator_kind(name);
    if (k == EstimatorKind::OnPolicy || k == EstimatorKind::SB || k == EstimatorKind::WSB) {
      throw ConfigError(std::string("estimator '") + to_string(k) + "' needs a simulator; use the experiment command");
    }
    if (k == EstimatorKind::DM && a.features.empty()) throw ConfigError("estimator 'dm' needs --features");
    kinds.push_back(k);
  }
  std::string joined;
  for (auto k : kinds) joined += (joined.empty() ? "" : ",") + std::string(to_string(k));
  cfg.set("estimators", joined);

  const SlateSpaces spaces(SlateSpace::parse(a.space));
  const Policy logging = policy_arg(a.logging);
  const Policy target = policy_arg(a.target);
  const auto data = load_logged_examples(a.logs);
  const MomentOptions moments = moments_from(cfg, seed);

  std::vector<EstimatorReport> reports;
  for (EstimatorKind k : kinds) {
    switch (k) {
      case EstimatorKind::PI: {
        PiOptions po;
        po.moments = moments;
        po.threads = threads;
        if (*a.delta_opt) {
          po.delta = a.delta;
          cfg.set("delta", fmt(a.delta));
        }
        reports.push_back(estimate_pi(data, logging, target, spaces, po));
        break;
      }
      case EstimatorKind::IPS:
        reports.push_back(estimate_ips(data, logging, target, spaces));
        break;
      case EstimatorKind::WIPS:
        reports.push_back(estimate_wips(data, logging, target, spaces));
        break;
      case EstimatorKind::DM: {
        const MapFeatureTable features = load_features(a.features);
        cfg.set("features", a.features);
        cfg.set("dm_lambda", fmt(a.dm_lambda));
        auto [train, eval] = split_half(data);
        if (train.empty() || eval.empty()) throw ValidationError("dm needs at least two logged examples");
        const RewardModel model = fit_dm(train, features, a.dm_lambda);
        reports.push_back(estimate_dm(model, eval, target, spaces, features, moments));
        break;
      }
      default:
        break;
    }
  }

  auto csv = open_output(run.path("estimates.csv"));
  csv << EstimatorReport::csv_header() << '\n';
  for (const auto& r : reports) {
    out << r.key_value() << '\n';
    csv << r.csv_row() << '\n';
  }
  run.finish(cfg, seed, threads);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct DiagnoseArgs {
  std::string logging = "uniform", target, space, contexts, logs;
  double delta = 0.05;
  std::size_t n = 0;
};

int cmd_diagnose(const DiagnoseArgs& a, const Common& common, std::ostream& out) {
  Run run("diagnose", common);
  FlatConfig cfg;
  cfg.set("logging", a.logging);
  cfg.set("target", a.target);
  cfg.set("space", a.space);
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  resolve_common(cfg, common, seed, threads);

  const SlateSpace space = SlateSpace::parse(a.space);
  const SlateSpaces spaces(space);
  const Policy logging = policy_arg(a.logging);
  const Policy target = policy_arg(a.target);

  std::vector<ContextId> contexts;
  if (!a.contexts.empty()) {
    cfg.set("contexts", a.contexts);
    std::ifstream in(a.contexts);
    if (!in) throw std::ios_base::failure("cannot open contexts '" + a.contexts + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] != '#') contexts.emplace_back(line);
    }
  } else if (!a.logs.empty()) {
    cfg.set("logs", a.logs);
    contexts = distinct_contexts(load_logged_examples(a.logs));
  } else {
    for (const auto& c : logging.known_contexts()) contexts.push_back(c);
    for (const auto& c : target.known_contexts()) {
      if (std::find(contexts.begin(), contexts.end(), c) == contexts.end()) contexts.push_back(c);
    }
    std::sort(contexts.begin(), contexts.end());
  }
  if (contexts.empty()) contexts.emplace_back("default");

  const MomentOptions moments = moments_from(cfg, seed);
  const OverlapProfile profile = overlap_profile(contexts, logging, target, spaces, moments);
  int max_actions = 0;
  for (int j = 0; j < space.num_slots(); ++j) max_actions = std::max(max_actions, space.num_actions(j));
  const double kappa = profile.kappa.value_or(0.0);
  const double kappa_bound = kappa > 0.0 ? space.num_slots() * static_cast<double>(max_actions) / kappa
                                         : std::numeric_limits<double>::infinity();

  out << profile.key_value_block();
  out << "kappa_bound=" << fmt(kappa_bound) << '\n';
  if (a.n > 0) {
    cfg.set("n", std::to_string(a.n));
    cfg.set("delta", fmt(a.delta));
    out << "bound=" << fmt(bernstein_bound(profile.sigma_sq, profile.rho, a.n, a.delta)) << '\n';
  }

  auto csv = open_output(run.path("overlap.csv"));
  csv << OverlapProfile::csv_header() << ",kappa_bound\n" << profile.csv_row() << ',' << format_double(kappa_bound) << '\n';
  run.finish(cfg, seed, threads);
  return kExitOk;
}

// ---------------------------------------------------------------------------

constexpr std::string_view kExperimentKeys[] = {
    "dataset",          "synthetic.queries", "synthetic.min_docs", "synthetic.max_docs", "synthetic.features",
    "synthetic.noise",  "synthetic.seed",    "title_block",        "body_block",         "m",
    "l",                "alpha",             "jitter",             "n_grid",             "runs",
    "seed",             "threads",           "estimators",         "dm_lambda",          "enumeration_cap",
    "gamma_samples",    "indicator_samples", "support_samples"};

struct ConfigArgs {
  std::string config;
  std::vector<std::string> overrides;
};

int cmd_experiment(const ConfigArgs& a, const Common& common, std::ostream& out) {
  FlatConfig cfg = gather_config(a.config, a.overrides);
  cfg.require_known(kExperimentKeys);
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  resolve_common(cfg, common, seed, threads);

  ExperimentConfig ec;
  ec.instance = instance_from(cfg, ec.instance);
  ec.n_grid = cfg.get_size_list("n_grid", ec.n_grid);
  for (std::size_t n : ec.n_grid) {
    if (n < 2) throw ConfigError("field 'n_grid': entries must be at least 2");
  }
  ec.runs = cfg.get_uint("runs", ec.runs);
  if (ec.runs == 0) throw ConfigError("field 'runs': must be at least 1");
  ec.seed = seed;
  ec.threads = threads;
  ec.dm_lambda = cfg.get_nonnegative("dm_lambda", ec.dm_lambda);
  if (cfg.has("estimators")) {
    ec.estimators.clear();
    for (const auto& name : cfg.get_list("estimators", {})) {
      try {
        const auto k = parse_estimator_kind(name);
        if (std::find(ec.estimators.begin(), ec.estimators.end(), k) == ec.estimators.end()) ec.estimators.push_back(k);
      } catch (const ConfigError& e) {
        throw ConfigError(std::string("field 'estimators': ") + e.what());
      }
    }
  }
  ec.moments = moments_from(cfg, seed);

  const RankingDataset dataset = load_dataset(cfg, seed);
  const FeatureBlocks blocks = blocks_from(cfg, dataset.feature_dim);
  Run run("experiment", common);
  const ScoreModel title = fit_score_model(dataset, blocks.title);
  const ScoreModel body = fit_score_model(dataset, blocks.body);
  const BanditInstance instance = build_instance(dataset, title, body, ec.instance);
  const SweepResult result = run_rmse_sweep(instance, ec);
  const auto rows = result.aggregate();

  {
    auto f = open_output(run.path("runs.csv"));
    write_runs_csv(f, result);
  }
  {
    auto f = open_output(run.path("aggregate.csv"));
    write_aggregate_csv(f, rows);
  }
  {
    auto f = open_output(run.path("rmse.dat"));
    write_rmse_plot_data(f, rows);
  }
  {
    auto f = open_output(run.path("rmse.gp"));
    write_rmse_plot_script(f, rows, "rmse.dat");
  }

  out << "queries=" << instance.contexts().size() << " dropped=" << instance.dropped_queries()
      << " true_value=" << fmt(result.true_value) << '\n';
  for (const auto& r : rows) {
    out << "estimator=" << to_string(r.estimator) << " n=" << r.n << " rmse=" << fmt(r.rmse)
        << " stderr=" << fmt(r.stderr_rmse) << '\n';
  }
  run.finish(cfg, seed, threads);
  return kExitOk;
}

// ---------------------------------------------------------------------------

constexpr std::string_view kOptimizeKeys[] = {
    "dataset",         "synthetic.queries", "synthetic.min_docs", "synthetic.max_docs", "synthetic.features",
    "synthetic.noise", "synthetic.seed",    "title_block",        "body_block",         "m",
    "l",               "alpha",             "jitter",             "n_logs",             "folds",
    "seed",            "threads",           "sup_rel",            "enumeration_cap",    "gamma_samples",
    "indicator_samples", "support_samples"};

int cmd_optimize(const ConfigArgs& a, const Common& common, std::ostream& out) {
  FlatConfig cfg = gather_config(a.config, a.overrides);
  cfg.require_known(kOptimizeKeys);
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  resolve_common(cfg, common, seed, threads);

  OptimizeConfig oc;
  oc.instance = instance_from(cfg, oc.instance);
  oc.n_logs = cfg.get_uint("n_logs", oc.n_logs);
  if (oc.n_logs == 0) throw ConfigError("field 'n_logs': must be positive");
  oc.folds = cfg.get_uint("folds", oc.folds);
  if (oc.folds == 0) throw ConfigError("field 'folds': must be at least 1");
  oc.sup_rel = cfg.get_bool("sup_rel", oc.sup_rel);
  oc.seed = seed;
  oc.threads = threads;
  oc.moments = moments_from(cfg, seed);

  const RankingDataset dataset = load_dataset(cfg, seed);
  oc.blocks = blocks_from(cfg, dataset.feature_dim);
  Run run("optimize", common);
  const auto folds = run_optimization(dataset, oc);
  {
    auto f = open_output(run.path("folds.csv"));
    write_fold_csv(f, folds, oc.sup_rel);
  }
  for (const auto& fold : folds) {
    auto f = open_output(run.path("scorer_fold" + std::to_string(fold.fold + 1) + ".txt"));
    write_scorer(f, fold.scorer);
    out << "fold=" << (fold.fold + 1) << " logger=" << fmt(fold.logger);
    if (oc.sup_rel) out << " sup_rel=" << fmt(fold.sup_rel);
    out << " sup_gain=" << fmt(fold.sup_gain) << " pi_opt=" << fmt(fold.pi_opt) << '\n';
  }
  run.finish(cfg, seed, threads);
  return kExitOk;
}

// ---------------------------------------------------------------------------

constexpr std::string_view kGenerateKeys[] = {"synthetic.queries", "synthetic.min_docs", "synthetic.max_docs",
                                              "synthetic.features", "synthetic.noise",  "synthetic.seed",
                                              "seed",              "threads"};

int cmd_generate(const ConfigArgs& a, const std::string& output, const Common& common, std::ostream& out) {
  FlatConfig cfg = gather_config(a.config, a.overrides);
  cfg.require_known(kGenerateKeys);
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  resolve_common(cfg, common, seed, threads);
  const RankingDataset dataset = load_dataset(cfg, seed);
  Run run("generate", common);
  const std::string path = output.empty() ? run.path("synthetic.letor") : output;
  {
    auto f = open_output(path);
    write_letor(f, dataset);
  }
  out << "queries=" << dataset.queries.size() << " documents=" << dataset.num_documents()
      << " features=" << dataset.feature_dim << " path=" << path << '\n';
  run.finish(cfg, seed, threads);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Off-policy evaluation and optimization for slate recommendation", "slateval"};
  app.set_version_flag("--version", SLATEVAL_VERSION);
  app.require_subcommand(1);

  Common common;

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Estimate a target policy's value from logged slates");
  evaluate->add_option("--logs", ev.logs, "Logged examples: context<TAB>slate<TAB>reward")->required();
  evaluate->add_option("--logging", ev.logging, "Logging policy: 'uniform' or a policy table file");
  evaluate->add_option("--target", ev.target, "Target policy: 'uniform' or a policy table file")->required();
  evaluate->add_option("--space", ev.space, "Slate space, e.g. ranking:m=10,l=3 or cartesian:3,4")->required();
  evaluate->add_option("--estimator", ev.estimators, "pi, ips, wips or dm (repeatable)");
  ev.delta_opt = evaluate->add_option("--delta", ev.delta, "Report the deviation bound at this confidence");
  evaluate->add_option("--features", ev.features, "Features for dm: context<TAB>action<TAB>v1,v2,...");
  evaluate->add_option("--dm-lambda", ev.dm_lambda, "Ridge strength for dm");
  common.attach(evaluate);

  DiagnoseArgs dg;
  auto* diagnose = app.add_subcommand("diagnose", "Overlap diagnostics between logging and target policies");
  diagnose->add_option("--logging", dg.logging, "Logging policy: 'uniform' or a policy table file");
  diagnose->add_option("--target", dg.target, "Target policy: 'uniform' or a policy table file")->required();
  diagnose->add_option("--space", dg.space, "Slate space")->required();
  diagnose->add_option("--contexts", dg.contexts, "File with one context id per line");
  diagnose->add_option("--logs", dg.logs, "Take contexts from a log file");
  diagnose->add_option("--delta", dg.delta, "Confidence for the deviation bound");
  diagnose->add_option("--n", dg.n, "Sample size for the deviation bound");
  common.attach(diagnose);

  ConfigArgs ex;
  auto* experiment = app.add_subcommand("experiment", "RMSE sweep on a semi-synthetic ranking instance");
  experiment->add_option("--config", ex.config, "key = value config file");
  experiment->add_option("--set", ex.overrides, "Override a config field: key=value (repeatable)");
  common.attach(experiment);

  ConfigArgs op;
  auto* optimize = app.add_subcommand("optimize", "Off-policy optimization with per-fold NDCG");
  optimize->add_option("--config", op.config, "key = value config file");
  optimize->add_option("--set", op.overrides, "Override a config field: key=value (repeatable)");
  common.attach(optimize);

  ConfigArgs gn;
  std::string gen_output;
  auto* generate = app.add_subcommand("generate", "Write a synthetic learning-to-rank dataset");
  generate->add_option("--config", gn.config, "key = value config file");
  generate->add_option("--set", gn.overrides, "Override a config field: key=value (repeatable)");
  generate->add_option("--output", gen_output, "Output path (default <out-dir>/synthetic.letor)");
  common.attach(generate);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << SLATEVAL_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (app.get_subcommands().empty()) err << app.help();
    return kExitInput;
  }

  try {
    if (*evaluate) return cmd_evaluate(ev, common, out);
    if (*diagnose) return cmd_diagnose(dg, common, out);
    if (*experiment) return cmd_experiment(ex, common, out);
    if (*optimize) return cmd_optimize(op, common, out);
    if (*generate) return cmd_generate(gn, gen_output, common, out);
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const LookupError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitInput;
}

}  // namespace slateval::cli
