#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "slateval/cli/commands.hpp"
#include "slateval/cli/config.hpp"
#include "slateval/error.hpp"
#include "slateval/io.hpp"
#include "support.hpp"

using namespace slateval;
using namespace slateval::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_fixture(const std::filesystem::path& dir) {
  const auto space = SlateSpace::ranking(3, 2);
  ExplicitTable target;
  target[ContextId("q1")] = {{Slate{{0, 1}}, 0.7}, {Slate{{2, 0}}, 0.3}};
  target[ContextId("q2")] = {{Slate{{1, 2}}, 1.0}};
  std::ofstream(dir / "target.tsv") << [&] {
    std::stringstream ss;
    write_explicit_table(ss, target);
    return ss.str();
  }();
  std::vector<LoggedExample> logs;
  Rng rng(1);
  for (int i = 0; i < 60; ++i) {
    const ContextId c(i % 2 ? "q1" : "q2");
    const Slate s = Policy::uniform().sample(c, space, rng);
    logs.push_back({c, s, 0.1 * s[0] + 0.05});
  }
  std::ofstream f(dir / "logs.tsv");
  write_logged_examples(f, logs);
}

}  // namespace

TEST_CASE("flat config parsing") {
  std::istringstream in("# comment\nm = 4\n alpha=0.5 # trailing\nn_grid = 100, 200\n\n");
  auto cfg = FlatConfig::parse(in);
  CHECK(cfg.get_uint("m", 0) == 4);
  CHECK(cfg.get_double("alpha", 0) == 0.5);
  CHECK(cfg.get_size_list("n_grid", {}) == std::vector<std::size_t>{100, 200});
  cfg.apply_override("alpha=2");
  CHECK(cfg.get_nonnegative("alpha", 0) == 2.0);
  cfg.apply_override("alpha=-1");
  CHECK_THROWS_WITH_AS(cfg.get_nonnegative("alpha", 0), doctest::Contains("'alpha'"), ConfigError);
  cfg.apply_override("flag=maybe");
  CHECK_THROWS_AS(cfg.get_bool("flag", false), ConfigError);
  constexpr std::string_view known[] = {"m", "alpha", "n_grid"};
  CHECK_THROWS_WITH_AS(cfg.require_known(known), doctest::Contains("'flag'"), ConfigError);
  std::istringstream bad("just words\n");
  CHECK_THROWS_AS(FlatConfig::parse(bad), ParseError);
  CHECK_THROWS_AS(cfg.apply_override("novalue"), ConfigError);
}

TEST_CASE("evaluate command") {
  const auto dir = testing::temp_dir("evaluate");
  write_fixture(dir);
  const std::vector<std::string> base{"evaluate", "--logs", (dir / "logs.tsv").string(), "--target",
                                      (dir / "target.tsv").string(), "--space", "ranking:m=3,l=2"};
  auto args = base;
  for (std::string a : {"--estimator", "pi", "--estimator", "wips", "--delta", "0.05", "--out-dir"}) args.push_back(a);
  args.push_back((dir / "a").string());
  const auto r = run(args);
  CHECK(r.code == 0);
  CHECK(r.out.find("estimator=pi") != std::string::npos);
  CHECK(r.out.find("estimator=wips") != std::string::npos);
  const auto csv = slurp(dir / "a" / "estimates.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(std::filesystem::exists(dir / "a" / "manifest.txt"));
  CHECK(slurp(dir / "a" / "manifest.txt").find("command = evaluate") != std::string::npos);

  args.back() = (dir / "b").string();
  CHECK(run(args).code == 0);
  CHECK(slurp(dir / "b" / "estimates.csv") == csv);

  auto missing = base;
  missing[2] = (dir / "nope.tsv").string();
  const auto m = run(missing);
  CHECK(m.code == kExitInput);
  CHECK(m.err.find("nope.tsv") != std::string::npos);

  auto abs_violation = base;
  abs_violation[4] = "uniform";
  abs_violation.push_back("--logging");
  abs_violation.push_back((dir / "target.tsv").string());
  abs_violation.push_back("--out-dir");
  abs_violation.push_back((dir / "c").string());
  const auto v = run(abs_violation);
  CHECK(v.code == kExitRuntime);

  auto unknown = base;
  unknown.push_back("--estimator");
  unknown.push_back("magic");
  unknown.push_back("--out-dir");
  unknown.push_back((dir / "d").string());
  CHECK(run(unknown).code == kExitInput);
  CHECK(run({"evaluate", "--logs"}).code == kExitInput);
  CHECK(run({}).code == kExitInput);
}

TEST_CASE("diagnose command") {
  const auto dir = testing::temp_dir("diagnose");
  const auto r = run({"diagnose", "--target", "uniform", "--space", "ranking:m=4,l=2", "--n", "1000", "--out-dir",
                      (dir / "u").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("sigma_sq=1\n") != std::string::npos);
  CHECK(r.out.find("rho=1\n") != std::string::npos);
  CHECK(r.out.find("kappa=1\n") != std::string::npos);
  CHECK(r.out.find("kappa_bound=8\n") != std::string::npos);
  CHECK(r.out.find("bound=") != std::string::npos);
  CHECK(slurp(dir / "u" / "overlap.csv").rfind("sigma_sq,rho,rho_bar,kappa,kappa_bound\n", 0) == 0);
}

TEST_CASE("experiment command") {
  const auto dir = testing::temp_dir("experiment");
  const std::vector<std::string> base{"experiment", "--set", "runs=1", "--set", "n_grid=100", "--set",
                                      "synthetic.queries=30", "--set", "alpha=0.75"};
  auto args = base;
  args.push_back("--out-dir");
  args.push_back((dir / "a").string());
  const auto r = run(args);
  CHECK(r.code == 0);
  const auto agg = slurp(dir / "a" / "aggregate.csv");
  CHECK(std::count(agg.begin(), agg.end(), '\n') == 1 + 4);
  for (const char* f : {"runs.csv", "rmse.dat", "rmse.gp", "manifest.txt"}) CHECK(std::filesystem::exists(dir / "a" / f));
  CHECK(slurp(dir / "a" / "manifest.txt").find("config.alpha = 0.75") != std::string::npos);

  std::ofstream(dir / "exp.cfg") << "runs = 1\nn_grid = 100\nsynthetic.queries = 30\nalpha = 0.75\n";
  const auto from_file = run({"experiment", "--config", (dir / "exp.cfg").string(), "--threads", "2", "--out-dir",
                              (dir / "b").string()});
  CHECK(from_file.code == 0);
  CHECK(slurp(dir / "b" / "aggregate.csv") == agg);

  auto bad = base;
  bad.push_back("--set");
  bad.push_back("l=30");
  const auto e = run(bad);
  CHECK(e.code == kExitInput);
  CHECK(e.err.find("'l'") != std::string::npos);
  const auto unknown = run({"experiment", "--set", "colour=blue", "--out-dir", (dir / "c").string()});
  CHECK(unknown.code == kExitInput);
  CHECK(unknown.err.find("'colour'") != std::string::npos);
  CHECK(run({"experiment", "--config", (dir / "missing.cfg").string()}).code == kExitInput);
}

TEST_CASE("generate and optimize commands") {
  const auto dir = testing::temp_dir("generate");
  const auto g = run({"generate", "--set", "synthetic.queries=20", "--set", "synthetic.features=8", "--out-dir",
                      (dir / "g").string()});
  CHECK(g.code == 0);
  const auto letor = dir / "g" / "synthetic.letor";
  REQUIRE(std::filesystem::exists(letor));
  const auto o = run({"optimize", "--set", "dataset=" + letor.string(), "--set", "title_block=0:4", "--set",
                      "body_block=4:", "--set", "m=6", "--set", "l=3", "--set", "n_logs=2000", "--out-dir",
                      (dir / "o").string()});
  CHECK(o.code == 0);
  const auto folds = slurp(dir / "o" / "folds.csv");
  CHECK(std::count(folds.begin(), folds.end(), '\n') == 1 + 5 + 1);
  CHECK(std::filesystem::exists(dir / "o" / "scorer_fold1.txt"));
  CHECK(o.out.find("fold=5") != std::string::npos);
}
