#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "slateval/error.hpp"
#include "slateval/numeric.hpp"
#include "slateval/semisynth.hpp"
#include "support.hpp"

using namespace slateval;

namespace {

BanditInstance::Pool make_pool(const std::string& id, std::vector<int> rels, Slate target) {
  BanditInstance::Pool p;
  p.context = ContextId(id);
  for (std::size_t a = 0; a < rels.size(); ++a) {
    p.doc_ids.push_back(id + "-" + std::to_string(a));
    p.features.push_back({static_cast<double>(rels[a]), 1.0});
    p.title_scores.push_back(static_cast<double>(rels[a]));
  }
  p.relevance = rels;
  std::vector<double> gains;
  for (int r : rels) gains.push_back(std::exp2(r) - 1);
  std::sort(gains.rbegin(), gains.rend());
  for (std::size_t j = 0; j < target.size(); ++j) p.ideal_dcg += gains[j] / std::log2(j + 2.0);
  p.target_slate = std::move(target);
  return p;
}

SyntheticConfig small_synthetic() {
  SyntheticConfig sc;
  sc.num_queries = 40;
  sc.min_docs = 6;
  sc.max_docs = 12;
  sc.num_features = 10;
  sc.seed = 3;
  return sc;
}

BanditInstance small_instance(double alpha = 0.0, int m = 5, int l = 2) {
  const auto data = generate_synthetic(small_synthetic());
  const auto title = fit_score_model(data, {0, 5});
  const auto body = fit_score_model(data, {5, 10});
  return build_instance(data, title, body, {m, l, alpha, false});
}

}  // namespace

TEST_CASE("parse_letor") {
  SUBCASE("single line") {
    std::istringstream in("2 qid:10032 1:0.5 2:0.125 # docA\n");
    const auto d = parse_letor(in);
    REQUIRE(d.queries.size() == 1);
    CHECK(d.queries[0].query_id == "10032");
    const auto& doc = d.queries[0].documents.at(0);
    CHECK(doc.relevance == 2);
    CHECK(doc.features == std::vector<double>{0.5, 0.125});
    CHECK(doc.doc_id == "docA");
  }
  SUBCASE("empty input") {
    std::istringstream in("");
    const auto d = parse_letor(in);
    CHECK(d.queries.empty());
    CHECK(d.num_documents() == 0);
  }
  SUBCASE("docid fields, grouping and sparse features") {
    std::istringstream in(
        "0 qid:7 1:1 3:2 #docid = GX01 inc = 1\n"
        "1 qid:8 1:0 2:1 3:0\n"
        "2 qid:7 2:4 3:1 # docid = GX02\n");
    const auto d = parse_letor(in);
    REQUIRE(d.queries.size() == 2);
    CHECK(d.feature_dim == 3);
    CHECK(d.queries[0].documents.size() == 2);
    CHECK(d.queries[0].documents[0].doc_id == "GX01");
    CHECK(d.queries[0].documents[0].features == std::vector<double>{1, 0, 2});
    CHECK(d.queries[1].documents[0].doc_id == "8#0");
  }
  SUBCASE("errors carry line numbers") {
    std::istringstream rel("1 qid:1 1:0\n3 qid:1 1:0\n");
    try {
      parse_letor(rel);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    std::istringstream dim("1 qid:1 1:0 2:1\n1 qid:1 1:0\n");
    CHECK_THROWS_AS(parse_letor(dim), ParseError);
    std::istringstream noqid("1 1:0\n");
    CHECK_THROWS_AS(parse_letor(noqid), ParseError);
    std::istringstream value("1 qid:1 1:x\n");
    CHECK_THROWS_AS(parse_letor(value), ParseError);
  }
  CHECK_THROWS_AS(load_letor("/nonexistent/file.txt"), std::ios_base::failure);
}

TEST_CASE("letor round trip on canonical files") {
  const auto data = generate_synthetic(small_synthetic());
  std::stringstream a;
  write_letor(a, data);
  const auto back = parse_letor(a);
  std::stringstream b;
  write_letor(b, back);
  CHECK(a.str() == b.str());
  REQUIRE(back.queries.size() == data.queries.size());
  for (std::size_t q = 0; q < data.queries.size(); ++q) {
    for (std::size_t d = 0; d < data.queries[q].documents.size(); ++d) {
      CHECK(back.queries[q].documents[d].features == data.queries[q].documents[d].features);
      CHECK(back.queries[q].documents[d].doc_id == data.queries[q].documents[d].doc_id);
    }
  }
}

TEST_CASE("synthetic generator") {
  const auto a = generate_synthetic(small_synthetic());
  const auto b = generate_synthetic(small_synthetic());
  std::stringstream sa, sb;
  write_letor(sa, a);
  write_letor(sb, b);
  CHECK(sa.str() == sb.str());
  std::set<int> rels;
  for (const auto& q : a.queries) {
    CHECK(q.documents.size() >= 6);
    CHECK(q.documents.size() <= 12);
    for (const auto& d : q.documents) {
      rels.insert(d.relevance);
      CHECK(d.features.size() == 10);
    }
  }
  CHECK(rels == std::set<int>{0, 1, 2});
  SyntheticConfig bad = small_synthetic();
  bad.max_docs = 2;
  CHECK_THROWS_AS(generate_synthetic(bad), ConfigError);
}

TEST_CASE("ndcg of the two-document pool") {
  const BanditInstance inst({make_pool("q", {2, 1}, Slate{{0, 1}})}, 2, {2, 2, 0.0, false}, 0);
  const ContextId q("q");
  CHECK(inst.pool(q).ideal_dcg == doctest::Approx(3.63093).epsilon(1e-5));
  CHECK(ndcg_reward(inst, q, Slate{{0, 1}}) == doctest::Approx(1.0));
  CHECK(ndcg_reward(inst, q, Slate{{1, 0}}) == doctest::Approx(0.79671).epsilon(1e-5));
  CHECK(ndcg_reward(inst, q, Slate{{1, 0}}) * inst.pool(q).ideal_dcg == doctest::Approx(2.89279).epsilon(1e-5));
  CHECK_THROWS_AS(ndcg_reward(inst, q, Slate{{1, 1}}), ValidationError);

  const BanditInstance zero({make_pool("z", {0, 0, 0}, Slate{{0, 1}})}, 2, {3, 2, 0.0, false}, 0);
  CHECK(ndcg_reward(zero, ContextId("z"), Slate{{2, 1}}) == 0.0);
}

TEST_CASE("property: NDCG decomposes additively over slots") {
  const auto inst = small_instance(0.0, 5, 3);
  for (const auto& ctx : inst.contexts()) {
    const auto& space = inst.space(ctx);
    for (const auto& s : space.enumerate()) {
      double sum = 0.0;
      for (int j = 0; j < space.num_slots(); ++j) sum += inst.intrinsic(ctx, j, s[j]);
      CHECK(std::abs(inst.ndcg(ctx, s) - sum) <= 1e-12);
      CHECK(inst.ndcg(ctx, s) >= 0.0);
      CHECK(inst.ndcg(ctx, s) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("instance construction") {
  const auto u = small_instance(0.0);
  const auto hot = small_instance(3.0);
  CHECK(u.logging().is_uniform());
  CHECK_FALSE(hot.logging().is_uniform());
  REQUIRE(u.contexts() == hot.contexts());
  for (const auto& ctx : u.contexts()) {
    CHECK(u.pool(ctx).target_slate == hot.pool(ctx).target_slate);
    CHECK(u.pool(ctx).doc_ids.size() == 5);
    const auto& titles = u.pool(ctx).title_scores;
    CHECK(std::is_sorted(titles.rbegin(), titles.rend()));
  }
  const auto small = small_instance(0.0, 9, 2);
  bool shrunk = false;
  for (const auto& ctx : small.contexts()) shrunk |= small.space(ctx).num_actions(0) < 9;
  CHECK(shrunk);
  const auto strict = small_instance(0.0, 8, 7);
  CHECK(strict.dropped_queries() > 0);
  CHECK(strict.contexts().size() + strict.dropped_queries() == 40);
  CHECK_THROWS_AS(small_instance(-1.0), ConfigError);
}

TEST_CASE("logged rewards stay in [0,1] and slates are valid") {
  const auto inst = small_instance(1.0, 6, 3);
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto ctx = inst.sample_context(rng);
    const auto s = inst.logging().sample(ctx, inst.space(ctx), rng);
    CHECK(inst.space(ctx).contains(s));
    const double r = inst.reward(ctx, s, rng);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
}

TEST_CASE("target value and policy value agree for the target") {
  const auto inst = small_instance();
  CHECK(inst.policy_value(inst.target()) == doctest::Approx(inst.target_value()).epsilon(1e-12));
}

TEST_CASE("semi-bandit estimators") {
  const auto inst = small_instance(0.5, 5, 2);
  const IntrinsicOracle phi = [&](const ContextId& c, int j, int a) { return inst.intrinsic(c, j, a); };
  Rng rng(6);
  std::vector<LoggedExample> logs;
  for (int i = 0; i < 300; ++i) {
    const auto ctx = inst.sample_context(rng);
    Slate s = inst.logging().sample(ctx, inst.space(ctx), rng);
    logs.push_back({ctx, s, inst.ndcg(ctx, s)});
  }
  SUBCASE("pi = mu gives the mean reward") {
    double mean = 0.0;
    for (const auto& ex : logs) mean += ex.reward / logs.size();
    CHECK(estimate_wsb(logs, phi, inst.logging(), inst.logging(), inst.spaces()).estimate == doctest::Approx(mean).epsilon(1e-12));
    CHECK(estimate_sb(logs, phi, inst.logging(), inst.logging(), inst.spaces()).estimate == doctest::Approx(mean).epsilon(1e-12));
  }
  SUBCASE("single log") {
    const std::span<const LoggedExample> one(logs.data(), 1);
    const auto& ex = logs[0];
    double expected = 0.0;
    for (int j = 0; j < 2; ++j) expected += phi(ex.context, j, ex.slate[j]);
    const auto mixed = Policy::uniform_mixture(inst.target(), 0.5);
    CHECK(estimate_wsb(one, phi, inst.logging(), mixed, inst.spaces()).estimate == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("zero marginal") {
    const auto det = Policy::deterministic({{logs[0].context, Slate{{(logs[0].slate[0] + 1) % 5, logs[0].slate[0]}}}});
    const std::span<const LoggedExample> one(logs.data(), 1);
    CHECK_THROWS_AS(estimate_sb(one, phi, det, inst.target(), inst.spaces()), AbsoluteContinuityError);
  }
}

TEST_CASE("sweep output and determinism") {
  const auto inst = small_instance(0.0, 5, 2);
  ExperimentConfig cfg;
  cfg.instance = inst.config();
  cfg.n_grid = {100, 400};
  cfg.runs = 3;
  cfg.estimators = {EstimatorKind::PI, EstimatorKind::IPS, EstimatorKind::WIPS, EstimatorKind::DM,
                    EstimatorKind::OnPolicy, EstimatorKind::SB, EstimatorKind::WSB};
  const auto serial = run_rmse_sweep(inst, cfg);
  cfg.threads = 3;
  const auto parallel = run_rmse_sweep(inst, cfg);
  CHECK(serial.rows.size() == 2 * 3 * 7);
  std::stringstream a, b;
  write_runs_csv(a, serial);
  write_runs_csv(b, parallel);
  CHECK(a.str() == b.str());
  const auto agg = serial.aggregate();
  CHECK(agg.size() == 14);
  CHECK(agg.front().estimator == EstimatorKind::PI);
  CHECK(agg.front().n == 100);
  std::stringstream csv;
  write_aggregate_csv(csv, agg);
  CHECK(csv.str().rfind("estimator,n,rmse,stderr\npi,100,", 0) == 0);
  std::stringstream dat, gp;
  write_rmse_plot_data(dat, agg);
  write_rmse_plot_script(gp, agg, "rmse.dat");
  CHECK(dat.str().find("# wsb") != std::string::npos);
  CHECK(gp.str().find("index 6") != std::string::npos);
  CHECK(serial.rmse(EstimatorKind::PI, 400) >= 0.0);
  CHECK_THROWS_AS(serial.rmse(EstimatorKind::PI, 5), LookupError);
  cfg.runs = 0;
  CHECK_THROWS_AS(run_rmse_sweep(inst, cfg), ConfigError);
}

TEST_CASE("undefined wIPS falls back to zero and is flagged") {
  const auto inst = small_instance(0.0, 8, 4);
  ExperimentConfig cfg;
  cfg.n_grid = {3};
  cfg.runs = 2;
  cfg.estimators = {EstimatorKind::WIPS};
  const auto result = run_rmse_sweep(inst, cfg);
  for (const auto& row : result.rows) {
    if (row.undefined) CHECK(row.estimate == 0.0);
  }
  CHECK(std::any_of(result.rows.begin(), result.rows.end(), [](const SweepRow& r) { return r.undefined; }));
}

TEST_CASE("feature blocks") {
  FeatureBlocks b;
  const auto r = b.resolved(47);
  CHECK(r.title.begin == 0);
  CHECK(r.title.end == 20);
  CHECK(r.body.begin == 20);
  CHECK(r.body.end == 47);
  CHECK_THROWS_AS(b.resolved(10), ConfigError);
}

TEST_CASE("score models recover a planted linear relation") {
  RankingDataset d;
  d.feature_dim = 3;
  Rng rng(1);
  for (int q = 0; q < 20; ++q) {
    RankedQuery query{"q" + std::to_string(q), {}};
    for (int k = 0; k < 10; ++k) {
      RankedDocument doc;
      doc.features = {uniform01(rng), uniform01(rng), uniform01(rng)};
      doc.relevance = doc.features[0] > 0.5 ? 2 : 0;
      query.documents.push_back(doc);
    }
    d.queries.push_back(query);
  }
  const auto m = fit_score_model(d, {0, 1});
  CHECK(m.model.weights[0] > 1.0);
  CHECK(m.score(std::vector<double>{0.9, 0.0, 0.0}) > m.score(std::vector<double>{0.1, 0.0, 0.0}));
  CHECK_THROWS_AS(fit_score_model(d, {2, 5}), ConfigError);
}
