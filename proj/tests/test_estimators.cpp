#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "slateval/error.hpp"
#include "slateval/estimators.hpp"
#include "slateval/linalg.hpp"
#include "support.hpp"

using namespace slateval;

namespace {

const ContextId kX("x");

std::vector<LoggedExample> draw(const Policy& policy, const SlateSpace& space, std::size_t n, Rng& rng,
                                const std::function<double(const Slate&)>& reward) {
  std::vector<LoggedExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    Slate s = policy.sample(kX, space, rng);
    const double r = reward(s);
    out.push_back({kX, std::move(s), r});
  }
  return out;
}

class TableEnv final : public BanditEnvironment {
 public:
  TableEnv(SlateSpace space, std::function<double(const Slate&)> reward) : space_(std::move(space)), reward_(std::move(reward)) {}
  ContextId sample_context(Rng&) const override { return kX; }
  const SlateSpace& space(const ContextId&) const override { return space_; }
  double reward(const ContextId&, const Slate& s, Rng& rng) const override { return uniform01(rng) < reward_(s) ? 1.0 : 0.0; }

 private:
  SlateSpace space_;
  std::function<double(const Slate&)> reward_;
};

}  // namespace

TEST_CASE("estimator names") {
  CHECK(parse_estimator_kind("PI") == EstimatorKind::PI);
  CHECK(parse_estimator_kind("wips") == EstimatorKind::WIPS);
  CHECK(parse_estimator_kind("OnPolicy") == EstimatorKind::OnPolicy);
  CHECK_THROWS_AS(parse_estimator_kind("dr"), ConfigError);
  for (auto k : {EstimatorKind::PI, EstimatorKind::IPS, EstimatorKind::WIPS, EstimatorKind::DM, EstimatorKind::OnPolicy,
                 EstimatorKind::SB, EstimatorKind::WSB}) {
    CHECK(parse_estimator_kind(to_string(k)) == k);
  }
}

TEST_CASE("PI with pi = mu is the mean reward") {
  std::mt19937_64 gen(42);
  Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const auto space = testing::random_space(gen);
    const auto mu = Policy::explicit_table(testing::random_table(kX, space, gen));
    const auto data = draw(mu, space, 40, rng, [&](const Slate& s) { return std::sin(s[0] + 0.3 * s.size()); });
    double mean = 0.0;
    for (const auto& ex : data) mean += ex.reward;
    mean /= data.size();
    CHECK(estimate_pi(data, mu, mu, space).estimate == doctest::Approx(mean).epsilon(1e-10));
    CHECK(estimate_ips(data, mu, mu, space).estimate == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("PI equals IPS for single-slot slates") {
  std::mt19937_64 gen(43);
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 1 + static_cast<int>(gen() % 6);
    const auto space = trial % 2 ? SlateSpace::ranking(m, 1) : SlateSpace::cartesian({m});
    const auto mu = Policy::explicit_table(testing::random_table(kX, space, gen, 1.0));
    const auto pi = Policy::explicit_table(testing::random_table(kX, space, gen, 0.7));
    const auto data = draw(mu, space, 30, rng, [](const Slate& s) { return 0.1 * s[0] - 0.2; });
    CHECK(std::abs(estimate_pi(data, mu, pi, space).estimate - estimate_ips(data, mu, pi, space).estimate) <= 1e-12);
  }
}

TEST_CASE("PI per-example terms under uniform Cartesian logging") {
  const auto space = SlateSpace::cartesian({3, 3});
  const auto mu = Policy::uniform();
  const std::vector<LoggedExample> one{{kX, Slate{{1, 2}}, 0.6}};
  const auto match = Policy::deterministic({{kX, Slate{{1, 2}}}});
  const auto miss = Policy::deterministic({{kX, Slate{{0, 0}}}});
  const auto half = Policy::deterministic({{kX, Slate{{1, 0}}}});
  CHECK(estimate_pi(one, mu, match, space).estimate == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(estimate_pi(one, mu, miss, space).estimate == doctest::Approx(-0.6).epsilon(1e-12));
  CHECK(estimate_pi(one, mu, half, space).estimate == doctest::Approx(0.6 * (3 - 2 + 1)).epsilon(1e-12));
}

TEST_CASE("PI diagnostics and bound") {
  const auto space = SlateSpace::ranking(4, 2);
  Rng rng(5);
  const auto mu = Policy::uniform();
  const auto data = draw(mu, space, 100, rng, [](const Slate& s) { return s[0] == 0 ? 0.5 : 0.1; });
  PiOptions opts;
  opts.delta = 0.05;
  const auto report = estimate_pi(data, mu, mu, space, opts);
  REQUIRE(report.diagnostics);
  CHECK(report.diagnostics->sigma_sq == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(report.diagnostics->rho == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(report.key_value().rfind("estimator=pi n=100 estimate=", 0) == 0);
  CHECK(report.csv_row().rfind("pi,100,", 0) == 0);
  EstimatorReport plain;
  plain.kind = EstimatorKind::IPS;
  plain.n = 3;
  plain.estimate = 0.5;
  CHECK(plain.csv_row() == "ips,3,0.5,,,,");
  CHECK(EstimatorReport::csv_header() == "estimator,n,estimate,sigma_sq,rho,bound,delta");
}

TEST_CASE("estimator error paths") {
  const auto space = SlateSpace::ranking(3, 2);
  const std::vector<LoggedExample> none;
  CHECK_THROWS_AS(estimate_pi(none, Policy::uniform(), Policy::uniform(), space), ValidationError);
  const std::vector<LoggedExample> bad{{kX, Slate{{1, 1}}, 0.5}};
  CHECK_THROWS_AS(estimate_pi(bad, Policy::uniform(), Policy::uniform(), space), ValidationError);

  const auto mu = Policy::deterministic({{kX, Slate{{0, 1}}}});
  const auto pi = Policy::deterministic({{kX, Slate{{2, 1}}}});
  const std::vector<LoggedExample> off{{kX, Slate{{2, 1}}, 0.5}};
  CHECK_THROWS_AS(estimate_ips(off, mu, pi, space), AbsoluteContinuityError);
  CHECK_THROWS_AS(estimate_pi(off, mu, pi, space), AbsoluteContinuityError);

  const std::vector<LoggedExample> logged{{kX, Slate{{0, 1}}, 0.5}};
  CHECK(estimate_ips(logged, mu, pi, space).estimate == 0.0);
  CHECK_THROWS_AS(estimate_wips(logged, mu, pi, space), UndefinedEstimateError);
}

TEST_CASE("wIPS with one example returns its reward") {
  const auto space = SlateSpace::ranking(3, 2);
  const std::vector<LoggedExample> one{{kX, Slate{{2, 0}}, -0.3}};
  CHECK(estimate_wips(one, Policy::uniform(), Policy::uniform(), space).estimate == doctest::Approx(-0.3));
  const auto pi = Policy::deterministic({{kX, Slate{{2, 0}}}});
  CHECK(estimate_wips(one, Policy::uniform(), pi, space).estimate == doctest::Approx(-0.3));
}

TEST_CASE("direct method") {
  const auto space = SlateSpace::ranking(3, 2);
  MapFeatureTable features(2);
  features.set(kX, 0, {1.0, 0.0});
  features.set(kX, 1, {0.0, 1.0});
  features.set(kX, 2, {1.0, 1.0});
  Rng rng(8);
  SUBCASE("constant reward") {
    const auto data = draw(Policy::uniform(), space, 60, rng, [](const Slate&) { return 0.4; });
    auto [train, eval] = split_half(data);
    CHECK(train.size() == 30);
    CHECK(eval.data() == data.data() + 30);
    const auto model = fit_dm(train, features);
    const auto pi = Policy::deterministic({{kX, Slate{{2, 1}}}});
    CHECK(estimate_dm(model, eval, pi, space, features).estimate == doctest::Approx(0.4).epsilon(1e-9));
  }
  SUBCASE("deterministic target uses the model at its slate") {
    const auto data = draw(Policy::uniform(), space, 200, rng, [](const Slate& s) { return 0.3 * s[0] - 0.1 * s[1]; });
    const auto model = fit_dm(data, features, 1e-6);
    const auto pi = Policy::deterministic({{kX, Slate{{2, 1}}}});
    const double expected = model.predict(kX, Slate{{2, 1}}, features);
    CHECK(estimate_dm(model, data, pi, space, features).estimate == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("missing features") {
    const std::vector<LoggedExample> data{{ContextId("other"), Slate{{0, 1}}, 0.1}};
    CHECK_THROWS_AS(fit_dm(data, features), LookupError);
  }
}

TEST_CASE("on-policy estimate") {
  const auto space = SlateSpace::ranking(3, 2);
  const auto pi = Policy::uniform();
  auto value = [](const Slate& s) { return 0.2 + 0.2 * s[0]; };
  TableEnv env(space, value);
  double truth = 0.0;
  for (const auto& s : space.enumerate()) truth += value(s) / 6.0;
  Rng a(4), b(4);
  const std::size_t n = 20000;
  const auto r1 = estimate_onpolicy(pi, env, n, a);
  CHECK(r1.estimate == estimate_onpolicy(pi, env, n, b).estimate);
  CHECK(std::abs(r1.estimate - truth) <= 3 * std::sqrt(truth * (1 - truth) / n));
  CHECK_THROWS_AS(estimate_onpolicy(pi, env, 0, a), ConfigError);
}

TEST_CASE("PI result does not depend on the thread count") {
  std::vector<ContextId> ctxs;
  ContextMap<std::vector<double>> scores;
  for (int c = 0; c < 12; ++c) {
    ctxs.emplace_back("c" + std::to_string(c));
    scores[ctxs.back()] = {0.1 * c, 0.5, -0.2, 0.3};
  }
  const auto mu = Policy::multinomial(scores, 1.0);
  const auto pi = Policy::uniform_mixture(mu, 0.3);
  const auto space = SlateSpace::ranking(4, 2);
  Rng rng(10);
  std::vector<LoggedExample> data;
  for (int i = 0; i < 500; ++i) {
    const auto& c = ctxs[uniform_index(rng, ctxs.size())];
    Slate s = mu.sample(c, space, rng);
    data.push_back({c, s, 0.1 * s[0]});
  }
  PiOptions one, four;
  four.threads = 4;
  CHECK(estimate_pi(data, mu, pi, space, one).estimate == estimate_pi(data, mu, pi, space, four).estimate);
}
