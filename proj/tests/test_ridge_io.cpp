#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "slateval/error.hpp"
#include "slateval/io.hpp"
#include "slateval/numeric.hpp"
#include "slateval/ridge.hpp"
#include "slateval/rng.hpp"

using namespace slateval;

TEST_CASE("ridge recovers noiseless linear targets") {
  RidgeAccumulator acc(3);
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x{uniform01(rng), uniform01(rng), uniform01(rng)};
    acc.add(x, 0.5 + 2 * x[0] - x[1] + 0.25 * x[2]);
  }
  const auto m = acc.fit(1e-6);
  CHECK(m.intercept == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(std::abs(m.weights[0] - 2) < 1e-6);
  CHECK(std::abs(m.weights[1] + 1) < 1e-6);
  CHECK(std::abs(m.weights[2] - 0.25) < 1e-6);
}

TEST_CASE("ridge on constant targets is the constant") {
  RidgeAccumulator acc(2);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) acc.add(std::vector<double>{uniform01(rng), uniform01(rng)}, -0.3);
  const auto m = acc.fit_cv(kRidgeGrid);
  CHECK(m.predict(std::vector<double>{0.2, 0.9}) == doctest::Approx(-0.3).epsilon(1e-9));
}

TEST_CASE("singular systems escalate the ridge") {
  RidgeAccumulator acc(2, 1);
  for (int i = 0; i < 10; ++i) acc.add(std::vector<double>{1.0, 1.0}, 1.0);
  const auto m = acc.fit(0.0);
  CHECK(m.lambda >= kMinRidge);
  CHECK(m.predict(std::vector<double>{1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("fold assignment follows the row index") {
  RidgeAccumulator a(1), b(1);
  for (int i = 0; i < 25; ++i) {
    const double x = i * 0.1;
    a.add(std::vector<double>{x}, std::sin(x));
    b.add_aggregate(std::vector<double>{x}, i % 5, 1, std::sin(x), std::sin(x) * std::sin(x));
  }
  const auto ma = a.fit_cv(kRidgeGrid);
  const auto mb = b.fit_cv(kRidgeGrid);
  CHECK(ma.lambda == mb.lambda);
  CHECK(ma.intercept == doctest::Approx(mb.intercept).epsilon(1e-12));
}

TEST_CASE("pairwise summation") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (i + 1);
  double naive = 0.0;
  for (double x : v) naive += x;
  CHECK(pairwise_sum(v) == doctest::Approx(naive).epsilon(1e-13));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(mean_of(std::vector<double>{1, 2, 3}) == 2.0);
}

TEST_CASE("format_double round trips") {
  for (double x : {0.1, 1.0 / 3, -2.5e-300, 12345678.9, 0.0}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("parallel_for visits each index once and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { ++hits[i]; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw ValidationError("boom");
                  }),
                  ValidationError);
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(uniform_index(rng, 7) < 7);
  }
}

TEST_CASE("logged example files") {
  const std::vector<LoggedExample> data{{ContextId("a"), Slate{{0, 2}}, 0.5}, {ContextId("b c"), Slate{{1, 0}}, -1.0}};
  std::stringstream io;
  write_logged_examples(io, data);
  const auto back = read_logged_examples(io);
  REQUIRE(back.size() == 2);
  CHECK(back[1].context.str() == "b c");
  CHECK(back[0].slate == data[0].slate);
  CHECK(back[1].reward == -1.0);

  std::istringstream comments("# header\n\nx\t0,1\t0.25\n");
  CHECK(read_logged_examples(comments).size() == 1);
  std::istringstream range("x\t0,1\t1.5\n");
  CHECK_THROWS_AS(read_logged_examples(range), ParseError);
  std::istringstream fields("x\t0,1\n");
  CHECK_THROWS_AS(read_logged_examples(fields), ParseError);
  CHECK_THROWS_AS(load_logged_examples("/nonexistent/logs.tsv"), std::ios_base::failure);
}

TEST_CASE("policy table files") {
  ExplicitTable t;
  t[ContextId("x")] = {{Slate{{0, 1}}, 0.25}, {Slate{{1, 0}}, 0.75}};
  t[ContextId("a")] = {{Slate{{2, 1}}, 1.0}};
  std::stringstream io;
  write_explicit_table(io, t);
  CHECK(io.str().rfind("a\t2,1\t1\n", 0) == 0);
  const auto back = read_explicit_table(io);
  CHECK(back.at(ContextId("x")).size() == 2);
  std::istringstream bad("x\t0,1\tnope\n");
  CHECK_THROWS_AS(read_explicit_table(bad), ParseError);
}
