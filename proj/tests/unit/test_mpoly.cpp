#include <doctest.h>

#include <random>

#include "slag/errors.hpp"
#include "slag/mpoly.hpp"

using namespace slag;

namespace {

TruncatedSeries x(int cap, int axis) { return TruncatedSeries::variable(cap, axis); }

TruncatedSeries random_series(std::mt19937_64& rng, int cap, int n_terms) {
  std::uniform_int_distribution<int> deg(0, cap);
  std::uniform_int_distribution<int> num(-9, 9);
  std::uniform_int_distribution<int> den(1, 7);
  TruncatedSeries s(cap);
  for (int t = 0; t < n_terms; ++t) {
    const int d = deg(rng);
    std::uniform_int_distribution<int> split(0, d);
    const int i = split(rng);
    std::uniform_int_distribution<int> split2(0, d - i);
    const int j = split2(rng);
    s.add_to({i, j, d - i - j}, Rational(num(rng), den(rng)));
  }
  return s;
}

}  // namespace

TEST_CASE("monomial arithmetic and truncation") {
  const auto x1 = x(6, 1);
  CHECK(x1 * x1 == TruncatedSeries::monomial(6, {2, 0, 0}));

  const auto a = x1 + Rational(3, 2) * x(6, 3);
  CHECK((a - a).is_zero());

  const auto rho2 = rho_squared_power(3, 1);
  CHECK((rho2 * rho2).is_zero());
  CHECK((rho2 * rho2).cap() == 3);

  CHECK(series_arith(x1, x1, SeriesOp::mul) == x1 * x1);
  CHECK(series_arith(x1, x1, SeriesOp::sub).is_zero());
}

TEST_CASE("result cap is the smaller operand cap") {
  const auto a = TruncatedSeries::monomial(8, {3, 0, 0});
  const auto b = TruncatedSeries::monomial(4, {1, 1, 0});
  CHECK((a + b).cap() == 4);
  CHECK((a + b).coeff({3, 0, 0}) == 1);
  CHECK((a * b).cap() == 4);
  CHECK((a * b).is_zero());
}

TEST_CASE("differentiation examples") {
  const int cap = 8;
  CHECK(diff(TruncatedSeries::monomial(cap, {0, 0, 2}), 3) == Rational(2) * x(cap - 1, 3));

  // Q = rho^2 x3^2 for m = 2: tilde-Laplacian expands by hand to 4 x3^2 + 4 rho^2.
  const auto q = times_x3_power(rho_squared_power(cap, 1), 2, cap);
  TruncatedSeries expected(cap - 2);
  expected.set({0, 0, 2}, 4);
  expected.set({2, 0, 0}, 4);
  expected.set({0, 2, 0}, 4);
  CHECK(tilde_laplacian(q) == expected);

  const auto rez2x3 = times_x3_power(real_power_z(cap, 2), 1, cap);
  TruncatedSeries d1(cap - 1);
  d1.set({1, 0, 1}, 2);
  CHECK(diff(rez2x3, 1) == d1);
  CHECK(diff(x(cap, 1), 2).is_zero());
  CHECK(diff(x(cap, 1), 1).cap() == cap - 1);
}

TEST_CASE("real powers of z match the binomial expansion") {
  // Re z^3 = x1^3 - 3 x1 x2^2
  const auto r3 = real_power_z(6, 3);
  CHECK(r3.coeff({3, 0, 0}) == 1);
  CHECK(r3.coeff({1, 2, 0}) == -3);
  CHECK(r3.size() == 2);
  // Re z^4 = x1^4 - 6 x1^2 x2^2 + x2^4
  const auto r4 = real_power_z(6, 4);
  CHECK(r4.coeff({2, 2, 0}) == -6);
  CHECK(r4.coeff({0, 4, 0}) == 1);
}

TEST_CASE("evaluation examples") {
  const auto half_rho2 = Rational(1, 2) * rho_squared_power(6, 1);
  const SeriesEvaluator e(half_rho2);
  CHECK(e.value({1, 1, 0}) == doctest::Approx(1.0));
  const auto h = e.hessian({0.3, -0.7, 2.0});
  CHECK(h.xx == 1.0);
  CHECK(h.yy == 1.0);
  CHECK(h.zz == 0.0);
  CHECK(h.xy == 0.0);

  const SeriesEvaluator g(times_x3_power(real_power_z(6, 2), 1, 6));
  for (double t : {-0.9, -0.1, 0.0, 0.4, 1.3}) {
    const auto grad = g.gradient({0, 0, t});
    CHECK(grad[0] == 0.0);
    CHECK(grad[1] == 0.0);
    CHECK(grad[2] == 0.0);
  }
}

TEST_CASE("low_order examples") {
  const auto a = TruncatedSeries::monomial(8, {2, 0, 1}) + TruncatedSeries::monomial(8, {0, 0, 5});
  CHECK(low_order(a, 0) == 3);
  CHECK_FALSE(low_order(TruncatedSeries(8), 0).has_value());
  const auto b = Rational(1, 1000) * TruncatedSeries::monomial(8, {1, 0, 0}) + TruncatedSeries::monomial(8, {0, 3, 0});
  CHECK(low_order(b, Rational(1, 100)) == 3);
  CHECK_THROWS_AS(low_order(b, Rational(-1)), ParameterError);
}

TEST_CASE("ring axioms hold exactly on random series") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_series(rng, 6, 6);
    const auto b = random_series(rng, 6, 6);
    const auto c = random_series(rng, 6, 6);
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a * b == b * a);
    CHECK(a + b == b + a);
  }
}

TEST_CASE("mixed partials commute exactly") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_series(rng, 7, 10);
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j) CHECK(diff(diff(a, i), j) == diff(diff(a, j), i));
  }
}

TEST_CASE("evaluator derivatives agree with central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-0.28, 0.28);
  const double h = 1e-4;
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_series(rng, 7, 12);
    const SeriesEvaluator e(a);
    const Point3 p(coord(rng), coord(rng), coord(rng));
    const auto jet = e.jet(p);
    CHECK(jet.value == doctest::Approx(e.value(p)).epsilon(1e-14));
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 step{};
      step[axis] = h;
      const Point3 plus(p.vec() + step), minus(p.vec() - step);
      const double fd = (e.value(plus) - e.value(minus)) / (2 * h);
      CHECK(std::abs(fd - jet.gradient[axis]) < 1e-6);
      const Vec3 gfd = (1.0 / (2 * h)) * (e.gradient(plus) - e.gradient(minus));
      for (int b = 0; b < 3; ++b) CHECK(std::abs(gfd[b] - jet.hessian(axis, b)) < 1e-6);
      // Exact series derivative evaluated agrees with the compiled gradient.
      CHECK(SeriesEvaluator(diff(a, axis + 1)).value(p) == doctest::Approx(jet.gradient[axis]).epsilon(1e-12));
    }
  }
}

TEST_CASE("json round trip is exact and sorted") {
  std::mt19937_64 rng(5);
  const auto a = random_series(rng, 6, 15);
  const auto doc = to_json(a);
  CHECK(series_from_json(doc) == a);
  CHECK(to_json(series_from_json(doc)).dump() == doc.dump());
  const auto& terms = doc.at("terms");
  for (std::size_t t = 1; t < terms.size(); ++t) {
    const auto prev = std::make_tuple(terms[t - 1][0].get<int>(), terms[t - 1][1].get<int>(), terms[t - 1][2].get<int>());
    const auto cur = std::make_tuple(terms[t][0].get<int>(), terms[t][1].get<int>(), terms[t][2].get<int>());
    CHECK(prev < cur);
  }

  const auto one = TruncatedSeries::constant(2, 3);
  CHECK(to_json(one).dump() == R"({"cap":2,"terms":[[0,0,0,"3/1"]]})");
  CHECK_THROWS_AS(series_from_json(nlohmann::json::parse(R"({"cap":1,"terms":[[2,0,0,"1/2"]]})")), ParameterError);
  CHECK_THROWS_AS(series_from_json(nlohmann::json::parse(R"({"cap":3,"terms":[[1,0,0,"1/0"]]})")), ParameterError);
  CHECK_THROWS_AS(series_from_json(nlohmann::json::parse(R"({"terms":[]})")), ParameterError);
}

TEST_CASE("rational parsing") {
  CHECK(parse_rational("6/4") == Rational(3, 2));
  CHECK(parse_rational("-7") == -7);
  CHECK(format_rational(Rational(-3, 2)) == "-3/2");
  CHECK_THROWS_AS(parse_rational("0.5"), ParameterError);
}
