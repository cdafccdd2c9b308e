#include <doctest.h>

#include <cmath>
#include <numbers>

#include "slag/cksolve.hpp"
#include "slag/errors.hpp"
#include "slag/geometry.hpp"
#include "slag/invert.hpp"
#include "slag/sampling.hpp"
#include "slag/seed.hpp"

using namespace slag;

namespace {

HandlePtr poly_handle(std::initializer_list<std::pair<MultiIndex, Rational>> terms, int cap, double radius) {
  TruncatedSeries s(cap);
  for (const auto& [idx, c] : terms) s.set(idx, c);
  return std::make_shared<SeriesHandle>(s, radius);
}

HandlePtr pipeline_forward(int m, double scale) {
  const int cap = 24;
  const auto P = build_P({m, Rational(1, 40 * m * m), Rational(1, 10)}, cap);
  HandlePtr u = std::make_shared<SeriesHandle>(ck_solve(CauchyData::from_series(P), cap), scale);
  return rescale(u, scale);
}

}  // namespace

TEST_CASE("hypotheses validation") {
  CHECK_THROWS_AS((InversionHypotheses{0.0, 0.5, 0.5}.validate()), ParameterError);
  CHECK_THROWS_AS((InversionHypotheses{1.0, 1.5, 0.5}.validate()), ParameterError);
  CHECK_THROWS_AS((InversionHypotheses{1.0, 0.5, 0.7}.validate()), ParameterError);
  CHECK_NOTHROW((InversionHypotheses{1.0, 1.0, 0.5}.validate()));
}

TEST_CASE("hypothesis check on constant and cubic Hessians") {
  // f = (2 x1^2 + 2 x2^2 - x3^2) / 2 has block 2 I, det -4 and no mixed terms.
  const auto f = poly_handle({{{2, 0, 0}, 1}, {{0, 2, 0}, 1}, {{0, 0, 2}, Rational(-1, 2)}}, 4, 2.0);
  CHECK(hypothesis_check(*f, {1.0, 0.5, 0.5}, 400, 1).pass());
  const auto tight = hypothesis_check(*f, {1.0, 1.0, 0.5}, 400, 1);
  CHECK_FALSE(tight.pass());
  CHECK(tight.failed_checks() == std::vector<std::string>{"block_upper_bound"});

  // f = |x'|^2 / 2 + x3^3 has det 6 x3, positive above the plane.
  const auto g = poly_handle({{{2, 0, 0}, Rational(1, 2)}, {{0, 2, 0}, Rational(1, 2)}, {{0, 0, 3}, 1}}, 4, 2.0);
  const auto rep = hypothesis_check(*g, {1.0, 0.5, 0.5}, 400, 1);
  CHECK_FALSE(rep.pass());
  CHECK(rep.failed_checks() == std::vector<std::string>{"det_negative"});
}

TEST_CASE("diagonal quadratic inverse") {
  const auto f = poly_handle({{{2, 0, 0}, Rational(1, 2)}, {{0, 2, 0}, Rational(1, 2)}, {{0, 0, 2}, -1}}, 4, 4.0);
  const InversionHypotheses hyp{2.0, 1.0, 0.5};
  const Point3 x = invert_point(f, hyp, {0.1, -0.2, 0.4});
  CHECK(std::abs(x.x1 - 0.1) <= 1e-10);
  CHECK(std::abs(x.x2 + 0.2) <= 1e-10);
  CHECK(std::abs(x.x3 + 0.2) <= 1e-10);
  CHECK_THROWS_AS(invert_point(f, hyp, {0.0, 0.0, 5.0}), InversionError);
}

TEST_CASE("quartic vertical profile is inverted through the degenerate origin") {
  const auto f = poly_handle({{{2, 0, 0}, Rational(1, 2)}, {{0, 2, 0}, Rational(1, 2)}, {{0, 0, 4}, Rational(-1, 4)}},
                             6, 4.0);
  const InversionHypotheses hyp{2.0, 1.0, 0.5};
  const GradientInverter inv(f, hyp);
  CHECK(std::abs(inv.invert({0, 0, 0.008}).x3 + 0.2) <= 1e-10);
  for (double y3 : {1e-12, -3e-7, 0.05, -0.3}) {
    const Point3 x = inv.invert({0.02, -0.01, y3});
    CHECK(std::abs(x.x3 + std::cbrt(y3)) <= 1e-10);
    CHECK(std::abs(x.x1 - 0.02) <= 1e-12);
  }
}

TEST_CASE("inverse graph of a saddle quadratic") {
  const auto f = poly_handle({{{2, 0, 0}, Rational(1, 2)}, {{0, 2, 0}, Rational(1, 2)}, {{0, 0, 2}, Rational(-1, 2)}},
                             4, 8.0);
  const auto h = build_inverse_graph(f, {4.0, 1.0, 0.5});
  CHECK(h->valid_radius() == doctest::Approx(1.8));
  CHECK(h->provenance() == Provenance::inverse_graph);
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Point3 t(rng.in_ball(1.5));
    CHECK((h->hessian(t) - SymMat3::diag(-1, -1, 1)).frobenius() <= 1e-12);
    CHECK(h->value(t) ==
          doctest::Approx(-0.5 * (t.x1 * t.x1 + t.x2 * t.x2) + 0.5 * t.x3 * t.x3).epsilon(1e-12).scale(1e-12));
  }
  CHECK_THROWS_AS(h->hessian(Point3(0, 0, 0)), SingularPointError);
  CHECK(reconstruct_potential(*h, {1, 0, 1}).value == doctest::Approx(0.0).scale(1e-10));
  CHECK(reconstruct_potential(*h, {0, 0, 0}).value == 0.0);
  const auto radial = reconstruct_potential(*h, {0.3, -0.5, 0.8});
  CHECK(radial.value == doctest::Approx(-0.5 * (0.09 + 0.25) + 0.32).epsilon(1e-12));
}

TEST_CASE("pipeline forward map satisfies the hypotheses and inverts") {
  const auto f = pipeline_forward(2, 0.2);
  const InversionHypotheses hyp{1.0, 0.5, 0.5};
  const auto check = hypothesis_check(*f, hyp, 2000, 7);
  CHECK(check.pass());
  const auto h = build_inverse_graph(f, hyp);
  CHECK(h->valid_radius() > 0);
  const auto props = inversion_properties(*h, 1000, 42);
  CHECK(props.pass());
  INFO(props.to_json().dump());
}

TEST_CASE("inverse graph eigen-angles and reciprocity") {
  const auto f = pipeline_forward(2, 0.2);
  const auto h = build_inverse_graph(f, {1.0, 0.5, 0.5});
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Point3 t(rng.in_ball(h->valid_radius()));
    const SymMat3 inv_hess = h->hessian(t);
    const auto e = eig3_sym(inv_hess);
    CHECK(std::abs(e.phase) <= 1e-6);
    const auto fe = eig3_sym(f->hessian(h->preimage(t)));
    std::array<double, 3> recip{-1 / fe.lambda[0], -1 / fe.lambda[1], -1 / fe.lambda[2]};
    std::sort(recip.begin(), recip.end());
    for (int k = 0; k < 3; ++k)
      CHECK(std::abs(recip[k] - e.lambda[k]) <= 1e-8 * std::max(1.0, std::abs(recip[k])));
  }
  // Near the singular point two angles approach -pi/4 and one approaches pi/2.
  const Point3 near(1e-3 * h->valid_radius(), 0.5e-3 * h->valid_radius(), 0.2e-3 * h->valid_radius());
  const auto e = eig3_sym(h->hessian(near));
  CHECK(e.angle[0] == doctest::Approx(-std::numbers::pi / 4).epsilon(0.05));
  CHECK(e.angle[1] == doctest::Approx(-std::numbers::pi / 4).epsilon(0.05));
  CHECK(e.angle[2] == doctest::Approx(std::numbers::pi / 2).epsilon(0.05));
}

TEST_CASE("potential path independence on the pipeline inverse") {
  const auto f = pipeline_forward(2, 0.2);
  const auto h = build_inverse_graph(f, {1.0, 0.5, 0.5});
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const Vec3 t = rng.in_ball(h->valid_radius());
    const double closed = h->value(Point3(t));
    const auto radial = reconstruct_potential(*h, t);
    const auto legs = reconstruct_potential_two_leg(*h, t);
    // Compared on the natural scale |t| times the search radius of the potential.
    const double scale = h->valid_radius() * h->inverter().hypotheses().solve_radius();
    CHECK(std::abs(radial.value - legs.value) <= 1e-8 * scale);
    CHECK(std::abs(radial.value - closed) <= 1e-8 * scale);
  }
}
