#include <doctest.h>

#include <cmath>
#include <numbers>

#include "slag/analysis.hpp"
#include "slag/errors.hpp"
#include "slag/sampling.hpp"

using namespace slag;

namespace {

const SeriesSolution& series_m2() {
  static const SeriesSolution s = build_series_solution(2, SeriesOptions{});
  return s;
}

const SingularSolution& singular_m2(double theta) {
  static const SingularSolution zero = build_singular_solution({2, 0.0, 0.1}, series_m2(), 42);
  static const SingularSolution tilted = build_singular_solution({2, 0.4, 0.1}, series_m2(), 42);
  return theta == 0.0 ? zero : tilted;
}

// u = |x|^2 / 2 on the ball of the given radius.
HandlePtr half_square(double radius) {
  TruncatedSeries s(4);
  s.set({2, 0, 0}, Rational(1, 2));
  s.set({0, 2, 0}, Rational(1, 2));
  s.set({0, 0, 2}, Rational(1, 2));
  return std::make_shared<SeriesHandle>(s, radius);
}

}  // namespace

TEST_CASE("family parameter validation") {
  CHECK_THROWS_AS((FamilyParams{1, 0.0, 0.1}.validate(false)), ParameterError);
  CHECK_THROWS_AS((FamilyParams{2, 1.6, 0.1}.validate(false)), ParameterError);
  CHECK_THROWS_AS((FamilyParams{2, 0.0, 0.0}.validate(true)), ParameterError);
  CHECK_THROWS_AS((FamilyParams{2, 1.0, 0.2}.validate(true)), ParameterError);
  CHECK_NOTHROW((FamilyParams{2, 1.0, 0.1}.validate(true)));
  CHECK(FamilyParams{2, 0.0, 0.1}.gamma() == doctest::Approx(std::numbers::pi / 8));
}

TEST_CASE("series solution satisfies the eigenvalue asymptotics") {
  const auto& s = series_m2();
  CHECK(s.report.pass());
  CHECK(s.agreement_order >= 4);
  CHECK(s.radius > 0);
  CHECK(std::abs(s.report.fitted["slope_lambda12"].get<double>() - 1) <= 0.2);
  CHECK(std::abs(s.report.fitted["slope_lambda3"].get<double>() - 2) <= 0.2);
  const auto grad = verify_property_2_4(*s.series, 2, 20, 32, 7, s.params.eps.get_d());
  CHECK(grad.pass());
}

TEST_CASE("the eps = 0 seed fails strict negativity") {
  SeriesOptions opt;
  opt.eps0 = 0;
  opt.search_eps = false;
  const auto s = build_series_solution(2, opt);
  CHECK_FALSE(s.report.pass());
  const auto failed = s.report.failed_checks();
  CHECK(std::find(failed.begin(), failed.end(), "lambda3_negative") != failed.end());
}

TEST_CASE("solve cap below 2m is rejected") {
  SeriesOptions opt;
  opt.solve_cap = 3;
  CHECK_THROWS_AS(build_series_solution(2, opt), ParameterError);
}

TEST_CASE("singular solution keeps the target phase") {
  for (double theta : {0.0, 0.4}) {
    const auto& s = singular_m2(theta);
    CHECK(s.report.pass());
    CHECK(s.negated == (theta > 0));
    const auto phase = phase_conservation(*s.handle, theta, 300, 9);
    CHECK(phase.pass());
  }
}

TEST_CASE("hoelder exponent of the singular solution and of a smooth control") {
  const auto rep = holder_exponent(*singular_m2(0.0).handle, 2, 3);
  CHECK(rep.pass());
  CHECK(std::abs(rep.fitted["axis_exponent"].get<double>() - 1.0 / 3) <= 0.02);
  // Du = x is Lipschitz with constant one at every scale.
  const auto lip = holder_exponent(*half_square(1.0), 2, 3, 1.0);
  CHECK(lip.pass());
  CHECK(lip.fitted["axis_exponent"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(lip.fitted["seminorm"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("metric of the quadratic control") {
  const MssPoint p = mss_from_potential(*half_square(1.0), Point3(0.1, -0.2, 0.3));
  CHECK(p.U[0] == doctest::Approx(0.1));
  CHECK(p.U[2] == doctest::Approx(0.3));
  CHECK(p.metric.xx == doctest::Approx(2.0));
  CHECK(p.metric.xy == doctest::Approx(0.0));
  CHECK(p.metric.det() == doctest::Approx(8.0));
  CHECK(p.sqrt_det == doctest::Approx(std::sqrt(8.0)));
  CHECK(p.flux.yy == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("minimal surface checks on the singular solution") {
  const auto rep = verify_mss(*singular_m2(0.0).handle, 2, 100, 5);
  CHECK(rep.pass());
  CHECK(rep.fitted["det_relative_error"].get<double>() <= 1e-8);
}

TEST_CASE("sobolev profile at a reduced sample size") {
  SobolevOptions opt;
  opt.samples_per_shell = 20000;
  const auto rep = sobolev_profile(singular_m2(0.0), opt);
  CHECK(rep.pass());
  CHECK(std::abs(rep.fitted["p_star_measured"].get<double>() - 2.5) <= 0.05);
}

TEST_CASE("smooth family hessian at the origin") {
  const auto fam = build_smooth_family({2, 0.0, 0.1}, series_m2(), 42);
  CHECK(fam.report.pass());
  const auto rep = verify_smooth_family(fam, 200, 11);
  CHECK(rep.fitted["lambda_max_tan_eps"].get<double>() == doctest::Approx(1.0).epsilon(0.05));
  const auto failed = rep.failed_checks();
  CHECK(std::find(failed.begin(), failed.end(), "interior_hessian_maximum") == failed.end());
  CHECK(std::find(failed.begin(), failed.end(), "phase.phase_constant") == failed.end());
}

TEST_CASE("test field jacobians match central differences") {
  Rng rng(17);
  for (const auto& id : test_field_ids()) {
    const TestField f = test_field(id);
    for (int n = 0; n < 20; ++n) {
      const Vec3 y = rng.in_ball(0.95);
      const Mat3 jac = f.jacobian(y);
      const double h = 1e-6;
      for (int j = 0; j < 3; ++j) {
        Vec3 a = y, b = y;
        a[j] += h;
        b[j] -= h;
        const Vec3 d = (1 / (2 * h)) * (f.value(a) - f.value(b));
        for (int i = 0; i < 3; ++i) CHECK(jac[i][j] == doctest::Approx(d[i]).epsilon(1e-6).scale(1.0));
      }
    }
    CHECK(norm(f.value({0.6, 0.0, 0.8})) <= 1e-12);
  }
  CHECK_THROWS_AS(test_field("bump-z"), ParameterError);
}

TEST_CASE("weak residual of the quadratic control") {
  // The flux is sqrt(2) I, so R(delta) = -sqrt(2) (1 - delta^2)^3 div(p) |B_delta| for the
  // linear part p of each field, whose divergence is constant.
  const double div[] = {4, 2, 2};
  const auto h = half_square(1.0);
  const auto& ids = test_field_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const TestField f = test_field(ids[i]);
    CHECK(std::abs(weak_residual_direct(*h, f, 0.0, {})) <= 1e-10);
    for (double d : {0.1, 0.3}) {
      const double want = -std::sqrt(2.0) * std::pow(1 - d * d, 3) * div[i] * 4.0 / 3 * std::numbers::pi * d * d * d;
      CHECK(weak_residual_direct(*h, f, d, {}) == doctest::Approx(want).epsilon(1e-9));
    }
  }
}

TEST_CASE("preimage quadrature agrees with the direct one away from the origin") {
  const auto& s = singular_m2(0.0);
  const TestField f = test_field("bump-b");
  const double a = weak_residual_value(s, f, 0.2, {});
  // The direct rule only resolves the equatorial layer of width tau^2 approximately.
  const double b = weak_residual_direct(*s.handle, f, 0.2, {32, 32, 32});
  CHECK(a == doctest::Approx(b).epsilon(1e-4));
}
