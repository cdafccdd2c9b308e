#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "slag/analysis.hpp"
#include "slag/cksolve.hpp"
#include "slag/errors.hpp"
#include "slag/sampling.hpp"

namespace slag {

double FamilyParams::gamma() const { return 0.25 * (std::numbers::pi / 2 - std::abs(theta)); }

void FamilyParams::validate(bool family) const {
  if (m < 2) throw ParameterError("m must be at least 2");
  if (!(std::abs(theta) < std::numbers::pi / 2)) throw ParameterError("theta must lie in (-pi/2, pi/2)");
  if (family && !(eps > 0 && eps < gamma())) throw ParameterError("eps must lie in (0, gamma)");
}

namespace {

// The eigenvalue near zero from det / (product of the two others); keeps relative
// accuracy when it is far below machine epsilon times the others.
double small_eigenvalue(const SymMat3& h, const EigenData& e) {
  return block_det(h) / (e.lambda[1] * e.lambda[2]);
}

// Fibonacci directions turned by a seeded rotation, plus both poles of the x3 axis.
std::vector<Vec3> seeded_directions(int n, std::uint64_t seed) {
  Rng rng(seed);
  const Mat3 q = rotation(rng.unit_vector(), rng.uniform(0, 2 * std::numbers::pi));
  auto dirs = fibonacci_sphere(n);
  for (auto& d : dirs) d = q * d;
  dirs.push_back({0, 0, 1});
  dirs.push_back({0, 0, -1});
  return dirs;
}

struct Screen {
  double phase_tol;
  bool require_negative;
};

bool passes_screen(const SolutionHandle& u, double r, const Screen& s, std::uint64_t seed) {
  const auto dirs = seeded_directions(200, seed);
  for (double frac : {1.0, 0.8, 0.6, 0.4, 0.2, 0.05}) {
    for (const auto& d : dirs) {
      const SymMat3 h = u.hessian(Point3(frac * r * d));
      if (!(std::abs(sigma2(h) - 1.0) <= s.phase_tol)) return false;
      const auto e = eig3_sym(h);
      if (s.require_negative && !(small_eigenvalue(h, e) < 0)) return false;
      if (std::hypot(h.xz, h.yz) > 0.4) return false;
      const double mean = 0.5 * (h.xx + h.yy), rad = std::hypot(0.5 * (h.xx - h.yy), h.xy);
      if (mean - rad < 0.6 || mean + rad > 1.6) return false;
    }
  }
  return true;
}

}  // namespace

VerificationReport verify_property_2_1(const SeedParams& p, int cap) {
  VerificationReport rep("property-2.1");
  const int m = p.m;
  const SeedBundle b = build_components(p, cap);
  rep.samples = {{"m", m}, {"eps", format_rational(p.eps)}, {"cap", cap}};

  bool closed_form = b.a[0] == -1;
  for (int j = 1; j <= m; ++j) {
    mpz_class num = 1, den = 1;
    for (int t = 0; t < 2 * j; ++t) num *= 2 * m - t;
    for (int t = 1; t <= j; ++t) den *= 4 * t * t;
    num <<= j;
    Rational want(num, den);
    want.canonicalize();
    if (j % 2 == 0) want = -want;
    closed_form = closed_form && b.a[j] == want;
  }
  Json a = Json::array();
  for (const auto& c : b.a) a.push_back(format_rational(c));

  const bool h_harmonic = tilde_laplacian(b.h).is_zero();
  const bool H_harmonic = tilde_laplacian(b.H).is_zero();
  const bool balance = (tilde_laplacian(b.Q) + hessian_sigma2(b.h)).is_zero();
  TruncatedSeries one(cap);
  one.set({0, 0, 0}, 1);
  const auto order = low_order(hessian_sigma2(b.P) - one);
  const int measured = order ? *order : cap + 1;

  rep.fitted = {{"a", a}, {"sigma2_residual_order", measured}, {"P_degree", b.P.degree()}};
  rep.check("a_closed_form", closed_form);
  rep.check("tilde_laplacian_h_zero", h_harmonic);
  rep.check("tilde_laplacian_H_zero", H_harmonic);
  rep.check("Q_balances_sigma2_h", balance);
  rep.check("sigma2_residual_order", measured >= 3 * m - 3, measured, 3 * m - 3);
  rep.check("P_degree", b.P.degree() == 2 * m, b.P.degree(), 2 * m);
  return rep;
}

VerificationReport verify_ck_solution(const TruncatedSeries& u, const TruncatedSeries& P, int m) {
  VerificationReport rep("ck-solve");
  const int cap = u.cap();
  const auto res = residual_order(u);
  const int measured = res ? *res : cap + 1;
  const auto agree = low_order(u - P);
  const int agreement = agree ? *agree : cap + 1;
  rep.samples = {{"m", m}, {"cap", cap}};
  rep.fitted = {{"residual_order", measured}, {"agreement_order_with_P", agreement}};
  rep.check("residual_order", measured > cap - 2, measured, cap - 2);
  rep.check("agreement_order", agreement >= 2 * m, agreement, 2 * m);
  return rep;
}

double find_valid_radius(const SolutionHandle& u, double phase_tol, std::uint64_t seed, bool require_negative) {
  const Screen s{phase_tol, require_negative};
  for (double r = std::min(0.5, u.valid_radius()); r >= 0.02; r -= 0.01) {
    r = std::round(r * 100) / 100;
    if (passes_screen(u, r, s, seed)) return r;
  }
  throw PipelineError("series", "no radius passes the validity screens");
}

VerificationReport verify_property_2_2(const SolutionHandle& u, int m, int shells, int dirs, std::uint64_t seed,
                                       double eps) {
  VerificationReport rep("property-2.2");
  const auto radii = log_spaced(1e-3, u.valid_radius(), shells);
  const auto directions = seeded_directions(dirs, seed);
  rep.samples = {{"shells", shells}, {"dirs", dirs}, {"r_min", radii.front()}, {"r_max", radii.back()},
                 {"seed", seed}};
  const int q = 2 * m - 2;
  struct Shell {
    double dev12 = 0, abs3_max = 0, ratio_min = std::numeric_limits<double>::infinity(), ratio_max = 0;
    bool negative = true;
  };
  std::vector<Shell> out(radii.size());
  parallel_for(static_cast<int>(radii.size()), [&](int i) {
    Shell s;
    const double r = radii[i];
    for (const auto& d : directions) {
      const SymMat3 h = u.hessian(Point3(r * d));
      const auto e = eig3_sym(h);
      const double l3 = small_eigenvalue(h, e);
      s.dev12 = std::max({s.dev12, std::abs(e.lambda[1] - 1.0), std::abs(e.lambda[2] - 1.0)});
      s.abs3_max = std::max(s.abs3_max, std::abs(l3));
      s.negative = s.negative && l3 < 0;
      const double ratio = -l3 / std::pow(r, q);
      s.ratio_min = std::min(s.ratio_min, ratio);
      s.ratio_max = std::max(s.ratio_max, ratio);
    }
    out[i] = s;
  });
  std::vector<double> lr, l12, l3;
  bool negative = true;
  double delta1 = std::numeric_limits<double>::infinity(), delta2 = 0;
  Json table = Json::array();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    lr.push_back(std::log(radii[i]));
    l12.push_back(std::log(out[i].dev12));
    l3.push_back(std::log(out[i].abs3_max));
    negative = negative && out[i].negative;
    delta1 = std::min(delta1, out[i].ratio_min);
    delta2 = std::max(delta2, out[i].ratio_max);
    table.push_back({radii[i], out[i].dev12, out[i].abs3_max, out[i].ratio_min, out[i].ratio_max});
  }
  const auto f12 = fit_line(lr, l12), f3 = fit_line(lr, l3);
  rep.fitted = {{"slope_lambda12", f12.slope}, {"slope_lambda3", f3.slope}, {"delta1", delta1}, {"delta2", delta2}};
  rep.margins = {{"shell_table_columns", {"r", "max|lambda12-1|", "max|lambda3|", "min ratio", "max ratio"}},
                 {"shell_table", table}};
  rep.check("lambda3_negative", negative);
  rep.check("slope_lambda12", std::abs(f12.slope - (m - 1)) <= 0.2, f12.slope, m - 1);
  rep.check("slope_lambda3", std::abs(f3.slope - q) <= 0.2, f3.slope, q);
  rep.check("band_positive", negative && delta1 > 0 && std::isfinite(delta2), Json::array({delta1, delta2}));
  if (eps > 0) {
    // Leading axis behaviour -2m(2m-1) eps x3^(2m-2).
    const double t = 1e-3 * u.valid_radius() / 0.1;
    const SymMat3 h = u.hessian(Point3(0, 0, t));
    const double got = small_eigenvalue(h, eig3_sym(h));
    const double want = -2.0 * m * (2 * m - 1) * eps * std::pow(t, q);
    rep.fitted["axis_ratio"] = got / want;
    rep.check("axis_leading_term", std::abs(got / want - 1) <= 0.05, got / want, 1.0);
  }
  return rep;
}

VerificationReport verify_property_2_4(const SolutionHandle& u, int m, int shells, int dirs, std::uint64_t seed,
                                       double eps) {
  VerificationReport rep("property-2.4");
  const auto radii = log_spaced(1e-3, u.valid_radius(), shells);
  const auto directions = seeded_directions(dirs, seed);
  rep.samples = {{"shells", shells}, {"dirs", dirs}, {"r_min", radii.front()}, {"r_max", radii.back()},
                 {"seed", seed}};
  std::vector<double> lo(radii.size()), hi(radii.size());
  parallel_for(static_cast<int>(radii.size()), [&](int i) {
    const double r = radii[i];
    double a = std::numeric_limits<double>::infinity(), b = 0;
    for (const auto& d : directions) {
      const double g = norm(u.gradient(Point3(r * d)));
      a = std::min(a, g / std::pow(r, 2 * m - 1));
      b = std::max(b, g / r);
    }
    lo[i] = a;
    hi[i] = b;
  });
  const double delta3 = *std::min_element(lo.begin(), lo.end());
  const double delta4 = *std::max_element(hi.begin(), hi.end());
  const double spread = delta4 / *std::min_element(hi.begin(), hi.end());
  rep.fitted = {{"delta3", delta3}, {"delta4", delta4}, {"upper_ratio_spread", spread}};
  rep.check("lower_bound_positive", delta3 > 0, delta3, 0.0);
  rep.check("upper_bound_bounded", std::isfinite(delta4) && spread < 2.0, spread, 2.0);
  if (eps > 0) {
    const double t = 1e-2 * u.valid_radius();
    const double got = norm(u.gradient(Point3(0, 0, t)));
    const double want = 2.0 * m * eps * std::pow(t, 2 * m - 1);
    rep.fitted["axis_ratio"] = got / want;
    rep.check("axis_leading_term", std::abs(got / want - 1) <= 0.05, got / want, 1.0);
  }
  return rep;
}

SeriesSolution build_series_solution(int m, const SeriesOptions& opt) {
  if (m < 2) throw ParameterError("m must be at least 2");
  if (opt.solve_cap < 2 * m) throw ParameterError("solve cap must be at least 2m");
  SeriesSolution out;
  out.cap = opt.solve_cap;
  Rational eps = opt.eps0 < 0 ? Rational(1, 40 * m * m) : opt.eps0;
  Json trail = Json::array();
  for (int halving = 0; halving <= opt.max_halvings; ++halving) {
    SeedParams params{m, eps, opt.eta};
    params.validate();
    const auto P = build_P(params, opt.solve_cap);
    const auto u = ck_solve(CauchyData::from_series(P), opt.solve_cap);
    const double eps_d = eps.get_d();
    double radius = 0.0;
    try {
      const SeriesHandle probe(u, 0.5);
      radius = find_valid_radius(probe, opt.phase_tol, opt.seed, opt.search_eps);
    } catch (const PipelineError&) {
      trail.push_back({{"eps", format_rational(eps)}, {"radius", nullptr}, {"pass", false}});
      if (!opt.search_eps) throw;
      eps /= 2;
      eps.canonicalize();
      continue;
    }
    auto series = std::make_shared<SeriesHandle>(u, radius);
    auto rep = verify_property_2_2(*series, m, opt.shells, opt.dirs, opt.seed, eps_d);
    const bool ok = rep.failed_checks().empty() ||
                    std::find(rep.failed_checks().begin(), rep.failed_checks().end(), "lambda3_negative") ==
                        rep.failed_checks().end();
    trail.push_back({{"eps", format_rational(eps)}, {"radius", radius}, {"pass", ok}});
    if (ok || !opt.search_eps) {
      out.params = params;
      out.halvings = halving;
      out.u = u;
      const auto order = low_order(u - P);
      out.agreement_order = order ? *order : opt.solve_cap + 1;
      out.radius = radius;
      out.series = series;
      out.scaled = rescale(series, radius);
      out.report = rep;
      out.report.samples["eps"] = format_rational(eps);
      out.report.samples["solve_cap"] = opt.solve_cap;
      out.report.fitted["r_m"] = radius;
      out.report.fitted["agreement_order"] = out.agreement_order;
      out.report.fitted["eps_trail"] = trail;
      return out;
    }
    eps /= 2;
    eps.canonicalize();
  }
  throw PipelineError("series", "no eps found after the allowed halvings");
}

}  // namespace slag
