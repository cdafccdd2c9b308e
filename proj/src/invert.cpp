#include "slag/invert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "slag/errors.hpp"
#include "slag/sampling.hpp"

namespace slag {

void InversionHypotheses::validate() const {
  if (!(rho > 0)) throw ParameterError("inversion radius must be positive");
  if (!(kappa > 0 && kappa <= 1)) throw ParameterError("kappa must lie in (0, 1]");
  if (!(grad3_bound > 0 && grad3_bound <= 0.5)) throw ParameterError("grad3 bound must lie in (0, 1/2]");
}

namespace {

// Eigenvalues of the leading 2x2 block, ascending.
std::pair<double, double> leading_block_eigs(const SymMat3& h) {
  const double mean = 0.5 * (h.xx + h.yy);
  const double rad = std::hypot(0.5 * (h.xx - h.yy), h.xy);
  return {mean - rad, mean + rad};
}

}  // namespace

VerificationReport hypothesis_check(const SolutionHandle& f, const InversionHypotheses& hyp, int n_samples,
                                    std::uint64_t seed) {
  hyp.validate();
  VerificationReport rep("inversion-hypotheses");
  constexpr int kShells = 24;
  const int per_shell = std::max(8, n_samples / kShells);
  const auto radii = log_spaced(1e-3 * hyp.rho, hyp.rho, kShells);
  rep.samples = {{"shells", kShells}, {"per_shell", per_shell}, {"seed", seed}, {"rho", hyp.rho},
                 {"kappa", hyp.kappa}};

  struct Worst {
    double det_max = -std::numeric_limits<double>::infinity();
    double minor_lo = std::numeric_limits<double>::infinity();
    double minor_hi = -std::numeric_limits<double>::infinity();
    double grad3 = 0.0;
  };
  std::vector<Worst> per(kShells);
  parallel_for(kShells, [&](int s) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(s)));
    Worst w;
    for (int i = 0; i < per_shell; ++i) {
      Vec3 d;
      if (i == 0)
        d = {0, 0, 1};
      else if (i == 1)
        d = {0, 0, -1};
      else
        d = rng.unit_vector();
      const SymMat3 h = f.hessian(Point3(radii[s] * d));
      w.det_max = std::max(w.det_max, block_det(h) / std::pow(radii[s], 2));
      const auto [lo, hi] = leading_block_eigs(h);
      w.minor_lo = std::min(w.minor_lo, lo);
      w.minor_hi = std::max(w.minor_hi, hi);
      w.grad3 = std::max(w.grad3, std::hypot(h.xz, h.yz));
    }
    per[s] = w;
  });
  Worst all;
  for (const auto& w : per) {
    all.det_max = std::max(all.det_max, w.det_max);
    all.minor_lo = std::min(all.minor_lo, w.minor_lo);
    all.minor_hi = std::max(all.minor_hi, w.minor_hi);
    all.grad3 = std::max(all.grad3, w.grad3);
  }
  const double g0 = norm(f.gradient(Point3(0, 0, 0)));
  rep.check("gradient_at_origin", g0 <= 1e-12, g0, 1e-12);
  rep.check("det_negative", all.det_max < 0, all.det_max, 0.0);
  rep.check("block_lower_bound", all.minor_lo >= hyp.kappa, all.minor_lo, hyp.kappa);
  rep.check("block_upper_bound", all.minor_hi <= 1.0 / hyp.kappa, all.minor_hi, 1.0 / hyp.kappa);
  rep.check("grad3_bound", all.grad3 <= hyp.grad3_bound, all.grad3, hyp.grad3_bound);
  rep.margins = {{"block_lower", all.minor_lo - hyp.kappa},
                 {"block_upper", 1.0 / hyp.kappa - all.minor_hi},
                 {"grad3", hyp.grad3_bound - all.grad3}};
  rep.fitted = {{"max_det_over_r2", all.det_max}};
  return rep;
}

GradientInverter::GradientInverter(HandlePtr f, InversionHypotheses hyp) : f_(std::move(f)), hyp_(hyp) {
  hyp_.validate();
}

GradientInverter::Slice GradientInverter::slice(double t1, double t2, double xi, double start1,
                                                double start2) const {
  double x1 = start1, x2 = start2;
  auto residual = [&](const Vec3& g) { return std::hypot(g[0] - t1, g[1] - t2); };
  GradHess gh = f_->grad_hess(Point3(x1, x2, xi));
  double res = residual(gh.gradient);
  for (int iter = 0; iter < 100; ++iter) {
    const double floor = 1e-14 * (std::hypot(t1, t2) + std::hypot(x1, x2) + std::abs(xi)) + 1e-300;
    if (res <= floor * 1e-2) break;
    const SymMat3& h = gh.hessian;
    const double det = h.xx * h.yy - h.xy * h.xy;
    if (!(det > 0)) throw InversionError("ellipticity violated: horizontal block is not positive definite");
    const double g1 = gh.gradient[0] - t1, g2 = gh.gradient[1] - t2;
    const double s1 = (h.yy * g1 - h.xy * g2) / det, s2 = (h.xx * g2 - h.xy * g1) / det;
    bool accepted = false;
    double lambda = 1.0;
    for (int halving = 0; halving <= 60; ++halving, lambda *= 0.5) {
      const double n1 = x1 - lambda * s1, n2 = x2 - lambda * s2;
      const GradHess trial = f_->grad_hess(Point3(n1, n2, xi));
      const double rt = residual(trial.gradient);
      if (rt <= (1.0 - 0.5 * lambda) * res) {
        x1 = n1;
        x2 = n2;
        gh = trial;
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (res <= floor) break;
      throw InversionError("ellipticity violated: horizontal Newton stalled");
    }
  }
  Slice s;
  s.x = Point3(x1, x2, xi);
  s.y3 = gh.gradient[2];
  s.dy3 = schur_complement(gh.hessian);
  return s;
}

bool GradientInverter::polish(const Vec3& t, Vec3& x) const {
  const double limit = hyp_.solve_radius();
  GradHess gh = f_->grad_hess(Point3(x));
  double res = norm(gh.gradient - t);
  const double goal = 1e-13 * norm(t);
  for (int iter = 0; iter < 30 && res > goal; ++iter) {
    Vec3 step;
    try {
      step = solve(gh.hessian.to_mat(), gh.gradient - t);
    } catch (const GraphConditionError&) {
      return false;
    }
    bool improved = false;
    double lambda = 1.0;
    for (int h = 0; h < 30; ++h, lambda *= 0.5) {
      const Vec3 trial = x - lambda * step;
      if (std::abs(trial[2]) > limit) continue;
      const GradHess gt = f_->grad_hess(Point3(trial));
      const double rt = norm(gt.gradient - t);
      if (rt < res) {
        x = trial;
        gh = gt;
        res = rt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return res <= goal;
}

Point3 GradientInverter::invert(const Vec3& t, const Point3* hint) const {
  if (t[0] == 0.0 && t[1] == 0.0 && t[2] == 0.0) return Point3(0, 0, 0);
  const double limit = hyp_.solve_radius();
  if (hint) {
    Vec3 x = hint->vec();
    if (polish(t, x)) return Point3(x);
  }
  Slice lo = slice(t[0], t[1], -limit, t[0], t[1]);
  Slice hi = slice(t[0], t[1], limit, lo.x.x1, lo.x.x2);
  if (!(lo.y3 >= t[2] && t[2] >= hi.y3)) throw InversionError("target outside verified image");
  const double scale = std::max(norm(t), 1e-300);
  Slice cur = std::abs(lo.y3 - t[2]) < std::abs(hi.y3 - t[2]) ? lo : hi;
  double a = -limit, b = limit;  // y3(a) >= t3 >= y3(b)
  double prev_res = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 400; ++iter) {
    const double r = cur.y3 - t[2];
    if (std::abs(r) <= 1e-15 * scale) break;
    if (r > 0)
      a = cur.x.x3;
    else
      b = cur.x.x3;
    if (b - a <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b))) break;
    double next = cur.x.x3 - r / cur.dy3;
    const bool newton_ok = cur.dy3 < 0 && next > a && next < b && std::abs(r) <= 0.5 * prev_res;
    if (!newton_ok) next = 0.5 * (a + b);
    if (next == cur.x.x3) break;
    prev_res = std::abs(r);
    cur = slice(t[0], t[1], next, cur.x.x1, cur.x.x2);
  }
  Vec3 x = cur.x.vec();
  polish(t, x);
  const double final_res = norm(f_->gradient(Point3(x)) - t);
  if (!(final_res <= 1e-10 * std::max(1.0, norm(t))))
    throw InversionError("inversion residual above tolerance");
  return Point3(x);
}

Point3 invert_point(const HandlePtr& f, const InversionHypotheses& hyp, const Vec3& target) {
  return GradientInverter(f, hyp).invert(target);
}

InverseGraphHandle::InverseGraphHandle(HandlePtr f, InversionHypotheses hyp, double image_radius)
    : inverter_(std::move(f), hyp), radius_(image_radius) {
  if (!(radius_ > 0)) throw InversionError("inverse graph has an empty verified image");
}

Point3 InverseGraphHandle::preimage(const Point3& t) const { return inverter_.invert(t.vec()); }

double InverseGraphHandle::value(const Point3& t) const {
  const Point3 x = preimage(t);
  return forward()->value(x) - dot(x.vec(), t.vec());
}

Vec3 InverseGraphHandle::gradient(const Point3& t) const { return -preimage(t).vec(); }

namespace {

SymMat3 negated_inverse(const SymMat3& h) {
  try {
    return -1.0 * block_inverse(h);
  } catch (const GraphConditionError&) {
    throw SingularPointError("Hessian undefined at singular point");
  }
}

}  // namespace

SymMat3 InverseGraphHandle::hessian(const Point3& t) const {
  if (t.x1 == 0.0 && t.x2 == 0.0 && t.x3 == 0.0) throw SingularPointError("Hessian undefined at singular point");
  return negated_inverse(forward()->hessian(preimage(t)));
}

GradHess InverseGraphHandle::grad_hess(const Point3& t) const {
  if (t.x1 == 0.0 && t.x2 == 0.0 && t.x3 == 0.0) throw SingularPointError("Hessian undefined at singular point");
  const Point3 x = preimage(t);
  return {-x.vec(), negated_inverse(forward()->hessian(x))};
}

double inverse_image_radius(const SolutionHandle& f, const InversionHypotheses& hyp, int n_dirs) {
  const double r = hyp.solve_radius();
  double least = std::numeric_limits<double>::infinity();
  for (const auto& d : fibonacci_sphere(n_dirs)) least = std::min(least, norm(f.gradient(Point3(r * d))));
  for (const Vec3& d : {Vec3{0, 0, 1}, Vec3{0, 0, -1}}) least = std::min(least, norm(f.gradient(Point3(r * d))));
  return 0.9 * least;
}

std::shared_ptr<const InverseGraphHandle> build_inverse_graph(HandlePtr f, InversionHypotheses hyp) {
  hyp.validate();
  const double radius = inverse_image_radius(*f, hyp);
  return std::make_shared<InverseGraphHandle>(std::move(f), hyp, radius);
}

namespace {

// Integral over [0, 1] of g(v^3) 3 v^2, which smooths the cube-root behaviour of the
// preimage near the singular point.
template <class G>
PathIntegral cubic_substitution_integral(G&& g, double tol) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0, l1 = 0.0;
  auto integrand = [&](double v) { return g(v * v * v) * 3.0 * v * v; };
  const double value = gauss_kronrod<double, 15>::integrate(integrand, 0.0, 1.0, 12, 1e-11, &err, &l1);
  if (!(err <= tol)) throw ToleranceError("potential quadrature did not reach the requested tolerance");
  return {value, err};
}

}  // namespace

PathIntegral reconstruct_potential(const InverseGraphHandle& h, const Vec3& t, double tol) {
  if (norm(t) == 0.0) return {0.0, 0.0};
  return cubic_substitution_integral([&](double s) { return -dot(h.preimage(Point3(s * t)).vec(), t); }, tol);
}

PathIntegral reconstruct_potential_two_leg(const InverseGraphHandle& h, const Vec3& t, double tol) {
  const Vec3 corner{t[0], t[1], 0.0};
  const Vec3 rise{0.0, 0.0, t[2]};
  PathIntegral out;
  if (norm(corner) > 0) {
    const auto leg = cubic_substitution_integral(
        [&](double s) { return -dot(h.preimage(Point3(s * corner)).vec(), corner); }, 0.5 * tol);
    out.value += leg.value;
    out.error += leg.error;
  }
  if (t[2] != 0.0) {
    const auto leg = cubic_substitution_integral(
        [&](double s) { return -dot(h.preimage(Point3(corner + s * rise)).vec(), rise); }, 0.5 * tol);
    out.value += leg.value;
    out.error += leg.error;
  }
  return out;
}

VerificationReport inversion_properties(const InverseGraphHandle& h, int n_points, std::uint64_t seed) {
  VerificationReport rep("inversion");
  const auto& inv = h.inverter();
  const auto& f = *inv.forward();
  const auto& hyp = inv.hypotheses();
  const double big_r = hyp.solve_radius();
  rep.samples = {{"points", n_points}, {"seed", seed}, {"solve_radius", big_r}, {"image_radius", h.valid_radius()}};

  constexpr int kChunks = 16;
  struct Acc {
    double x_err = 0.0, y_err = 0.0;
    int used = 0;
    double expansion = std::numeric_limits<double>::infinity();
    double max_diff = -std::numeric_limits<double>::infinity();
  };
  std::vector<Acc> acc(kChunks);
  const double k_over = hyp.kappa / std::sqrt(2.0);
  parallel_for(kChunks, [&](int c) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(c)));
    Acc a;
    for (int i = c; i < n_points; i += kChunks) {
      // Round trip from a target in the image ball: t -> x -> Df(x) -> x again. The
      // image error is relative to the image radius.
      {
        const Vec3 t = rng.in_ball(0.999 * h.valid_radius());
        const Point3 x = inv.invert(t);
        const Vec3 y = f.gradient(x);
        const Point3 again = inv.invert(y);
        a.x_err = std::max(a.x_err, norm(again.vec() - x.vec()));
        a.y_err = std::max(a.y_err, norm(y - t) / h.valid_radius());
        ++a.used;
      }
      const Vec3 x = rng.in_ball(big_r);
      // Expansion of (f1, f2, x3).
      Vec3 q = rng.in_ball(big_r);
      if (i % 2 == 1) {
        q = x + (big_r * std::pow(10.0, rng.uniform(-5.0, -1.0))) * rng.unit_vector();
        if (norm(q) > big_r) q = (big_r / norm(q)) * q;
      }
      const Vec3 gx = f.gradient(Point3(x)), gq = f.gradient(Point3(q));
      const Vec3 px{gx[0], gx[1], x[2]}, pq{gq[0], gq[1], q[2]};
      const double d = norm(x - q);
      if (d > 0) a.expansion = std::min(a.expansion, norm(px - pq) / d);
    }
    // Monotonicity of y3 along vertical lines with random horizontal targets.
    const int lines = std::max(1, n_points / 100 / kChunks + 1);
    for (int l = 0; l < lines; ++l) {
      const Vec3 dir = rng.unit_vector();
      const double r = 0.5 * h.valid_radius() * rng.uniform();
      const double t1 = r * dir[0], t2 = r * dir[1];
      constexpr int kSteps = 41;
      double s1 = t1, s2 = t2;
      double prev = 0.0;
      for (int k = 0; k < kSteps; ++k) {
        const double xi = -big_r + 2.0 * big_r * k / (kSteps - 1);
        const auto s = inv.slice(t1, t2, xi, s1, s2);
        s1 = s.x.x1;
        s2 = s.x.x2;
        if (k > 0) a.max_diff = std::max(a.max_diff, s.y3 - prev);
        prev = s.y3;
      }
    }
    acc[c] = a;
  });
  Acc all;
  for (const auto& a : acc) {
    all.x_err = std::max(all.x_err, a.x_err);
    all.y_err = std::max(all.y_err, a.y_err);
    all.used += a.used;
    all.expansion = std::min(all.expansion, a.expansion);
    all.max_diff = std::max(all.max_diff, a.max_diff);
  }
  rep.fitted = {{"round_trip_points", all.used},
                {"max_preimage_error", all.x_err},
                {"max_image_error", all.y_err},
                {"min_expansion", all.expansion},
                {"max_vertical_difference", all.max_diff}};
  rep.check("round_trip_preimage", all.x_err <= 1e-8, all.x_err, 1e-8);
  rep.check("round_trip_image", all.y_err <= 1e-8, all.y_err, 1e-8);
  rep.check("expansion", all.expansion >= k_over, all.expansion, k_over);
  rep.check("vertical_monotone", all.max_diff < 0, all.max_diff, 0.0);
  return rep;
}

}  // namespace slag
