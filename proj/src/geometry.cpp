#include "slag/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "slag/errors.hpp"
#include "slag/sampling.hpp"

namespace slag {

double sigma2(const SymMat3& h) {
  return h.xx * h.yy + h.xx * h.zz + h.yy * h.zz - h.xy * h.xy - h.xz * h.xz - h.yz * h.yz;
}

double EigenData::max_abs() const { return std::max(std::abs(lambda[0]), std::abs(lambda[2])); }

std::array<double, 3> eig3_sym_ql(const SymMat3& h) {
  // Givens rotation in the (1, 2) plane zeroing the (0, 2) entry gives a tridiagonal matrix.
  double d[3], e[3] = {0.0, 0.0, 0.0};
  const double r = std::hypot(h.xy, h.xz);
  if (r == 0.0) {
    d[0] = h.xx;
    d[1] = h.yy;
    d[2] = h.zz;
    e[0] = 0.0;
    e[1] = h.yz;
  } else {
    const double c = h.xy / r, s = h.xz / r;
    d[0] = h.xx;
    e[0] = r;
    d[1] = c * c * h.yy + 2 * c * s * h.yz + s * s * h.zz;
    d[2] = s * s * h.yy - 2 * c * s * h.yz + c * c * h.zz;
    e[1] = c * s * (h.zz - h.yy) + (c * c - s * s) * h.yz;
  }
  // Implicit QL with Wilkinson-style shifts; e[i] couples d[i] and d[i + 1].
  const int n = 3;
  for (int l = 0; l < n; ++l) {
    for (int iter = 0;; ++iter) {
      int m = l;
      for (; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m == l) break;
      if (iter == 64) break;  // converged to rounding in practice long before this
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double rr = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(rr, g));
      double s = 1.0, c = 1.0, p = 0.0;
      int i = m - 1;
      bool underflow = false;
      for (; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        rr = std::hypot(f, g);
        e[i + 1] = rr;
        if (rr == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / rr;
        c = g / rr;
        g = d[i + 1] - p;
        rr = (d[i] - g) * s + 2.0 * c * b;
        p = s * rr;
        d[i + 1] = g + p;
        g = c * rr - b;
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
  std::array<double, 3> out{d[0], d[1], d[2]};
  std::sort(out.begin(), out.end());
  return out;
}

EigenData eig3_sym(const SymMat3& h) {
  std::array<double, 3> lam{};
  const double off = h.xy * h.xy + h.xz * h.xz + h.yz * h.yz;
  if (off == 0.0) {
    lam = {h.xx, h.yy, h.zz};
    std::sort(lam.begin(), lam.end());
  } else {
    const double q = h.trace() / 3.0;
    const double p2 = (h.xx - q) * (h.xx - q) + (h.yy - q) * (h.yy - q) + (h.zz - q) * (h.zz - q) + 2.0 * off;
    const double p = std::sqrt(p2 / 6.0);
    const SymMat3 b = (1.0 / p) * (h - SymMat3::diag(q, q, q));
    const double rdet = 0.5 * b.det();
    // Near |rdet| = 1 two eigenvalues merge and acos loses half the digits.
    if (1.0 - std::abs(rdet) < 1e-3) {
      lam = eig3_sym_ql(h);
    } else {
      const double phi = std::acos(std::clamp(rdet, -1.0, 1.0)) / 3.0;
      const double hi = q + 2.0 * p * std::cos(phi);
      const double lo = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
      lam = {lo, 3.0 * q - hi - lo, hi};
      std::sort(lam.begin(), lam.end());
    }
  }
  EigenData out;
  out.lambda = lam;
  for (int i = 0; i < 3; ++i) {
    out.angle[i] = std::atan(lam[i]);
    out.phase += out.angle[i];
  }
  return out;
}

double isolated_eig_taylor(const SymMat3& h) {
  if ((h - SymMat3::diag(1, 1, 0)).frobenius() >= 0.25)
    throw ParameterError("isolated eigenvalue proxy needs a matrix within 1/4 of diag(1, 1, 0)");
  return h.zz - h.xz * h.xz - h.yz * h.yz;
}

void RotationAngles::validate() const {
  for (double b : {b1, b2, b3})
    if (!(b > -std::numbers::pi && b <= std::numbers::pi)) throw ParameterError("rotation angle outside (-pi, pi]");
}

MapJet GraphMap::eval(const Point3& p) const {
  MapJet j;
  const auto gh = u_->grad_hess(p);
  j.x = p.vec();
  j.y = gh.gradient;
  j.dx = identity3();
  j.dy = gh.hessian.to_mat();
  j.potential = u_->value(p);
  return j;
}

RotatedMap::RotatedMap(MapPtr source, RotationAngles angles) : source_(std::move(source)), angles_(angles) {
  angles_.validate();
  for (int j = 0; j < 3; ++j) {
    cos_[j] = std::cos(angles_[j]);
    sin_[j] = std::sin(angles_[j]);
    // Exact values at the quarter turns keep the inversion rotation free of 1e-17 residue.
    if (angles_[j] == 0.0) cos_[j] = 1.0, sin_[j] = 0.0;
    if (angles_[j] == std::numbers::pi / 2) cos_[j] = 0.0, sin_[j] = 1.0;
    if (angles_[j] == -std::numbers::pi / 2) cos_[j] = 0.0, sin_[j] = -1.0;
  }
}

MapJet RotatedMap::eval(const Point3& p) const {
  const MapJet s = source_->eval(p);
  MapJet r;
  r.potential = s.potential;
  for (int j = 0; j < 3; ++j) {
    const double c = cos_[j], sn = sin_[j];
    r.x[j] = c * s.x[j] + sn * s.y[j];
    r.y[j] = -sn * s.x[j] + c * s.y[j];
    for (int k = 0; k < 3; ++k) {
      r.dx[j][k] = c * s.dx[j][k] + sn * s.dy[j][k];
      r.dy[j][k] = -sn * s.dx[j][k] + c * s.dy[j][k];
    }
    r.potential += -sn * sn * s.x[j] * s.y[j] + 0.5 * sn * c * (s.y[j] * s.y[j] - s.x[j] * s.x[j]);
  }
  return r;
}

RestrictedMap::RestrictedMap(MapPtr source, double radius) : source_(std::move(source)), radius_(radius) {
  if (!(radius_ > 0 && radius_ <= source_->domain_radius()))
    throw ParameterError("restricted radius must lie in (0, source radius]");
}

MapPtr restrict_domain(MapPtr source, double radius) {
  return std::make_shared<RestrictedMap>(std::move(source), radius);
}

MapPtr graph_map(HandlePtr u) { return std::make_shared<GraphMap>(std::move(u)); }

MapPtr rotate_graph(MapPtr source, RotationAngles angles) {
  return std::make_shared<RotatedMap>(std::move(source), angles);
}

namespace {

Pushforward pushforward_from(const MapJet& j) {
  Pushforward out;
  out.condition = condition_number(j.dx);
  if (!(out.condition < 1e8)) throw GraphConditionError("graph condition fails: dx/dp is singular");
  const Mat3 h = j.dy * inverse(j.dx);
  out.hessian = SymMat3::from_mat(h);
  out.asymmetry = asymmetry(h) / std::max(1.0, frobenius(h));
  if (!(out.asymmetry < 1e-8)) throw GraphConditionError("pushforward Hessian is not symmetric");
  return out;
}

}  // namespace

Pushforward pushforward_hessian(const LagrangianMap& map, const Point3& p) { return pushforward_from(map.eval(p)); }

VerificationReport check_graph_condition(const LagrangianMap& map, int n_pairs, std::uint64_t seed,
                                         const LagrangianMap* reference, double floor) {
  VerificationReport rep("graph-condition");
  const double radius = map.domain_radius();
  rep.samples = {{"pairs", n_pairs}, {"seed", seed}, {"radius", radius}};
  constexpr int kChunks = 16;
  std::vector<double> chunk_min(kChunks, std::numeric_limits<double>::infinity());
  parallel_for(kChunks, [&](int c) {
    Rng rng(split_seed(seed, static_cast<std::uint64_t>(c)));
    for (int i = c; i < n_pairs; i += kChunks) {
      const Vec3 a = rng.in_ball(radius);
      Vec3 b;
      if (i % 2 == 0) {
        b = rng.in_ball(radius);
      } else {
        // Close pairs probe the local expansion factor.
        const double sep = radius * std::pow(10.0, rng.uniform(-6.0, -1.0));
        b = a + sep * rng.unit_vector();
        if (norm(b) > radius) b = (radius / norm(b)) * b;
      }
      const MapJet ja = map.eval(Point3(a)), jb = map.eval(Point3(b));
      Vec3 ra = a, rb = b;
      if (reference) {
        ra = reference->eval(Point3(a)).x;
        rb = reference->eval(Point3(b)).x;
      }
      const double den = dot(ra - rb, ra - rb);
      if (den == 0.0) continue;
      chunk_min[c] = std::min(chunk_min[c], dot(ja.x - jb.x, ja.x - jb.x) / den);
    }
  });
  const double worst = *std::min_element(chunk_min.begin(), chunk_min.end());
  rep.fitted["min_ratio"] = worst;
  rep.check("distance_expansion", worst >= floor, worst, floor);
  return rep;
}

double image_radius(const LagrangianMap& map, double param_radius, int n_dirs) {
  const Vec3 x0 = map.eval(Point3(0, 0, 0)).x;
  double least = std::numeric_limits<double>::infinity();
  for (const auto& d : fibonacci_sphere(n_dirs))
    least = std::min(least, norm(map.eval(Point3(param_radius * d)).x - x0));
  return std::max(0.0, 0.9 * least - norm(x0));
}

RotatedHandle::RotatedHandle(MapPtr map, double image_radius) : map_(std::move(map)), radius_(image_radius) {
  if (!(radius_ > 0)) throw GraphConditionError("rotated graph has an empty verified image");
  const MapJet j0 = map_->eval(Point3(0, 0, 0));
  x0_ = j0.x;
  if (condition_number(j0.dx) < 1e8) {
    dx0_inv_ = inverse(j0.dx);
    has_linear_start_ = true;
  }
}

Point3 RotatedHandle::locate(const Point3& target) const {
  const Vec3 t = target.vec();
  Vec3 p = has_linear_start_ ? dx0_inv_ * (t - x0_) : t;
  const double dom = map_->domain_radius();
  if (norm(p) > dom) p = (dom / norm(p)) * p;
  const double tol = 1e-14 * std::max(1.0, norm(t));
  MapJet j = map_->eval(Point3(p));
  double res = norm(j.x - t);
  for (int iter = 0; iter < 100 && res > tol; ++iter) {
    const Vec3 step = solve(j.dx, j.x - t);
    double lambda = 1.0;
    for (int h = 0; h < 60; ++h, lambda *= 0.5) {
      Vec3 trial = p - lambda * step;
      if (norm(trial) > dom) continue;
      const MapJet jt = map_->eval(Point3(trial));
      const double rt = norm(jt.x - t);
      if (rt < res || rt <= tol) {
        p = trial;
        j = jt;
        res = rt;
        break;
      }
    }
    if (lambda < 1e-17) break;
  }
  if (!(res <= 1e-10 * std::max(1.0, norm(t))))
    throw InversionError("rotated graph: Newton did not converge to the target");
  return Point3(p);
}

double RotatedHandle::value(const Point3& x) const { return map_->eval(locate(x)).potential; }

Vec3 RotatedHandle::gradient(const Point3& x) const { return map_->eval(locate(x)).y; }

SymMat3 RotatedHandle::hessian(const Point3& x) const { return pushforward_from(map_->eval(locate(x))).hessian; }

GradHess RotatedHandle::grad_hess(const Point3& x) const {
  const MapJet j = map_->eval(locate(x));
  return {j.y, pushforward_from(j).hessian};
}

std::shared_ptr<const RotatedHandle> rotate_handle(const HandlePtr& u, RotationAngles angles) {
  auto map = rotate_graph(graph_map(u), angles);
  const double r = image_radius(*map, u->valid_radius());
  return std::make_shared<RotatedHandle>(map, r);
}

}  // namespace slag
