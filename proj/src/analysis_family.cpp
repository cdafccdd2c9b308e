#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "slag/analysis.hpp"
#include "slag/errors.hpp"
#include "slag/sampling.hpp"

namespace slag {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

double kappa_for(double alpha) {
  const double t = std::tan(std::numbers::pi / 4 - alpha);
  return std::min(t, 1 / t) / 2;
}

double largest_modulus(const SymMat3& h) { return eig3_sym(h).max_abs(); }

}  // namespace

SmoothFamily build_smooth_family(const FamilyParams& p, const SeriesSolution& base, std::uint64_t seed) {
  p.validate(true);
  SmoothFamily fam;
  fam.params = p;
  Json trail = Json::array();
  for (int shrink = 0; shrink <= 6; ++shrink) {
    const double eps = fam.params.eps;
    fam.alpha = std::abs(p.theta) / 2 - 1.5 * eps;
    const double param_radius = 0.5 * std::pow(kappa_for(fam.alpha), 2) * base.scaled->valid_radius();
    const auto graph = restrict_domain(graph_map(base.scaled), param_radius);
    fam.middle = rotate_graph(graph, {fam.alpha + kHalfPi, fam.alpha + kHalfPi, kHalfPi});
    fam.composite = rotate_graph(graph, {fam.alpha + kHalfPi + eps, fam.alpha + kHalfPi + eps, kHalfPi + eps});
    const auto cond = check_graph_condition(*fam.composite, 10000, split_seed(seed, shrink), fam.middle.get(), 0.25);
    trail.push_back({{"eps", eps}, {"min_ratio", cond.fitted["min_ratio"]}, {"pass", cond.pass()}});
    if (cond.pass()) {
      const double radius = image_radius(*fam.composite, param_radius);
      fam.rotated = std::make_shared<RotatedHandle>(fam.composite, radius);
      fam.scale = 0.5 * radius;
      fam.negated = p.theta >= 0;
      fam.handle = rescale(std::make_shared<RotatedHandle>(fam.composite, fam.scale), fam.scale, fam.negated);
      fam.report = VerificationReport("smooth-family");
      fam.report.samples = {{"m", p.m}, {"theta", p.theta}, {"eps_requested", p.eps}, {"seed", seed}};
      fam.report.fitted = {{"eps", eps},
                           {"alpha", fam.alpha},
                           {"param_radius", param_radius},
                           {"image_radius", radius},
                           {"scale", fam.scale},
                           {"negated", fam.negated},
                           {"shrink_trail", trail}};
      fam.report.absorb(cond, "graph");
      return fam;
    }
    fam.params.eps = eps / 2;
  }
  throw PipelineError("family", "distance expansion fails for every tried eps");
}

VerificationReport verify_smooth_family(const SmoothFamily& fam, int n_neighbors, std::uint64_t seed) {
  VerificationReport rep("smooth-family");
  const auto& h = *fam.handle;
  const int m = fam.params.m;
  const double eps = fam.params.eps;
  rep.samples = {{"m", m}, {"theta", fam.params.theta}, {"eps", eps}, {"neighbors", n_neighbors}, {"seed", seed}};

  const double lambda0 = largest_modulus(h.hessian(Point3(0, 0, 0)));
  const double cot_ratio = lambda0 * std::tan(eps);

  // Hessian modulus at neighbours with radii log-uniform in [1e-3, 1).
  std::vector<double> lam(n_neighbors);
  parallel_for(64, [&](int c) {
    Rng rng(split_seed(seed, c));
    for (int i = c; i < n_neighbors; i += 64) {
      const double r = 0.999 * std::pow(10.0, rng.uniform(-3.0, 0.0));
      lam[i] = largest_modulus(h.hessian(Point3(r * rng.unit_vector())));
    }
  });
  const double neighbor_max = n_neighbors > 0 ? *std::max_element(lam.begin(), lam.end()) : 0.0;

  // sup |Du| over B_1: interior samples, a boundary sphere and the two axis poles.
  auto probes = fibonacci_sphere(400);
  for (auto& d : probes) d = 0.999 * d;
  probes.push_back({0, 0, 0.999});
  probes.push_back({0, 0, -0.999});
  Rng rng(split_seed(seed, 100));
  for (int i = 0; i < 1000; ++i) probes.push_back(rng.in_ball(0.999));
  std::vector<double> grad(probes.size());
  parallel_for(static_cast<int>(probes.size()), [&](int i) { grad[i] = norm(h.gradient(Point3(probes[i]))); });
  const double sup_grad = *std::max_element(grad.begin(), grad.end());

  // Mismatch between the horizontally rotated coordinate and its image under the
  // middle map, on shells of the parameter ball.
  const double param_radius = fam.composite->domain_radius();
  const auto radii = log_spaced(1e-3 * param_radius, param_radius, 24);
  const auto dirs = fibonacci_sphere(64);
  std::vector<double> upper(radii.size()), lower(radii.size());
  const auto& middle = *fam.middle;
  parallel_for(static_cast<int>(radii.size()), [&](int i) {
    double up = 0, lo = std::numeric_limits<double>::infinity();
    for (const auto& d : dirs) {
      const Point3 pt(radii[i] * d);
      // The middle map is a further quarter turn of the alpha-rotated graph, so the
      // alpha-rotated horizontal coordinate is minus its vertical coordinate.
      const MapJet jm = middle.eval(pt);
      const Vec3 xt = -jm.y, xtt = jm.x;
      const double a = norm(xt), b = norm(xtt);
      up = std::max(up, b / a);
      lo = std::min(lo, b / std::pow(a, 2 * m - 1));
    }
    upper[i] = up;
    lower[i] = lo;
  });
  const double delta6 = *std::max_element(upper.begin(), upper.end());
  const double delta7 = *std::min_element(lower.begin(), lower.end());

  const auto phase = phase_conservation(h, fam.params.theta, 1000, split_seed(seed, 200), 1e-6);

  rep.fitted = {{"lambda_max_origin", lambda0},
                {"lambda_max_tan_eps", cot_ratio},
                {"neighbor_lambda_max", neighbor_max},
                {"sup_grad", sup_grad},
                {"delta6", delta6},
                {"delta7", delta7}};
  rep.check("lambda_max_cot_eps", std::abs(cot_ratio - 1) <= 0.05, cot_ratio, 1.0);
  rep.check("interior_hessian_maximum", neighbor_max < lambda0, neighbor_max, lambda0);
  rep.check("mismatch_band", std::isfinite(delta6) && delta7 > 0, Json::array({delta6, delta7}));
  rep.absorb(phase, "phase");
  return rep;
}

VerificationReport family_sweep(const FamilyParams& p, const std::vector<double>& eps_list, const SeriesSolution& base,
                                int n_neighbors, std::uint64_t seed) {
  VerificationReport rep("family-sweep");
  rep.samples = {{"m", p.m}, {"theta", p.theta}, {"eps_list", eps_list}, {"seed", seed}};
  Json rows = Json::array();
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    FamilyParams q = p;
    q.eps = eps_list[i];
    const auto fam = build_smooth_family(q, base, split_seed(seed, i));
    const auto one = verify_smooth_family(fam, n_neighbors, split_seed(seed, 100 + i));
    const double sup = one.fitted["sup_grad"].get<double>();
    lo = std::min(lo, sup);
    hi = std::max(hi, sup);
    rows.push_back({{"eps", fam.params.eps},
                    {"lambda_max_origin", one.fitted["lambda_max_origin"]},
                    {"lambda_max_tan_eps", one.fitted["lambda_max_tan_eps"]},
                    {"sup_grad", sup}});
    rep.absorb(one, "eps=" + std::to_string(fam.params.eps).substr(0, 5));
  }
  rep.fitted = {{"rows", rows}, {"sup_grad_ratio", hi / lo}};
  rep.check("sup_grad_uniform", hi / lo < 2.0, hi / lo, 2.0);
  return rep;
}

}  // namespace slag
