#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "slag/analysis.hpp"
#include "slag/errors.hpp"
#include "slag/sampling.hpp"

namespace slag {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4;

double small_eigenvalue(const SymMat3& h, const EigenData& e) {
  return block_det(h) / (e.lambda[1] * e.lambda[2]);
}

void gate(const VerificationReport& rep, const std::string& stage) {
  if (rep.pass()) return;
  std::string names;
  for (const auto& n : rep.failed_checks()) names += (names.empty() ? "" : ", ") + n;
  throw PipelineError(stage, "verification failed (" + names + ")");
}

}  // namespace

VerificationReport verify_rotated_properties(const SolutionHandle& rotated, int m, double alpha, int shells, int dirs,
                                             std::uint64_t seed) {
  VerificationReport rep("rotated-properties");
  const double t = std::tan(kQuarterPi - alpha);
  const int q = 2 * m - 2;
  const double outer = 0.95 * rotated.valid_radius();
  const auto radii = log_spaced(1e-3 * outer, outer, shells);
  Rng rng(seed);
  const Mat3 turn = rotation(rng.unit_vector(), rng.uniform(0, 2 * std::numbers::pi));
  auto directions = fibonacci_sphere(dirs);
  for (auto& d : directions) d = turn * d;
  directions.push_back({0, 0, 1});
  directions.push_back({0, 0, -1});
  rep.samples = {{"shells", shells}, {"dirs", dirs}, {"r_min", radii.front()}, {"r_max", radii.back()},
                 {"alpha", alpha}, {"seed", seed}};

  struct Shell {
    double det_lo = std::numeric_limits<double>::infinity(), det_hi = -std::numeric_limits<double>::infinity();
    double block_lo = std::numeric_limits<double>::infinity(), block_hi = 0;
    double abs3 = 0, angle_dev = 0;
  };
  std::vector<Shell> out(radii.size());
  parallel_for(static_cast<int>(radii.size()), [&](int i) {
    Shell s;
    const double r = radii[i];
    for (const auto& d : directions) {
      const SymMat3 h = rotated.hessian(Point3(r * d));
      const double ratio = block_det(h) / std::pow(r, q);
      s.det_lo = std::min(s.det_lo, ratio);
      s.det_hi = std::max(s.det_hi, ratio);
      const double mean = 0.5 * (h.xx + h.yy), rad = std::hypot(0.5 * (h.xx - h.yy), h.xy);
      s.block_lo = std::min(s.block_lo, mean - rad);
      s.block_hi = std::max(s.block_hi, mean + rad);
      const auto e = eig3_sym(h);
      s.abs3 = std::max(s.abs3, std::abs(small_eigenvalue(h, e)));
      s.angle_dev = std::max({s.angle_dev, std::abs(e.angle[1] - (kQuarterPi - alpha)),
                              std::abs(e.angle[2] - (kQuarterPi - alpha))});
    }
    out[i] = s;
  });

  double det_lo = std::numeric_limits<double>::infinity(), det_hi = -det_lo;
  double block_lo = det_lo, block_hi = 0;
  std::vector<double> lr, l3;
  Json table = Json::array();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    det_lo = std::min(det_lo, out[i].det_lo);
    det_hi = std::max(det_hi, out[i].det_hi);
    block_lo = std::min(block_lo, out[i].block_lo);
    block_hi = std::max(block_hi, out[i].block_hi);
    lr.push_back(std::log(radii[i]));
    l3.push_back(std::log(out[i].abs3));
    table.push_back({radii[i], out[i].det_lo, out[i].det_hi, out[i].abs3, out[i].angle_dev});
  }
  const auto f3 = fit_line(lr, l3);
  const double inner_angle_dev = out.front().angle_dev;
  rep.fitted = {{"det_ratio_band", {det_lo, det_hi}},
                {"block_band", {block_lo, block_hi}},
                {"tan_quarter_pi_minus_alpha", t},
                {"slope_theta3", f3.slope},
                {"minor_angle_deviation_inner", inner_angle_dev},
                {"minor_angle_deviation_outer", out.back().angle_dev}};
  rep.margins = {{"shell_table_columns", {"r", "min det ratio", "max det ratio", "max|lambda3|", "minor angle dev"}},
                 {"shell_table", table}};
  rep.check("det_ratio_negative_band", det_hi < 0 && std::isfinite(det_lo), Json::array({det_lo, det_hi}));
  rep.check("block_lower_bound", block_lo >= t / 2, block_lo, t / 2);
  rep.check("block_upper_bound", block_hi <= 2 * t, block_hi, 2 * t);
  rep.check("slope_theta3", std::abs(f3.slope - q) <= 0.2, f3.slope, q);
  rep.check("minor_angles_limit", inner_angle_dev <= 0.05 && inner_angle_dev <= out.back().angle_dev + 1e-12,
            inner_angle_dev, 0.05);
  return rep;
}

VerificationReport phase_conservation(const SolutionHandle& h, double target, int n, std::uint64_t seed, double tol) {
  VerificationReport rep("phase-conservation");
  const double radius = h.valid_radius();
  std::vector<double> dev(n, 0.0);
  const int chunks = 64;
  parallel_for(chunks, [&](int c) {
    Rng rng(split_seed(seed, c));
    for (int i = c; i < n; i += chunks) {
      Vec3 y = rng.in_ball(0.999 * radius);
      if (norm(y) < 1e-12 * radius) y = {0, 0, 1e-6 * radius};
      dev[i] = std::abs(eig3_sym(h.hessian(Point3(y))).phase - target);
    }
  });
  const double worst = n > 0 ? *std::max_element(dev.begin(), dev.end()) : 0.0;
  rep.samples = {{"points", n}, {"radius", radius}, {"seed", seed}};
  rep.fitted = {{"target", target}, {"max_deviation", worst}};
  rep.check("phase_constant", worst <= tol, worst, tol);
  return rep;
}

VerificationReport holder_exponent(const SolutionHandle& h, int m, std::uint64_t seed, double exponent) {
  VerificationReport rep("holder");
  const double delta = exponent > 0 ? exponent : 1.0 / (2 * m - 1);
  const double radius = h.valid_radius();
  rep.samples = {{"m", m}, {"exponent", delta}, {"seed", seed}};

  // (a) pairs +-t e3 straddling the origin.
  const auto ts = log_spaced(1e-6 * radius, 1e-2 * radius, 13);
  std::vector<double> ldx(ts.size()), ldu(ts.size());
  parallel_for(static_cast<int>(ts.size()), [&](int i) {
    const Vec3 a = h.gradient(Point3(0, 0, ts[i])), b = h.gradient(Point3(0, 0, -ts[i]));
    ldx[i] = std::log(2 * ts[i]);
    ldu[i] = std::log(norm(a - b));
  });
  const auto axis = fit_line(ldx, ldu);
  Json axis_table = Json::array();
  for (std::size_t i = 0; i < ts.size(); ++i) axis_table.push_back({ldx[i], ldu[i]});

  // (b) seminorm at log-spaced scales: half the pairs near the origin, half anywhere.
  const auto scales = log_spaced(1e-4 * radius, radius, 9);
  const int pairs = 256;
  std::vector<double> sup(scales.size(), 0.0);
  parallel_for(static_cast<int>(scales.size()), [&](int k) {
    Rng rng(split_seed(seed, 1000 + k));
    const double s = scales[k];
    double best = 0;
    for (int i = 0; i < pairs; ++i) {
      const Vec3 dir = rng.unit_vector();
      Vec3 c;
      if (i % 2 == 0) {
        c = rng.in_ball(std::min(s, radius - s / 2));
      } else {
        c = rng.in_ball(radius - s / 2);
      }
      const Vec3 a = c + (s / 2) * dir, b = c - (s / 2) * dir;
      if (norm(a) >= radius || norm(b) >= radius) continue;
      const double ratio = norm(h.gradient(Point3(a)) - h.gradient(Point3(b))) / std::pow(s, delta);
      best = std::max(best, ratio);
    }
    sup[k] = best;
  });
  std::vector<double> linv, lsup;
  Json seminorm_table = Json::array();
  for (std::size_t k = 0; k < scales.size(); ++k) {
    linv.push_back(std::log(1 / scales[k]));
    lsup.push_back(std::log(sup[k]));
    seminorm_table.push_back({scales[k], sup[k]});
  }
  const auto trend = fit_line(linv, lsup);
  rep.fitted = {{"axis_exponent", axis.slope},
                {"seminorm", *std::max_element(sup.begin(), sup.end())},
                {"seminorm_trend_slope", trend.slope}};
  rep.margins = {{"axis_pairs", axis_table}, {"seminorm_by_scale", seminorm_table}};
  rep.check("axis_exponent", std::abs(axis.slope - delta) <= 0.02, axis.slope, delta);
  rep.check("seminorm_bounded", trend.slope < 0.05, trend.slope, 0.05);
  return rep;
}

SingularSolution build_singular_solution(const FamilyParams& p, const SeriesSolution& base, std::uint64_t seed) {
  p.validate(false);
  const int m = p.m;
  SingularSolution out;
  out.params = p;
  out.alpha = std::abs(p.theta) / 2;
  out.scaled = base.scaled;
  out.report = VerificationReport("singular-solution");
  out.report.samples = {{"m", m}, {"theta", p.theta}, {"alpha", out.alpha}, {"seed", seed}};

  if (out.alpha != 0) {
    const auto angles = RotationAngles::horizontal(out.alpha);
    const auto map = rotate_graph(graph_map(base.scaled), angles);
    const auto graph = check_graph_condition(*map, 10000, split_seed(seed, 1));
    out.report.absorb(graph, "rotate");
    gate(graph, "rotate");
    out.rotated = rotate_handle(base.scaled, angles);
  } else {
    out.rotated = base.scaled;
  }
  const auto props = verify_rotated_properties(*out.rotated, m, out.alpha, 24, 64, split_seed(seed, 2));
  out.report.absorb(props, "rotated");
  gate(props, "rotated");

  const double t = std::tan(kQuarterPi - out.alpha);
  out.hyp = InversionHypotheses{out.rotated->valid_radius(), std::min(t, 1 / t) / 2, 0.5};
  const auto hyp = hypothesis_check(*out.rotated, out.hyp, 2000, split_seed(seed, 3));
  out.report.absorb(hyp, "hypotheses");
  gate(hyp, "hypotheses");

  out.inverse = build_inverse_graph(out.rotated, out.hyp);
  out.tau = out.inverse->valid_radius();
  const auto inv = inversion_properties(*out.inverse, 1000, split_seed(seed, 4));
  out.report.absorb(inv, "invert");
  gate(inv, "invert");

  out.negated = p.theta > 0;
  out.handle = rescale(out.inverse, out.tau, out.negated);
  const auto phase = phase_conservation(*out.handle, p.theta, 2000, split_seed(seed, 5), 1e-6);
  out.report.absorb(phase, "phase");
  gate(phase, "phase");

  out.report.fitted["rho"] = out.hyp.rho;
  out.report.fitted["kappa"] = out.hyp.kappa;
  out.report.fitted["solve_radius"] = out.hyp.solve_radius();
  out.report.fitted["tau"] = out.tau;
  out.report.fitted["negated"] = out.negated;
  return out;
}

}  // namespace slag
