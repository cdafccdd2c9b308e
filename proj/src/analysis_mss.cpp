#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "slag/analysis.hpp"
#include "slag/errors.hpp"
#include "slag/sampling.hpp"

namespace slag {

namespace {

Eigen::Matrix3d to_eigen(const SymMat3& h) {
  Eigen::Matrix3d a;
  a << h.xx, h.xy, h.xz, h.xy, h.yy, h.yz, h.xz, h.yz, h.zz;
  return a;
}

SymMat3 from_eigen(const Eigen::Matrix3d& a) {
  return {a(0, 0), a(0, 1), a(0, 2), a(1, 1), a(1, 2), a(2, 2)};
}

SymMat3 square(const SymMat3& h) { return from_eigen(to_eigen(h) * to_eigen(h)); }

double frobenius_inverse(const SymMat3& a) { return block_inverse(a).frobenius(); }

}  // namespace

MssPoint mss_from_potential(const SolutionHandle& h, const Point3& y) {
  MssPoint out;
  const GradHess gh = h.grad_hess(y);
  out.U = gh.gradient;
  out.DU = gh.hessian;
  out.metric = SymMat3::diag(1, 1, 1) + square(out.DU);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen(out.DU));
  const Eigen::Vector3d lam = es.eigenvalues();
  const Eigen::Vector3d g = (lam.array().square() + 1.0).matrix();
  out.sqrt_det = std::sqrt(g(0) * g(1) * g(2));
  const Eigen::Matrix3d q = es.eigenvectors();
  out.flux = from_eigen(q * (out.sqrt_det * g.cwiseInverse()).asDiagonal() * q.transpose());
  return out;
}

VerificationReport verify_mss(const SolutionHandle& h, int m, int n_points, std::uint64_t seed) {
  VerificationReport rep("mss");
  const double radius = h.valid_radius();
  rep.samples = {{"m", m}, {"points", n_points}, {"seed", seed}};

  std::vector<double> det_err(n_points), min_eig(n_points);
  parallel_for(64, [&](int c) {
    Rng rng(split_seed(seed, c));
    for (int i = c; i < n_points; i += 64) {
      Vec3 y = rng.in_ball(0.999 * radius);
      if (norm(y) == 0.0) y = {0, 0, 1e-3 * radius};
      const MssPoint p = mss_from_potential(h, Point3(y));
      const auto e = eig3_sym(p.DU);
      double prod = 1;
      for (double l : e.lambda) prod *= 1 + l * l;
      // det g through |det(I + i DU)|^2, built from the elementary symmetric functions.
      const double s1 = p.DU.xx + p.DU.yy + p.DU.zz;
      const double s2 = sigma2(p.DU);
      const double s3 = p.DU.det();
      const double det_g = (1 - s2) * (1 - s2) + (s1 - s3) * (s1 - s3);
      det_err[i] = std::abs(det_g - prod) / prod;
      min_eig[i] = eig3_sym(p.metric).lambda[0];
    }
  });
  const double worst_det = *std::max_element(det_err.begin(), det_err.end());
  const double least = *std::min_element(min_eig.begin(), min_eig.end());

  // |DU| |Du|^(2m-2) on log-spaced shells of the ball.
  const auto radii = log_spaced(1e-3 * radius, 0.999 * radius, 16);
  const auto dirs = fibonacci_sphere(64);
  std::vector<double> lo(radii.size()), hi(radii.size());
  parallel_for(static_cast<int>(radii.size()), [&](int i) {
    double a = std::numeric_limits<double>::infinity(), b = 0;
    for (const auto& d : dirs) {
      const GradHess gh = h.grad_hess(Point3(radii[i] * d));
      const double v = gh.hessian.frobenius() * std::pow(norm(gh.gradient), 2 * m - 2);
      a = std::min(a, v);
      b = std::max(b, v);
    }
    lo[i] = a;
    hi[i] = b;
  });
  std::vector<double> lr, llo, lhi;
  Json table = Json::array();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    lr.push_back(std::log(radii[i]));
    llo.push_back(std::log(lo[i]));
    lhi.push_back(std::log(hi[i]));
    table.push_back({radii[i], lo[i], hi[i]});
  }
  const double slope_lo = fit_line(lr, llo).slope, slope_hi = fit_line(lr, lhi).slope;
  const double band_lo = *std::min_element(lo.begin(), lo.end());
  const double band_hi = *std::max_element(hi.begin(), hi.end());

  rep.fitted = {{"det_relative_error", worst_det},
                {"metric_min_eigenvalue", least},
                {"band", {band_lo, band_hi}},
                {"band_slopes", {slope_lo, slope_hi}}};
  rep.margins = {{"band_by_shell", table}};
  rep.check("metric_positive_definite", least >= 1 - 1e-9, least, 1.0);
  rep.check("det_metric_matches_eigenvalues", worst_det <= 1e-8, worst_det, 1e-8);
  rep.check("gradient_hessian_band", band_lo > 0 && std::isfinite(band_hi) && std::abs(slope_lo) <= 0.2 &&
                                         std::abs(slope_hi) <= 0.2,
            Json::array({slope_lo, slope_hi}), 0.2);
  return rep;
}

VerificationReport sobolev_profile(const SingularSolution& s, const SobolevOptions& opt) {
  const int m = s.params.m;
  const double p_star = (2.0 * m + 1) / (2.0 * m - 2);
  std::vector<double> ps = opt.p_list;
  if (ps.empty()) {
    ps = {1.0, 1.5, 2.0};
    for (int k = -6; k <= 6; ++k) ps.push_back(std::round((p_star + 0.05 * k) * 1000) / 1000);
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  }
  VerificationReport rep("sobolev");
  rep.samples = {{"m", m}, {"p_list", ps}, {"shells", opt.n_shells}, {"samples_per_shell", opt.samples_per_shell},
                 {"seed", opt.seed}};
  const auto& f = *s.inverse->forward();
  const double tau = s.tau;
  const int np = static_cast<int>(ps.size());
  const int ns = opt.n_shells;

  // Shell k is 2^-k-1 <= |w| <= 2^-k in w = x / tau, where x is the preimage; there
  // |U| = |w| and the integral of |DU|^p dy becomes that of |A^-1|^p |det A| dw with A = D^2 f.
  // The same unit samples are reused on every shell.
  constexpr int kChunks = 64;
  const int n = opt.samples_per_shell;
  std::vector<double> sum(static_cast<std::size_t>(kChunks) * ns * np, 0.0), sum2(sum.size(), 0.0);
  parallel_for(kChunks, [&](int c) {
    Rng rng(split_seed(opt.seed, c));
    for (int i = c; i < n; i += kChunks) {
      const double u = rng.uniform();
      const Vec3 dir = rng.unit_vector();
      for (int k = 0; k < ns; ++k) {
        const double b = std::ldexp(1.0, -(k + 1)), a = b / 2;
        const double r = std::cbrt(a * a * a + u * (b * b * b - a * a * a));
        const SymMat3 hess = f.hessian(Point3(tau * r * dir));
        const double inv = frobenius_inverse(hess), jac = std::abs(block_det(hess));
        for (int j = 0; j < np; ++j) {
          const double v = std::pow(inv, ps[j]) * jac;
          const std::size_t at = (static_cast<std::size_t>(c) * ns + k) * np + j;
          sum[at] += v;
          sum2[at] += v * v;
        }
      }
    }
  });

  std::vector<std::vector<double>> log2_I(np, std::vector<double>(ns));
  double worst_rel_err = 0;
  for (int k = 0; k < ns; ++k) {
    const double b = std::ldexp(1.0, -(k + 1)), a = b / 2;
    const double vol = 4.0 / 3.0 * std::numbers::pi * (b * b * b - a * a * a);
    for (int j = 0; j < np; ++j) {
      double s1 = 0, s2 = 0;
      for (int c = 0; c < kChunks; ++c) {
        const std::size_t at = (static_cast<std::size_t>(c) * ns + k) * np + j;
        s1 += sum[at];
        s2 += sum2[at];
      }
      const double mean = s1 / n, var = std::max(0.0, s2 / n - mean * mean);
      worst_rel_err = std::max(worst_rel_err, std::sqrt(var / n) / mean);
      log2_I[j][k] = std::log2(vol * mean);
    }
  }

  std::vector<double> log2_r(ns);
  for (int k = 0; k < ns; ++k) log2_r[k] = -(k + 1);
  std::vector<double> slopes(np);
  Json rows = Json::array();
  for (int j = 0; j < np; ++j) {
    slopes[j] = fit_line(log2_r, log2_I[j]).slope;
    rows.push_back({{"p", ps[j]},
                    {"slope", slopes[j]},
                    {"predicted", 3 + (2 * m - 2) * (1 - ps[j])},
                    {"log2_shell_integrals", log2_I[j]}});
  }
  double flip = std::numeric_limits<double>::quiet_NaN();
  for (int j = 0; j + 1 < np; ++j) {
    if (slopes[j] > 0 && slopes[j + 1] <= 0) {
      flip = ps[j] + (ps[j + 1] - ps[j]) * slopes[j] / (slopes[j] - slopes[j + 1]);
      break;
    }
  }
  rep.fitted = {{"p_star_predicted", p_star}, {"p_star_measured", flip}, {"mc_relative_error", worst_rel_err}};
  rep.margins = {{"profiles", rows}};
  rep.check("mc_variance", worst_rel_err <= 0.05, worst_rel_err, 0.05);
  rep.check("threshold", std::isfinite(flip) && std::abs(flip - p_star) <= 0.05, flip, p_star);
  for (int j = 0; j < np; ++j) {
    if (ps[j] != 1.0 && ps[j] != 1.5 && ps[j] != 2.0) continue;
    const double want = 3 + (2 * m - 2) * (1 - ps[j]);
    rep.check("slope_p=" + std::to_string(ps[j]).substr(0, 3), std::abs(slopes[j] - want) <= 0.05 * std::abs(want),
              slopes[j], want);
  }
  return rep;
}

}  // namespace slag
