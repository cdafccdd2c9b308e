#pragma once

// Inversion of a gradient map Df and the rotated graph (x~, y~) = (Df(x), -x).

#include <cstdint>
#include <memory>

#include "slag/handle.hpp"
#include "slag/linalg.hpp"
#include "slag/report.hpp"

namespace slag {

struct InversionHypotheses {
  double rho = 1.0;          // radius of the ball where f is controlled
  double kappa = 0.5;        // kappa I <= leading 2x2 block of D^2 f <= I / kappa
  double grad3_bound = 0.5;  // bound on |(f13, f23)|

  /// Throws ParameterError unless rho > 0, 0 < kappa <= 1 and 0 < grad3_bound <= 1/2.
  void validate() const;
  /// Half kappa^2 rho: the x3 range searched by the inverter.
  double solve_radius() const { return 0.5 * kappa * kappa * rho; }
};

/// Samples log-spaced shells of B_rho minus the origin and checks Df(0) = 0,
/// det D^2 f < 0, the two-sided bound on the leading block and |(f13, f23)|.
VerificationReport hypothesis_check(const SolutionHandle& f, const InversionHypotheses& hyp, int n_samples,
                                    std::uint64_t seed);

/// Solves Df(x) = target inside |x3| <= solve_radius().
class GradientInverter {
 public:
  GradientInverter(HandlePtr f, InversionHypotheses hyp);

  struct Slice {
    Point3 x;         // (x1, x2) solving the horizontal equations at height x3
    double y3 = 0.0;  // f3 at x
    double dy3 = 0.0; // d y3 / d x3 along the slice (the Schur complement of D^2 f)
  };

  /// Inner solve: D'f(x', xi) = (t1, t2) by damped Newton from `start`.
  /// Throws InversionError("ellipticity violated") if the residual stalls.
  Slice slice(double t1, double t2, double xi, double start1, double start2) const;

  /// x with Df(x) = target. A hint close to the answer enables a direct Newton attempt
  /// before the bracketing search. Throws InversionError when target3 is not bracketed.
  Point3 invert(const Vec3& target, const Point3* hint = nullptr) const;

  const HandlePtr& forward() const { return f_; }
  const InversionHypotheses& hypotheses() const { return hyp_; }

 private:
  bool polish(const Vec3& target, Vec3& x) const;
  HandlePtr f_;
  InversionHypotheses hyp_;
};

Point3 invert_point(const HandlePtr& f, const InversionHypotheses& hyp, const Vec3& target);

/// The potential of the rotated graph, f(x) - x . t at x = (Df)^-1(t), with gradient -x
/// and Hessian -(D^2 f(x))^-1. The Hessian is refused at t = 0.
class InverseGraphHandle final : public SolutionHandle {
 public:
  InverseGraphHandle(HandlePtr f, InversionHypotheses hyp, double image_radius);

  double value(const Point3& t) const override;
  Vec3 gradient(const Point3& t) const override;
  SymMat3 hessian(const Point3& t) const override;
  GradHess grad_hess(const Point3& t) const override;
  Provenance provenance() const override { return Provenance::inverse_graph; }
  double valid_radius() const override { return radius_; }

  Point3 preimage(const Point3& t) const;
  const GradientInverter& inverter() const { return inverter_; }
  const HandlePtr& forward() const { return inverter_.forward(); }

 private:
  GradientInverter inverter_;
  double radius_;
};

/// Conservative image radius 0.9 min |Df| over the sphere of radius solve_radius().
double inverse_image_radius(const SolutionHandle& f, const InversionHypotheses& hyp, int n_dirs = 2000);

std::shared_ptr<const InverseGraphHandle> build_inverse_graph(HandlePtr f, InversionHypotheses hyp);

struct PathIntegral {
  double value = 0.0;
  double error = 0.0;
};

/// Integral of -x . dt along the segment 0 -> t, where x is the preimage of t.
/// Throws ToleranceError when the adaptive rule misses `tol`.
PathIntegral reconstruct_potential(const InverseGraphHandle& h, const Vec3& t, double tol = 1e-10);
/// Same integral along 0 -> (t1, t2, 0) -> t.
PathIntegral reconstruct_potential_two_leg(const InverseGraphHandle& h, const Vec3& t, double tol = 1e-10);

/// Round trip, expansion of (f1, f2, x3) by kappa / sqrt 2 and monotonicity of y3
/// along vertical lines.
VerificationReport inversion_properties(const InverseGraphHandle& h, int n_points, std::uint64_t seed);

}  // namespace slag
