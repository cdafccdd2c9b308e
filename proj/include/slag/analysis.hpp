#pragma once

// End-to-end constructions of the singular solutions, the smooth family and the
// property checks run on them.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "slag/geometry.hpp"
#include "slag/handle.hpp"
#include "slag/invert.hpp"
#include "slag/mpoly.hpp"
#include "slag/report.hpp"
#include "slag/seed.hpp"

namespace slag {

struct FamilyParams {
  int m = 2;
  double theta = 0.0;  // target phase in (-pi/2, pi/2)
  double eps = 0.1;    // rotation parameter of the smooth family

  /// gamma with 4 gamma = pi/2 - |theta|.
  double gamma() const;
  /// Throws ParameterError on m < 2 or |theta| >= pi/2. With `family` also requires 0 < eps < gamma.
  void validate(bool family) const;
};

// ---------------------------------------------------------------------------
// Series stage

/// Exact seed identities: the a_j recursion against its closed form, tilde-Laplacians of
/// h and H, the Q balance and low_order(sigma_2(D^2 P) - 1) >= 3m - 3.
VerificationReport verify_property_2_1(const SeedParams& p, int cap);

struct SeriesOptions {
  int solve_cap = 24;
  int max_halvings = 20;
  bool search_eps = true;      // halve eps until every sampled lambda_3 is negative
  Rational eps0 = -1;          // negative selects 1/(40 m^2)
  Rational eta = Rational(1, 10);
  double phase_tol = 1e-10;    // |sigma_2 - 1| screen for the valid radius
  int shells = 40;
  int dirs = 64;
  std::uint64_t seed = 42;
};

struct SeriesSolution {
  SeedParams params;          // accepted eps
  int cap = 0;
  int halvings = 0;
  TruncatedSeries u;
  int agreement_order = -1;   // low_order(u - P)
  double radius = 0.0;        // r_m
  std::shared_ptr<const SeriesHandle> series;  // u on B_{r_m}
  HandlePtr scaled;           // u(r_m x) / r_m^2 on B_1
  VerificationReport report;  // property 2.2 at the accepted eps plus the search trail
};

/// Largest radius among a descending ladder whose samples pass the phase residual,
/// lambda_3 < 0, |(u13, u23)| <= 0.4 and 0.6 <= block <= 1.6 screens. The sign screen
/// is skipped when `require_negative` is false.
double find_valid_radius(const SolutionHandle& u, double phase_tol, std::uint64_t seed,
                         bool require_negative = true);

/// residual_order(u) > cap - 2 and low_order(u - P) >= 2m for a solved series.
VerificationReport verify_ck_solution(const TruncatedSeries& u, const TruncatedSeries& P, int m);

/// seed -> ck_solve -> valid radius, halving eps while property 2.2 fails.
/// Throws PipelineError("series") when no eps works.
SeriesSolution build_series_solution(int m, const SeriesOptions& opt);

/// lambda_{1,2} - 1 = O(r^{m-1}) and -delta_2 r^{2m-2} <= lambda_3 <= -delta_1 r^{2m-2}
/// on log-spaced shells in [1e-3, valid radius].
VerificationReport verify_property_2_2(const SolutionHandle& u, int m, int shells, int dirs, std::uint64_t seed,
                                       double eps = 0.0);
/// delta_3 r^{2m-1} <= |Du| <= delta_4 r on the same shells.
VerificationReport verify_property_2_4(const SolutionHandle& u, int m, int shells, int dirs, std::uint64_t seed,
                                       double eps = 0.0);

// ---------------------------------------------------------------------------
// Rotation and inversion stage

/// Determinant band, block bounds and eigen-angle limits of the rotated handle.
VerificationReport verify_rotated_properties(const SolutionHandle& rotated, int m, double alpha, int shells, int dirs,
                                             std::uint64_t seed);

struct SingularSolution {
  FamilyParams params;
  double alpha = 0.0;
  HandlePtr scaled;            // u(r_m x) / r_m^2
  HandlePtr rotated;           // after the horizontal rotation (the scaled handle when alpha = 0)
  InversionHypotheses hyp;
  std::shared_ptr<const InverseGraphHandle> inverse;
  double tau = 0.0;            // verified image radius of the inversion
  bool negated = false;
  HandlePtr handle;            // u^m(y) = +-inverse(tau y) / tau^2 on B_1
  VerificationReport report;
};

/// Horizontal rotation by |theta| / 2, inversion and final rescaling. Each stage gate
/// throws PipelineError naming the stage.
SingularSolution build_singular_solution(const FamilyParams& p, const SeriesSolution& base, std::uint64_t seed);

/// Constant phase of a handle at random points of its ball (the origin excluded).
VerificationReport phase_conservation(const SolutionHandle& h, double target, int n, std::uint64_t seed,
                                      double tol = 1e-6);

/// Axis exponent from pairs +-t e3 and the Hoelder seminorm across scales 1e-4..1 of the
/// radius. The expected exponent is 1/(2m-1) unless `exponent` is positive.
VerificationReport holder_exponent(const SolutionHandle& h, int m, std::uint64_t seed, double exponent = 0.0);

// ---------------------------------------------------------------------------
// Smooth family

struct SmoothFamily {
  FamilyParams params;     // eps after any shrinking
  double alpha = 0.0;
  MapPtr middle;           // graph after the horizontal rotation and the inversion
  MapPtr composite;        // plus the final eps rotation
  std::shared_ptr<const RotatedHandle> rotated;
  double scale = 0.0;      // half the verified image radius
  bool negated = false;
  HandlePtr handle;        // u^eps on B_1
  VerificationReport report;
};

SmoothFamily build_smooth_family(const FamilyParams& p, const SeriesSolution& base, std::uint64_t seed);

/// lambda_max(0) tan eps, sup |Du| on B_1, interior Hessian maximum and the mismatch bound.
VerificationReport verify_smooth_family(const SmoothFamily& fam, int n_neighbors, std::uint64_t seed);

/// Builds and verifies the family at each eps and compares sup |Du^eps| across them.
VerificationReport family_sweep(const FamilyParams& p, const std::vector<double>& eps_list, const SeriesSolution& base,
                                int n_neighbors, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Minimal surface system

struct MssPoint {
  Vec3 U{};           // Du
  SymMat3 DU{};       // D^2 u
  SymMat3 metric{};   // I + DU^T DU
  SymMat3 flux{};     // sqrt(det g) g^-1
  double sqrt_det = 0.0;
};

/// U = Du, the induced metric and the weak-form coefficient at a point.
MssPoint mss_from_potential(const SolutionHandle& h, const Point3& y);

/// Metric checks at random points and the |DU| |Du|^(2m-2) band over shells.
VerificationReport verify_mss(const SolutionHandle& h, int m, int n_points, std::uint64_t seed);

struct SobolevOptions {
  std::vector<double> p_list;     // empty selects a grid around the threshold
  int n_shells = 8;
  int samples_per_shell = 1000000;
  std::uint64_t seed = 42;
};

/// Shell integrals of |DU|^p in the gradient variable |Du| in [2^-k-1, 2^-k], evaluated
/// through the forward map, their fitted slopes and the divergence threshold.
VerificationReport sobolev_profile(const SingularSolution& s, const SobolevOptions& opt);

// ---------------------------------------------------------------------------
// Weak form

/// Smooth compactly supported test fields p(y) (1 - |y|^2)^3 on B_1.
struct TestField {
  std::string id;
  Vec3 value(const Vec3& y) const;
  Mat3 jacobian(const Vec3& y) const;  // d Phi^i / d y_j
};

const std::vector<std::string>& test_field_ids();
/// Throws ParameterError for an unknown id.
TestField test_field(const std::string& id);

struct WeakQuadrature {
  int axial_nodes = 32;   // Gauss nodes per axial panel
  int angular_nodes = 40; // trapezoid nodes in the angle
  int radial_nodes = 32;  // Gauss nodes across the annulus
};

/// Weak-form residual over B_1 minus B_delta for the singular solution, integrated in the
/// preimage coordinates where the integrand is smooth.
double weak_residual_value(const SingularSolution& s, const TestField& f, double delta, const WeakQuadrature& q);
/// Same for a handle defined on B_1 with a Hessian everywhere, in spherical coordinates.
double weak_residual_direct(const SolutionHandle& h, const TestField& f, double delta, const WeakQuadrature& q);

/// R(delta) on the list, the quadrature refinement check, the extrapolated R(0) and the
/// excised-ball decay.
VerificationReport weak_residual(const SingularSolution& s, const std::string& field_id,
                                 const std::vector<double>& deltas);

}  // namespace slag
