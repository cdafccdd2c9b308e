#pragma once

// Pointwise Hessian analysis and unitary rotations of Lagrangian gradient graphs.

#include <array>
#include <cstdint>
#include <memory>

#include "slag/handle.hpp"
#include "slag/linalg.hpp"
#include "slag/report.hpp"

namespace slag {

/// Sum of the principal 2x2 minors.
double sigma2(const SymMat3& h);

struct EigenData {
  std::array<double, 3> lambda{};  // ascending
  std::array<double, 3> angle{};   // arctan of each eigenvalue
  double phase = 0.0;              // sum of the angles

  double max_abs() const;
};

/// Eigenvalues by the trigonometric closed form, falling back to Givens
/// tridiagonalisation plus implicit QL when two eigenvalues nearly coincide.
EigenData eig3_sym(const SymMat3& h);
/// The QL path on its own; ascending.
std::array<double, 3> eig3_sym_ql(const SymMat3& h);
inline double phase(const SymMat3& h) { return eig3_sym(h).phase; }

/// Second-order proxy h33 - h13^2 - h23^2 for the eigenvalue near zero of a matrix
/// close to diag(1, 1, 0). Throws ParameterError when the Frobenius distance to
/// diag(1, 1, 0) is 1/4 or more.
double isolated_eig_taylor(const SymMat3& h);

/// Per-coordinate rotation angles: z_j -> exp(i beta_j) z_j on C^3 = R^3_x + i R^3_y.
struct RotationAngles {
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;

  static RotationAngles horizontal(double alpha) { return {alpha, alpha, 0.0}; }
  static RotationAngles uniform(double beta) { return {beta, beta, beta}; }
  double operator[](int j) const { return j == 0 ? b1 : (j == 1 ? b2 : b3); }
  /// Throws ParameterError unless every angle lies in (-pi, pi].
  void validate() const;
};

struct MapJet {
  Vec3 x{};      // horizontal coordinate of the graph point
  Vec3 y{};      // vertical coordinate
  Mat3 dx{};     // d x / d parameter
  Mat3 dy{};     // d y / d parameter
  double potential = 0.0;  // F with dF = y . dx along the graph
};

/// Parameterised Lagrangian graph p -> (x(p), y(p)) over the ball of radius domain_radius().
class LagrangianMap {
 public:
  virtual ~LagrangianMap() = default;
  virtual MapJet eval(const Point3& p) const = 0;
  virtual double domain_radius() const = 0;
};

using MapPtr = std::shared_ptr<const LagrangianMap>;

/// The gradient graph (p, Du(p)) of a handle.
class GraphMap final : public LagrangianMap {
 public:
  explicit GraphMap(HandlePtr u) : u_(std::move(u)) {}
  MapJet eval(const Point3& p) const override;
  double domain_radius() const override { return u_->valid_radius(); }
  const HandlePtr& handle() const { return u_; }

 private:
  HandlePtr u_;
};

class RotatedMap final : public LagrangianMap {
 public:
  RotatedMap(MapPtr source, RotationAngles angles);
  MapJet eval(const Point3& p) const override;
  double domain_radius() const override { return source_->domain_radius(); }
  const MapPtr& source() const { return source_; }
  const RotationAngles& angles() const { return angles_; }

 private:
  MapPtr source_;
  RotationAngles angles_;
  std::array<double, 3> cos_{}, sin_{};
};

/// The same map on a smaller parameter ball.
class RestrictedMap final : public LagrangianMap {
 public:
  RestrictedMap(MapPtr source, double radius);
  MapJet eval(const Point3& p) const override { return source_->eval(p); }
  double domain_radius() const override { return radius_; }

 private:
  MapPtr source_;
  double radius_;
};

MapPtr graph_map(HandlePtr u);
MapPtr restrict_domain(MapPtr source, double radius);
MapPtr rotate_graph(MapPtr source, RotationAngles angles);

struct Pushforward {
  SymMat3 hessian{};
  double asymmetry = 0.0;  // relative to max(1, |hessian|)
  double condition = 0.0;  // of dx/dp
};

/// dy/dp (dx/dp)^-1 symmetrised. Throws GraphConditionError when dx/dp has
/// condition number 1e8 or more, or when the relative asymmetry reaches 1e-8.
Pushforward pushforward_hessian(const LagrangianMap& map, const Point3& p);

/// Samples pairs in the parameter ball and checks |x(p) - x(q)|^2 >= floor |r(p) - r(q)|^2,
/// where r is `reference`'s horizontal coordinate or the parameter itself when null.
VerificationReport check_graph_condition(const LagrangianMap& map, int n_pairs, std::uint64_t seed,
                                         const LagrangianMap* reference = nullptr, double floor = 0.25);

/// Conservative radius of a ball around x(0) contained in x(B): 0.9 times the
/// smallest |x(p) - x(0)| over `n_dirs` directions on the boundary sphere.
double image_radius(const LagrangianMap& map, double param_radius, int n_dirs = 2000);

/// Solution handle of a rotated graph, viewed as a function of its new horizontal
/// coordinate. Evaluation solves x(p) = target for p by damped Newton.
class RotatedHandle final : public SolutionHandle {
 public:
  RotatedHandle(MapPtr map, double image_radius);

  double value(const Point3& x) const override;
  Vec3 gradient(const Point3& x) const override;
  SymMat3 hessian(const Point3& x) const override;
  GradHess grad_hess(const Point3& x) const override;
  Provenance provenance() const override { return Provenance::rotated; }
  double valid_radius() const override { return radius_; }

  /// Parameter p with x(p) = target. Throws InversionError if Newton fails.
  Point3 locate(const Point3& target) const;
  const MapPtr& map() const { return map_; }

 private:
  MapPtr map_;
  double radius_;
  Mat3 dx0_inv_{};
  Vec3 x0_{};
  bool has_linear_start_ = false;
};

/// Rotates the gradient graph of `u` and wraps the result as a handle over the
/// verified image of the parameter ball.
std::shared_ptr<const RotatedHandle> rotate_handle(const HandlePtr& u, RotationAngles angles);

}  // namespace slag
