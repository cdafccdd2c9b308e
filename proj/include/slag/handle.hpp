#pragma once

#include <memory>
#include <string>

#include "slag/linalg.hpp"
#include "slag/mpoly.hpp"

namespace slag {

enum class Provenance { series, inverse_graph, rotated };

std::string to_string(Provenance p);

struct GradHess {
  Vec3 gradient{};
  SymMat3 hessian{};
};

/// Evaluable potential u with its gradient and Hessian on a ball around the origin.
/// Implementations are immutable and may be evaluated concurrently.
class SolutionHandle {
 public:
  virtual ~SolutionHandle() = default;

  virtual double value(const Point3& x) const = 0;
  virtual Vec3 gradient(const Point3& x) const = 0;
  virtual SymMat3 hessian(const Point3& x) const = 0;
  /// Gradient and Hessian together; overridden where they share expensive work.
  virtual GradHess grad_hess(const Point3& x) const { return {gradient(x), hessian(x)}; }

  virtual Provenance provenance() const = 0;
  virtual double valid_radius() const = 0;
};

using HandlePtr = std::shared_ptr<const SolutionHandle>;

/// Handle backed by an exact series, evaluated in double precision.
class SeriesHandle final : public SolutionHandle {
 public:
  SeriesHandle(TruncatedSeries series, double valid_radius);

  double value(const Point3& x) const override { return eval_.value(x); }
  Vec3 gradient(const Point3& x) const override { return eval_.gradient(x); }
  SymMat3 hessian(const Point3& x) const override { return eval_.hessian(x); }
  GradHess grad_hess(const Point3& x) const override;

  Provenance provenance() const override { return Provenance::series; }
  double valid_radius() const override { return radius_; }
  const TruncatedSeries& series() const { return series_; }

 private:
  TruncatedSeries series_;
  SeriesEvaluator eval_;
  double radius_;
};

/// x -> sign * u(r x) / r^2. The Hessian is sign * D^2 u(r x).
class ScaledHandle final : public SolutionHandle {
 public:
  ScaledHandle(HandlePtr parent, double scale, bool negate);

  double value(const Point3& x) const override;
  Vec3 gradient(const Point3& x) const override;
  SymMat3 hessian(const Point3& x) const override;
  GradHess grad_hess(const Point3& x) const override;

  Provenance provenance() const override { return parent_->provenance(); }
  double valid_radius() const override { return parent_->valid_radius() / scale_; }

  const HandlePtr& parent() const { return parent_; }
  double scale() const { return scale_; }
  bool negated() const { return sign_ < 0; }

 private:
  Point3 inner(const Point3& x) const;
  HandlePtr parent_;
  double scale_;
  double sign_;
};

/// Parabolic rescaling u(r x)/r^2, optionally negated. Throws ParameterError when r is
/// not positive or exceeds the handle's valid radius.
HandlePtr rescale(const HandlePtr& h, double r, bool negate = false);

}  // namespace slag
