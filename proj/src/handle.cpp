#include "slag/handle.hpp"

#include "slag/errors.hpp"

namespace slag {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::series:
      return "series";
    case Provenance::inverse_graph:
      return "inverse-graph";
    case Provenance::rotated:
      return "rotated";
  }
  return "unknown";
}

SeriesHandle::SeriesHandle(TruncatedSeries series, double valid_radius)
    : series_(std::move(series)), eval_(series_), radius_(valid_radius) {
  if (!(valid_radius > 0)) throw ParameterError("valid radius must be positive");
}

GradHess SeriesHandle::grad_hess(const Point3& x) const {
  const auto j = eval_.jet(x);
  return {j.gradient, j.hessian};
}

ScaledHandle::ScaledHandle(HandlePtr parent, double scale, bool negate)
    : parent_(std::move(parent)), scale_(scale), sign_(negate ? -1.0 : 1.0) {}

Point3 ScaledHandle::inner(const Point3& x) const { return {scale_ * x.x1, scale_ * x.x2, scale_ * x.x3}; }

double ScaledHandle::value(const Point3& x) const { return sign_ * parent_->value(inner(x)) / (scale_ * scale_); }

Vec3 ScaledHandle::gradient(const Point3& x) const { return (sign_ / scale_) * parent_->gradient(inner(x)); }

SymMat3 ScaledHandle::hessian(const Point3& x) const { return sign_ * parent_->hessian(inner(x)); }

GradHess ScaledHandle::grad_hess(const Point3& x) const {
  auto gh = parent_->grad_hess(inner(x));
  return {(sign_ / scale_) * gh.gradient, sign_ * gh.hessian};
}

HandlePtr rescale(const HandlePtr& h, double r, bool negate) {
  if (!h) throw ParameterError("rescale of a null handle");
  if (!(r > 0) || r > h->valid_radius() * (1 + 1e-12))
    throw ParameterError("rescale factor " + std::to_string(r) + " outside (0, " +
                         std::to_string(h->valid_radius()) + "]");
  if (r == 1.0 && !negate) return h;
  return std::make_shared<ScaledHandle>(h, r, negate);
}

}  // namespace slag
