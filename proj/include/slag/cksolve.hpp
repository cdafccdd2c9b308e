#pragma once

#include <optional>

#include "slag/mpoly.hpp"

namespace slag {

/// Cauchy data on the plane x3 = 0: the trace of u and of its x3-derivative,
/// both series in (x1, x2) only.
struct CauchyData {
  TruncatedSeries value;
  TruncatedSeries normal_derivative;

  /// Restricts a full series to x3 = 0.
  static CauchyData from_series(const TruncatedSeries& u);
};

/// Solves sigma_2(D^2 u) = 1 order by order in x3 from the Cauchy data, truncated
/// at total degree `cap`. Throws DegenerateDataError when u11 + u22 vanishes at the
/// origin and ParameterError when cap < 2.
TruncatedSeries ck_solve(const CauchyData& data, int cap);

/// low_order(sigma_2(D^2 u) - 1); nullopt means the residual vanishes below the cap.
std::optional<int> residual_order(const TruncatedSeries& u);

/// Inverse of a series in (x1, x2) with nonzero constant term, truncated at `cap`.
TruncatedSeries series_reciprocal(const TruncatedSeries& a, int cap);

}  // namespace slag
