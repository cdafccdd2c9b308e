#include "slag/cksolve.hpp"

#include <vector>

#include "slag/errors.hpp"

namespace slag {

CauchyData CauchyData::from_series(const TruncatedSeries& u) {
  return {x3_slice(u, 0), x3_slice(diff(u, 3), 0)};
}

TruncatedSeries series_reciprocal(const TruncatedSeries& a, int cap) {
  const Rational a0 = a.coeff({0, 0, 0});
  if (a0 == 0) throw DegenerateDataError("series has no constant term to invert");
  // 1/a = (1/a0) sum_j (-b)^j with b = a/a0 - 1, which starts at degree one.
  TruncatedSeries b = Rational(1 / a0) * a.truncated(cap);
  b.set({0, 0, 0}, 0);
  TruncatedSeries neg_b = -b;
  TruncatedSeries term = TruncatedSeries::constant(cap, 1);
  TruncatedSeries sum = term;
  for (int j = 1; j <= cap; ++j) {
    term = term * neg_b;
    if (term.is_zero()) break;
    sum += term;
  }
  return Rational(1 / a0) * sum;
}

namespace {

// Product of two (x1, x2)-series truncated at `cap`.
TruncatedSeries mul_to(const TruncatedSeries& a, const TruncatedSeries& b, int cap) {
  return a.truncated(std::min(cap, a.cap())) * b.truncated(std::min(cap, b.cap()));
}

}  // namespace

TruncatedSeries ck_solve(const CauchyData& data, int cap) {
  if (cap < 2) throw ParameterError("ck_solve needs cap >= 2");
  if (data.value.degree() >= 0 && data.value.cap() < cap)
    throw ParameterError("Cauchy data cap is below the solve cap");
  auto has_x3 = [](const TruncatedSeries& s) {
    bool found = false;
    s.for_each([&](MultiIndex e, const Rational&) { found = found || e.k != 0; });
    return found;
  };
  if (has_x3(data.value) || has_x3(data.normal_derivative))
    throw ParameterError("Cauchy data must not depend on x3");

  // c[k] is the coefficient of x3^k, an (x1, x2)-series with cap (cap - k).
  std::vector<TruncatedSeries> c;
  c.reserve(static_cast<std::size_t>(cap) + 1);
  c.push_back(data.value.truncated(cap));
  c.push_back(data.normal_derivative.truncated(cap - 1));

  // Laplacian in (x1, x2) of each c[k], and first derivatives.
  std::vector<TruncatedSeries> d11, d22, d12, d1, d2, lap_c;
  auto push_derivatives = [&](const TruncatedSeries& s) {
    d1.push_back(diff(s, 1));
    d2.push_back(diff(s, 2));
    d11.push_back(diff(d1.back(), 1));
    d22.push_back(diff(d2.back(), 2));
    d12.push_back(diff(d1.back(), 2));
    lap_c.push_back(d11.back() + d22.back());
  };
  push_derivatives(c[0]);
  push_derivatives(c[1]);

  if (lap_c[0].coeff({0, 0, 0}) == 0)
    throw DegenerateDataError("degenerate Cauchy data: u11 + u22 vanishes at the origin");
  const TruncatedSeries inv_lap0 = series_reciprocal(lap_c[0], cap - 2);

  for (int k = 0; k + 2 <= cap; ++k) {
    const int n = cap - k - 2;  // x'-degree needed for c[k + 2]
    // Right-hand side at order x3^k: 1 - u11 u22 + u12^2 + u13^2 + u23^2.
    TruncatedSeries rhs(n);
    if (k == 0) rhs.set({0, 0, 0}, 1);
    for (int a = 0; a <= k; ++a) {
      const int b = k - a;
      rhs -= mul_to(d11[a], d22[b], n);
      rhs += mul_to(d12[a], d12[b], n);
      const Rational w((a + 1) * (b + 1));
      rhs += w * (mul_to(d1[a + 1], d1[b + 1], n) + mul_to(d2[a + 1], d2[b + 1], n));
    }
    // Subtract the already known part of (u11 + u22) u33.
    for (int a = 1; a <= k; ++a) {
      const int b = k - a;
      rhs -= Rational((b + 2) * (b + 1)) * mul_to(lap_c[a], c[b + 2], n);
    }
    TruncatedSeries next = Rational(1, (k + 2) * (k + 1)) * mul_to(rhs, inv_lap0, n);
    c.push_back(next);
    push_derivatives(c.back());
  }

  TruncatedSeries u(cap);
  for (int k = 0; k < static_cast<int>(c.size()); ++k) u += times_x3_power(c[k], k, cap);
  return u;
}

std::optional<int> residual_order(const TruncatedSeries& u) {
  TruncatedSeries r = hessian_sigma2(u);
  r -= TruncatedSeries::constant(r.cap(), 1);
  return low_order(r, 0);
}

}  // namespace slag
