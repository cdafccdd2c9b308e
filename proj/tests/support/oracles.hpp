#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the code paths it is used to check.

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

namespace slag::oracle {

/// Closed form (-1)^(j+1) 2^j 2m(2m-1)...(2m-2j+1) / (2^2 4^2 ... (2j)^2) for j >= 1, and -1 at j = 0.
inline std::vector<mpq_class> seed_coefficients_closed_form(int m) {
  std::vector<mpq_class> out{mpq_class(-1)};
  for (int j = 1; j <= m; ++j) {
    mpz_class num = 1, den = 1;
    for (int t = 0; t < 2 * j; ++t) num *= 2 * m - t;
    for (int t = 1; t <= j; ++t) den *= (2 * t) * (2 * t);
    num <<= j;
    mpq_class v(num, den);
    v.canonicalize();
    out.push_back(j % 2 == 1 ? v : mpq_class(-v));
  }
  return out;
}

/// Real roots of the characteristic polynomial of a symmetric 3x3 matrix, found by
/// bracketing sign changes of det(t I - A) between Gershgorin bounds and refining
/// with bisection. Sorted ascending; repeated roots are recovered from the
/// derivative's roots.
inline std::array<double, 3> symmetric_charpoly_roots(const std::array<std::array<double, 3>, 3>& a) {
  const double c2 = -(a[0][0] + a[1][1] + a[2][2]);
  const double c1 = a[0][0] * a[1][1] + a[0][0] * a[2][2] + a[1][1] * a[2][2] - a[0][1] * a[1][0] -
                    a[0][2] * a[2][0] - a[1][2] * a[2][1];
  const double c0 = -(a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                      a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                      a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]));
  auto p = [&](long double t) { return ((t + c2) * t + c1) * t + c0; };
  double bound = 0.0;
  for (int i = 0; i < 3; ++i) {
    double row = 0.0;
    for (int j = 0; j < 3; ++j) row += std::abs(a[i][j]);
    bound = std::max(bound, row);
  }
  bound += 1.0;
  // Critical points of the cubic split the real line into monotone pieces.
  const double disc = c2 * c2 - 3.0 * c1;
  std::vector<double> knots{-bound};
  if (disc > 0) {
    const double s = std::sqrt(disc);
    knots.push_back((-c2 - s) / 3.0);
    knots.push_back((-c2 + s) / 3.0);
  } else {
    knots.push_back(-c2 / 3.0);
    knots.push_back(-c2 / 3.0);
  }
  knots.push_back(bound);
  std::array<double, 3> roots{};
  for (int piece = 0; piece < 3; ++piece) {
    long double lo = knots[piece], hi = knots[piece + 1];
    long double plo = p(lo);
    const long double phi = p(hi);
    if (plo * phi > 0) {
      // Double root at a critical point.
      roots[piece] = std::abs(static_cast<double>(plo)) < std::abs(static_cast<double>(phi)) ? lo : hi;
      continue;
    }
    for (int it = 0; it < 200; ++it) {
      const long double mid = 0.5L * (lo + hi);
      const long double pm = p(mid);
      if ((pm < 0) == (plo < 0)) {
        lo = mid;
        plo = pm;
      } else {
        hi = mid;
      }
    }
    roots[piece] = static_cast<double>(0.5L * (lo + hi));
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace slag::oracle
