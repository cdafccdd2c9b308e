#pragma once

#include <vector>

#include "slag/mpoly.hpp"

namespace slag {

struct SeedParams {
  int m = 2;
  Rational eps{1, 160};
  // Aperture of the cone around the x3-axis used by the eigenvalue case analysis diagnostics.
  Rational eta{1, 10};

  void validate() const;
};

/// The approximate solution and its pieces. `H` already carries the factor eps.
struct SeedBundle {
  SeedParams params;
  TruncatedSeries P, h, Q, H;
  std::vector<Rational> a;
};

/// a_0 = -1 and a_j = -2 (2m-2j+2)(2m-2j+1) / (2j)^2 * a_{j-1}, j = 1..m.
std::vector<Rational> coeff_a(int m);

/// Throws ParameterError when cap < 2m.
SeedBundle build_components(const SeedParams& p, int cap);
TruncatedSeries build_P(const SeedParams& p, int cap);

/// Default series cap for a given m.
inline int default_cap(int m) { return 4 * m; }

}  // namespace slag
