#include "slag/seed.hpp"

#include "slag/errors.hpp"

namespace slag {

void SeedParams::validate() const {
  if (m < 2) throw ParameterError("m must be at least 2, got " + std::to_string(m));
  if (eps < 0) throw ParameterError("eps must be non-negative");
  if (eta <= 0) throw ParameterError("eta must be positive");
}

std::vector<Rational> coeff_a(int m) {
  if (m < 2) throw ParameterError("m must be at least 2, got " + std::to_string(m));
  std::vector<Rational> a(static_cast<std::size_t>(m) + 1);
  a[0] = -1;
  for (int j = 1; j <= m; ++j) {
    Rational factor(2 * (2 * m - 2 * j + 2) * (2 * m - 2 * j + 1), (2 * j) * (2 * j));
    factor.canonicalize();
    a[j] = -factor * a[j - 1];
  }
  return a;
}

SeedBundle build_components(const SeedParams& p, int cap) {
  p.validate();
  const int m = p.m;
  if (cap < 2 * m)
    throw ParameterError("cap " + std::to_string(cap) + " is below 2m = " + std::to_string(2 * m));

  SeedBundle b{p, TruncatedSeries(cap), TruncatedSeries(cap), TruncatedSeries(cap), TruncatedSeries(cap), coeff_a(m)};

  b.h = times_x3_power(real_power_z(cap, m), 1, cap);

  Rational q_coeff(m * m, 4);
  q_coeff.canonicalize();
  b.Q = q_coeff * times_x3_power(rho_squared_power(cap, m - 1), 2, cap);

  for (int j = 0; j <= m; ++j)
    b.H += (p.eps * b.a[j]) * times_x3_power(rho_squared_power(cap, j), 2 * m - 2 * j, cap);

  const TruncatedSeries base = Rational(1, 2) * rho_squared_power(cap, 1);
  b.P = base + b.h + b.Q + b.H;
  return b;
}

TruncatedSeries build_P(const SeedParams& p, int cap) { return build_components(p, cap).P; }

}  // namespace slag
