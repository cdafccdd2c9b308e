#pragma once

// Exact truncated power series in (x1, x2, x3) over the rationals, plus a
// compiled double-precision evaluator for sampling.

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slag/linalg.hpp"

namespace slag {

using Rational = mpq_class;

/// Parses "p/q" or "p" into a canonical rational. Throws ParameterError on junk or q = 0.
Rational parse_rational(const std::string& text);
/// Always "num/den", also for integers ("3/1").
std::string format_rational(const Rational& q);

struct MultiIndex {
  int i = 0;
  int j = 0;
  int k = 0;

  int degree() const { return i + j + k; }
  auto operator<=>(const MultiIndex&) const = default;
};

/// Sparse exact power series truncated at total degree `cap`. Terms of degree
/// above the cap are never stored; zero coefficients are dropped.
class TruncatedSeries {
 public:
  using Key = std::uint32_t;
  static constexpr int kMaxExponent = 1023;

  explicit TruncatedSeries(int cap = 0);

  static TruncatedSeries constant(int cap, const Rational& c);
  static TruncatedSeries monomial(int cap, MultiIndex e, const Rational& c = 1);
  /// x_axis for axis in {1, 2, 3}.
  static TruncatedSeries variable(int cap, int axis);

  int cap() const { return cap_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  /// Highest total degree carrying a nonzero coefficient, or -1 for the zero series.
  int degree() const;

  Rational coeff(MultiIndex e) const;
  /// Sets a coefficient; silently ignored when e exceeds the cap.
  void set(MultiIndex e, const Rational& c);
  void add_to(MultiIndex e, const Rational& c);

  /// Visits terms in lexicographic (i, j, k) order.
  template <class F>
  void for_each(F&& f) const {
    for (const auto& [key, c] : terms_) f(unpack(key), c);
  }

  /// Same terms with a new cap; terms above it are dropped.
  TruncatedSeries truncated(int cap) const;

  TruncatedSeries& operator+=(const TruncatedSeries& b);
  TruncatedSeries& operator-=(const TruncatedSeries& b);
  TruncatedSeries& operator*=(const Rational& s);

  friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b) {
    return a.cap_ == b.cap_ && a.terms_ == b.terms_;
  }

  static Key pack(MultiIndex e) {
    return (static_cast<Key>(e.i) << 20) | (static_cast<Key>(e.j) << 10) | static_cast<Key>(e.k);
  }
  static MultiIndex unpack(Key key) {
    return {static_cast<int>(key >> 20), static_cast<int>((key >> 10) & 1023u), static_cast<int>(key & 1023u)};
  }

 private:
  int cap_;
  std::map<Key, Rational> terms_;
};

TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b);
TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b);
TruncatedSeries operator-(const TruncatedSeries& a);
TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries operator*(const Rational& s, TruncatedSeries a);

enum class SeriesOp { add, sub, mul };
/// Binary arithmetic by tag; the result cap is the smaller operand cap.
TruncatedSeries series_arith(const TruncatedSeries& a, const TruncatedSeries& b, SeriesOp op);

/// Exact partial derivative along axis in {1, 2, 3}; the cap drops by one.
TruncatedSeries diff(const TruncatedSeries& a, int axis);

/// d11 + d22 + 2 d33, the linearisation of sigma_2 at diag(1, 1, 0).
TruncatedSeries tilde_laplacian(const TruncatedSeries& a);

/// sigma_2 of the Hessian of `a`, i.e. the sum of its principal 2x2 minors. Cap drops by two.
TruncatedSeries hessian_sigma2(const TruncatedSeries& a);

/// Smallest total degree with |coefficient| > tol, or nullopt when none (above the cap).
std::optional<int> low_order(const TruncatedSeries& a, const Rational& tol = 0);

/// Coefficient of x3^k as a series in (x1, x2), i.e. with the k-index reset to 0.
TruncatedSeries x3_slice(const TruncatedSeries& a, int k);
/// Multiplies by x3^k and re-truncates at `cap`.
TruncatedSeries times_x3_power(const TruncatedSeries& a, int k, int cap);

/// Re(x1 + i x2)^n as an exact polynomial.
TruncatedSeries real_power_z(int cap, int n);
/// (x1^2 + x2^2)^n.
TruncatedSeries rho_squared_power(int cap, int n);

nlohmann::json to_json(const TruncatedSeries& a);
/// Throws ParameterError on malformed documents.
TruncatedSeries series_from_json(const nlohmann::json& doc);

/// Double-precision evaluation of value, gradient and Hessian of a series.
class SeriesEvaluator {
 public:
  SeriesEvaluator() = default;
  explicit SeriesEvaluator(const TruncatedSeries& a);

  double value(const Point3& p) const;
  Vec3 gradient(const Point3& p) const;
  SymMat3 hessian(const Point3& p) const;

  struct Jet {
    double value = 0.0;
    Vec3 gradient{};
    SymMat3 hessian{};
  };
  Jet jet(const Point3& p) const;

  int degree() const { return degree_; }

 private:
  struct Term {
    int i, j, k;
    double c;
  };
  std::vector<Term> terms_;
  int degree_ = 0;
};

}  // namespace slag
