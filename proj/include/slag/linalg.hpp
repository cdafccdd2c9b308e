#pragma once

// Fixed-size 3-vectors and 3x3 matrices used by every numerical layer.

#include <array>
#include <cmath>
#include <complex>

namespace slag {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// A point of R^3 with the cylindrical accessors used throughout: `rho` is the
/// distance to the x3-axis and `z` is the complex view x1 + i x2.
struct Point3 {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;

  Point3() = default;
  Point3(double a, double b, double c) : x1(a), x2(b), x3(c) {}
  explicit Point3(const Vec3& v) : x1(v[0]), x2(v[1]), x3(v[2]) {}

  Vec3 vec() const { return {x1, x2, x3}; }
  double r() const { return std::sqrt(x1 * x1 + x2 * x2 + x3 * x3); }
  double rho() const { return std::hypot(x1, x2); }
  std::complex<double> z() const { return {x1, x2}; }
};

Mat3 identity3();
Mat3 transpose(const Mat3& a);
Mat3 operator*(const Mat3& a, const Mat3& b);
Mat3 operator+(const Mat3& a, const Mat3& b);
Mat3 operator-(const Mat3& a, const Mat3& b);
Mat3 operator*(double s, const Mat3& a);
Vec3 operator*(const Mat3& a, const Vec3& v);
double det(const Mat3& a);
double frobenius(const Mat3& a);
/// Inverse via the adjugate. Throws slag::GraphConditionError when det is exactly zero.
Mat3 inverse(const Mat3& a);
/// Frobenius-norm condition number (infinity when singular).
double condition_number(const Mat3& a);
Vec3 solve(const Mat3& a, const Vec3& b);

/// Symmetric 3x3 matrix stored as its upper triangle.
struct SymMat3 {
  double xx = 0.0, xy = 0.0, xz = 0.0, yy = 0.0, yz = 0.0, zz = 0.0;

  static SymMat3 diag(double a, double b, double c) { return {a, 0.0, 0.0, b, 0.0, c}; }
  /// Averages the off-diagonal pairs of `m`.
  static SymMat3 from_mat(const Mat3& m);

  double operator()(int i, int j) const;
  Mat3 to_mat() const;
  double trace() const { return xx + yy + zz; }
  double det() const;
  double frobenius() const;
};

SymMat3 operator+(const SymMat3& a, const SymMat3& b);
SymMat3 operator-(const SymMat3& a, const SymMat3& b);
SymMat3 operator*(double s, const SymMat3& a);

/// Schur complement h33 - b^T A^-1 b of the leading 2x2 block A, with b = (h13, h23).
/// Small third eigenvalues keep their relative accuracy because no O(1) terms cancel.
/// Throws GraphConditionError when A is singular.
double schur_complement(const SymMat3& h);
/// det A times the Schur complement.
double block_det(const SymMat3& h);
/// Inverse by block elimination on the leading 2x2 block.
SymMat3 block_inverse(const SymMat3& h);

/// Largest |a_ij - a_ji| over the off-diagonal pairs.
double asymmetry(const Mat3& a);

/// Rotation matrix about unit `axis` by `angle` (Rodrigues).
Mat3 rotation(const Vec3& axis, double angle);

}  // namespace slag
