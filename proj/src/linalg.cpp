#include "slag/linalg.hpp"

#include <algorithm>
#include <limits>

#include "slag/errors.hpp"

namespace slag {

Mat3 identity3() {
  Mat3 r{};
  r[0][0] = r[1][1] = r[2][2] = 1.0;
  return r;
}

Mat3 transpose(const Mat3& a) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[j][i];
  return r;
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  return r;
}

Mat3 operator+(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[i][j] + b[i][j];
  return r;
}

Mat3 operator-(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[i][j] - b[i][j];
  return r;
}

Mat3 operator*(double s, const Mat3& a) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = s * a[i][j];
  return r;
}

Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2], a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
          a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2]};
}

double det(const Mat3& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

double frobenius(const Mat3& a) {
  double s = 0.0;
  for (const auto& row : a)
    for (double v : row) s += v * v;
  return std::sqrt(s);
}

Mat3 inverse(const Mat3& a) {
  const double d = det(a);
  if (d == 0.0 || !std::isfinite(d)) throw GraphConditionError("singular 3x3 matrix");
  Mat3 r{};
  r[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / d;
  r[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / d;
  r[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / d;
  r[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / d;
  r[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / d;
  r[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / d;
  r[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / d;
  r[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / d;
  r[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / d;
  return r;
}

double condition_number(const Mat3& a) {
  const double d = det(a);
  if (d == 0.0 || !std::isfinite(d)) return std::numeric_limits<double>::infinity();
  return frobenius(a) * frobenius(inverse(a));
}

Vec3 solve(const Mat3& a, const Vec3& b) {
  // Gaussian elimination with partial pivoting.
  Mat3 m = a;
  Vec3 v = b;
  for (int c = 0; c < 3; ++c) {
    int p = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    if (m[p][c] == 0.0) throw GraphConditionError("singular 3x3 system");
    std::swap(m[p], m[c]);
    std::swap(v[p], v[c]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = m[r][c] / m[c][c];
      for (int k = c; k < 3; ++k) m[r][k] -= f * m[c][k];
      v[r] -= f * v[c];
    }
  }
  Vec3 x{};
  for (int r = 2; r >= 0; --r) {
    double s = v[r];
    for (int k = r + 1; k < 3; ++k) s -= m[r][k] * x[k];
    x[r] = s / m[r][r];
  }
  return x;
}

SymMat3 SymMat3::from_mat(const Mat3& m) {
  return {m[0][0], 0.5 * (m[0][1] + m[1][0]), 0.5 * (m[0][2] + m[2][0]), m[1][1], 0.5 * (m[1][2] + m[2][1]),
          m[2][2]};
}

double SymMat3::operator()(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i == 0) return j == 0 ? xx : (j == 1 ? xy : xz);
  if (i == 1) return j == 1 ? yy : yz;
  return zz;
}

Mat3 SymMat3::to_mat() const { return {{{xx, xy, xz}, {xy, yy, yz}, {xz, yz, zz}}}; }

double SymMat3::det() const { return slag::det(to_mat()); }

double SymMat3::frobenius() const {
  return std::sqrt(xx * xx + yy * yy + zz * zz + 2.0 * (xy * xy + xz * xz + yz * yz));
}

SymMat3 operator+(const SymMat3& a, const SymMat3& b) {
  return {a.xx + b.xx, a.xy + b.xy, a.xz + b.xz, a.yy + b.yy, a.yz + b.yz, a.zz + b.zz};
}

SymMat3 operator-(const SymMat3& a, const SymMat3& b) {
  return {a.xx - b.xx, a.xy - b.xy, a.xz - b.xz, a.yy - b.yy, a.yz - b.yz, a.zz - b.zz};
}

SymMat3 operator*(double s, const SymMat3& a) {
  return {s * a.xx, s * a.xy, s * a.xz, s * a.yy, s * a.yz, s * a.zz};
}

double asymmetry(const Mat3& a) {
  return std::max({std::abs(a[0][1] - a[1][0]), std::abs(a[0][2] - a[2][0]), std::abs(a[1][2] - a[2][1])});
}

Mat3 rotation(const Vec3& axis, double angle) {
  const double n = norm(axis);
  const Vec3 k = (1.0 / n) * axis;
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  return {{{c + t * k[0] * k[0], t * k[0] * k[1] - s * k[2], t * k[0] * k[2] + s * k[1]},
           {t * k[0] * k[1] + s * k[2], c + t * k[1] * k[1], t * k[1] * k[2] - s * k[0]},
           {t * k[0] * k[2] - s * k[1], t * k[1] * k[2] + s * k[0], c + t * k[2] * k[2]}}};
}

namespace {

struct BlockSplit {
  double minor_det;
  double inv_xx, inv_xy, inv_yy;  // leading block inverse
  double w1, w2;                  // A^-1 b
  double schur;
};

BlockSplit split(const SymMat3& h) {
  BlockSplit s{};
  s.minor_det = h.xx * h.yy - h.xy * h.xy;
  if (s.minor_det == 0.0 || !std::isfinite(s.minor_det)) throw GraphConditionError("singular leading 2x2 block");
  s.inv_xx = h.yy / s.minor_det;
  s.inv_xy = -h.xy / s.minor_det;
  s.inv_yy = h.xx / s.minor_det;
  s.w1 = s.inv_xx * h.xz + s.inv_xy * h.yz;
  s.w2 = s.inv_xy * h.xz + s.inv_yy * h.yz;
  s.schur = h.zz - (h.xz * s.w1 + h.yz * s.w2);
  return s;
}

}  // namespace

double schur_complement(const SymMat3& h) { return split(h).schur; }

double block_det(const SymMat3& h) {
  const auto s = split(h);
  return s.minor_det * s.schur;
}

SymMat3 block_inverse(const SymMat3& h) {
  const auto s = split(h);
  if (s.schur == 0.0) throw GraphConditionError("singular symmetric matrix");
  const double is = 1.0 / s.schur;
  SymMat3 r;
  r.xx = s.inv_xx + s.w1 * s.w1 * is;
  r.xy = s.inv_xy + s.w1 * s.w2 * is;
  r.yy = s.inv_yy + s.w2 * s.w2 * is;
  r.xz = -s.w1 * is;
  r.yz = -s.w2 * is;
  r.zz = is;
  return r;
}

}  // namespace slag
