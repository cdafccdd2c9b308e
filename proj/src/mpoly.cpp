#include "slag/mpoly.hpp"

#include <algorithm>
#include <regex>

#include "slag/errors.hpp"

namespace slag {

Rational parse_rational(const std::string& text) {
  static const std::regex kPattern(R"(\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*)");
  std::smatch match;
  if (!std::regex_match(text, match, kPattern)) throw ParameterError("not a rational: '" + text + "'");
  mpz_class num(match[1].str().front() == '+' ? match[1].str().substr(1) : match[1].str(), 10);
  mpz_class den = match[2].matched ? mpz_class(match[2].str(), 10) : mpz_class(1);
  if (den == 0) throw ParameterError("zero denominator: '" + text + "'");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::string format_rational(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

namespace {

void check_index(MultiIndex e) {
  if (e.i < 0 || e.j < 0 || e.k < 0 || e.i > TruncatedSeries::kMaxExponent || e.j > TruncatedSeries::kMaxExponent ||
      e.k > TruncatedSeries::kMaxExponent)
    throw ParameterError("multi-index out of range");
}

}  // namespace

TruncatedSeries::TruncatedSeries(int cap) : cap_(cap) {
  if (cap < 0 || cap > kMaxExponent) throw ParameterError("series cap out of range: " + std::to_string(cap));
}

TruncatedSeries TruncatedSeries::constant(int cap, const Rational& c) {
  TruncatedSeries s(cap);
  s.set({0, 0, 0}, c);
  return s;
}

TruncatedSeries TruncatedSeries::monomial(int cap, MultiIndex e, const Rational& c) {
  TruncatedSeries s(cap);
  s.set(e, c);
  return s;
}

TruncatedSeries TruncatedSeries::variable(int cap, int axis) {
  if (axis < 1 || axis > 3) throw ParameterError("axis must be 1, 2 or 3");
  MultiIndex e;
  (axis == 1 ? e.i : axis == 2 ? e.j : e.k) = 1;
  return monomial(cap, e);
}

int TruncatedSeries::degree() const {
  int d = -1;
  for (const auto& [key, c] : terms_) d = std::max(d, unpack(key).degree());
  return d;
}

Rational TruncatedSeries::coeff(MultiIndex e) const {
  check_index(e);
  auto it = terms_.find(pack(e));
  return it == terms_.end() ? Rational(0) : it->second;
}

void TruncatedSeries::set(MultiIndex e, const Rational& value) {
  check_index(e);
  if (e.degree() > cap_) return;
  Rational c = value;
  c.canonicalize();
  if (c == 0)
    terms_.erase(pack(e));
  else
    terms_[pack(e)] = std::move(c);
}

void TruncatedSeries::add_to(MultiIndex e, const Rational& value) {
  check_index(e);
  if (e.degree() > cap_) return;
  Rational c = value;
  c.canonicalize();
  if (c == 0) return;
  auto it = terms_.find(pack(e));
  if (it == terms_.end()) {
    terms_.emplace(pack(e), std::move(c));
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

TruncatedSeries TruncatedSeries::truncated(int cap) const {
  TruncatedSeries r(cap);
  for (const auto& [key, c] : terms_)
    if (unpack(key).degree() <= cap) r.terms_.emplace_hint(r.terms_.end(), key, c);
  return r;
}

TruncatedSeries& TruncatedSeries::operator+=(const TruncatedSeries& b) {
  if (b.cap_ < cap_) *this = truncated(b.cap_);
  for (const auto& [key, c] : b.terms_) add_to(unpack(key), c);
  return *this;
}

TruncatedSeries& TruncatedSeries::operator-=(const TruncatedSeries& b) {
  if (b.cap_ < cap_) *this = truncated(b.cap_);
  for (const auto& [key, c] : b.terms_) add_to(unpack(key), -c);
  return *this;
}

TruncatedSeries& TruncatedSeries::operator*=(const Rational& s) {
  if (s == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [key, c] : terms_) c *= s;
  return *this;
}

TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }
TruncatedSeries operator-(const TruncatedSeries& a) { return Rational(-1) * a; }
TruncatedSeries operator*(const Rational& s, TruncatedSeries a) { return a *= s; }

TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
  const int cap = std::min(a.cap(), b.cap());
  struct Entry {
    MultiIndex e;
    const Rational* c;
  };
  auto collect = [](const TruncatedSeries& s) {
    std::vector<Entry> out;
    s.for_each([&](MultiIndex e, const Rational& c) { out.push_back({e, &c}); });
    std::stable_sort(out.begin(), out.end(),
                     [](const Entry& x, const Entry& y) { return x.e.degree() < y.e.degree(); });
    return out;
  };
  const auto ea = collect(a);
  const auto eb = collect(b);
  std::map<TruncatedSeries::Key, Rational> acc;
  Rational prod;
  for (const auto& x : ea) {
    const int room = cap - x.e.degree();
    if (room < 0) break;
    for (const auto& y : eb) {
      if (y.e.degree() > room) break;
      mpq_mul(prod.get_mpq_t(), x.c->get_mpq_t(), y.c->get_mpq_t());
      auto key = TruncatedSeries::pack({x.e.i + y.e.i, x.e.j + y.e.j, x.e.k + y.e.k});
      auto [it, inserted] = acc.try_emplace(key, prod);
      if (!inserted) it->second += prod;
    }
  }
  TruncatedSeries r(cap);
  for (const auto& [key, c] : acc)
    if (c != 0) r.set(TruncatedSeries::unpack(key), c);
  return r;
}

TruncatedSeries series_arith(const TruncatedSeries& a, const TruncatedSeries& b, SeriesOp op) {
  switch (op) {
    case SeriesOp::add:
      return a + b;
    case SeriesOp::sub:
      return a - b;
    case SeriesOp::mul:
      return a * b;
  }
  throw ParameterError("unknown series operation");
}

TruncatedSeries diff(const TruncatedSeries& a, int axis) {
  if (axis < 1 || axis > 3) throw ParameterError("axis must be 1, 2 or 3");
  TruncatedSeries r(std::max(a.cap() - 1, 0));
  a.for_each([&](MultiIndex e, const Rational& c) {
    int& p = axis == 1 ? e.i : axis == 2 ? e.j : e.k;
    if (p == 0) return;
    const int n = p;
    --p;
    r.add_to(e, c * n);
  });
  return r;
}

TruncatedSeries tilde_laplacian(const TruncatedSeries& a) {
  TruncatedSeries d33 = diff(diff(a, 3), 3);
  return diff(diff(a, 1), 1) + diff(diff(a, 2), 2) + Rational(2) * d33;
}

TruncatedSeries hessian_sigma2(const TruncatedSeries& a) {
  const auto a1 = diff(a, 1), a2 = diff(a, 2), a3 = diff(a, 3);
  const auto a11 = diff(a1, 1), a22 = diff(a2, 2), a33 = diff(a3, 3);
  const auto a12 = diff(a1, 2), a13 = diff(a1, 3), a23 = diff(a2, 3);
  return a11 * a22 + a11 * a33 + a22 * a33 - a12 * a12 - a13 * a13 - a23 * a23;
}

std::optional<int> low_order(const TruncatedSeries& a, const Rational& tol) {
  if (tol < 0) throw ParameterError("low_order tolerance must be non-negative");
  std::optional<int> best;
  a.for_each([&](MultiIndex e, const Rational& c) {
    if (abs(c) > tol && (!best || e.degree() < *best)) best = e.degree();
  });
  return best;
}

TruncatedSeries x3_slice(const TruncatedSeries& a, int k) {
  TruncatedSeries r(std::max(a.cap() - k, 0));
  a.for_each([&](MultiIndex e, const Rational& c) {
    if (e.k == k) r.set({e.i, e.j, 0}, c);
  });
  return r;
}

TruncatedSeries times_x3_power(const TruncatedSeries& a, int k, int cap) {
  TruncatedSeries r(cap);
  a.for_each([&](MultiIndex e, const Rational& c) { r.add_to({e.i, e.j, e.k + k}, c); });
  return r;
}

TruncatedSeries real_power_z(int cap, int n) {
  // Re (x1 + i x2)^n = sum over even q of C(n, q) (-1)^(q/2) x1^(n-q) x2^q.
  TruncatedSeries r(cap);
  mpz_class binom = 1;
  for (int q = 0; q <= n; ++q) {
    if (q > 0) binom = binom * (n - q + 1) / q;
    if (q % 2 == 0) r.add_to({n - q, q, 0}, Rational((q / 2) % 2 == 0 ? binom : mpz_class(-binom)));
  }
  return r;
}

TruncatedSeries rho_squared_power(int cap, int n) {
  TruncatedSeries r(cap);
  mpz_class binom = 1;
  for (int q = 0; q <= n; ++q) {
    if (q > 0) binom = binom * (n - q + 1) / q;
    r.add_to({2 * (n - q), 2 * q, 0}, Rational(binom));
  }
  return r;
}

nlohmann::json to_json(const TruncatedSeries& a) {
  nlohmann::json terms = nlohmann::json::array();
  a.for_each([&](MultiIndex e, const Rational& c) { terms.push_back({e.i, e.j, e.k, format_rational(c)}); });
  return {{"cap", a.cap()}, {"terms", std::move(terms)}};
}

TruncatedSeries series_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object() || !doc.contains("cap") || !doc.contains("terms"))
      throw ParameterError("series document needs 'cap' and 'terms'");
    TruncatedSeries r(doc.at("cap").get<int>());
    for (const auto& t : doc.at("terms")) {
      if (!t.is_array() || t.size() != 4) throw ParameterError("series term must be [i, j, k, \"num/den\"]");
      MultiIndex e{t[0].get<int>(), t[1].get<int>(), t[2].get<int>()};
      if (e.degree() > r.cap()) throw ParameterError("series term exceeds cap");
      r.add_to(e, parse_rational(t[3].get<std::string>()));
    }
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw ParameterError(std::string("malformed series document: ") + ex.what());
  }
}

SeriesEvaluator::SeriesEvaluator(const TruncatedSeries& a) {
  a.for_each([&](MultiIndex e, const Rational& c) {
    if (e.i >= 128 || e.j >= 128 || e.k >= 128) throw ParameterError("series degree too large for evaluation");
    terms_.push_back({e.i, e.j, e.k, c.get_d()});
    degree_ = std::max(degree_, e.degree());
  });
}

namespace {

struct Powers {
  static constexpr int kMax = 128;
  double p[3][kMax];
  Powers(const Point3& x, int deg) {
    const double v[3] = {x.x1, x.x2, x.x3};
    for (int a = 0; a < 3; ++a) {
      p[a][0] = 1.0;
      for (int n = 1; n <= deg; ++n) p[a][n] = p[a][n - 1] * v[a];
    }
  }
  double operator()(int a, int n) const { return n < 0 ? 0.0 : p[a][n]; }
};

}  // namespace

double SeriesEvaluator::value(const Point3& x) const {
  const Powers pw(x, degree_);
  double s = 0.0;
  for (const auto& t : terms_) s += t.c * pw(0, t.i) * pw(1, t.j) * pw(2, t.k);
  return s;
}

Vec3 SeriesEvaluator::gradient(const Point3& x) const {
  const Powers pw(x, degree_);
  Vec3 g{};
  for (const auto& t : terms_) {
    const double a = pw(0, t.i), b = pw(1, t.j), c = pw(2, t.k);
    if (t.i) g[0] += t.c * t.i * pw(0, t.i - 1) * b * c;
    if (t.j) g[1] += t.c * t.j * a * pw(1, t.j - 1) * c;
    if (t.k) g[2] += t.c * t.k * a * b * pw(2, t.k - 1);
  }
  return g;
}

SymMat3 SeriesEvaluator::hessian(const Point3& x) const { return jet(x).hessian; }

SeriesEvaluator::Jet SeriesEvaluator::jet(const Point3& x) const {
  const Powers pw(x, degree_);
  Jet out;
  auto& g = out.gradient;
  auto& h = out.hessian;
  for (const auto& t : terms_) {
    const double a0 = pw(0, t.i), b0 = pw(1, t.j), c0 = pw(2, t.k);
    const double a1 = t.i * pw(0, t.i - 1), b1 = t.j * pw(1, t.j - 1), c1 = t.k * pw(2, t.k - 1);
    const double a2 = t.i * (t.i - 1) * pw(0, t.i - 2), b2 = t.j * (t.j - 1) * pw(1, t.j - 2),
                 c2 = t.k * (t.k - 1) * pw(2, t.k - 2);
    out.value += t.c * a0 * b0 * c0;
    g[0] += t.c * a1 * b0 * c0;
    g[1] += t.c * a0 * b1 * c0;
    g[2] += t.c * a0 * b0 * c1;
    h.xx += t.c * a2 * b0 * c0;
    h.yy += t.c * a0 * b2 * c0;
    h.zz += t.c * a0 * b0 * c2;
    h.xy += t.c * a1 * b1 * c0;
    h.xz += t.c * a1 * b0 * c1;
    h.yz += t.c * a0 * b1 * c1;
  }
  return out;
}

}  // namespace slag
