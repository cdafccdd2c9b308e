// Acceptance run: one line per criterion. Expected values are computed here from
// closed forms, not read back from the code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "slag/analysis.hpp"
#include "slag/cksolve.hpp"
#include "slag/geometry.hpp"
#include "slag/invert.hpp"
#include "slag/pipeline.hpp"
#include "slag/seed.hpp"
#include "support/oracles.hpp"

using namespace slag;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + ("failed " + what);
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json read_json(const fs::path& p) {
  std::ifstream in(p);
  return Json::parse(in);
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const SeriesSolution& series(int m) {
  static std::map<int, SeriesSolution> cache;
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, build_series_solution(m, SeriesOptions{})).first;
  return it->second;
}

const SingularSolution& singular(int m, double theta) {
  static std::map<std::pair<int, double>, SingularSolution> cache;
  const auto key = std::make_pair(m, theta);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_singular_solution({m, theta, 0.1}, series(m), 42)).first;
  return it->second;
}

TruncatedSeries tilde_laplacian_by_hand(const TruncatedSeries& a) {
  const auto d11 = diff(diff(a, 1), 1), d22 = diff(diff(a, 2), 2), d33 = diff(diff(a, 3), 3);
  return d11 + d22 + Rational(2) * d33;
}

// Sum of the principal 2x2 minors of the Hessian.
TruncatedSeries sigma2_by_hand(const TruncatedSeries& a) {
  TruncatedSeries d[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) d[i][j] = diff(diff(a, i + 1), j + 1);
  return d[0][0] * d[1][1] + d[0][0] * d[2][2] + d[1][1] * d[2][2] - d[0][1] * d[0][1] - d[0][2] * d[0][2] -
         d[1][2] * d[1][2];
}

HandlePtr quadratic(std::initializer_list<std::pair<MultiIndex, Rational>> terms, int cap, double radius) {
  TruncatedSeries s(cap);
  for (const auto& [e, c] : terms) s.set(e, c);
  return std::make_shared<SeriesHandle>(s, radius);
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (int m = 2; m <= 6; ++m) {
    const auto a = coeff_a(m);
    const auto want = oracle::seed_coefficients_closed_form(m);
    bool same = a.size() == want.size();
    for (std::size_t j = 0; same && j < a.size(); ++j) same = a[j] == want[j];
    o.require(same, "a_j closed form at m=" + std::to_string(m));
  }
  for (int m = 2; m <= 5; ++m) {
    for (const Rational eps : {Rational(0), Rational(1, 100)}) {
      const auto b = build_components({m, eps, Rational(1, 10)}, 4 * m);
      o.require(tilde_laplacian_by_hand(b.h).is_zero(), "tilde-Laplacian h at m=" + std::to_string(m));
      o.require(tilde_laplacian_by_hand(b.H).is_zero(), "tilde-Laplacian H at m=" + std::to_string(m));
      o.require((tilde_laplacian_by_hand(b.Q) + sigma2_by_hand(b.h)).is_zero(), "Q balance at m=" + std::to_string(m));
      if (m <= 4) {
        const auto order = low_order(sigma2_by_hand(b.P) - TruncatedSeries::constant(4 * m - 2, 1));
        o.require(!order || *order >= 3 * m - 3, "sigma2(D^2 P) - 1 order at m=" + std::to_string(m));
      }
    }
  }
  const double secs = seconds_since(t0);
  o.require(secs < 30, "runtime < 30 s");
  o.note("m=2..6 a_j, m=2..5 identities, m=2..4 orders, eps in {0, 1/100}, " + fmt(secs, 3) + " s");
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  // Quadratic data: the solver must add lambda_3 x3^2 / 2 with sigma_2 = 1.
  for (const auto& [l1, l2] : std::vector<std::pair<Rational, Rational>>{{1, 1}, {2, 1}, {3, Rational(1, 2)}}) {
    TruncatedSeries data(8);
    data.set({2, 0, 0}, l1 / 2);
    data.set({0, 2, 0}, l2 / 2);
    const auto u = ck_solve(CauchyData::from_series(data), 8);
    Rational l3 = (1 - l1 * l2) / (l1 + l2);
    l3.canonicalize();
    TruncatedSeries want = data;
    want.set({0, 0, 2}, l3 / 2);
    o.require((u - want).is_zero(), "quadratic data lambda = (" + format_rational(l1) + ", " + format_rational(l2) + ")");
  }
  const int m = 2, cap = 8;
  const SeedParams p{m, Rational(1, 160), Rational(1, 10)};
  const auto P = build_P(p, cap);
  const auto u = ck_solve(CauchyData::from_series(P), cap);
  const auto res = residual_order(u);
  const auto agree = low_order(u - P);
  o.require(!res || *res > cap - 2, "residual order > cap - 2");
  o.require(agree && *agree >= 2 * m, "low_order(u - P) >= 2m");
  const double secs = seconds_since(t0);
  o.require(secs < 120, "runtime < 2 min");
  o.note("residual order " + (res ? std::to_string(*res) : std::string("above cap")) + ", agreement order " +
         (agree ? std::to_string(*agree) : std::string("above cap")) + ", " + fmt(secs, 3) + " s");
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (int m : {2, 3}) {
    const auto& s = series(m);
    const auto& rep = s.report;
    const double s12 = rep.fitted["slope_lambda12"].get<double>(), s3 = rep.fitted["slope_lambda3"].get<double>();
    const std::string tag = " at m=" + std::to_string(m);
    o.require(rep.samples["shells"] == 40 && rep.samples["dirs"] == 64, "40 x 64 sampling" + tag);
    o.require(std::abs(s12 - (m - 1)) <= 0.2, "lambda_12 slope" + tag);
    o.require(std::abs(s3 - (2 * m - 2)) <= 0.2, "lambda_3 slope" + tag);
    o.require(!rep.failed_checks().size() || std::find(rep.failed_checks().begin(), rep.failed_checks().end(),
                                                       "lambda3_negative") == rep.failed_checks().end(),
              "all lambda_3 < 0" + tag);
    const auto grad = verify_property_2_4(*s.series, m, 40, 64, 42, s.params.eps.get_d());
    const double d3 = grad.fitted["delta3"].get<double>(), d4 = grad.fitted["delta4"].get<double>();
    o.require(d3 > 0 && std::isfinite(d4) && d4 > 0, "positive delta_3, delta_4" + tag);
    o.note("m=" + std::to_string(m) + " slopes " + fmt(s12) + "/" + fmt(s3) + ", delta3 " + fmt(d3, 3) + ", delta4 " +
           fmt(d4, 3));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 60, "runtime < 1 min");
  o.note(fmt(secs, 3) + " s");
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto control = quadratic({{{2, 0, 0}, Rational(1, 2)}, {{0, 2, 0}, Rational(1, 2)}}, 4, 1.0);
  double worst_push = 0, worst_ratio = 1e300, worst_phase = 0;
  for (double alpha : {0.2, std::numbers::pi / 8}) {
    const auto map = rotate_graph(graph_map(control), RotationAngles::horizontal(alpha));
    const SymMat3 h = pushforward_hessian(*map, Point3(0, 0, 0)).hessian;
    const double t = std::tan(std::numbers::pi / 4 - alpha);
    const SymMat3 want = SymMat3::diag(t, t, 0);
    for (double d : {h.xx - want.xx, h.yy - want.yy, h.zz - want.zz, h.xy, h.xz, h.yz})
      worst_push = std::max(worst_push, std::abs(d));

    const auto rotated = rotate_graph(graph_map(series(2).scaled), RotationAngles::horizontal(alpha));
    const auto graph = check_graph_condition(*rotated, 10000, 7);
    worst_ratio = std::min(worst_ratio, graph.fitted["min_ratio"].get<double>());

    const double theta = 2 * alpha;
    const auto phase = phase_conservation(*singular(2, theta).handle, theta, 2000, 11, 1e-6);
    worst_phase = std::max(worst_phase, phase.fitted["max_deviation"].get<double>());
  }
  o.require(worst_push <= 1e-10, "pushforward of the quadratic control");
  o.require(worst_ratio >= 0.25, "distance expansion >= 1/4");
  o.require(worst_phase <= 1e-6, "phase conservation");
  o.note("alpha in {0.2, pi/8}: pushforward error " + fmt(worst_push, 3) + ", min expansion ratio " +
         fmt(worst_ratio) + " over 1e4 pairs, phase deviation " + fmt(worst_phase, 3));
  return o;
}

Outcome criterion5() {
  Outcome o;
  // f = (x1^2 + x2^2) / 2 - x3^2 inverts to x = (t1, t2, -t3 / 2).
  const auto diag = quadratic({{{2, 0, 0}, Rational(1, 2)}, {{0, 2, 0}, Rational(1, 2)}, {{0, 0, 2}, -1}}, 4, 4.0);
  double worst = 0;
  for (const Vec3 t : {Vec3{0.1, -0.2, 0.4}, Vec3{-0.3, 0.05, -0.6}, Vec3{0.0, 0.0, 1e-7}}) {
    const Point3 x = invert_point(diag, {2.0, 1.0, 0.5}, t);
    worst = std::max({worst, std::abs(x.x1 - t[0]), std::abs(x.x2 - t[1]), std::abs(x.x3 + t[2] / 2)});
  }
  // f = (x1^2 + x2^2) / 2 - x3^4 / 4 has f3 = -x3^3, inverted by a cube root.
  const auto quartic =
      quadratic({{{2, 0, 0}, Rational(1, 2)}, {{0, 2, 0}, Rational(1, 2)}, {{0, 0, 4}, Rational(-1, 4)}}, 6, 4.0);
  for (const Vec3 t : {Vec3{0.02, -0.01, 1e-12}, Vec3{0.0, 0.0, 0.008}, Vec3{0.1, 0.1, -0.3}}) {
    const Point3 x = invert_point(quartic, {2.0, 1.0, 0.5}, t);
    worst = std::max({worst, std::abs(x.x1 - t[0]), std::abs(x.x2 - t[1]), std::abs(x.x3 + std::cbrt(t[2]))});
  }
  o.require(worst <= 1e-10, "closed-form inverses");
  const auto& s = singular(2, 0.4);
  const auto rep = inversion_properties(*s.inverse, 1000, 5);
  const double kappa = s.hyp.kappa;
  const auto check_value = [&](const std::string& name) {
    for (const auto& c : rep.checks)
      if (c["name"] == name) return c["value"].get<double>();
    return std::nan("");
  };
  const double rt = std::max(check_value("round_trip_preimage"), check_value("round_trip_image"));
  const double expansion = check_value("expansion"), mono = check_value("vertical_monotone");
  const int used = rep.fitted["round_trip_points"].get<int>();
  o.require(used >= 1000, "1e3 round-trip points");
  o.require(rt <= 1e-8, "round trip");
  o.require(expansion >= kappa / std::sqrt(2.0), "expansion >= kappa / sqrt 2");
  o.require(mono < 0, "vertical monotonicity");
  o.note("oracle error " + fmt(worst, 3) + ", round trip " + fmt(rt, 3) + " on " + std::to_string(used) + " points, expansion " +
         fmt(expansion) + " vs " + fmt(kappa / std::sqrt(2.0)) + ", max y3 difference " + fmt(mono, 3));
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (int m : {2, 3}) {
    const auto rep = holder_exponent(*singular(m, 0.0).handle, m, 42);
    const double want = 1.0 / (2 * m - 1);
    const double got = rep.fitted["axis_exponent"].get<double>();
    const double trend = rep.fitted["seminorm_trend_slope"].get<double>();
    const auto scales = rep.margins["seminorm_by_scale"];
    const double decades = std::log10(scales.back()[0].get<double>() / scales.front()[0].get<double>());
    const std::string tag = " at m=" + std::to_string(m);
    o.require(std::abs(got - want) <= 0.02, "axis exponent" + tag);
    o.require(trend < 0.05 && decades >= 4 - 1e-9, "bounded seminorm" + tag);
    o.note("m=" + std::to_string(m) + " exponent " + fmt(got, 6) + " (want " + fmt(want, 6) + "), trend " +
           fmt(trend, 3));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 120, "runtime < 2 min");
  o.note(fmt(secs, 3) + " s");
  return o;
}

// Slopes, threshold and Monte-Carlo size of a Sobolev report against the closed forms.
void judge_sobolev(const Json& rep, int m, Outcome& o) {
  const double p_star = (2.0 * m + 1) / (2.0 * m - 2);
  const std::string tag = " at m=" + std::to_string(m);
  o.require(rep["samples"]["samples_per_shell"].get<int>() >= 1000000, "1e6 samples per shell" + tag);
  double flip = std::nan("");
  const auto& rows = rep["margins"]["profiles"];
  for (std::size_t j = 0; j + 1 < rows.size(); ++j) {
    const double a = rows[j]["slope"], b = rows[j + 1]["slope"];
    if (a > 0 && b <= 0) {
      const double pa = rows[j]["p"], pb = rows[j + 1]["p"];
      flip = pa + (pb - pa) * a / (a - b);
      break;
    }
  }
  o.require(std::abs(flip - p_star) <= 0.05, "threshold" + tag);
  double worst = 0;
  for (const auto& row : rows) {
    const double p = row["p"];
    if (p != 1.0 && p != 1.5 && p != 2.0) continue;
    const double want = 3 + (2 * m - 2) * (1 - p);
    const double rel = std::abs(row["slope"].get<double>() - want) / std::abs(want);
    worst = std::max(worst, rel);
    o.require(rel <= 0.05, "slope at p=" + fmt(p) + tag);
  }
  o.note("m=" + std::to_string(m) + " p* " + fmt(flip, 6) + " (want " + fmt(p_star, 6) + "), worst slope error " +
         fmt(100 * worst, 3) + "%");
}

Outcome criterion7(const fs::path& run) {
  Outcome o;
  judge_sobolev(read_json(run / "09-sobolev.json"), 2, o);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = sobolev_profile(singular(3, 0.0), SobolevOptions{});
  const double secs = seconds_since(t0);
  judge_sobolev(rep.to_json(), 3, o);
  o.require(secs < 300, "runtime < 5 min");
  o.note("m=3 in " + fmt(secs, 3) + " s");
  return o;
}

Outcome criterion8(const fs::path& run) {
  Outcome o;
  const Json rep = read_json(run / "11-weak-residual.json");
  const std::vector<double> deltas{0.1, 0.05, 0.02, 0.01};
  o.require(rep["samples"]["m"] == 2, "m = 2");
  o.require(rep["samples"]["deltas"].get<std::vector<double>>() == deltas, "delta list");
  const auto fields = rep["samples"]["fields"].get<std::vector<std::string>>();
  o.require(fields.size() == 3, "three catalog fields");
  for (const auto& id : fields) {
    const auto& table = rep["margins"][id]["residual_by_delta"];
    std::map<double, double> by_delta;
    for (const auto& row : table) by_delta[row[0].get<double>()] = std::abs(row[1].get<double>());
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < deltas.size(); ++i) monotone = monotone && by_delta.at(deltas[i + 1]) < by_delta.at(deltas[i]);
    const double r0 = std::abs(rep["fitted"][id]["extrapolated_R0"].get<double>());
    o.require(monotone, "monotone |R| for " + id);
    o.require(r0 < 1e-6, "extrapolated |R(0)| for " + id);
    o.note(id + " |R(0)| " + fmt(r0, 3));
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  const std::vector<double> eps_list{0.1, 0.05, 0.025};
  const auto rep = family_sweep({2, 0.0, 0.1}, eps_list, series(2), 1000, 42);
  const auto& rows = rep.fitted["rows"];
  double lo = 1e300, hi = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double eps = rows[i]["eps"], lam = rows[i]["lambda_max_origin"], sup = rows[i]["sup_grad"];
    o.require(eps == eps_list[i], "eps kept at " + fmt(eps_list[i]));
    o.require(std::abs(lam * std::tan(eps) - 1) <= 0.05, "lambda_max tan eps at eps=" + fmt(eps));
    lo = std::min(lo, sup);
    hi = std::max(hi, sup);
    o.note("eps " + fmt(eps) + ": lambda tan eps " + fmt(lam * std::tan(eps), 8) + ", sup|Du| " + fmt(sup));
  }
  for (const auto& c : rep.checks) {
    const std::string name = c["name"];
    if (name.find("interior_hessian_maximum") != std::string::npos)
      o.require(c["pass"].get<bool>(), name + " on 1e3 neighbours");
  }
  o.require(hi / lo < 2, "sup|Du| spread < 2x (ratio " + fmt(hi / lo) + ")");
  return o;
}

Outcome criterion10(const fs::path& a, const fs::path& b) {
  Outcome o;
  std::set<std::string> names;
  for (const auto& dir : {a, b})
    for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
  int compared = 0;
  for (const auto& n : names) {
    if (n == "metadata.json" || n == "config.txt") continue;
    const bool same = fs::exists(a / n) && fs::exists(b / n) && read_bytes(a / n) == read_bytes(b / n);
    o.require(same, "identical " + n);
    ++compared;
  }
  auto strip_out = [](const fs::path& p) {
    RunConfig c = load_config(p);
    c.out.clear();
    return serialize_config(c);
  };
  o.require(strip_out(a / "config.txt") == strip_out(b / "config.txt"), "identical config");
  o.note(std::to_string(compared) + " artifacts compared byte for byte");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "slag-acceptance";
  fs::create_directories(work);
  // Criteria whose failure is recorded and analysed; a pass here is reported as unexpected.
  const std::set<int> expected_failures{9};

  const std::map<int, std::string> titles{
      {1, "exact seed identities"},      {2, "Cauchy-Kowalevskaya solver"},
      {3, "eigenvalue asymptotics"},     {4, "rotation suite"},
      {5, "gradient inverter"},          {6, "Hoelder exponents"},
      {7, "Sobolev thresholds"},         {8, "weak residual"},
      {9, "smooth family"},              {10, "determinism of the default pipeline"}};

  RunConfig cfg;
  const fs::path run_a = work / "run-a", run_b = work / "run-b";
  int pipeline_a = -1;
  auto ensure_run_a = [&] {
    if (pipeline_a < 0) {
      cfg.out = run_a.string();
      pipeline_a = run_pipeline(cfg);
    }
  };

  int unexpected = 0;
  for (int k = 1; k <= 10; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      switch (k) {
        case 1: o = criterion1(); break;
        case 2: o = criterion2(); break;
        case 3: o = criterion3(); break;
        case 4: o = criterion4(); break;
        case 5: o = criterion5(); break;
        case 6: o = criterion6(); break;
        case 7: ensure_run_a(); o = criterion7(run_a); break;
        case 8: ensure_run_a(); o = criterion8(run_a); break;
        case 9: o = criterion9(); break;
        case 10: {
          ensure_run_a();
          cfg.out = run_b.string();
          const int pipeline_b = run_pipeline(cfg);
          o = criterion10(run_a, run_b);
          o.require(pipeline_a == 0 && pipeline_b == 0, "default pipeline exit status 0");
          break;
        }
      }
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("error: ") + e.what());
    }
    const bool expected_fail = expected_failures.count(k) > 0;
    if (o.pass == expected_fail) ++unexpected;
    std::string status = o.pass ? "PASS" : "FAIL";
    if (expected_fail) status += o.pass ? " (unexpected pass)" : " (expected)";
    std::printf("criterion %2d [PRIMARY] %-36s %s  %.1f s  %s\n", k, titles.at(k).c_str(), status.c_str(),
                seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  return unexpected == 0 ? 0 : 1;
}
