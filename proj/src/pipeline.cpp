#include "slag/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "slag/errors.hpp"
#include "slag/geometry.hpp"
#include "slag/sampling.hpp"

namespace slag {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size())
    throw ParameterError("config key '" + key + "': cannot parse '" + text + "'");
  return v;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number<double>(key, item));
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string join(const std::vector<double>& items) {
  std::vector<std::string> parts;
  for (double v : items) parts.push_back(format_number(v));
  return join(parts);
}

std::string config_value(const RunConfig& c, const std::string& key) {
  if (key == "m") return std::to_string(c.m);
  if (key == "theta") return format_number(c.theta);
  if (key == "eps") return c.eps;
  if (key == "cap") return std::to_string(c.cap);
  if (key == "seed") return std::to_string(c.seed);
  if (key == "shells") return std::to_string(c.shells);
  if (key == "dirs") return std::to_string(c.dirs);
  if (key == "radius_phase_tol") return format_number(c.radius_phase_tol);
  if (key == "sobolev_samples") return std::to_string(c.sobolev_samples);
  if (key == "sobolev_shells") return std::to_string(c.sobolev_shells);
  if (key == "weak_deltas") return join(c.weak_deltas);
  if (key == "weak_fields") return join(c.weak_fields);
  if (key == "mss_points") return std::to_string(c.mss_points);
  if (key == "family_eps") return format_number(c.family_eps);
  if (key == "family_neighbors") return std::to_string(c.family_neighbors);
  if (key == "out") return c.out;
  throw ParameterError("unknown config key '" + key + "'");
}

// Keeps the checks, fitted values and margins filed under the given prefixes.
VerificationReport subreport(const VerificationReport& whole, const std::string& property,
                             const std::vector<std::string>& prefixes) {
  VerificationReport out(property);
  out.samples = whole.samples;
  for (const auto& p : prefixes) {
    if (whole.fitted.contains(p)) out.fitted[p] = whole.fitted[p];
    if (whole.margins.contains(p)) out.margins[p] = whole.margins[p];
  }
  for (const auto& c : whole.checks) {
    const auto name = c.at("name").get<std::string>();
    for (const auto& p : prefixes)
      if (name.rfind(p + ".", 0) == 0) out.checks.push_back(c);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParameterError("cannot write " + path.string());
  f << text;
}

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::optional<Rational> RunConfig::seed_eps() const {
  if (eps == "auto") return std::nullopt;
  return parse_rational(eps);
}

void RunConfig::validate() const {
  if (m < 2) throw ParameterError("m must be at least 2");
  if (!(std::abs(theta) < std::numbers::pi / 2)) throw ParameterError("theta must lie in (-pi/2, pi/2)");
  if (const auto e = seed_eps(); e && *e < 0) throw ParameterError("eps must be non-negative");
  if (shells < 4 || dirs < 4) throw ParameterError("shells and dirs must be at least 4");
  if (!(radius_phase_tol > 0)) throw ParameterError("radius_phase_tol must be positive");
  if (sobolev_samples < 1000 || sobolev_shells < 3) throw ParameterError("sobolev sampling too small");
  if (weak_deltas.empty() || weak_fields.empty()) throw ParameterError("weak residual lists must be non-empty");
  for (double d : weak_deltas)
    if (!(d > 0 && d < 1)) throw ParameterError("weak_deltas must lie in (0, 1)");
  for (const auto& id : weak_fields) test_field(id);
  if (mss_points < 1 || family_neighbors < 1) throw ParameterError("sample counts must be positive");
  if (out.empty()) throw ParameterError("out must name a directory");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"m",          "theta",           "eps",         "cap",
                                             "seed",       "shells",          "dirs",        "radius_phase_tol",
                                             "sobolev_samples", "sobolev_shells", "weak_deltas", "weak_fields",
                                             "mss_points", "family_eps",      "family_neighbors", "out"};
  return keys;
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "m") c.m = parse_number<int>(key, v);
  else if (key == "theta") c.theta = parse_number<double>(key, v);
  else if (key == "eps") {
    if (v != "auto") parse_rational(v);
    c.eps = v;
  } else if (key == "cap") c.cap = parse_number<int>(key, v);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "shells") c.shells = parse_number<int>(key, v);
  else if (key == "dirs") c.dirs = parse_number<int>(key, v);
  else if (key == "radius_phase_tol") c.radius_phase_tol = parse_number<double>(key, v);
  else if (key == "sobolev_samples") c.sobolev_samples = parse_number<int>(key, v);
  else if (key == "sobolev_shells") c.sobolev_shells = parse_number<int>(key, v);
  else if (key == "weak_deltas") c.weak_deltas = parse_doubles(key, v);
  else if (key == "weak_fields") c.weak_fields = split(v, ',');
  else if (key == "mss_points") c.mss_points = parse_number<int>(key, v);
  else if (key == "family_eps") c.family_eps = parse_number<double>(key, v);
  else if (key == "family_neighbors") c.family_neighbors = parse_number<int>(key, v);
  else if (key == "out") c.out = v;
  else throw ParameterError("unknown config key '" + key + "'");
}

RunConfig parse_config(const std::string& text, const RunConfig& base) {
  RunConfig c = base;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(c, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

RunConfig load_config(const fs::path& path, const RunConfig& base) {
  std::ifstream f(path);
  if (!f) throw ParameterError("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), base);
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : config_keys()) out += k + " = " + config_value(cfg, k) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Session

Session::Session(RunConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

const SeriesSolution& Session::series() {
  if (!series_) {
    SeriesOptions opt;
    opt.solve_cap = cfg_.cap;
    opt.phase_tol = cfg_.radius_phase_tol;
    opt.shells = cfg_.shells;
    opt.dirs = cfg_.dirs;
    opt.seed = cfg_.seed;
    if (const auto e = cfg_.seed_eps()) {
      opt.eps0 = *e;
      opt.search_eps = false;
    }
    series_ = build_series_solution(cfg_.m, opt);
  }
  return *series_;
}

const SingularSolution& Session::singular() {
  if (!singular_) singular_ = build_singular_solution({cfg_.m, cfg_.theta, cfg_.family_eps}, series(), cfg_.seed);
  return *singular_;
}

const SmoothFamily& Session::family() {
  if (!family_) family_ = build_smooth_family({cfg_.m, cfg_.theta, cfg_.family_eps}, series(), cfg_.seed);
  return *family_;
}

VerificationReport Session::stage(const std::string& name) {
  const int m = cfg_.m;
  if (name == "seed") return verify_property_2_1(series().params, cfg_.cap);
  if (name == "solve") {
    const auto& s = series();
    auto rep = verify_ck_solution(s.u, build_P(s.params, cfg_.cap), m);
    rep.samples["eps"] = format_rational(s.params.eps);
    rep.fitted["r_m"] = series().radius;
    rep.fitted["eps_trail"] = series().report.fitted["eps_trail"];
    return rep;
  }
  if (name == "verify-2.2") {
    auto rep = series().report;
    rep.fitted.erase("eps_trail");
    return rep;
  }
  if (name == "verify-2.4")
    return verify_property_2_4(*series().series, m, cfg_.shells, cfg_.dirs, cfg_.seed, series().params.eps.get_d());
  if (name == "rotate") {
    auto rep = subreport(singular().report, "rotation", {"rotate"});
    rep.fitted["alpha"] = singular().alpha;
    return rep;
  }
  if (name == "verify-3.x") return subreport(singular().report, "rotated-properties", {"rotated"});
  if (name == "invert") {
    auto rep = subreport(singular().report, "inversion", {"hypotheses", "invert", "phase"});
    for (const char* k : {"rho", "kappa", "solve_radius", "tau", "negated"}) rep.fitted[k] = singular().report.fitted[k];
    return rep;
  }
  if (name == "holder") return holder_exponent(*singular().handle, m, cfg_.seed);
  if (name == "sobolev") {
    SobolevOptions opt;
    opt.n_shells = cfg_.sobolev_shells;
    opt.samples_per_shell = cfg_.sobolev_samples;
    opt.seed = cfg_.seed;
    return sobolev_profile(singular(), opt);
  }
  if (name == "mss") return verify_mss(*singular().handle, m, cfg_.mss_points, cfg_.seed);
  if (name == "weak-residual") {
    VerificationReport rep("weak-residual");
    rep.samples = {{"m", m}, {"fields", cfg_.weak_fields}, {"deltas", cfg_.weak_deltas}};
    for (const auto& id : cfg_.weak_fields) rep.absorb(weak_residual(singular(), id, cfg_.weak_deltas), id);
    return rep;
  }
  if (name == "family") {
    VerificationReport rep("smooth-family");
    rep.samples = {{"m", m}, {"theta", cfg_.theta}, {"eps", cfg_.family_eps}, {"seed", cfg_.seed}};
    rep.absorb(family().report, "build");
    rep.absorb(verify_smooth_family(family(), cfg_.family_neighbors, cfg_.seed), "verify");
    return rep;
  }
  throw ParameterError("unknown stage '" + name + "'");
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"seed",   "solve",  "verify-2.2", "verify-2.4",
                                              "rotate", "verify-3.x", "invert", "holder",
                                              "sobolev", "mss",   "weak-residual", "family"};
  return names;
}

std::vector<std::string> suite_stages(const std::string& suite) {
  static const std::map<std::string, std::vector<std::string>> table{
      {"2.1", {"seed"}},          {"2.2", {"verify-2.2"}},          {"2.4", {"verify-2.4"}},
      {"3.x", {"rotate", "verify-3.x", "invert"}}, {"holder", {"holder"}}, {"sobolev", {"sobolev"}},
      {"mss", {"mss", "weak-residual"}},            {"family", {"family"}}};
  const auto it = table.find(suite);
  if (it == table.end()) throw ParameterError("unknown suite '" + suite + "'");
  return it->second;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParameterError*>(&e)) return kUsageError;
  if (dynamic_cast<const PipelineError*>(&e)) return kVerificationFailed;
  return kNumericalFailure;
}

// ---------------------------------------------------------------------------
// Pipeline

int run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name == "FAILED" || name == "summary.json" || (name.size() > 3 && name[2] == '-' && entry.path().extension() == ".json"))
      fs::remove(entry.path());
  }
  write_text(dir / "config.txt", serialize_config(cfg));

  Json meta = {{"started", iso_now()}, {"threads", worker_count()}, {"stage_seconds", Json::object()}};
  Json stages = Json::array();
  int code = kPass;
  std::string failure;
  Session session(cfg);
  const auto& names = stage_names();
  for (std::size_t i = 0; i < names.size() && code == kPass; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    char prefix[8];
    std::snprintf(prefix, sizeof prefix, "%02zu-", i + 1);
    const std::string file = prefix + names[i] + ".json";
    Json row = {{"stage", names[i]}, {"report", file}};
    try {
      const auto rep = session.stage(names[i]);
      write_text(dir / file, rep.to_json().dump(2) + "\n");
      row["pass"] = rep.pass();
      row["failed_checks"] = rep.failed_checks();
      if (!rep.pass()) {
        code = kVerificationFailed;
        failure = names[i] + ": verification failed (" + join(rep.failed_checks()) + ")";
      }
    } catch (const std::exception& e) {
      code = exit_code_for(e);
      failure = names[i] + ": " + e.what();
      row["report"] = nullptr;
      row["pass"] = false;
      row["error"] = e.what();
    }
    meta["stage_seconds"][names[i]] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stages.push_back(row);
  }
  if (code == kPass) {
    std::ofstream(dir / "samples.csv", std::ios::binary) << sample_table_csv(*session.singular().handle, 16, 32);
  }

  Json config = Json::object();
  for (const auto& k : config_keys())
    if (k != "out") config[k] = config_value(cfg, k);
  const Json summary = {{"config", config}, {"stages", stages}, {"pass", code == kPass}, {"exit_code", code}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  if (code != kPass) write_text(dir / "FAILED", failure + "\n");
  meta["finished"] = iso_now();
  write_text(dir / "metadata.json", meta.dump(2) + "\n");
  return code;
}

std::string sample_table_csv(const SolutionHandle& h, int shells, int dirs) {
  const auto radii = log_spaced(1e-3 * h.valid_radius(), 0.999 * h.valid_radius(), shells);
  const auto directions = fibonacci_sphere(dirs);
  std::string out = "r,direction_id,lambda1,lambda2,lambda3,phase,grad_norm\n";
  for (double r : radii) {
    for (int d = 0; d < dirs; ++d) {
      const Point3 y(r * directions[d]);
      const GradHess gh = h.grad_hess(y);
      const auto e = eig3_sym(gh.hessian);
      out += format_number(r) + "," + std::to_string(d);
      for (double l : e.lambda) out += "," + format_number(l);
      out += "," + format_number(e.phase) + "," + format_number(norm(gh.gradient)) + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plot data

namespace {

using Row = std::function<void(const std::string&, double, double)>;

void rows_from_report(const Json& doc, const Row& emit) {
  const std::string property = doc.value("property", "");
  const Json& fitted = doc["fitted"];
  const Json& margins = doc["margins"];
  if (property == "holder") {
    for (const auto& p : margins.value("axis_pairs", Json::array())) emit("axis_pairs", p[0], p[1]);
    for (const auto& p : margins.value("seminorm_by_scale", Json::array())) emit("seminorm", p[0], p[1]);
  } else if (property == "sobolev") {
    for (const auto& row : margins.value("profiles", Json::array())) {
      const std::string series = "p=" + format_number(row["p"].get<double>());
      const auto& ls = row["log2_shell_integrals"];
      for (std::size_t k = 0; k < ls.size(); ++k) emit(series, static_cast<double>(k), ls[k]);
    }
  } else if (property == "smooth-family") {
    const Json& v = fitted.value("verify", Json::object());
    const double eps = doc["samples"].value("eps", 0.0);
    if (v.contains("lambda_max_origin")) emit("lambda_max_origin", eps, v["lambda_max_origin"]);
    if (v.contains("sup_grad")) emit("sup_grad", eps, v["sup_grad"]);
  } else if (property == "family-sweep") {
    for (const auto& row : fitted.value("rows", Json::array())) {
      emit("lambda_max_origin", row["eps"], row["lambda_max_origin"]);
      emit("sup_grad", row["eps"], row["sup_grad"]);
    }
  } else if (property == "property-2.2") {
    for (const auto& row : margins.value("shell_table", Json::array())) {
      emit("max_abs_lambda12_minus_1", row[0], row[1]);
      emit("max_abs_lambda3", row[0], row[2]);
    }
  } else if (property == "mss") {
    for (const auto& row : margins.value("band_by_shell", Json::array())) {
      emit("band_min", row[0], row[1]);
      emit("band_max", row[0], row[2]);
    }
  } else if (property == "weak-residual") {
    for (const auto& [field, m] : margins.items())
      for (const auto& p : m.value("residual_by_delta", Json::array())) emit(field, p[0], p[1]);
  }
}

}  // namespace

std::string emit_plotdata(const std::vector<fs::path>& reports, const std::string& run_id) {
  std::vector<fs::path> files;
  for (const auto& p : reports) {
    if (!fs::exists(p)) throw ParameterError("missing report " + p.string());
    if (fs::is_directory(p)) {
      std::vector<fs::path> inside;
      for (const auto& e : fs::directory_iterator(p)) {
        const auto name = e.path().filename().string();
        if (e.path().extension() == ".json" && name.size() > 3 && name[2] == '-') inside.push_back(e.path());
      }
      std::sort(inside.begin(), inside.end());
      files.insert(files.end(), inside.begin(), inside.end());
    } else {
      files.push_back(p);
    }
  }
  std::string out = "run_id,property,series,r,value\n";
  for (const auto& f : files) {
    std::ifstream in(f);
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError("malformed report " + f.string() + ": " + e.what());
    }
    const std::string id = run_id.empty() ? fs::absolute(f).parent_path().filename().string() : run_id;
    const std::string property = doc.value("property", "");
    rows_from_report(doc, [&](const std::string& series, double r, double v) {
      out += id + "," + property + "," + series + "," + format_number(r) + "," + format_number(v) + "\n";
    });
  }
  return out;
}

}  // namespace slag
