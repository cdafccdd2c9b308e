#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "slag/cksolve.hpp"
#include "slag/errors.hpp"
#include "slag/pipeline.hpp"
#include "slag/seed.hpp"

using namespace slag;

namespace {

struct Flags {
  std::string m, theta, eps, cap, seed, out, config;
};

void add_common(CLI::App* cmd, Flags& f, const std::string& eps_help, const std::string& out_help) {
  cmd->add_option("--m", f.m, "singularity order, at least 2");
  cmd->add_option("--theta", f.theta, "target phase in (-pi/2, pi/2)");
  cmd->add_option("--eps", f.eps, eps_help);
  cmd->add_option("--cap", f.cap, "series truncation degree");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--out", f.out, out_help);
  cmd->add_option("--config", f.config, "key = value configuration file");
}

// Defaults, then the config file, then explicit flags.
RunConfig resolve(const Flags& f, const std::string& eps_key) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = load_config(f.config);
  if (!f.m.empty()) set_config_value(cfg, "m", f.m);
  if (!f.theta.empty()) set_config_value(cfg, "theta", f.theta);
  if (!f.eps.empty()) set_config_value(cfg, eps_key, f.eps);
  if (!f.cap.empty()) set_config_value(cfg, "cap", f.cap);
  if (!f.seed.empty()) set_config_value(cfg, "seed", f.seed);
  return cfg;
}

void write_output(const Json& doc, const std::string& path) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParameterError("cannot write " + path);
  f << text;
}

// Runs stages of one session; a single stage writes its report, several a keyed object.
int run_stages(const RunConfig& cfg, const std::vector<std::string>& stages, const std::string& out) {
  Session session(cfg);
  Json doc = Json::object();
  bool ok = true;
  for (const auto& s : stages) {
    const auto rep = session.stage(s);
    ok = ok && rep.pass();
    doc[s] = rep.to_json();
  }
  write_output(stages.size() == 1 ? doc[stages.front()] : doc, out);
  return ok ? kPass : kVerificationFailed;
}

Json bundle_json(const SeedBundle& b, int cap) {
  Json a = Json::array();
  for (const auto& c : b.a) a.push_back(format_rational(c));
  return {{"params", {{"m", b.params.m}, {"eps", format_rational(b.params.eps)}, {"eta", format_rational(b.params.eta)}}},
          {"cap", cap},
          {"a", a},
          {"P", to_json(b.P)},
          {"h", to_json(b.h)},
          {"Q", to_json(b.Q)},
          {"H", to_json(b.H)}};
}

Json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParameterError("cannot read " + path);
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("malformed " + path + ": " + e.what());
  }
}

SeedParams seed_params(const RunConfig& cfg) {
  SeedParams p;
  p.m = cfg.m;
  const auto e = cfg.seed_eps();
  p.eps = e ? *e : Rational(1, 40 * cfg.m * cfg.m);
  p.eps.canonicalize();
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Singular special Lagrangian solutions: construction and verification"};
  app.require_subcommand(1);

  const std::string seed_eps_help = "seed perturbation (rational or 'auto')";
  Flags f_seed, f_solve, f_verify, f_rotate, f_invert, f_holder, f_sob, f_mss, f_family, f_run;

  auto* build_seed = app.add_subcommand("build-seed", "exact seed polynomial and its identities");
  add_common(build_seed, f_seed, seed_eps_help, "output JSON file (stdout when omitted)");

  auto* solve = app.add_subcommand("solve", "Cauchy-Kowalevskaya series solution");
  add_common(solve, f_solve, seed_eps_help, "output JSON file (stdout when omitted)");

  auto* verify = app.add_subcommand("verify", "run one verification suite");
  add_common(verify, f_verify, seed_eps_help, "output JSON file (stdout when omitted)");
  std::string suite;
  verify->add_option("--suite", suite, "2.1, 2.2, 2.4, 3.x, holder, sobolev, mss or family")->required();

  struct Single {
    CLI::App* cmd;
    Flags* flags;
    std::vector<std::string> stages;
    std::string eps_key;
  };
  std::vector<Single> singles = {
      {app.add_subcommand("rotate", "horizontal rotation and rotated properties"), &f_rotate,
       {"rotate", "verify-3.x"}, "eps"},
      {app.add_subcommand("invert", "gradient inversion of the rotated solution"), &f_invert, {"invert"}, "eps"},
      {app.add_subcommand("holder", "Hoelder exponent of the singular gradient"), &f_holder, {"holder"}, "eps"},
      {app.add_subcommand("sobolev", "shell integrals of the Sobolev norms"), &f_sob, {"sobolev"}, "eps"},
      {app.add_subcommand("mss-residual", "minimal surface system metric and weak residual"), &f_mss,
       {"mss", "weak-residual"}, "eps"},
      {app.add_subcommand("family", "smooth family with a Hessian maximum at the origin"), &f_family, {"family"},
       "family_eps"},
  };
  for (auto& s : singles)
    add_common(s.cmd, *s.flags, s.eps_key == "eps" ? seed_eps_help : "family rotation parameter in (0, gamma)",
               "output JSON file (stdout when omitted)");

  auto* run = app.add_subcommand("run", "full pipeline into an output directory");
  add_common(run, f_run, seed_eps_help, "output directory");

  auto* plots = app.add_subcommand("emit-plots", "long-format CSV from report files or run directories");
  std::vector<std::string> inputs;
  std::string plot_out, run_id;
  plots->add_option("reports", inputs, "report files or run directories")->required();
  plots->add_option("--out", plot_out, "output CSV file (stdout when omitted)");
  plots->add_option("--run-id", run_id, "run id column (parent directory name when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsageError;
  }

  try {
    if (build_seed->parsed()) {
      auto cfg = resolve(f_seed, "eps");
      if (f_seed.cap.empty()) cfg.cap = default_cap(cfg.m);
      const auto p = seed_params(cfg);
      const auto rep = verify_property_2_1(p, cfg.cap);
      Json doc = bundle_json(build_components(p, cfg.cap), cfg.cap);
      doc["report"] = rep.to_json();
      write_output(doc, f_seed.out);
      return rep.pass() ? kPass : kVerificationFailed;
    }
    if (solve->parsed()) {
      // A non-numeric --seed names a bundle written by build-seed.
      std::string seed_file;
      if (!f_solve.seed.empty() && f_solve.seed.find_first_not_of("0123456789") != std::string::npos)
        std::swap(seed_file, f_solve.seed);
      auto cfg = resolve(f_solve, "eps");
      TruncatedSeries P;
      int m = cfg.m;
      int cap = cfg.cap;
      if (!seed_file.empty()) {
        const Json doc = read_json(seed_file);
        P = series_from_json(doc.at("P"));
        m = doc.at("params").at("m").get<int>();
        if (f_solve.cap.empty()) cap = P.cap();
      } else {
        if (cap < 2 * m) throw ParameterError("cap " + std::to_string(cap) + " is below 2m = " + std::to_string(2 * m));
        P = build_P(seed_params(cfg), cap);
      }
      const auto u = ck_solve(CauchyData::from_series(P), cap);
      const auto rep = verify_ck_solution(u, P.truncated(cap), m);
      write_output({{"u", to_json(u)}, {"report", rep.to_json()}}, f_solve.out);
      return rep.pass() ? kPass : kVerificationFailed;
    }
    if (verify->parsed()) return run_stages(resolve(f_verify, "eps"), suite_stages(suite), f_verify.out);
    for (const auto& s : singles)
      if (s.cmd->parsed()) return run_stages(resolve(*s.flags, s.eps_key), s.stages, s.flags->out);
    if (run->parsed()) {
      auto cfg = resolve(f_run, "eps");
      if (!f_run.out.empty()) cfg.out = f_run.out;
      const int code = run_pipeline(cfg);
      std::cerr << "slag run: " << (code == kPass ? "all stages pass" : "FAILED, see " + cfg.out + "/FAILED") << "\n";
      return code;
    }
    if (plots->parsed()) {
      std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      const std::string csv = emit_plotdata(paths, run_id);
      if (plot_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream(plot_out, std::ios::binary) << csv;
      }
      return kPass;
    }
  } catch (const std::exception& e) {
    std::cerr << "slag: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kUsageError;
}
