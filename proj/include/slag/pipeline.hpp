#pragma once

// Run configuration, staged pipeline and plot-data emission behind the `slag` tool.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slag/analysis.hpp"

namespace slag {

/// Flat key/value run configuration. Every key has a default; see `config_keys()`.
struct RunConfig {
  int m = 2;
  double theta = 0.0;
  std::string eps = "auto";  // seed perturbation: "auto" searches from 1/(40 m^2), else a fixed rational
  int cap = 24;
  std::uint64_t seed = 42;
  int shells = 40;
  int dirs = 64;
  double radius_phase_tol = 1e-10;  // |sigma_2 - 1| screen when choosing the series radius
  int sobolev_samples = 1000000;
  int sobolev_shells = 8;
  std::vector<double> weak_deltas{0.1, 0.05, 0.02, 0.01};
  std::vector<std::string> weak_fields{"bump-a", "bump-b", "bump-c"};
  int mss_points = 100;
  double family_eps = 0.1;
  int family_neighbors = 1000;
  std::string out = "slag-run";

  bool operator==(const RunConfig&) const = default;

  /// Fixed rational for the seed, or nullopt when searching.
  std::optional<Rational> seed_eps() const;
  /// Throws ParameterError on values outside their domains.
  void validate() const;
};

const std::vector<std::string>& config_keys();
/// Parses `key = value` lines; '#' starts a comment. Unknown keys and malformed values throw
/// ParameterError. Keys not mentioned keep `base` values.
RunConfig parse_config(const std::string& text, const RunConfig& base = {});
RunConfig load_config(const std::filesystem::path& path, const RunConfig& base = {});
/// One `key = value` line per key, in `config_keys()` order, with shortest round-trip numbers.
std::string serialize_config(const RunConfig& cfg);
/// Applies a single key; used for command-line overrides.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Lazily built solutions shared by the stages of one configuration.
class Session {
 public:
  explicit Session(RunConfig cfg);

  const RunConfig& config() const { return cfg_; }
  const SeriesSolution& series();
  const SingularSolution& singular();
  const SmoothFamily& family();

  /// Runs one stage by name and returns its report. See `stage_names()`.
  VerificationReport stage(const std::string& name);

 private:
  RunConfig cfg_;
  std::optional<SeriesSolution> series_;
  std::optional<SingularSolution> singular_;
  std::optional<SmoothFamily> family_;
};

/// seed, solve, verify-2.2, verify-2.4, rotate, verify-3.x, invert, holder, sobolev, mss,
/// weak-residual, family.
const std::vector<std::string>& stage_names();
/// Maps a `verify --suite` name (2.1, 2.2, 2.4, 3.x, holder, sobolev, mss, family) to stages.
std::vector<std::string> suite_stages(const std::string& suite);

enum ExitCode : int { kPass = 0, kVerificationFailed = 1, kUsageError = 2, kNumericalFailure = 3 };

/// Exit code for an exception escaping a stage.
int exit_code_for(const std::exception& e);

/// Runs every stage in order into cfg.out: NN-<stage>.json per stage, summary.json,
/// config.txt, metadata.json (timestamps and durations only) and FAILED on the first
/// failing gate or error. Returns the exit code.
int run_pipeline(const RunConfig& cfg);

/// Per-point sample table of a handle: r, direction id, lambda_1..3, phase, |Du|.
std::string sample_table_csv(const SolutionHandle& h, int shells, int dirs);

/// Long-format plot table (run_id, property, series, r, value) from report files.
/// A directory argument expands to its NN-*.json reports. Throws ParameterError for a
/// missing path.
std::string emit_plotdata(const std::vector<std::filesystem::path>& reports, const std::string& run_id = "");

inline constexpr int kPlotdataSchemaVersion = 1;

}  // namespace slag
