#pragma once

// Deterministic random streams, direction sets, worker pools and small fits.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "slag/linalg.hpp"

namespace slag {

/// Derives an independent seed for stream `index` of a run seeded with `seed`.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

/// mt19937_64 with platform-independent uniform and normal draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  Vec3 unit_vector();
  /// Uniform point in the ball of radius r.
  Vec3 in_ball(double r);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// n nearly uniform unit vectors on the golden-angle spiral.
std::vector<Vec3> fibonacci_sphere(int n);

/// n radii spaced evenly in log between lo and hi, ascending.
std::vector<double> log_spaced(double lo, double hi, int n);

/// Worker count from SLAG_THREADS, else the hardware concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, n) on the worker pool. Bodies must only write to
/// per-index storage so the result does not depend on scheduling.
void parallel_for(int n, const std::function<void(int)>& body);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace slag
