#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace axisym {

/// Outcome of a sampled inequality check: the running supremum of
/// lhs/rhs over random inputs, recorded at log-spaced sample counts.
struct RatioReport {
  std::string suite;
  std::string variant;
  std::vector<double> exponents;
  double p = 0.0;
  double q = 0.0;
  double time_power = 0.0;
  std::int64_t samples = 0;   // requested
  std::int64_t evaluated = 0; // samples with a finite, well-defined ratio
  double sup_ratio = 0.0;
  /// Least-squares slope of sup(N)/sup(N_max) against log10 N over the checkpoints,
  /// i.e. the relative growth of the supremum per decade of samples.
  double trend_slope = 0.0;
  std::vector<std::int64_t> checkpoint_counts;
  std::vector<double> checkpoint_sups;

  bool finite() const;
  bool bounded(double max_trend = 0.05) const { return finite() && trend_slope <= max_trend; }
};

/// Ratio sampler: returns lhs/rhs for one random draw, or NaN when the draw is
/// degenerate (e.g. zero input) and must be excluded.
using RatioSampler = std::function<double(std::mt19937_64& rng)>;

/// Draws `samples` ratios, each from its own generator seeded by (seed, index)
/// so that results do not depend on the thread count, and records the running
/// supremum at checkpoints log-spaced over the final decade.
RatioReport run_ratio_suite(std::int64_t samples, std::uint64_t seed, const RatioSampler& sampler,
                            int checkpoints = 9);

/// Recomputes the trend slope from the checkpoint arrays.
double sup_trend_slope(const std::vector<std::int64_t>& counts, const std::vector<double>& sups);

/// Seed for sample `index` of a stream (splitmix64 of the pair).
std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace axisym
