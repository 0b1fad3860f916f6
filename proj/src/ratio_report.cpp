#include "axisym/ratio_report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "axisym/errors.hpp"

namespace axisym {

bool RatioReport::finite() const { return evaluated > 0 && std::isfinite(sup_ratio); }

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + index + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double sup_trend_slope(const std::vector<std::int64_t>& counts, const std::vector<double>& sups) {
  if (counts.size() < 2 || sups.size() != counts.size()) return 0.0;
  const double ref = sups.back();
  if (!(ref > 0.0) || !std::isfinite(ref)) return std::numeric_limits<double>::infinity();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const double x = std::log10(static_cast<double>(counts[j]));
    const double y = sups[j] / ref;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  return den > 0 ? (n * sxy - sx * sy) / den : 0.0;
}

RatioReport run_ratio_suite(std::int64_t samples, std::uint64_t seed, const RatioSampler& sampler,
                            int checkpoints) {
  if (samples < 1) throw DomainError("run_ratio_suite: samples must be >= 1");
  std::vector<double> ratios(static_cast<std::size_t>(samples));
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t s = 0; s < samples; ++s) {
    std::mt19937_64 rng(sample_seed(seed, static_cast<std::uint64_t>(s)));
    ratios[static_cast<std::size_t>(s)] = sampler(rng);
  }

  RatioReport report;
  report.samples = samples;
  std::vector<double> running(ratios.size());
  double sup = 0.0;
  bool saw_inf = false;
  for (std::size_t s = 0; s < ratios.size(); ++s) {
    const double r = ratios[s];
    if (std::isnan(r)) {
      running[s] = sup;
      continue;
    }
    ++report.evaluated;
    if (std::isinf(r)) saw_inf = true;
    sup = std::max(sup, r);
    running[s] = sup;
  }
  report.sup_ratio = saw_inf ? std::numeric_limits<double>::infinity() : sup;

  const int cps = std::max(2, checkpoints);
  for (int j = 0; j < cps; ++j) {
    const double frac = std::pow(10.0, -1.0 + static_cast<double>(j) / (cps - 1));
    auto n = static_cast<std::int64_t>(std::llround(frac * static_cast<double>(samples)));
    n = std::clamp<std::int64_t>(n, 1, samples);
    if (!report.checkpoint_counts.empty() && n <= report.checkpoint_counts.back()) continue;
    report.checkpoint_counts.push_back(n);
    report.checkpoint_sups.push_back(running[static_cast<std::size_t>(n - 1)]);
  }
  report.trend_slope = sup_trend_slope(report.checkpoint_counts, report.checkpoint_sups);
  return report;
}

}  // namespace axisym
