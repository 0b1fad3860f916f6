#include "axisym/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace axisym {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

std::vector<GaussianBump> draw_mixture(std::mt19937_64& rng, const MixtureOptions& opt) {
  std::uniform_int_distribution<int> count(opt.min_count, opt.max_count);
  std::uniform_real_distribution<double> rc(opt.rc_lo, opt.rc_hi);
  std::uniform_real_distribution<double> zc(-opt.zc_abs, opt.zc_abs);
  std::uniform_real_distribution<double> amp(0.25, 1.0);
  std::bernoulli_distribution flip(0.5);
  const int n = count(rng);
  std::vector<GaussianBump> bumps(n);
  for (auto& b : bumps) {
    b.amp = amp(rng);
    if (opt.random_signs && flip(rng)) b.amp = -b.amp;
    b.rc = rc(rng);
    b.zc = zc(rng);
    b.sr = log_uniform(rng, opt.width_lo, opt.width_hi);
    b.sz = log_uniform(rng, opt.width_lo, opt.width_hi);
  }
  return bumps;
}

MixtureOptions mixture_for(const Grid& grid) {
  MixtureOptions mix;
  mix.rc_hi = std::min(mix.rc_hi, 0.6 * grid.r_max());
  mix.zc_abs = std::min(mix.zc_abs, 0.5 * grid.z_max());
  return mix;
}

std::vector<GaussianBump> rescaled_bumps(std::vector<GaussianBump> bumps, double lambda) {
  for (auto& b : bumps) {
    b.rc /= lambda;
    b.zc /= lambda;
    b.sr /= lambda;
    b.sz /= lambda;
  }
  return bumps;
}

ScalarField render_mixture(const Grid& grid, const std::vector<GaussianBump>& bumps, Quantity tag,
                           AxisFactor axis) {
  ScalarField f(grid, tag);
  std::vector<double> pr(grid.nr()), pz(grid.nz());
  for (const auto& b : bumps) {
    for (int i = 0; i < grid.nr(); ++i) {
      const double x = (grid.r(i) - b.rc) / b.sr;
      pr[i] = b.amp * std::exp(-x * x);
    }
    for (int k = 0; k < grid.nz(); ++k) {
      const double y = (grid.z(k) - b.zc) / b.sz;
      pz[k] = std::exp(-y * y);
    }
    for (int i = 0; i < grid.nr(); ++i) {
      if (pr[i] == 0.0) continue;
      double* row = f.row(i);
      for (int k = 0; k < grid.nz(); ++k) row[k] += pr[i] * pz[k];
    }
  }
  if (axis == AxisFactor::linear) {
    for (int i = 0; i < grid.nr(); ++i) {
      double* row = f.row(i);
      const double r = grid.r(i);
      for (int k = 0; k < grid.nz(); ++k) row[k] *= r;
    }
  }
  return f;
}

}  // namespace axisym
