#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "axisym/field.hpp"

namespace axisym {

/// amp * exp(-((r - rc)/sr)^2 - ((z - zc)/sz)^2)
struct GaussianBump {
  double amp = 1.0;
  double rc = 1.0;
  double zc = 0.0;
  double sr = 1.0;
  double sz = 1.0;
};

struct MixtureOptions {
  int min_count = 1;
  int max_count = 4;
  double rc_lo = 0.5, rc_hi = 6.0;
  double zc_abs = 6.0;
  double width_lo = 0.3, width_hi = 1.5;
  bool random_signs = true;
};

std::vector<GaussianBump> draw_mixture(std::mt19937_64& rng, const MixtureOptions& opt = {});

enum class AxisFactor {
  none,    // the bumps as drawn
  linear,  // multiplied by r, so the field vanishes linearly on the axis
};

/// Renders the mixture on the grid; each anisotropic bump is separable, so
/// only nr + nz exponentials are needed per bump.
ScalarField render_mixture(const Grid& grid, const std::vector<GaussianBump>& bumps,
                           Quantity tag = Quantity::generic, AxisFactor axis = AxisFactor::none);

/// Settings shared by the sampled inequality checks on a fixed grid.
struct SampledCheckOptions {
  Grid grid = Grid(32, 64, 8.0, 8.0);
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  double rescale = 1.0;  // evaluate on the grid with lengths divided by rescale
};

/// Mixture settings that keep the bumps well inside the grid.
MixtureOptions mixture_for(const Grid& grid);

/// Bumps with all lengths divided by lambda.
std::vector<GaussianBump> rescaled_bumps(std::vector<GaussianBump> bumps, double lambda);

/// Uniform draw in log space on [lo, hi].
double log_uniform(std::mt19937_64& rng, double lo, double hi);

}  // namespace axisym
