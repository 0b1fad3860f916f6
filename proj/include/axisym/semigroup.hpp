#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "axisym/field.hpp"
#include "axisym/ratio_report.hpp"
#include "axisym/zconv.hpp"

namespace axisym {

enum class ConvPath { direct, fft };
enum class Exec { serial, parallel };
/// How the kernel is integrated against the input.
///   cell:  exact integrals over each source cell of a piecewise-constant
///          input; second order, but every application adds the box variance
///          h^2/12, which compounds when S(dt) is composed many times.
///   point: midpoint sums against point values once t >= h^2/2 (spectrally
///          accurate there), falling back to cell integrals below that.
enum class SourceRule { cell, point };
const char* to_string(SourceRule rule);
/// h^2/2 with h the larger spacing; the midpoint sums are exact to ~1e-9 beyond it.
double point_threshold(const Grid& grid);

/// Discretized kernel of S(t). The kernel factorizes as
///   (1/(4 pi t)) (rb/r)^{1/2} H(t/(r rb)) e^{-(r-rb)^2/4t} e^{-(z-zb)^2/4t}
///   = K_t(r, rb) * g_t(z - zb),   g_t(x) = e^{-x^2/4t} / sqrt(4 pi t),
/// and every factor is integrated exactly over the source cell, treating
/// the input as piecewise constant. Derivatives of the input (div) are taken
/// of its piecewise-linear interpolant, pinned to zero on the axis and at
/// R_max, so that S(t) div v tends to centred differences as t -> 0.
struct SemigroupKernelPlan {
  double t = 0.0;
  std::uint64_t grid_hash = 0;
  bool point = false;          // built by midpoint sums rather than cell integrals
  int nr = 0, nz = 0;
  std::vector<double> plain;   // int_cell K_t(r_i, rb) drb
  std::vector<double> div_r;   // S(t) d/dr of the interpolant: staggered-cell averages of K_t, differenced
  std::vector<double> grad_r;  // int_cell d/dr K_t(r_i, rb) drb
  std::vector<int> col_lo, col_hi;  // nonzero source rows for each target row
  std::vector<double> zg;      // int_cell g_t, offsets m in (-nz, nz)
  std::vector<double> zd;      // S(t) d/dz of the interpolant: erf second differences / 2h_z, same layout
  int z_band = 0;              // |m| beyond which both z taps vanish to double precision
  std::vector<std::complex<double>> zg_hat, zd_hat;

  /// K_t(r, rb) and d/dr K_t(r, rb).
  static double r_profile(double t, double r, double rb);
  static double r_profile_dr(double t, double r, double rb);
};

/// S(t) and its div/grad variants on one grid, with a cache of plans by t.
class Semigroup {
 public:
  explicit Semigroup(const Grid& grid, ConvPath path = ConvPath::fft, Exec exec = Exec::parallel,
                     SourceRule rule = SourceRule::cell);

  const Grid& grid() const { return grid_; }
  SourceRule rule() const { return rule_; }
  /// Smallest t at which the point rule uses midpoint sums.
  double point_threshold() const;
  ConvPath path() const { return path_; }
  Exec exec() const { return exec_; }

  std::shared_ptr<const SemigroupKernelPlan> plan(double t) const;
  std::shared_ptr<const SemigroupKernelPlan> build_plan(double t) const;
  void clear_cache() const;
  std::size_t cached_plans() const;
  void set_cache_limit(std::size_t n) { cache_limit_ = n; }

  /// S(t) f; t = 0 returns f.
  ScalarField apply(double t, const ScalarField& f) const;
  /// S(t) (d/dr v_r + d/dz v_z), by integration by parts onto the kernel.
  ScalarField apply_div(double t, const ScalarField& vr, const ScalarField& vz) const;
  /// (d/dr, d/dz) S(t) f.
  std::pair<ScalarField, ScalarField> apply_grad(double t, const ScalarField& f) const;

  // Plan-level kernels, used directly by the solvers to share z-convolutions.
  void convolve_z(const SemigroupKernelPlan& plan, bool derivative, const ScalarField& in,
                  ScalarField& out) const;
  void mix_r(const std::vector<double>& matrix, const SemigroupKernelPlan& plan,
             const ScalarField& in, ScalarField& out, bool accumulate) const;

 private:
  Grid grid_;
  ConvPath path_;
  Exec exec_;
  SourceRule rule_;
  std::shared_ptr<ZConvolver> zconv_;
  std::size_t cache_limit_ = 4096;
  mutable std::mutex mutex_;
  mutable std::map<double, std::shared_ptr<const SemigroupKernelPlan>> cache_;
};

/// Shared operator for the field's grid (FFT path, parallel).
const Semigroup& semigroup_for(const Grid& grid, SourceRule rule = SourceRule::cell);

ScalarField apply_S(double t, const ScalarField& f);
ScalarField apply_S_div(double t, const ScalarField& vr, const ScalarField& vz);
std::pair<ScalarField, ScalarField> apply_grad_S(double t, const ScalarField& f);

// ---------------------------------------------------------------------------
// Sampled estimate checks.

enum class SemigroupItem { i, ii, iii };
const char* to_string(SemigroupItem item);

struct SemigroupCheckOptions {
  Grid grid = Grid(24, 48, 8.0, 8.0);
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  double t_lo = 1e-2;
  double t_hi = 1e2;
  int t_levels = 512;  // t is drawn log-uniformly from this many quantized levels
};

/// Throws DomainError unless the exponents satisfy the item's hypotheses.
void validate_semigroup_exponents(SemigroupItem item, double p, double q, double a, double b);
/// The power of t that makes the item's ratio bounded.
double semigroup_time_power(double p, double q, double a, double b);

/// sup over random (f, t) of t^power * ||weighted output||_{L^q(Omega)} / ||f||_{L^p(Omega)}.
/// Item (i): r^a S(t) grad(r^b f); item (ii): r^a S(t)(r^{b-1} f);
/// item (iii): r^a grad S(t)(r^b f).
RatioReport check_semigroup_bound(SemigroupItem item, double p, double q, double a, double b,
                                  const SemigroupCheckOptions& opt = {});

/// Pointwise kernel bounds used to prove the estimates: the left side
/// (assertion 'a' or 'b') divided by t^{-(1/2 - (a+b)/2)} exp(-|zeta|^2/(5t)).
RatioReport check_pointwise_assertions(char assertion, double alpha, double beta,
                                       std::int64_t samples, std::uint64_t seed = 1);
/// The normalized left side at one point; exposed for tests.
double pointwise_assertion_ratio(char assertion, double alpha, double beta, double r, double rb,
                                 double dz, double t);

}  // namespace axisym
