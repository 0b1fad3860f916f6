#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "axisym/field.hpp"
#include "axisym/ratio_report.hpp"
#include "axisym/sampling.hpp"
#include "axisym/semigroup.hpp"
#include "axisym/zconv.hpp"

namespace axisym {

/// (G_r, G_z) at target (r, z) and source (rb, zb):
///   G_r = -(1/pi) (z - zb) r^{-3/2} rb^{-1/2} F'(xi^2)
///   G_z =  (1/pi) (r - rb) r^{-3/2} rb^{-1/2} F'(xi^2)
///        + (1/(4 pi)) rb^{1/2} r^{-3/2} (F(xi^2) - 2 xi^2 F'(xi^2)),
///   xi^2 = ((r - rb)^2 + (z - zb)^2) / (r rb).
/// Throws SingularPointError when the points coincide.
std::pair<double, double> kernel_G(double r, double z, double rb, double zb);

/// Integral of the leading local expansion of G_z over the source cell
/// centred on the target, [r - hr/2, r + hr/2] x [z - hz/2, z + hz/2].
/// (The G_r self term vanishes by oddness in z - zb.)
double self_cell_weight_z(double r, double hr, double hz);

enum class BSPath { naive, fft, streaming };
enum class SelfCell { analytic, omit };
const char* to_string(BSPath p);
BSPath bs_path_from_string(const std::string& s);

/// Spectra of the z-profiles of h_r h_z G for every (target row, source row)
/// pair, zero-padded to 2 nz. G_r is odd in z - zb so only imaginary parts
/// are kept; G_z is even so only real parts are kept.
struct BSKernelCache {
  std::uint64_t grid_hash = 0;
  int nr = 0, nz = 0, ns = 0;
  SelfCell self = SelfCell::analytic;
  std::vector<double> gr_imag;  // [(i*nr + j)*ns + kappa]
  std::vector<double> gz_real;
  double max_gr_real_residual = 0.0;  // oddness check: largest |Re G_r^| relative
  double max_gz_imag_residual = 0.0;  // evenness check: largest |Im G_z^| relative

  std::size_t bytes() const { return (gr_imag.size() + gz_real.size()) * sizeof(double); }
};

struct BSTimings {
  double build_seconds = 0.0;
  double eval_seconds = 0.0;
  std::int64_t evaluations = 0;
};

/// Velocity recovery on one grid.
class BiotSavart {
 public:
  explicit BiotSavart(const Grid& grid, BSPath path = BSPath::fft,
                      SelfCell self = SelfCell::analytic, Exec exec = Exec::parallel);

  const Grid& grid() const { return grid_; }
  BSPath path() const { return path_; }
  const BSKernelCache* cache() const { return cache_.get(); }
  BSTimings timings() const;

  Velocity velocity(const ScalarField& omega) const;

  /// Discrete weight h_r h_z (G_r, G_z) for target row i, source row j, z offset m.
  std::pair<double, double> weight(int i, int j, int m) const;

 private:
  void fill_profiles(int i, int j, double* gr, double* gz) const;
  Velocity eval_naive(const ScalarField& omega) const;
  Velocity eval_spectral(const ScalarField& omega, bool streaming) const;

  Grid grid_;
  BSPath path_;
  SelfCell self_;
  Exec exec_;
  std::shared_ptr<ZConvolver> zconv_;
  std::unique_ptr<BSKernelCache> cache_;
  double build_seconds_ = 0.0;
  mutable std::atomic<double> eval_seconds_{0.0};
  mutable std::atomic<std::int64_t> evaluations_{0};
};

/// Shared FFT-path operator for the grid (built on first use).
const BiotSavart& biot_savart_for(const Grid& grid);
Velocity velocity_from_vorticity(const ScalarField& omega, BSPath path = BSPath::fft);

/// Velocity of the state, computed and cached on first request.
const Velocity& ensure_velocity(AxiState& state, const BiotSavart& bs);

/// Centred-difference residuals of a recovered velocity over interior nodes:
///   divergence = max |d_r(r u_r) + r d_z u_z| / max |r u|
///   curl       = ||d_z u_r - d_r u_z - omega||_{L^2(Omega)} / ||omega||_{L^2(Omega)}
struct BSResiduals {
  double divergence = 0.0;
  double curl = 0.0;
};
BSResiduals bs_residuals(const ScalarField& omega, const Velocity& v);

// ---------------------------------------------------------------------------
// Sampled estimate checks.

/// sup of ||r^alpha u||_{L^q(Omega)} / ||r^beta omega||_{L^p(Omega)} over random vorticities.
/// Requires 0 <= beta - alpha < 1, 1/q = 1/p - (1 + alpha - beta)/2, alpha, beta in [0, 2]
/// and p, q in (1, inf); throws DomainError otherwise.
RatioReport check_bs_weighted_estimate(double p, double q, double alpha, double beta,
                                       const SampledCheckOptions& opt = {});
/// The q paired with (p, alpha, beta) by scaling.
double bs_estimate_q(double p, double alpha, double beta);

/// sup of (||grad u_r||_{L^p} + ||grad u_z||_{L^p} + ||u_r / r||_{L^p}) / ||omega||_{L^p},
/// all in the three-dimensional measure.
RatioReport check_lemur_bounds(double p, const SampledCheckOptions& opt = {});

}  // namespace axisym
