#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "axisym/biot_savart.hpp"
#include "axisym/field.hpp"
#include "axisym/semigroup.hpp"
#include "axisym/trajectory.hpp"

namespace axisym {

struct SolverConfig {
  double T = 1.0;               // horizon
  double dt = 0.02;             // Duhamel step
  int substeps = 1;             // Duhamel substeps per step
  double cadence = 0.1;         // output spacing; also the Picard time lattice
  double picard_tol = 1e-8;     // relative X_T increment
  int max_picard = 40;
  bool nonlinear = true;        // false: pure semigroup evolution
  bool corrector = true;        // exponential midpoint (2 stages) vs exponential Euler
  double blowup_factor = 1e6;   // ceiling relative to the initial sup norm
  BSPath bs_path = BSPath::fft;
  SourceRule source_rule = SourceRule::point;  // kernel quadrature of every S application

  /// Empty iff the configuration is usable.
  std::vector<std::string> violations() const;
  /// Adds the grid-dependent rule: the Duhamel substep must resolve the
  /// kernel (dt / substeps >= h^2/2), or composing S(dt) drifts.
  std::vector<std::string> violations(const Grid& grid) const;
  int steps_per_sample() const;
};

enum class SolveStatus { ok, diverged, blow_up };
const char* to_string(SolveStatus s);

struct SolveResult {
  Trajectory traj;
  SolveStatus status = SolveStatus::ok;
  std::string message;
  int iterations = 0;
  std::vector<double> increments;       // Picard: relative X_T increments, one per iteration >= 2
  std::vector<double> increment_ratios; // increments[k] / increments[k-1]
  double residual = 0.0;                // Picard: ||x - S x0 + F(x, x)||_{X_T} / ||x||_{X_T}
  double seconds = 0.0;
};

/// Quadratic terms of the mild equations. With div_*(v) = d_r v_r + d_z v_z,
///   N_omega = div_*(u_r omega, u_z omega) - d_z(u_theta^2) / r
///   N_u     = div_*(u_r u_theta, u_z u_theta) + 2 u_r u_theta / r.
/// Since d_z(u^2)/r = d_z(u^2/r), the swirl term is carried as the extra
/// z-flux -u_theta^2 / r, so S(t) N is applied without differentiating the state.
struct Nonlinearity {
  ScalarField omega_flux_r, omega_flux_z;  // u_r omega, u_z omega
  ScalarField omega_swirl_flux;            // -u_theta^2 / r (z-flux)
  ScalarField u_flux_r, u_flux_z;          // u_r u_theta, u_z u_theta
  ScalarField u_source;                    // 2 u_r u_theta / r

  /// -d_z(u_theta^2) / r evaluated by differences (diagnostics and tests).
  ScalarField omega_source() const;
};

/// Pairing of the velocity of state 1 with state 2 (the bilinear form);
/// nonlinearity(s) is the self pairing.
Nonlinearity pair_nonlinearity(const Velocity& v1, const AxiState& s1, const AxiState& s2);
Nonlinearity nonlinearity(const AxiState& state, const BiotSavart& bs);
Nonlinearity nonlinearity(const AxiState& state);

/// (S(t) N_omega, S(t) N_u) through the integrated-by-parts kernel.
std::pair<ScalarField, ScalarField> apply_S_nonlinear(const Semigroup& sg, double t, const Nonlinearity& n);

/// F(x1, x2)(t) = int_0^t S(t - s) N(x1(s), x2(s)) ds on the common lattice:
/// on each lattice interval the pairing is averaged over the endpoints and S is
/// taken at the interval midpoint. t must be a lattice time.
std::pair<ScalarField, ScalarField> bilinear_F(const Trajectory& x1, const Trajectory& x2, double t,
                                               SourceRule rule = SourceRule::point);
/// The same map at every lattice time, as a trajectory.
Trajectory bilinear_F_all(const Trajectory& x1, const Trajectory& x2, SourceRule rule = SourceRule::point);

/// Linear evolution t -> S(t) x0 on the lattice {0, cadence, ..., T}.
Trajectory linear_evolution(const AxiState& x0, double T, double cadence,
                            SourceRule rule = SourceRule::point);

/// Picard iteration x_{k+1} = S x0 - F(x_k, x_k) on [0, T] with lattice spacing cfg.cadence.
SolveResult picard_solve(const AxiState& initial, const SolverConfig& cfg);

/// Step-restarted Duhamel stepping, recorded at the cadence.
SolveResult duhamel_solve(const AxiState& initial, const SolverConfig& cfg);

/// One Duhamel step of length dt.
AxiState duhamel_step(const AxiState& x, double dt, const SolverConfig& cfg, const Semigroup& sg,
                      const BiotSavart& bs);

struct ConstantsReport {
  double C1 = 0.0;
  double C2 = 0.0;
  int trials = 0;
  std::vector<double> C1_samples, C2_samples;
};

/// Measured linear and bilinear constants over random data on [0, T]:
/// C1 = sup ||S(.) x0||_{X_T} / (||omega0||_{L^{3/2}(R^3)} + ||omega0||_{L^1(Omega)} + ||u0||_{L^2(Omega)}),
/// C2 = sup ||F(x, y)||_{X_T} / (||x||_{X_T} ||y||_{X_T}) with x, y linear evolutions.
ConstantsReport estimate_constants(const Grid& grid, int trials, std::uint64_t seed = 1, double T = 2.0,
                                   double cadence = 0.1);

/// ||omega0||_{L^{3/2}(R^3)} + ||omega0||_{L^1(Omega)} + ||u0||_{L^2(Omega)}
double data_norm(const AxiState& x0);

}  // namespace axisym
