#pragma once

#include <string>
#include <utility>
#include <vector>

#include "axisym/biot_savart.hpp"
#include "axisym/field.hpp"
#include "axisym/mild_solver.hpp"
#include "axisym/trajectory.hpp"

namespace axisym {

struct FDConfig {
  double T = 1.0;
  double cadence = 0.1;       // output spacing; each interval is split into equal RK2 steps
  double max_dt = 0.0;        // cap on the RK2 step; 0 leaves the stability limit in charge
  double cfl = 0.5;           // advective safety factor, in (0, 1]
  double viscous_safety = 0.9; // fraction of the diffusive stability limit
  int sponge_cells = 8;
  double sponge_rate = 1.0;   // damping e^{-rate t} inside the sponge
  bool advection = true;      // transport terms
  bool coupling = true;       // zeroth-order terms
  double blowup_factor = 1e6;
  BSPath bs_path = BSPath::fft;

  std::vector<std::string> violations() const;
  /// Adds the grid-dependent rule max_dt <= fd_viscous_limit(grid).
  std::vector<std::string> violations(const Grid& grid) const;
};

/// Largest RK2-stable step for the discrete diffusion operator (Gershgorin bound).
double fd_viscous_limit(const Grid& grid);
/// min(viscous limit, cfl h / max|u|); the velocity is recomputed from the state.
double fd_stability_limit(const AxiState& state, const FDConfig& cfg, const BiotSavart& bs);

/// (d/dr^2 + d/dz^2 + (1/r) d/dr - 1/r^2) f with an odd axis ghost and zero far-field ghosts.
ScalarField fd_cylindrical_laplacian(const ScalarField& f);

enum class NonlinearForm { primitive, conservative };

/// The quadratic terms that enter d/dt as -(...):
///   omega: u.grad omega - u_r omega / r - 2 u d_z u / r          (primitive)
///          d_r(u_r omega) + d_z(u_z omega) - d_z(u^2) / r        (conservative)
///   u:     u.grad u + u_r u / r                                  (primitive)
///          d_r(u_r u) + d_z(u_z u) + 2 u_r u / r                 (conservative)
/// by centered differences with the solver's ghost values.
std::pair<ScalarField, ScalarField> fd_nonlinear_terms(const AxiState& state, const Velocity& v,
                                                       NonlinearForm form = NonlinearForm::primitive,
                                                       bool advection = true, bool coupling = true);

/// d/dt of (omega, u) for the explicit scheme, including the sponge.
AxiState fd_rhs(const AxiState& state, const Velocity& v, const FDConfig& cfg);

/// One Heun (RK2) step; throws DomainError when dt exceeds the stability limit.
AxiState fd_step(const AxiState& state, double dt, const FDConfig& cfg, const BiotSavart& bs);
AxiState fd_step(const AxiState& state, double dt);

SolveResult fd_solve(const AxiState& initial, const FDConfig& cfg);

struct GapReport {
  std::vector<double> times;
  std::vector<double> gap;           // ||u_a - u_b||_{L^2(R^3)}, all three components
  std::vector<double> relative_gap;  // gap / ||u_b||_{L^2(R^3)}
  double growth_rate = 0.0;          // least-squares slope of log(relative gap) over the second half of the run
  ETNorms et_b;
};

/// Velocity gap between two runs from the same data on the same lattice.
GapReport uniqueness_gap(const Trajectory& a, const Trajectory& b);

}  // namespace axisym
