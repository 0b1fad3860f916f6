#pragma once

#include <string>
#include <utility>
#include <vector>

#include "axisym/field.hpp"

namespace axisym {

enum class TrajectorySource { picard, duhamel, fd_reference, semigroup, generic };
const char* to_string(TrajectorySource s);

/// Norms recorded for every trajectory sample.
struct NormRecord {
  double t = 0.0;
  double L1_omega_Omega = 0.0;
  double L32_omega_R3 = 0.0;
  double L2_omega_R3 = 0.0;
  double L2_omega_Omega = 0.0;
  double L4_omega_Omega = 0.0;
  double Linf_omega = 0.0;
  double L2_utheta_Omega = 0.0;
  double L4_utheta_Omega = 0.0;
  double Linf_utheta = 0.0;
  double Linf_r_utheta = 0.0;

  static NormRecord of(double t, const AxiState& state);
};

/// Time-ordered samples of (omega, u_theta) on one grid.
struct Trajectory {
  Grid grid;
  TrajectorySource source = TrajectorySource::generic;
  std::vector<double> times;
  std::vector<AxiState> states;
  std::vector<NormRecord> norms;

  explicit Trajectory(const Grid& g, TrajectorySource s = TrajectorySource::generic) : grid(g), source(s) {}

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  /// Appends a sample; throws unless t exceeds the last time and the grid matches.
  void push(double t, AxiState state);
  double final_time() const { return times.empty() ? 0.0 : times.back(); }
};

/// a * x + b * y sample by sample; the lattices and grids must match.
Trajectory combine(double a, const Trajectory& x, double b, const Trajectory& y);

/// u_lambda(t, x) = lambda u(lambda^2 t, lambda x): lengths and times shrink by
/// lambda and lambda^2, omega scales by lambda^2 and u_theta by lambda.
Trajectory rescale_trajectory(const Trajectory& traj, double lambda);

/// One entry per summand of the critical space-time norm.
struct XTNormComponents {
  // sup over t in (0, T]
  double sup_L1_omega_Omega = 0.0;          // ||omega||_{L^1(Omega)}
  double sup_L32_omega_R3 = 0.0;            // ||omega||_{L^{3/2}(R^3)}
  double sup_t_Linf_omega = 0.0;            // t ||omega||_inf
  double sup_L2_utheta_Omega = 0.0;         // ||u||_{L^2(Omega)}
  double sup_t12_Linf_utheta = 0.0;         // t^{1/2} ||u||_inf
  double sup_t12_L2_u_over_r = 0.0;         // t^{1/2} ||u/r||_{L^2(Omega)}
  double sup_t12_L2_grad_utheta = 0.0;      // t^{1/2} ||grad u||_{L^2(Omega)}
  double sup_t34_L4_u_over_r = 0.0;         // t^{3/4} ||u/r||_{L^4(Omega)}
  // space-time integrals over [0, T]
  double L2L2_omega_Omega = 0.0;            // ||omega||_{L^2_T L^2(Omega)}
  double L4L2_omega_R3 = 0.0;               // ||omega||_{L^4_T L^2(R^3)}
  double L4L4_utheta_Omega = 0.0;           // ||u||_{L^4_T L^4(Omega)}
  double L52_r35_utheta_Omega = 0.0;        // ||r^{-3/5} u||_{L^{5/2}_T L^{5/2}(Omega)}
  double L3_r23_omega_Omega = 0.0;          // ||r^{2/3} omega||_{L^3_T L^3(Omega)}
  double L3_t13_omega_Omega = 0.0;          // ||t^{1/3} omega||_{L^3_T L^3(Omega)}
  double L2_t12_omega_over_r = 0.0;         // ||t^{1/2} omega / r||_{L^2_T L^2(Omega)}
  double L2_t16_r16_grad_omega_R3 = 0.0;    // ||t^{1/6} r^{1/6} grad omega||_{L^2_T L^2(R^3)}
  double L125_t16_grad_utheta = 0.0;        // ||t^{1/6} grad u||_{L^{12/5}_T L^{12/5}(Omega)}

  double total() const;
  std::vector<std::pair<std::string, double>> named() const;
};

/// Components over the samples with t <= T. Time integrals use the
/// trapezoid rule on the sample times; sup terms with a positive power of t
/// skip t = 0. Throws DomainError for an empty trajectory.
XTNormComponents compute_xt_components(const Trajectory& traj, double T);
double xt_norm(const Trajectory& traj, double T);

/// The three norms of the uniqueness class:
/// ||omega||_{L^4_T L^2(R^3)}, ||u||_{L^4_T L^4(Omega)}, ||r u||_{L^inf_T L^inf}.
struct ETNorms {
  double L4L2_omega = 0.0;
  double L4L4_utheta = 0.0;
  double Linf_r_utheta = 0.0;
};
ETNorms et_membership(const Trajectory& traj, double T);

/// (int_0^T g(t)^P dt)^{1/P} by the trapezoid rule on the given nodes.
double time_lp(const std::vector<double>& t, const std::vector<double>& g, double P);

}  // namespace axisym
