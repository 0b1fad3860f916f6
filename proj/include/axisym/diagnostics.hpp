#pragma once

#include <string>
#include <utility>
#include <vector>

#include "axisym/field.hpp"
#include "axisym/ratio_report.hpp"
#include "axisym/sampling.hpp"
#include "axisym/trajectory.hpp"

namespace axisym {

enum class NormKind {
  omega_Omega,   // ||omega||_{L^p(Omega)}
  omega_R3,      // ||omega||_{L^p(R^3)}
  utheta_Omega,  // ||u_theta||_{L^p(Omega)}
};
const char* to_string(NormKind k);

/// Slope the decay laws predict for the norm: -(1 - 1/p), -(1 - 3/(2p)), -(1/2 - 1/p).
double predicted_decay_slope(NormKind kind, double p);

struct DecayFit {
  std::string norm;
  NormKind kind = NormKind::omega_Omega;
  double p = 2.0;
  Measure measure = Measure::omega;
  double slope = 0.0;
  double intercept = 0.0;
  double t_min = 0.0, t_max = 0.0;
  double residual = 0.0;  // root-mean-square misfit in log(norm)
  double predicted = 0.0;
  int samples = 0;
};

/// Least-squares slope of log(norm) against log(t) over samples with t in
/// [t_min, t_max]. Needs at least 6 samples there, all with positive norm.
DecayFit decay_exponent_fit(const std::vector<double>& t, const std::vector<double>& norm, double t_min,
                            double t_max);
DecayFit decay_exponent_fit(const Trajectory& traj, NormKind kind, double p, double t_min, double t_max);
/// Window [max(1, T / sqrt(10)), T]: the final half decade, skipping the first unit of time.
DecayFit decay_exponent_fit(const Trajectory& traj, NormKind kind, double p);
std::pair<double, double> default_fit_window(double T);

struct AsymptoticsReport {
  std::vector<double> times;
  std::vector<double> L1_omega_Omega, L32_omega_R3, L2_utheta_Omega, Linf_r_utheta;
  // d log(norm) / d log(t) over the final quarter of the run (0 for vanishing series)
  double slope_L1_omega = 0.0, slope_L32_omega = 0.0, slope_L2_utheta = 0.0;
  // Non-increasing over the final quarter, with 1e-10 absolute slack.
  bool decreasing_L1_omega = true, decreasing_L32_omega = true, decreasing_L2_utheta = true;
  bool r_utheta_nonincreasing = true;  // over the whole run, up to the factor (1 + 10 h^2) per sample
};

/// Throws DomainError for fewer than 10 samples.
AsymptoticsReport asymptotics_report(const Trajectory& traj);

/// True iff every consecutive pair in values[first..] satisfies b <= a * factor + slack.
bool non_increasing(const std::vector<double>& values, std::size_t first, double factor, double slack);

struct CalderonParts {
  AxiState inner;  // r < A
  AxiState outer;  // r >= A
  double A = 0.0;
  double outer_L1_omega_Omega = 0.0;
  double outer_L32_omega_R3 = 0.0;
  double outer_L2_utheta_Omega = 0.0;
  double outer_data_norm() const { return outer_L32_omega_R3 + outer_L1_omega_Omega + outer_L2_utheta_Omega; }
};

/// Radial cutoff by the indicator of r >= A evaluated at cell centres.
CalderonParts calderon_split(const AxiState& state, double A);

struct CalderonRadius {
  bool found = false;
  double A = 0.0;
  double C1_times_norm = 0.0;
  double threshold = 0.0;  // 1 / (4 C2)
  CalderonParts parts;
};

/// Smallest face radius A = i h_r such that C1 * (outer data norm) < 1 / (4 C2).
CalderonRadius find_calderon_radius(const AxiState& state, double C1, double C2);

struct SmallnessWindow {
  double t0 = 0.0, t1 = 0.0;
  double L4L2_omega_R3 = 0.0;  // ||omega||_{L^4([t0, t1]; L^2(R^3))}
  int samples = 0;
};

/// Tail norms over each window, by the trapezoid rule on the samples inside it.
std::vector<SmallnessWindow> smallness_monitor(const Trajectory& traj,
                                               const std::vector<std::pair<double, double>>& windows);

/// sup of ||r^{-1/4} u||_{L^4(R^3)} / ||grad(u e_theta)||_{L^2(R^3)} over random
/// fields u = r * (Gaussian mixture), with |grad|^2 = u_r^2 + u_z^2 + u^2 / r^2.
RatioReport check_hardy_sobolev(const SampledCheckOptions& opt = {});
double hardy_sobolev_ratio(const ScalarField& u);

}  // namespace axisym
