#include "axisym/trajectory.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "axisym/errors.hpp"

namespace axisym {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* to_string(TrajectorySource s) {
  switch (s) {
    case TrajectorySource::picard: return "picard";
    case TrajectorySource::duhamel: return "duhamel";
    case TrajectorySource::fd_reference: return "fd_reference";
    case TrajectorySource::semigroup: return "semigroup";
    case TrajectorySource::generic: return "generic";
  }
  return "?";
}

NormRecord NormRecord::of(double t, const AxiState& s) {
  NormRecord n;
  n.t = t;
  n.L1_omega_Omega = lp_norm_omega(s.omega, 1.0);
  n.L32_omega_R3 = lp_norm_r3(s.omega, 1.5);
  n.L2_omega_R3 = lp_norm_r3(s.omega, 2.0);
  n.L2_omega_Omega = lp_norm_omega(s.omega, 2.0);
  n.L4_omega_Omega = lp_norm_omega(s.omega, 4.0);
  n.Linf_omega = s.omega.max_abs();
  n.L2_utheta_Omega = lp_norm_omega(s.u_theta, 2.0);
  n.L4_utheta_Omega = lp_norm_omega(s.u_theta, 4.0);
  n.Linf_utheta = s.u_theta.max_abs();
  n.Linf_r_utheta = weighted_lp(s.u_theta, 1.0, kInf, Measure::omega);
  return n;
}

void Trajectory::push(double t, AxiState state) {
  if (!std::isfinite(t)) throw DomainError("Trajectory::push: non-finite time");
  if (!times.empty() && !(t > times.back())) {
    std::ostringstream msg;
    msg << "Trajectory::push: times must increase strictly (" << t << " after " << times.back() << ")";
    throw DomainError(msg.str());
  }
  require_same_grid(grid, state.omega.grid(), "Trajectory::push");
  require_same_grid(grid, state.u_theta.grid(), "Trajectory::push");
  norms.push_back(NormRecord::of(t, state));
  times.push_back(t);
  states.push_back(std::move(state));
}

Trajectory combine(double a, const Trajectory& x, double b, const Trajectory& y) {
  require_same_grid(x.grid, y.grid, "combine");
  if (x.times != y.times) throw GridMismatchError("combine: trajectories use different time lattices");
  Trajectory out(x.grid, x.source);
  for (std::size_t n = 0; n < x.size(); ++n) {
    AxiState s(a * x.states[n].omega + b * y.states[n].omega,
               a * x.states[n].u_theta + b * y.states[n].u_theta);
    out.push(x.times[n], std::move(s));
  }
  return out;
}

Trajectory rescale_trajectory(const Trajectory& traj, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("rescale_trajectory: lambda must be positive");
  const Grid g = traj.grid.rescaled(lambda);
  Trajectory out(g, traj.source);
  for (std::size_t n = 0; n < traj.size(); ++n) {
    ScalarField w(g, Quantity::omega_theta), u(g, Quantity::u_theta);
    const auto& src = traj.states[n];
    for (std::size_t m = 0; m < g.size(); ++m) {
      w.values()[m] = lambda * lambda * src.omega.values()[m];
      u.values()[m] = lambda * src.u_theta.values()[m];
    }
    out.push(traj.times[n] / (lambda * lambda), AxiState(std::move(w), std::move(u)));
  }
  return out;
}

double time_lp(const std::vector<double>& t, const std::vector<double>& g, double P) {
  if (t.size() != g.size()) throw DomainError("time_lp: size mismatch");
  double acc = 0.0;
  for (std::size_t n = 1; n < t.size(); ++n)
    acc += 0.5 * (t[n] - t[n - 1]) * (std::pow(g[n - 1], P) + std::pow(g[n], P));
  return std::pow(acc, 1.0 / P);
}

double XTNormComponents::total() const {
  double s = 0.0;
  for (const auto& [name, v] : named()) s += v;
  return s;
}

std::vector<std::pair<std::string, double>> XTNormComponents::named() const {
  return {
      {"sup_L1_omega_Omega", sup_L1_omega_Omega},
      {"sup_L32_omega_R3", sup_L32_omega_R3},
      {"sup_t_Linf_omega", sup_t_Linf_omega},
      {"sup_L2_utheta_Omega", sup_L2_utheta_Omega},
      {"sup_t12_Linf_utheta", sup_t12_Linf_utheta},
      {"sup_t12_L2_u_over_r", sup_t12_L2_u_over_r},
      {"sup_t12_L2_grad_utheta", sup_t12_L2_grad_utheta},
      {"sup_t34_L4_u_over_r", sup_t34_L4_u_over_r},
      {"L2L2_omega_Omega", L2L2_omega_Omega},
      {"L4L2_omega_R3", L4L2_omega_R3},
      {"L4L4_utheta_Omega", L4L4_utheta_Omega},
      {"L52_r35_utheta_Omega", L52_r35_utheta_Omega},
      {"L3_r23_omega_Omega", L3_r23_omega_Omega},
      {"L3_t13_omega_Omega", L3_t13_omega_Omega},
      {"L2_t12_omega_over_r", L2_t12_omega_over_r},
      {"L2_t16_r16_grad_omega_R3", L2_t16_r16_grad_omega_R3},
      {"L125_t16_grad_utheta", L125_t16_grad_utheta},
  };
}

XTNormComponents compute_xt_components(const Trajectory& traj, double T) {
  if (traj.empty()) throw DomainError("compute_xt_components: empty trajectory");
  std::size_t count = 0;
  while (count < traj.size() && traj.times[count] <= T * (1.0 + 1e-12)) ++count;
  if (count == 0) throw DomainError("compute_xt_components: no samples in [0, T]");

  // Per-sample spatial norms; the integrands are raised to the time exponent in time_lp.
  constexpr int kIntegrals = 9;
  std::vector<double> times(traj.times.begin(), traj.times.begin() + count);
  std::vector<std::vector<double>> g(kIntegrals, std::vector<double>(count));
  std::vector<XTNormComponents> snap(count);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t n = 0; n < count; ++n) {
    const double t = times[n];
    const auto& w = traj.states[n].omega;
    const auto& u = traj.states[n].u_theta;
    const auto [ur, uz] = gradient_tilde(u);
    const auto [wr, wz] = gradient_tilde(w);
    auto& c = snap[n];
    c.sup_L1_omega_Omega = lp_norm_omega(w, 1.0);
    c.sup_L32_omega_R3 = lp_norm_r3(w, 1.5);
    c.sup_L2_utheta_Omega = lp_norm_omega(u, 2.0);
    if (t > 0.0) {
      c.sup_t_Linf_omega = t * w.max_abs();
      c.sup_t12_Linf_utheta = std::sqrt(t) * u.max_abs();
      c.sup_t12_L2_u_over_r = std::sqrt(t) * weighted_lp(u, -1.0, 2.0, Measure::omega);
      c.sup_t12_L2_grad_utheta = std::sqrt(t) * weighted_lp_vector(ur, uz, 0.0, 2.0, Measure::omega);
      c.sup_t34_L4_u_over_r = std::pow(t, 0.75) * weighted_lp(u, -1.0, 4.0, Measure::omega);
    }
    g[0][n] = lp_norm_omega(w, 2.0);
    g[1][n] = lp_norm_r3(w, 2.0);
    g[2][n] = lp_norm_omega(u, 4.0);
    g[3][n] = weighted_lp(u, -0.6, 2.5, Measure::omega);
    g[4][n] = weighted_lp(w, 2.0 / 3.0, 3.0, Measure::omega);
    g[5][n] = std::cbrt(t) * lp_norm_omega(w, 3.0);
    g[6][n] = std::sqrt(t) * weighted_lp(w, -1.0, 2.0, Measure::omega);
    g[7][n] = std::pow(t, 1.0 / 6.0) * weighted_lp_vector(wr, wz, 1.0 / 6.0, 2.0, Measure::r3);
    g[8][n] = std::pow(t, 1.0 / 6.0) * weighted_lp_vector(ur, uz, 0.0, 2.4, Measure::omega);
  }

  XTNormComponents c;
  for (const auto& s : snap) {
    c.sup_L1_omega_Omega = std::max(c.sup_L1_omega_Omega, s.sup_L1_omega_Omega);
    c.sup_L32_omega_R3 = std::max(c.sup_L32_omega_R3, s.sup_L32_omega_R3);
    c.sup_t_Linf_omega = std::max(c.sup_t_Linf_omega, s.sup_t_Linf_omega);
    c.sup_L2_utheta_Omega = std::max(c.sup_L2_utheta_Omega, s.sup_L2_utheta_Omega);
    c.sup_t12_Linf_utheta = std::max(c.sup_t12_Linf_utheta, s.sup_t12_Linf_utheta);
    c.sup_t12_L2_u_over_r = std::max(c.sup_t12_L2_u_over_r, s.sup_t12_L2_u_over_r);
    c.sup_t12_L2_grad_utheta = std::max(c.sup_t12_L2_grad_utheta, s.sup_t12_L2_grad_utheta);
    c.sup_t34_L4_u_over_r = std::max(c.sup_t34_L4_u_over_r, s.sup_t34_L4_u_over_r);
  }
  c.L2L2_omega_Omega = time_lp(times, g[0], 2.0);
  c.L4L2_omega_R3 = time_lp(times, g[1], 4.0);
  c.L4L4_utheta_Omega = time_lp(times, g[2], 4.0);
  c.L52_r35_utheta_Omega = time_lp(times, g[3], 2.5);
  c.L3_r23_omega_Omega = time_lp(times, g[4], 3.0);
  c.L3_t13_omega_Omega = time_lp(times, g[5], 3.0);
  c.L2_t12_omega_over_r = time_lp(times, g[6], 2.0);
  c.L2_t16_r16_grad_omega_R3 = time_lp(times, g[7], 2.0);
  c.L125_t16_grad_utheta = time_lp(times, g[8], 2.4);
  return c;
}

double xt_norm(const Trajectory& traj, double T) { return compute_xt_components(traj, T).total(); }

ETNorms et_membership(const Trajectory& traj, double T) {
  if (traj.empty()) throw DomainError("et_membership: empty trajectory");
  std::vector<double> times, a, b;
  ETNorms e;
  for (std::size_t n = 0; n < traj.size() && traj.times[n] <= T * (1.0 + 1e-12); ++n) {
    times.push_back(traj.times[n]);
    a.push_back(traj.norms[n].L2_omega_R3);
    b.push_back(traj.norms[n].L4_utheta_Omega);
    e.Linf_r_utheta = std::max(e.Linf_r_utheta, traj.norms[n].Linf_r_utheta);
  }
  if (times.empty()) throw DomainError("et_membership: no samples in [0, T]");
  e.L4L2_omega = time_lp(times, a, 4.0);
  e.L4L4_utheta = time_lp(times, b, 4.0);
  return e;
}

}  // namespace axisym
