#include "axisym/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "axisym/errors.hpp"

namespace axisym {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double loglog_slope(const std::vector<double>& t, const std::vector<double>& y, std::size_t first) {
  std::vector<double> xs, ys;
  for (std::size_t n = first; n < t.size(); ++n)
    if (t[n] > 0.0 && y[n] > 0.0) {
      xs.push_back(std::log(t[n]));
      ys.push_back(std::log(y[n]));
    }
  if (xs.size() < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    mx += xs[n];
    my += ys[n];
  }
  mx /= xs.size();
  my /= xs.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    sxy += (xs[n] - mx) * (ys[n] - my);
    sxx += (xs[n] - mx) * (xs[n] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}
}  // namespace

const char* to_string(NormKind k) {
  switch (k) {
    case NormKind::omega_Omega: return "omega_Omega";
    case NormKind::omega_R3: return "omega_R3";
    case NormKind::utheta_Omega: return "utheta_Omega";
  }
  return "?";
}

double predicted_decay_slope(NormKind kind, double p) {
  const double ip = std::isinf(p) ? 0.0 : 1.0 / p;
  switch (kind) {  // + 0.0 turns -0 into 0
    case NormKind::omega_Omega: return ip - 1.0 + 0.0;
    case NormKind::omega_R3: return 1.5 * ip - 1.0 + 0.0;
    case NormKind::utheta_Omega: return ip - 0.5 + 0.0;
  }
  return 0.0;
}

DecayFit decay_exponent_fit(const std::vector<double>& t, const std::vector<double>& norm, double t_min,
                            double t_max) {
  if (t.size() != norm.size()) throw DomainError("decay_exponent_fit: size mismatch");
  std::vector<double> xs, ys;
  for (std::size_t n = 0; n < t.size(); ++n) {
    if (t[n] < t_min || t[n] > t_max) continue;
    if (!(norm[n] > 0.0) || !(t[n] > 0.0)) {
      std::ostringstream msg;
      msg << "decay_exponent_fit: non-positive value " << norm[n] << " at t = " << t[n] << " inside the window";
      throw DomainError(msg.str());
    }
    xs.push_back(std::log(t[n]));
    ys.push_back(std::log(norm[n]));
  }
  if (xs.size() < 6) {
    std::ostringstream msg;
    msg << "decay_exponent_fit: need >= 6 samples in [" << t_min << ", " << t_max << "], have " << xs.size();
    throw DomainError(msg.str());
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  DecayFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double e = ys[k] - (fit.intercept + fit.slope * xs[k]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  fit.t_min = t_min;
  fit.t_max = t_max;
  fit.samples = static_cast<int>(xs.size());
  return fit;
}

DecayFit decay_exponent_fit(const Trajectory& traj, NormKind kind, double p, double t_min, double t_max) {
  std::vector<double> values;
  values.reserve(traj.size());
  for (const auto& s : traj.states) {
    switch (kind) {
      case NormKind::omega_Omega: values.push_back(lp_norm_omega(s.omega, p)); break;
      case NormKind::omega_R3: values.push_back(lp_norm_r3(s.omega, p)); break;
      case NormKind::utheta_Omega: values.push_back(lp_norm_omega(s.u_theta, p)); break;
    }
  }
  DecayFit fit = decay_exponent_fit(traj.times, values, t_min, t_max);
  std::ostringstream name;
  name << to_string(kind) << "_L" << p;
  fit.norm = name.str();
  fit.kind = kind;
  fit.p = p;
  fit.measure = kind == NormKind::omega_R3 ? Measure::r3 : Measure::omega;
  fit.predicted = predicted_decay_slope(kind, p);
  return fit;
}

std::pair<double, double> default_fit_window(double T) { return {std::max(1.0, T / std::sqrt(10.0)), T}; }

DecayFit decay_exponent_fit(const Trajectory& traj, NormKind kind, double p) {
  const auto [lo, hi] = default_fit_window(traj.final_time());
  return decay_exponent_fit(traj, kind, p, lo, hi);
}

bool non_increasing(const std::vector<double>& v, std::size_t first, double factor, double slack) {
  for (std::size_t n = first + 1; n < v.size(); ++n)
    if (v[n] > v[n - 1] * factor + slack) return false;
  return true;
}

AsymptoticsReport asymptotics_report(const Trajectory& traj) {
  if (traj.size() < 10) throw DomainError("asymptotics_report: need >= 10 samples");
  AsymptoticsReport rep;
  rep.times = traj.times;
  for (const auto& n : traj.norms) {
    rep.L1_omega_Omega.push_back(n.L1_omega_Omega);
    rep.L32_omega_R3.push_back(n.L32_omega_R3);
    rep.L2_utheta_Omega.push_back(n.L2_utheta_Omega);
    rep.Linf_r_utheta.push_back(n.Linf_r_utheta);
  }
  const double t_quarter = 0.75 * traj.final_time();
  std::size_t first = 0;
  while (first < traj.size() && traj.times[first] < t_quarter) ++first;
  first = std::min(first, traj.size() - 2);
  rep.slope_L1_omega = loglog_slope(rep.times, rep.L1_omega_Omega, first);
  rep.slope_L32_omega = loglog_slope(rep.times, rep.L32_omega_R3, first);
  rep.slope_L2_utheta = loglog_slope(rep.times, rep.L2_utheta_Omega, first);
  rep.decreasing_L1_omega = non_increasing(rep.L1_omega_Omega, first, 1.0, 1e-10);
  rep.decreasing_L32_omega = non_increasing(rep.L32_omega_R3, first, 1.0, 1e-10);
  rep.decreasing_L2_utheta = non_increasing(rep.L2_utheta_Omega, first, 1.0, 1e-10);
  const double h = std::max(traj.grid.hr(), traj.grid.hz());
  rep.r_utheta_nonincreasing = non_increasing(rep.Linf_r_utheta, 0, 1.0 + 10.0 * h * h, 1e-10);
  return rep;
}

CalderonParts calderon_split(const AxiState& state, double A) {
  const Grid& g = state.grid();
  if (!(A > 0.0 && A < g.r_max())) {
    std::ostringstream msg;
    msg << "calderon_split: A = " << A << " must lie in (0, " << g.r_max() << ")";
    throw DomainError(msg.str());
  }
  CalderonParts parts;
  parts.A = A;
  parts.inner = AxiState(ScalarField(g, state.omega.tag()), ScalarField(g, state.u_theta.tag()));
  parts.outer = AxiState(ScalarField(g, state.omega.tag()), ScalarField(g, state.u_theta.tag()));
  for (int i = 0; i < g.nr(); ++i) {
    AxiState& dst = g.r(i) >= A ? parts.outer : parts.inner;
    std::copy(state.omega.row(i), state.omega.row(i) + g.nz(), dst.omega.row(i));
    std::copy(state.u_theta.row(i), state.u_theta.row(i) + g.nz(), dst.u_theta.row(i));
  }
  parts.outer_L1_omega_Omega = lp_norm_omega(parts.outer.omega, 1.0);
  parts.outer_L32_omega_R3 = lp_norm_r3(parts.outer.omega, 1.5);
  parts.outer_L2_utheta_Omega = lp_norm_omega(parts.outer.u_theta, 2.0);
  return parts;
}

CalderonRadius find_calderon_radius(const AxiState& state, double C1, double C2) {
  if (!(C1 > 0.0) || !(C2 > 0.0)) throw DomainError("find_calderon_radius: constants must be positive");
  const Grid& g = state.grid();
  CalderonRadius out;
  out.threshold = 1.0 / (4.0 * C2);
  for (int i = 1; i < g.nr(); ++i) {
    const double A = i * g.hr();
    CalderonParts parts = calderon_split(state, A);
    const double value = C1 * parts.outer_data_norm();
    if (value < out.threshold) {
      out.found = true;
      out.A = A;
      out.C1_times_norm = value;
      out.parts = std::move(parts);
      return out;
    }
  }
  return out;
}

std::vector<SmallnessWindow> smallness_monitor(const Trajectory& traj,
                                               const std::vector<std::pair<double, double>>& windows) {
  std::vector<SmallnessWindow> out;
  for (const auto& [t0, t1] : windows) {
    if (!(t1 > t0)) throw DomainError("smallness_monitor: empty window");
    if (traj.empty() || t0 < traj.times.front() - 1e-12 || t1 > traj.final_time() * (1.0 + 1e-12))
      throw DomainError("smallness_monitor: window outside the trajectory");
    std::vector<double> t, g;
    for (std::size_t n = 0; n < traj.size(); ++n)
      if (traj.times[n] >= t0 - 1e-12 && traj.times[n] <= t1 + 1e-12) {
        t.push_back(traj.times[n]);
        g.push_back(traj.norms[n].L2_omega_R3);
      }
    SmallnessWindow w{t0, t1, t.size() >= 2 ? time_lp(t, g, 4.0) : 0.0, static_cast<int>(t.size())};
    out.push_back(w);
  }
  return out;
}

double hardy_sobolev_ratio(const ScalarField& u) {
  const double den_sq = [&] {
    const auto [ur, uz] = gradient_tilde(u);
    const double a = lp_norm_r3(ur, 2.0), b = lp_norm_r3(uz, 2.0), c = weighted_lp(u, -1.0, 2.0, Measure::r3);
    return a * a + b * b + c * c;
  }();
  if (!(den_sq > 0.0)) return kNaN;
  return weighted_lp(u, -0.25, 4.0, Measure::r3) / std::sqrt(den_sq);
}

RatioReport check_hardy_sobolev(const SampledCheckOptions& opt) {
  const Grid grid = opt.grid.rescaled(opt.rescale);
  const MixtureOptions mix = mixture_for(opt.grid);
  auto sampler = [&](std::mt19937_64& rng) {
    const ScalarField u = render_mixture(grid, rescaled_bumps(draw_mixture(rng, mix), opt.rescale),
                                         Quantity::u_theta, AxisFactor::linear);
    return hardy_sobolev_ratio(u);
  };
  RatioReport report = run_ratio_suite(opt.samples, opt.seed, sampler);
  report.suite = "hardy_sobolev";
  report.p = 4.0;
  report.q = 2.0;
  return report;
}

}  // namespace axisym
