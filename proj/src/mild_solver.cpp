#include "axisym/mild_solver.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "axisym/errors.hpp"
#include "axisym/ratio_report.hpp"
#include "axisym/sampling.hpp"

namespace axisym {

namespace {

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ScalarField product(const ScalarField& a, const ScalarField& b, double scale = 1.0, double r_power = 0.0,
                    Quantity tag = Quantity::generic) {
  const Grid& g = a.grid();
  ScalarField out(g, tag);
  for (int i = 0; i < g.nr(); ++i) {
    const double w = r_power == 0.0 ? scale : scale * std::pow(g.r(i), r_power);
    const double* pa = a.row(i);
    const double* pb = b.row(i);
    double* po = out.row(i);
    for (int k = 0; k < g.nz(); ++k) po[k] = w * pa[k] * pb[k];
  }
  return out;
}

// a * x + b * y for every field of the pairing.
Nonlinearity blend(double a, const Nonlinearity& x, double b, const Nonlinearity& y) {
  auto mix = [&](const ScalarField& p, const ScalarField& q) {
    ScalarField out = a * p;
    out.axpy(b, q);
    return out;
  };
  return {mix(x.omega_flux_r, y.omega_flux_r), mix(x.omega_flux_z, y.omega_flux_z),
          mix(x.omega_swirl_flux, y.omega_swirl_flux), mix(x.u_flux_r, y.u_flux_r),
          mix(x.u_flux_z, y.u_flux_z), mix(x.u_source, y.u_source)};
}

double initial_ceiling(const AxiState& x, double factor) {
  const double m = std::max(x.omega.max_abs(), x.u_theta.max_abs());
  return m > 0.0 ? factor * m : std::numeric_limits<double>::infinity();
}

}  // namespace

std::vector<std::string> SolverConfig::violations() const {
  std::vector<std::string> v;
  if (!(T > 0.0) || !std::isfinite(T)) v.push_back("solver.T must be positive and finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) v.push_back("solver.dt must be positive");
  if (substeps < 1) v.push_back("solver.substeps must be >= 1");
  if (!(cadence > 0.0)) v.push_back("solver.cadence must be positive");
  else if (dt > 0.0 && cadence < dt) v.push_back("solver.cadence must be >= solver.dt");
  if (!(picard_tol > 0.0)) v.push_back("solver.picard_tol must be positive");
  if (max_picard < 1) v.push_back("solver.max_picard must be >= 1");
  if (!(blowup_factor > 1.0)) v.push_back("solver.blowup_factor must exceed 1");
  return v;
}

std::vector<std::string> SolverConfig::violations(const Grid& grid) const {
  std::vector<std::string> v = violations();
  const double floor = point_threshold(grid);
  if (dt > 0.0 && substeps >= 1 && dt / substeps < floor) {
    std::ostringstream msg;
    msg << "solver.dt / solver.substeps = " << dt / substeps << " is below the resolved step h^2/2 = " << floor
        << " on this grid";
    v.push_back(msg.str());
  }
  return v;
}

int SolverConfig::steps_per_sample() const {
  return std::max(1, static_cast<int>(std::llround(cadence / dt)));
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::ok: return "ok";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::blow_up: return "blow_up";
  }
  return "?";
}

ScalarField Nonlinearity::omega_source() const {
  // d_z of the z-flux -u^2/r is -d_z(u^2)/r.
  ScalarField out = gradient_tilde(omega_swirl_flux).second;
  out.set_tag(Quantity::generic);
  return out;
}

Nonlinearity pair_nonlinearity(const Velocity& v1, const AxiState& s1, const AxiState& s2) {
  require_same_grid(s1.grid(), s2.grid(), "nonlinearity");
  require_same_grid(s1.grid(), v1.ur.grid(), "nonlinearity");
  return {product(v1.ur, s2.omega),
          product(v1.uz, s2.omega),
          product(s1.u_theta, s2.u_theta, -1.0, -1.0),
          product(v1.ur, s2.u_theta),
          product(v1.uz, s2.u_theta),
          product(v1.ur, s2.u_theta, 2.0, -1.0)};
}

Nonlinearity nonlinearity(const AxiState& state, const BiotSavart& bs) {
  if (state.velocity) return pair_nonlinearity(*state.velocity, state, state);
  const Velocity v = bs.velocity(state.omega);
  return pair_nonlinearity(v, state, state);
}

Nonlinearity nonlinearity(const AxiState& state) { return nonlinearity(state, biot_savart_for(state.grid())); }

std::pair<ScalarField, ScalarField> apply_S_nonlinear(const Semigroup& sg, double t, const Nonlinearity& n) {
  ScalarField wz = n.omega_flux_z;
  wz.axpy(1.0, n.omega_swirl_flux);
  ScalarField w = sg.apply_div(t, n.omega_flux_r, wz);
  ScalarField u = sg.apply_div(t, n.u_flux_r, n.u_flux_z);
  u.axpy(1.0, sg.apply(t, n.u_source));
  w.set_tag(Quantity::omega_theta);
  u.set_tag(Quantity::u_theta);
  return {std::move(w), std::move(u)};
}

// ---------------------------------------------------------------------------

namespace {

void require_common_lattice(const Trajectory& a, const Trajectory& b) {
  require_same_grid(a.grid, b.grid, "bilinear_F");
  if (a.times != b.times) throw GridMismatchError("bilinear_F: trajectories use different time lattices");
  if (a.empty()) throw DomainError("bilinear_F: empty trajectory");
}

// Averaged pairings on each lattice interval, A_m = (N_m + N_{m+1}) / 2.
std::vector<Nonlinearity> interval_pairings(const Trajectory& x1, const Trajectory& x2, std::size_t upto) {
  const BiotSavart& bs = biot_savart_for(x1.grid);
  std::vector<Nonlinearity> node(upto + 1);
  for (std::size_t m = 0; m <= upto; ++m) {
    const auto& s1 = x1.states[m];
    const Velocity v = s1.velocity ? *s1.velocity : bs.velocity(s1.omega);
    node[m] = pair_nonlinearity(v, s1, x2.states[m]);
  }
  std::vector<Nonlinearity> avg;
  avg.reserve(upto);
  for (std::size_t m = 0; m < upto; ++m) avg.push_back(blend(0.5, node[m], 0.5, node[m + 1]));
  return avg;
}

std::pair<ScalarField, ScalarField> duhamel_sum(const Trajectory& lattice, const std::vector<Nonlinearity>& avg,
                                                std::size_t n, SourceRule rule) {
  const Semigroup& sg = semigroup_for(lattice.grid, rule);
  ScalarField w(lattice.grid, Quantity::omega_theta), u(lattice.grid, Quantity::u_theta);
  const double tn = lattice.times[n];
  for (std::size_t m = 0; m < n; ++m) {
    const double t0 = lattice.times[m], t1 = lattice.times[m + 1];
    const auto [sw, su] = apply_S_nonlinear(sg, tn - 0.5 * (t0 + t1), avg[m]);
    w.axpy(t1 - t0, sw);
    u.axpy(t1 - t0, su);
  }
  return {std::move(w), std::move(u)};
}

}  // namespace

std::pair<ScalarField, ScalarField> bilinear_F(const Trajectory& x1, const Trajectory& x2, double t,
                                               SourceRule rule) {
  require_common_lattice(x1, x2);
  std::size_t n = 0;
  while (n < x1.size() && std::abs(x1.times[n] - t) > 1e-12 * std::max(1.0, std::abs(t))) ++n;
  if (n == x1.size()) {
    std::ostringstream msg;
    msg << "bilinear_F: t = " << t << " is not a lattice time";
    throw GridMismatchError(msg.str());
  }
  if (n == 0) return {ScalarField(x1.grid, Quantity::omega_theta), ScalarField(x1.grid, Quantity::u_theta)};
  return duhamel_sum(x1, interval_pairings(x1, x2, n), n, rule);
}

Trajectory bilinear_F_all(const Trajectory& x1, const Trajectory& x2, SourceRule rule) {
  require_common_lattice(x1, x2);
  const std::size_t M = x1.size() - 1;
  const auto avg = interval_pairings(x1, x2, M);
  std::vector<AxiState> out(M + 1);
  out[0] = AxiState::zero(x1.grid);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t n = 1; n <= M; ++n) {
    auto [w, u] = duhamel_sum(x1, avg, n, rule);
    out[n] = AxiState(std::move(w), std::move(u));
  }
  Trajectory traj(x1.grid, x1.source);
  for (std::size_t n = 0; n <= M; ++n) traj.push(x1.times[n], std::move(out[n]));
  return traj;
}

Trajectory linear_evolution(const AxiState& x0, double T, double cadence, SourceRule rule) {
  if (!(T > 0.0) || !(cadence > 0.0)) throw DomainError("linear_evolution: T and cadence must be positive");
  const int M = std::max(1, static_cast<int>(std::llround(T / cadence)));
  const Grid& g = x0.grid();
  const Semigroup& sg = semigroup_for(g, rule);
  std::vector<AxiState> out(M + 1);
#pragma omp parallel for schedule(dynamic)
  for (int n = 0; n <= M; ++n) {
    const double t = T * n / M;
    out[n] = AxiState(sg.apply(t, x0.omega), sg.apply(t, x0.u_theta));
    out[n].omega.set_tag(Quantity::omega_theta);
    out[n].u_theta.set_tag(Quantity::u_theta);
  }
  Trajectory traj(g, TrajectorySource::semigroup);
  for (int n = 0; n <= M; ++n) traj.push(T * n / M, std::move(out[n]));
  return traj;
}

SolveResult picard_solve(const AxiState& initial, const SolverConfig& cfg) {
  const auto t0 = Clock::now();
  if (const auto v = cfg.violations(); !v.empty()) throw DomainError("picard_solve: " + v.front());
  const Trajectory linear = linear_evolution(initial, cfg.T, cfg.cadence, cfg.source_rule);
  SolveResult res{linear, SolveStatus::ok, "", 1, {}, {}, 0.0, 0.0};
  res.traj.source = TrajectorySource::picard;
  auto next = [&](const Trajectory& x) {
    if (!cfg.nonlinear) return linear;
    return combine(1.0, linear, -1.0, bilinear_F_all(x, x, cfg.source_rule));
  };

  double norm = xt_norm(res.traj, cfg.T);
  bool converged = norm == 0.0 || !cfg.nonlinear;
  while (!converged && res.iterations < cfg.max_picard) {
    Trajectory x = next(res.traj);
    ++res.iterations;
    const double inc = xt_norm(combine(1.0, x, -1.0, res.traj), cfg.T);
    norm = xt_norm(x, cfg.T);
    const double rel = norm > 0.0 ? inc / norm : 0.0;
    if (!res.increments.empty())
      res.increment_ratios.push_back(res.increments.back() > 0.0 ? rel / res.increments.back() : 0.0);
    res.increments.push_back(rel);
    res.traj = std::move(x);
    res.traj.source = TrajectorySource::picard;
    if (!std::isfinite(rel)) break;
    converged = rel < cfg.picard_tol;
  }
  if (converged && cfg.nonlinear && norm > 0.0) {
    const Trajectory x = next(res.traj);
    res.residual = xt_norm(combine(1.0, res.traj, -1.0, x), cfg.T) / norm;
  }
  if (!converged) {
    res.status = SolveStatus::diverged;
    std::ostringstream msg;
    msg << "Picard iteration did not converge in " << res.iterations << " iterations (last relative increment "
        << (res.increments.empty() ? 0.0 : res.increments.back()) << ")";
    res.message = msg.str();
  }
  res.seconds = seconds_since(t0);
  return res;
}

AxiState duhamel_step(const AxiState& x, double dt, const SolverConfig& cfg, const Semigroup& sg,
                      const BiotSavart& bs) {
  auto linear = [&](double t, const AxiState& s) {
    AxiState out(sg.apply(t, s.omega), sg.apply(t, s.u_theta));
    out.omega.set_tag(Quantity::omega_theta);
    out.u_theta.set_tag(Quantity::u_theta);
    return out;
  };
  AxiState next = linear(dt, x);
  if (!cfg.nonlinear) return next;
  const Nonlinearity n0 = nonlinearity(x, bs);
  if (!cfg.corrector) {
    const auto [w, u] = apply_S_nonlinear(sg, 0.5 * dt, n0);
    next.omega.axpy(-dt, w);
    next.u_theta.axpy(-dt, u);
    return next;
  }
  // Exponential midpoint: predict the state at dt/2, then use its pairing.
  AxiState half = linear(0.5 * dt, x);
  {
    const auto [w, u] = apply_S_nonlinear(sg, 0.25 * dt, n0);
    half.omega.axpy(-0.5 * dt, w);
    half.u_theta.axpy(-0.5 * dt, u);
  }
  const auto [w, u] = apply_S_nonlinear(sg, 0.5 * dt, nonlinearity(half, bs));
  next.omega.axpy(-dt, w);
  next.u_theta.axpy(-dt, u);
  return next;
}

SolveResult duhamel_solve(const AxiState& initial, const SolverConfig& cfg) {
  const auto t0 = Clock::now();
  if (const auto v = cfg.violations(initial.grid()); !v.empty()) throw DomainError("duhamel_solve: " + v.front());
  const Grid& g = initial.grid();
  const Semigroup& sg = semigroup_for(g, cfg.source_rule);
  const BiotSavart* bs = nullptr;
  std::unique_ptr<BiotSavart> own;
  if (cfg.nonlinear) {
    if (cfg.bs_path == BSPath::fft) {
      bs = &biot_savart_for(g);
    } else {
      own = std::make_unique<BiotSavart>(g, cfg.bs_path);
      bs = own.get();
    }
  }
  SolveResult res{Trajectory(g, TrajectorySource::duhamel), SolveStatus::ok, "", 0, {}, {}, 0.0, 0.0};
  AxiState x(initial.omega, initial.u_theta);
  x.omega.set_tag(Quantity::omega_theta);
  x.u_theta.set_tag(Quantity::u_theta);
  res.traj.push(0.0, x);
  const double ceiling = initial_ceiling(initial, cfg.blowup_factor);
  const long long steps = std::max(1LL, std::llround(cfg.T / cfg.dt));
  const int every = cfg.steps_per_sample();
  const double h = cfg.dt / cfg.substeps;
  for (long long n = 1; n <= steps; ++n) {
    for (int s = 0; s < cfg.substeps; ++s) x = duhamel_step(x, h, cfg, sg, *bs);
    const double peak = std::max(x.omega.max_abs(), x.u_theta.max_abs());
    if (!std::isfinite(peak) || peak > ceiling) {
      res.status = SolveStatus::blow_up;
      std::ostringstream msg;
      msg << "sup norm " << peak << " exceeded the ceiling " << ceiling << " at t = " << n * cfg.dt;
      res.message = msg.str();
      break;
    }
    if (n % every == 0 || n == steps) res.traj.push(n * cfg.dt, x);
  }
  res.iterations = static_cast<int>(steps);
  res.seconds = seconds_since(t0);
  return res;
}

// ---------------------------------------------------------------------------

double data_norm(const AxiState& x0) {
  return lp_norm_r3(x0.omega, 1.5) + lp_norm_omega(x0.omega, 1.0) + lp_norm_omega(x0.u_theta, 2.0);
}

namespace {

AxiState random_data(const Grid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MixtureOptions mix;
  mix.rc_hi = std::min(mix.rc_hi, 0.5 * grid.r_max());
  mix.zc_abs = std::min(mix.zc_abs, 0.4 * grid.z_max());
  ScalarField w = render_mixture(grid, draw_mixture(rng, mix), Quantity::omega_theta, AxisFactor::linear);
  ScalarField u = render_mixture(grid, draw_mixture(rng, mix), Quantity::u_theta, AxisFactor::linear);
  return AxiState(std::move(w), std::move(u));
}

}  // namespace

ConstantsReport estimate_constants(const Grid& grid, int trials, std::uint64_t seed, double T, double cadence) {
  if (trials < 1) throw DomainError("estimate_constants: trials must be >= 1");
  ConstantsReport rep;
  rep.trials = trials;
  for (int k = 0; k < trials; ++k) {
    const AxiState x0 = random_data(grid, sample_seed(seed, 2 * k));
    const AxiState y0 = random_data(grid, sample_seed(seed, 2 * k + 1));
    const Trajectory x = linear_evolution(x0, T, cadence);
    const Trajectory y = linear_evolution(y0, T, cadence);
    const double nx = xt_norm(x, T), ny = xt_norm(y, T);
    const double dx = data_norm(x0), dy = data_norm(y0);
    if (dx > 0.0) rep.C1_samples.push_back(nx / dx);
    if (dy > 0.0) rep.C1_samples.push_back(ny / dy);
    if (nx > 0.0 && ny > 0.0) rep.C2_samples.push_back(xt_norm(bilinear_F_all(x, y), T) / (nx * ny));
  }
  for (double c : rep.C1_samples) rep.C1 = std::max(rep.C1, c);
  for (double c : rep.C2_samples) rep.C2 = std::max(rep.C2, c);
  return rep;
}

}  // namespace axisym
