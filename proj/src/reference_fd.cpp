#include "axisym/reference_fd.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "axisym/errors.hpp"

namespace axisym {

namespace {

using Clock = std::chrono::steady_clock;

// A field with one ghost layer on every side, indexed i in [-1, nr], k in [-1, nz].
class Padded {
 public:
  enum class Axis { odd, even };
  enum class Far { zero_face, copy };

  Padded(const ScalarField& f, Axis axis, Far far) : nr_(f.grid().nr()), nz_(f.grid().nz()), v_((nr_ + 2) * (nz_ + 2)) {
    for (int i = 0; i < nr_; ++i)
      for (int k = 0; k < nz_; ++k) at(i, k) = f(i, k);
    const double s_axis = axis == Axis::odd ? -1.0 : 1.0;
    const double s_far = far == Far::zero_face ? -1.0 : 1.0;
    for (int k = 0; k < nz_; ++k) {
      at(-1, k) = s_axis * at(0, k);
      at(nr_, k) = s_far * at(nr_ - 1, k);
    }
    for (int i = -1; i <= nr_; ++i) {
      at(i, -1) = s_far * at(i, 0);
      at(i, nz_) = s_far * at(i, nz_ - 1);
    }
  }

  double& at(int i, int k) { return v_[static_cast<std::size_t>(i + 1) * (nz_ + 2) + (k + 1)]; }
  double at(int i, int k) const { return v_[static_cast<std::size_t>(i + 1) * (nz_ + 2) + (k + 1)]; }

 private:
  int nr_, nz_;
  std::vector<double> v_;
};

using Axis = Padded::Axis;
using Far = Padded::Far;

double max_speed(const Velocity& v) {
  double m = 0.0;
  for (std::size_t n = 0; n < v.ur.values().size(); ++n)
    m = std::max(m, std::hypot(v.ur.values()[n], v.uz.values()[n]));
  return m;
}

}  // namespace

std::vector<std::string> FDConfig::violations() const {
  std::vector<std::string> v;
  if (!(T > 0.0)) v.push_back("fd.T must be positive");
  if (!(cadence > 0.0)) v.push_back("fd.cadence must be positive");
  if (!(cfl > 0.0 && cfl <= 1.0)) v.push_back("fd.cfl must lie in (0, 1]");
  if (!(viscous_safety > 0.0 && viscous_safety <= 1.0)) v.push_back("fd.viscous_safety must lie in (0, 1]");
  if (sponge_cells < 0) v.push_back("fd.sponge_cells must be >= 0");
  if (!(sponge_rate >= 0.0)) v.push_back("fd.sponge_rate must be >= 0");
  if (!(max_dt >= 0.0)) v.push_back("fd.max_dt must be >= 0");
  return v;
}

std::vector<std::string> FDConfig::violations(const Grid& grid) const {
  std::vector<std::string> v = violations();
  const double limit = fd_viscous_limit(grid);
  if (max_dt > limit) {
    std::ostringstream msg;
    msg << "fd.max_dt = " << max_dt << " exceeds the viscous limit " << limit << " on this grid";
    v.push_back(msg.str());
  }
  return v;
}

double fd_viscous_limit(const Grid& g) {
  const double hr = g.hr(), hz = g.hz();
  double worst = 0.0;
  for (int i = 0; i < g.nr(); ++i) {
    const double r = g.r(i);
    const double lo = 1.0 / (hr * hr) - 0.5 / (r * hr);
    const double hi = 1.0 / (hr * hr) + 0.5 / (r * hr);
    double centre = -2.0 / (hr * hr) - 2.0 / (hz * hz) - 1.0 / (r * r);
    if (i == 0) centre -= lo;                 // odd axis ghost
    if (i == g.nr() - 1) centre -= hi;        // zero-face ghost
    double off = (i == 0 ? 0.0 : std::abs(lo)) + (i == g.nr() - 1 ? 0.0 : std::abs(hi));
    // The z ends fold -1/hz^2 into the centre and drop one neighbour; the
    // interior bound dominates.
    off += 2.0 / (hz * hz);
    worst = std::max(worst, std::abs(centre) + off);
    worst = std::max(worst, std::abs(centre - 1.0 / (hz * hz)) + off - 1.0 / (hz * hz));
  }
  return 2.0 / worst;
}

double fd_stability_limit(const AxiState& state, const FDConfig& cfg, const BiotSavart& bs) {
  const Grid& g = state.grid();
  double limit = cfg.viscous_safety * fd_viscous_limit(g);
  if (cfg.advection || cfg.coupling) {
    const double speed = max_speed(bs.velocity(state.omega));
    if (speed > 0.0) limit = std::min(limit, cfg.cfl * std::min(g.hr(), g.hz()) / speed);
  }
  return limit;
}

ScalarField fd_cylindrical_laplacian(const ScalarField& f) {
  const Grid& g = f.grid();
  const Padded p(f, Axis::odd, Far::zero_face);
  const double hr = g.hr(), hz = g.hz();
  ScalarField out(g, f.tag());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < g.nr(); ++i) {
    const double r = g.r(i);
    for (int k = 0; k < g.nz(); ++k) {
      const double c = p.at(i, k);
      const double frr = (p.at(i + 1, k) - 2.0 * c + p.at(i - 1, k)) / (hr * hr);
      const double fzz = (p.at(i, k + 1) - 2.0 * c + p.at(i, k - 1)) / (hz * hz);
      const double fr = (p.at(i + 1, k) - p.at(i - 1, k)) / (2.0 * hr);
      out(i, k) = frr + fzz + fr / r - c / (r * r);
    }
  }
  return out;
}

std::pair<ScalarField, ScalarField> fd_nonlinear_terms(const AxiState& s, const Velocity& v, NonlinearForm form,
                                                       bool advection, bool coupling) {
  const Grid& g = s.grid();
  const double hr = g.hr(), hz = g.hz();
  const Padded w(s.omega, Axis::odd, Far::zero_face);
  const Padded u(s.u_theta, Axis::odd, Far::zero_face);
  const Padded ur(v.ur, Axis::odd, Far::copy);
  const Padded uz(v.uz, Axis::even, Far::copy);
  ScalarField nw(g, Quantity::omega_theta), nu(g, Quantity::u_theta);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < g.nr(); ++i) {
    const double r = g.r(i);
    for (int k = 0; k < g.nz(); ++k) {
      auto dr = [&](auto fn) { return (fn(i + 1, k) - fn(i - 1, k)) / (2.0 * hr); };
      auto dz = [&](auto fn) { return (fn(i, k + 1) - fn(i, k - 1)) / (2.0 * hz); };
      auto W = [&](int a, int b) { return w.at(a, b); };
      auto U = [&](int a, int b) { return u.at(a, b); };
      auto U2 = [&](int a, int b) { return u.at(a, b) * u.at(a, b); };
      double a_w = 0.0, a_u = 0.0, c_w = 0.0, c_u = 0.0;
      if (form == NonlinearForm::primitive) {
        a_w = ur.at(i, k) * dr(W) + uz.at(i, k) * dz(W);
        a_u = ur.at(i, k) * dr(U) + uz.at(i, k) * dz(U);
        c_w = -ur.at(i, k) * w.at(i, k) / r - 2.0 * u.at(i, k) * dz(U) / r;
        c_u = ur.at(i, k) * u.at(i, k) / r;
      } else {
        a_w = dr([&](int a, int b) { return ur.at(a, b) * w.at(a, b); }) +
              dz([&](int a, int b) { return uz.at(a, b) * w.at(a, b); });
        a_u = dr([&](int a, int b) { return ur.at(a, b) * u.at(a, b); }) +
              dz([&](int a, int b) { return uz.at(a, b) * u.at(a, b); });
        c_w = -dz(U2) / r;
        c_u = 2.0 * ur.at(i, k) * u.at(i, k) / r;
      }
      nw(i, k) = (advection ? a_w : 0.0) + (coupling ? c_w : 0.0);
      nu(i, k) = (advection ? a_u : 0.0) + (coupling ? c_u : 0.0);
    }
  }
  return {std::move(nw), std::move(nu)};
}

AxiState fd_rhs(const AxiState& s, const Velocity& v, const FDConfig& cfg) {
  const Grid& g = s.grid();
  AxiState out(fd_cylindrical_laplacian(s.omega), fd_cylindrical_laplacian(s.u_theta));
  out.omega.set_tag(Quantity::omega_theta);
  out.u_theta.set_tag(Quantity::u_theta);
  if (cfg.advection || cfg.coupling) {
    const auto [nw, nu] = fd_nonlinear_terms(s, v, NonlinearForm::primitive, cfg.advection, cfg.coupling);
    out.omega.axpy(-1.0, nw);
    out.u_theta.axpy(-1.0, nu);
  }
  if (cfg.sponge_cells > 0 && cfg.sponge_rate > 0.0) {
    const int sc = cfg.sponge_cells;
    for (int i = 0; i < g.nr(); ++i)
      for (int k = 0; k < g.nz(); ++k) {
        if (i < g.nr() - sc && k >= sc && k < g.nz() - sc) continue;
        out.omega(i, k) -= cfg.sponge_rate * s.omega(i, k);
        out.u_theta(i, k) -= cfg.sponge_rate * s.u_theta(i, k);
      }
  }
  return out;
}

namespace {

// bs may be null when neither transport nor coupling is active.
AxiState step_impl(const AxiState& s, double dt, const FDConfig& cfg, const BiotSavart* bs) {
  const bool nonlinear = cfg.advection || cfg.coupling;
  const Grid& g = s.grid();
  const Velocity v0 = nonlinear ? bs->velocity(s.omega) : Velocity{ScalarField(g), ScalarField(g)};
  double limit = cfg.viscous_safety * fd_viscous_limit(g);
  if (nonlinear) {
    const double speed = max_speed(v0);
    if (speed > 0.0) limit = std::min(limit, cfg.cfl * std::min(g.hr(), g.hz()) / speed);
  }
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "fd_step: dt = " << dt << " exceeds the stability limit " << limit;
    throw DomainError(msg.str());
  }
  const AxiState k1 = fd_rhs(s, v0, cfg);
  AxiState mid(s.omega, s.u_theta);
  mid.omega.axpy(dt, k1.omega);
  mid.u_theta.axpy(dt, k1.u_theta);
  const Velocity v1 = nonlinear ? bs->velocity(mid.omega) : v0;
  const AxiState k2 = fd_rhs(mid, v1, cfg);
  AxiState out(s.omega, s.u_theta);
  out.omega.axpy(0.5 * dt, k1.omega).axpy(0.5 * dt, k2.omega);
  out.u_theta.axpy(0.5 * dt, k1.u_theta).axpy(0.5 * dt, k2.u_theta);
  out.omega.set_tag(Quantity::omega_theta);
  out.u_theta.set_tag(Quantity::u_theta);
  return out;
}

}  // namespace

AxiState fd_step(const AxiState& s, double dt, const FDConfig& cfg, const BiotSavart& bs) {
  return step_impl(s, dt, cfg, &bs);
}

AxiState fd_step(const AxiState& s, double dt) {
  const FDConfig cfg;
  return fd_step(s, dt, cfg, biot_savart_for(s.grid()));
}

SolveResult fd_solve(const AxiState& initial, const FDConfig& cfg) {
  const auto t0 = Clock::now();
  if (const auto v = cfg.violations(initial.grid()); !v.empty()) throw DomainError("fd_solve: " + v.front());
  const Grid& g = initial.grid();
  const bool nonlinear = cfg.advection || cfg.coupling;
  std::unique_ptr<BiotSavart> own;
  const BiotSavart* bs = nullptr;
  if (nonlinear) {
    if (cfg.bs_path == BSPath::fft) {
      bs = &biot_savart_for(g);
    } else {
      own = std::make_unique<BiotSavart>(g, cfg.bs_path);
      bs = own.get();
    }
  }
  SolveResult res{Trajectory(g, TrajectorySource::fd_reference), SolveStatus::ok, "", 0, {}, {}, 0.0, 0.0};
  AxiState x(initial.omega, initial.u_theta);
  x.omega.set_tag(Quantity::omega_theta);
  x.u_theta.set_tag(Quantity::u_theta);
  res.traj.push(0.0, x);
  const double peak0 = std::max(x.omega.max_abs(), x.u_theta.max_abs());
  const double ceiling = peak0 > 0.0 ? cfg.blowup_factor * peak0 : std::numeric_limits<double>::infinity();
  const double visc = cfg.viscous_safety * fd_viscous_limit(g);
  const long long intervals = std::max(1LL, std::llround(cfg.T / cfg.cadence));
  const double span = cfg.T / intervals;
  for (long long n = 1; n <= intervals; ++n) {
    double limit = cfg.max_dt > 0.0 ? std::min(visc, cfg.max_dt) : visc;
    if (nonlinear) {
      const double speed = max_speed(bs->velocity(x.omega));
      if (speed > 0.0) limit = std::min(limit, cfg.cfl * std::min(g.hr(), g.hz()) / speed);
    }
    const long steps = static_cast<long>(std::ceil(span / limit * (1.0 + 1e-12)));
    const double dt = span / steps;
    for (long s = 0; s < steps; ++s) {
      x = step_impl(x, dt, cfg, bs);
      ++res.iterations;
    }
    const double peak = std::max(x.omega.max_abs(), x.u_theta.max_abs());
    if (!std::isfinite(peak) || peak > ceiling) {
      res.status = SolveStatus::blow_up;
      std::ostringstream msg;
      msg << "sup norm " << peak << " exceeded the ceiling " << ceiling << " at t = " << n * span;
      res.message = msg.str();
      break;
    }
    res.traj.push(n * span, x);
  }
  res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

GapReport uniqueness_gap(const Trajectory& a, const Trajectory& b) {
  require_same_grid(a.grid, b.grid, "uniqueness_gap");
  if (a.size() != b.size()) throw GridMismatchError("uniqueness_gap: trajectories have different lengths");
  for (std::size_t n = 0; n < a.size(); ++n)
    if (std::abs(a.times[n] - b.times[n]) > 1e-9 * std::max(1.0, b.times[n]))
      throw GridMismatchError("uniqueness_gap: trajectories use different time lattices");
  GapReport rep;
  if (a.empty()) return rep;
  const BiotSavart& bs = biot_savart_for(a.grid);
  for (std::size_t n = 0; n < a.size(); ++n) {
    const Velocity va = bs.velocity(a.states[n].omega);
    const Velocity vb = bs.velocity(b.states[n].omega);
    const double dr = lp_norm_r3(va.ur - vb.ur, 2.0);
    const double dz = lp_norm_r3(va.uz - vb.uz, 2.0);
    const double dt = lp_norm_r3(a.states[n].u_theta - b.states[n].u_theta, 2.0);
    const double nb = std::sqrt(std::pow(lp_norm_r3(vb.ur, 2.0), 2) + std::pow(lp_norm_r3(vb.uz, 2.0), 2) +
                                std::pow(lp_norm_r3(b.states[n].u_theta, 2.0), 2));
    const double gap = std::sqrt(dr * dr + dz * dz + dt * dt);
    rep.times.push_back(b.times[n]);
    rep.gap.push_back(gap);
    rep.relative_gap.push_back(nb > 0.0 ? gap / nb : 0.0);
  }
  // Exponential growth would show as a positive slope of log(gap) in t.
  std::vector<double> xs, ys;
  const double half = 0.5 * rep.times.back();
  for (std::size_t n = 0; n < rep.times.size(); ++n)
    if (rep.times[n] >= half && rep.relative_gap[n] > 0.0) {
      xs.push_back(rep.times[n]);
      ys.push_back(std::log(rep.relative_gap[n]));
    }
  if (xs.size() >= 2) {
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
    rep.growth_rate = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  rep.et_b = et_membership(b, b.final_time());
  return rep;
}

}  // namespace axisym
