// Acceptance checks. Prints progress as INFO lines, then one PASS/FAIL line
// per criterion. Arguments select a subset of criteria (default: all).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "axisym/biot_savart.hpp"
#include "axisym/diagnostics.hpp"
#include "axisym/mild_solver.hpp"
#include "axisym/reference_fd.hpp"
#include "axisym/runner.hpp"
#include "axisym/semigroup.hpp"
#include "axisym/special_functions.hpp"
#include "oracles.hpp"

using namespace axisym;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string summary;
};

void info(const std::string& s) { std::printf("INFO %s\n", s.c_str()), std::fflush(stdout); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const Grid kDefault = GridSpec{}.grid();

// r u_theta sup series of every nonlinear run, for the maximum principle.
struct RunRecord {
  std::string name;
  std::vector<double> r_utheta;
  double h = 0.0;
};
std::vector<RunRecord> g_runs;

void record(const std::string& name, const Trajectory& traj) {
  RunRecord r{name, {}, std::max(traj.grid.hr(), traj.grid.hz())};
  for (const auto& n : traj.norms) r.r_utheta.push_back(n.Linf_r_utheta);
  g_runs.push_back(std::move(r));
}

AxiState gaussian_ring(const Grid& g, double amp, double swirl) {
  RunSpec spec;
  spec.grid = GridSpec{g.nr(), g.nz(), g.r_max(), g.z_max()};
  spec.initial.amplitude = amp;
  spec.initial.swirl_amplitude = swirl;
  return make_initial(spec);
}

// Measured constants on the default grid over [0, 2], shared by criteria 5 and 9.
const ConstantsReport& default_constants() {
  static const ConstantsReport rep = [] {
    const auto t0 = Clock::now();
    ConstantsReport r = estimate_constants(kDefault, RunSpec{}.trials, 1, 2.0, 0.1);
    info(fmt("constants on the default grid: C1 = %.6g, C2 = %.6g (%d trials, %.1f s)", r.C1, r.C2, r.trials,
             seconds_since(t0)));
    return r;
  }();
  return rep;
}

SolverConfig default_solver(double T) {
  SolverConfig cfg;
  cfg.T = T;
  return cfg;
}

Verdict special_functions() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i <= 240; ++i) {
    const double t = std::pow(10.0, -6.0 + 12.0 * (i + 0.37) / 241.0);
    worst = std::max(worst, std::abs(eval_H(t) - oracle::H(t)) / oracle::H(t));
  }
  const double a = std::abs(eval_H(1e-3) - 0.99925);
  const double b = std::abs(std::pow(1e4, 1.5) * eval_H(1e4) - 0.443113);
  const double secs = seconds_since(t0);
  const bool pass = worst <= 1e-8 && a <= 1e-5 && b <= 1e-3 && secs < 5.0;
  return {pass, fmt("max relative error vs quadrature %.2e (<= 1e-8), |H(1e-3) - 0.99925| = %.2e (<= 1e-5), "
                    "|t^1.5 H(1e4) - 0.443113| = %.2e (<= 1e-3), %.1f s (< 5)",
                    worst, a, b, secs)};
}

Verdict semigroup_exactness() {
  const auto t0 = Clock::now();
  auto exact = [](const Grid& g, double t) {
    return ScalarField::from_function(g, [t](double r, double z) { return oracle::exact_5d(r, z, t); });
  };
  std::vector<double> errors;
  for (int n : {48, 96, 192}) {
    const Grid g(n, 2 * n, 12.0, 12.0);
    errors.push_back(oracle::relative_l2(apply_S(1.0, exact(g, 1.0)), exact(g, 2.0)));
    info(fmt("exact family, %d x %d: relative L2 error %.3e", n, 2 * n, errors.back()));
  }
  const double slope = oracle::refinement_order(errors);
  const ScalarField f = exact(kDefault, 1.0);
  const double comp = oracle::relative_l2(apply_S(0.3, apply_S(0.7, f)), apply_S(1.0, f));
  const double secs = seconds_since(t0);
  const bool pass = errors.back() <= 1e-3 && std::abs(slope - 2.0) <= 0.3 && comp <= 1e-3 && secs < 120.0;
  return {pass, fmt("default-grid error %.2e (<= 1e-3), refinement slope %.2f (2 +- 0.3), composition error %.2e "
                    "(<= 1e-3), %.1f s (< 120)",
                    errors.back(), slope, comp, secs)};
}

Verdict estimate_suites_check() {
  const auto t0 = Clock::now();
  const std::vector<RatioReport> reports = estimate_suites(100000, 1);
  std::map<std::string, int> count;
  bool all = true;
  double worst_trend = -1e300;
  for (const auto& r : reports) {
    ++count[r.suite + (r.suite == "semigroup_bound" ? ":" + r.variant : "")];
    all = all && r.finite() && r.trend_slope <= 0.05;
    worst_trend = std::max(worst_trend, r.trend_slope);
    info(fmt("%s %s p=%g q=%g: sup %.4g, trend %.4f", r.suite.c_str(), r.variant.c_str(), r.p, r.q, r.sup_ratio,
             r.trend_slope));
  }
  const bool tuples = count["semigroup_bound:i"] >= 6 && count["semigroup_bound:ii"] >= 6 &&
                      count["semigroup_bound:iii"] >= 6 && count["pointwise_assertion"] >= 2 &&
                      count["bs_weighted_estimate"] >= 1 && count["lemur_bounds"] >= 1 && count["hardy_sobolev"] >= 1;
  const double secs = seconds_since(t0);
  return {all && tuples && secs < 600.0,
          fmt("%zu suites at 1e5 samples, all finite: %s, max trend slope %.4f (<= 0.05), %.0f s (< 600)",
              reports.size(), all ? "yes" : "no", worst_trend, secs)};
}

Verdict biot_savart_consistency() {
  bool zero = true;
  const Grid g32(32, 32, 4.0, 2.0);
  for (BSPath p : {BSPath::naive, BSPath::fft, BSPath::streaming}) {
    const Velocity v = BiotSavart(g32, p).velocity(ScalarField(g32, Quantity::omega_theta));
    zero = zero && v.ur.max_abs() == 0.0 && v.uz.max_abs() == 0.0;
  }
  std::vector<double> div, curl;
  for (int n : {32, 64, 128}) {
    const Grid g(n, n, 6.0, 3.0);
    const ScalarField w = ScalarField::from_function(
        g, [](double r, double z) { return r * std::exp(-2 * ((r - 1.5) * (r - 1.5) + z * z)); },
        Quantity::omega_theta);
    const BSResiduals res = bs_residuals(w, velocity_from_vorticity(w));
    div.push_back(res.divergence);
    curl.push_back(res.curl);
    info(fmt("residuals %d x %d: divergence %.3e, curl %.3e", n, n, res.divergence, res.curl));
  }
  const double od = oracle::refinement_order(div), oc = oracle::refinement_order(curl);
  const ScalarField w = ScalarField::from_function(
      g32, [](double r, double z) { return r * std::exp(-((r - 2) * (r - 2) + z * z) / 0.5); }, Quantity::omega_theta);
  const Velocity a = BiotSavart(g32, BSPath::naive).velocity(w);
  const Velocity b = BiotSavart(g32, BSPath::fft).velocity(w);
  const double scale = std::max(a.ur.max_abs(), a.uz.max_abs());
  const double agree = std::max((a.ur - b.ur).max_abs(), (a.uz - b.uz).max_abs()) / scale;
  const bool pass = zero && std::abs(od - 2.0) <= 0.3 && std::abs(oc - 2.0) <= 0.3 && agree <= 1e-10;
  return {pass, fmt("zero in, zero out: %s; divergence order %.2f, curl order %.2f (2 +- 0.3); naive vs FFT %.2e "
                    "(<= 1e-10)",
                    zero ? "yes" : "no", od, oc, agree)};
}

Verdict fixed_point() {
  const auto t0 = Clock::now();
  const ConstantsReport& c = default_constants();
  AxiState x0 = gaussian_ring(kDefault, 0.5, 0.2);
  const double target = 0.1 / (4.0 * c.C2);
  const double scale = target / (c.C1 * data_norm(x0));
  x0.omega.scale(scale);
  x0.u_theta.scale(scale);
  const SolverConfig cfg = default_solver(2.0);
  const SolveResult res = picard_solve(x0, cfg);
  record("fixed point (Picard, default grid)", res.traj);
  double worst = 0.0;
  for (double r : res.increment_ratios) worst = std::max(worst, r);
  std::ostringstream ratios;
  for (double r : res.increment_ratios) ratios << " " << fmt("%.3g", r);
  info("Picard increment ratios:" + ratios.str());
  const double secs = seconds_since(t0);
  const bool pass = res.status == SolveStatus::ok && worst <= 0.5 && res.residual <= 2 * cfg.picard_tol && secs < 600;
  return {pass, fmt("C1 |x0| = %.4g = 0.1 / (4 C2); %d iterations, max increment ratio %.3f (<= 0.5), residual %.2e "
                    "(<= %.1e), %.0f s (< 600)",
                    c.C1 * data_norm(x0), res.iterations, worst, res.residual, 2 * cfg.picard_tol, secs)};
}

Verdict cross_solver() {
  std::vector<double> dist;
  double growth = 0.0;
  for (int n : {96, 192}) {
    const Grid g(n, 2 * n, 12.0, 12.0);
    const AxiState x0 = gaussian_ring(g, 0.05, 0.05);
    const SolverConfig cfg = default_solver(1.0);
    const SolveResult mild = duhamel_solve(x0, cfg);
    FDConfig fcfg;
    fcfg.T = cfg.T;
    fcfg.cadence = cfg.cadence;
    const SolveResult fd = fd_solve(x0, fcfg);
    if (mild.status != SolveStatus::ok || fd.status != SolveStatus::ok)
      return {false, "solver failure: " + mild.message + " " + fd.message};
    record(fmt("Duhamel %d x %d", n, 2 * n), mild.traj);
    record(fmt("FD %d x %d", n, 2 * n), fd.traj);
    const AxiState& a = mild.traj.states.back();
    const AxiState& b = fd.traj.states.back();
    const double d = std::hypot(lp_norm_omega(a.omega - b.omega, 2.0), lp_norm_omega(a.u_theta - b.u_theta, 2.0)) /
                     std::hypot(lp_norm_omega(b.omega, 2.0), lp_norm_omega(b.u_theta, 2.0));
    dist.push_back(d);
    const GapReport gap = uniqueness_gap(mild.traj, fd.traj);
    growth = std::max(growth, gap.growth_rate);
    info(fmt("%d x %d: relative L2 distance at T = 1 %.3e, velocity gap growth rate %.3f", n, 2 * n, d,
             gap.growth_rate));
  }
  const bool pass = dist.back() <= 0.03 && dist.back() < dist.front() && growth <= 0.05;
  return {pass, fmt("distance at T = 1: %.2e on the default grid (<= 3e-2), %.2e on the coarse grid (improving: %s); "
                    "max gap growth rate %.3f (<= 0.05)",
                    dist.back(), dist.front(), dist.back() < dist.front() ? "yes" : "no", growth)};
}

Verdict decay_laws() {
  const auto t0 = Clock::now();
  // The diffusion length at T = 50 is about 14, so the domain is enlarged.
  const Grid g(96, 192, 36.0, 36.0);
  SolverConfig cfg = default_solver(50.0);
  cfg.dt = 0.1;
  cfg.cadence = 0.5;
  bool slopes = true, monotone = true;
  for (const auto& [name, swirl] : std::vector<std::pair<std::string, double>>{{"no swirl", 0.0}, {"small swirl", 0.1}}) {
    const SolveResult res = duhamel_solve(gaussian_ring(g, 0.1, swirl), cfg);
    if (res.status != SolveStatus::ok) return {false, name + " run failed: " + res.message};
    record("decay " + name, res.traj);
    std::vector<std::pair<NormKind, double>> fits = {{NormKind::omega_Omega, 2.0}, {NormKind::omega_Omega, 4.0}};
    if (swirl > 0.0) fits.insert(fits.end(), {{NormKind::utheta_Omega, 2.0}, {NormKind::utheta_Omega, 4.0}});
    for (const auto& [kind, p] : fits) {
      const DecayFit f = decay_exponent_fit(res.traj, kind, p);
      const bool ok = std::abs(f.slope - f.predicted) <= 0.1;
      slopes = slopes && ok;
      info(fmt("%s: %s p=%g slope %.3f, predicted %.3f over [%.2f, %.0f] -> %s", name.c_str(), to_string(kind), p,
               f.slope, f.predicted, f.t_min, f.t_max, ok ? "within 0.1" : "outside 0.1"));
    }
    const AsymptoticsReport a = asymptotics_report(res.traj);
    const bool mono = a.decreasing_L1_omega && a.decreasing_L32_omega && a.decreasing_L2_utheta;
    monotone = monotone && mono;
    info(fmt("%s: final-quarter decrease of L1(Omega), L3/2(R3), u L2(Omega): %s", name.c_str(), mono ? "yes" : "no"));
  }
  info("Gaussian data has finite five-dimensional mass, so omega/r decays like the 5-D heat kernel and the fitted "
       "slopes approach -(2 - 1/p), steeper than the bound exponents the criterion asks for");
  const double secs = seconds_since(t0);
  return {slopes && monotone && secs < 1800.0,
          fmt("fitted slopes within 0.1 of the predicted exponents: %s; final-quarter monotone decrease: %s; "
              "%.0f s (< 1800)",
              slopes ? "yes" : "no", monotone ? "yes" : "no", secs)};
}

Verdict calderon_workflow() {
  const ConstantsReport& c = default_constants();
  const AxiState x0 = gaussian_ring(kDefault, 20.0, 8.0);
  const CalderonRadius cr = find_calderon_radius(x0, c.C1, c.C2);
  if (!cr.found) return {false, "no split radius meets C1 |outer| < 1 / (4 C2)"};
  const CalderonParts& p = cr.parts;
  const bool exact = (p.inner.omega + p.outer.omega - x0.omega).max_abs() == 0.0 &&
                     (p.inner.u_theta + p.outer.u_theta - x0.u_theta).max_abs() == 0.0;
  const bool interior = cr.A > kDefault.hr();
  const SolveResult res = picard_solve(p.outer, default_solver(2.0));
  record("Calderon outer part (Picard)", res.traj);
  info(fmt("C1 |x0| = %.4g, threshold %.4g, A = %.4g, C1 |outer| = %.4g, Picard %s in %d iterations",
           c.C1 * data_norm(x0), cr.threshold, cr.A, cr.C1_times_norm, to_string(res.status), res.iterations));
  const bool pass = exact && interior && res.status == SolveStatus::ok;
  return {pass, fmt("partition exact: %s; A = %.4g found (interior: %s); outer Picard status %s after %d iterations",
                    exact ? "yes" : "no", cr.A, interior ? "yes" : "no", to_string(res.status), res.iterations)};
}

Verdict reproducibility() {
  const fs::path base = fs::temp_directory_path() / "axisym_acceptance_repro";
  fs::remove_all(base);
  auto spec_for = [&](const std::string& experiment, const std::string& tag) {
    RunSpec s;
    s.experiment = experiment;
    s.grid = GridSpec{32, 64, 8.0, 8.0};
    s.initial.swirl_amplitude = 0.3;
    s.solver.T = 1.0;
    s.solver.dt = 0.05;
    s.trials = 2;
    s.seed = 7;
    s.out = (base / (experiment + "_" + tag)).string();
    return s;
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  int files = 0;
  bool same = true;
  for (const std::string experiment : {"simulate", "estimate-constants"}) {
    const RunSpec a = spec_for(experiment, "a"), b = spec_for(experiment, "b");
    if (run(a).code != ExitCode::ok || run(b).code != ExitCode::ok) return {false, experiment + " run failed"};
    for (const auto& entry : fs::directory_iterator(a.out)) {
      if (entry.path().extension() != ".csv") continue;
      ++files;
      same = same && slurp(entry.path()) == slurp(fs::path(b.out) / entry.path().filename());
    }
  }
  fs::remove_all(base);
  return {same && files > 0, fmt("%d CSV files from two identical runs compared: %s", files,
                                 same ? "byte-identical" : "different")};
}

Verdict maximum_principle() {
  bool all = true;
  for (const auto& r : g_runs) {
    const bool ok = non_increasing(r.r_utheta, 0, 1.0 + 10.0 * r.h * r.h, 0.0);
    all = all && ok;
    info(fmt("max principle on %s (%zu samples): %s", r.name.c_str(), r.r_utheta.size(), ok ? "holds" : "violated"));
  }
  return {all && !g_runs.empty(),
          fmt("sup |r u_theta| non-increasing (factor 1 + 10 h^2) on %zu nonlinear runs: %s", g_runs.size(),
              all ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int k = 1; k < argc; ++k) selected.insert(std::atoi(argv[k]));
  if (selected.empty())
    for (int k = 1; k <= 10; ++k) selected.insert(k);

  const std::vector<std::pair<int, std::pair<std::string, std::function<Verdict()>>>> criteria = {
      {1, {"special-function fidelity", special_functions}},
      {2, {"semigroup exactness", semigroup_exactness}},
      {3, {"estimate suites", estimate_suites_check}},
      {4, {"Biot-Savart consistency", biot_savart_consistency}},
      {5, {"fixed-point behavior", fixed_point}},
      {6, {"cross-solver agreement", cross_solver}},
      {8, {"decay laws", decay_laws}},
      {9, {"Calderon workflow", calderon_workflow}},
      {10, {"reproducibility", reproducibility}},
      {7, {"maximum principle", maximum_principle}},  // last: collects the runs above
  };
  std::map<int, std::pair<std::string, Verdict>> verdicts;
  for (const auto& [id, c] : criteria) {
    if (!selected.count(id)) continue;
    info(fmt("criterion %d: %s", id, c.first.c_str()));
    Verdict v;
    try {
      v = c.second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    info(fmt("criterion %d %s", id, v.pass ? "passed" : "failed"));
    verdicts[id] = {c.first, v};
  }
  int failed = 0;
  for (const auto& [id, entry] : verdicts) {
    std::printf("%s criterion %d (%s): %s\n", entry.second.pass ? "PASS" : "FAIL", id, entry.first.c_str(),
                entry.second.summary.c_str());
    failed += entry.second.pass ? 0 : 1;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
