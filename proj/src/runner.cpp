#include "axisym/runner.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "axisym/biot_savart.hpp"
#include "axisym/diagnostics.hpp"
#include "axisym/errors.hpp"
#include "axisym/semigroup.hpp"
#include "axisym/special_functions.hpp"

namespace axisym {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---------------------------------------------------------------------------
// Values

std::string format_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
std::string format_value(int x) { return std::to_string(x); }
std::string format_value(std::int64_t x) { return std::to_string(x); }
std::string format_value(std::uint64_t x) { return std::to_string(x); }
std::string format_value(bool x) { return x ? "true" : "false"; }
std::string format_value(const std::string& x) { return x; }
std::string format_value(BSPath x) { return to_string(x); }
std::string format_value(SourceRule x) { return to_string(x); }

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw ConfigError("config: " + key + " = '" + value + "' is not " + what);
}

template <class T>
T parse_number(const std::string& key, const std::string& value, const char* what) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  if (!value.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) bad_value(key, value, what);
  return out;
}

void parse_into(const std::string& key, const std::string& v, double& out) {
  out = parse_number<double>(key, v, "a number");
}
void parse_into(const std::string& key, const std::string& v, int& out) {
  out = parse_number<int>(key, v, "an integer");
}
void parse_into(const std::string& key, const std::string& v, std::int64_t& out) {
  // Accept 1e5-style counts as long as they are integral.
  const double d = parse_number<double>(key, v, "an integer");
  if (d != std::floor(d) || std::abs(d) > 9e15) bad_value(key, v, "an integer");
  out = static_cast<std::int64_t>(d);
}
void parse_into(const std::string& key, const std::string& v, std::uint64_t& out) {
  out = parse_number<std::uint64_t>(key, v, "a non-negative integer");
}
void parse_into(const std::string& key, const std::string& v, bool& out) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") out = true;
  else if (s == "false" || s == "0" || s == "no" || s == "off") out = false;
  else bad_value(key, v, "a boolean");
}
void parse_into(const std::string&, const std::string& v, std::string& out) { out = v; }
void parse_into(const std::string& key, const std::string& v, BSPath& out) {
  try {
    out = bs_path_from_string(v);
  } catch (const std::exception&) {
    bad_value(key, v, "one of naive, fft, streaming");
  }
}
void parse_into(const std::string& key, const std::string& v, SourceRule& out) {
  if (v == "cell") out = SourceRule::cell;
  else if (v == "point") out = SourceRule::point;
  else bad_value(key, v, "one of cell, point");
}

struct Entry {
  std::string key;
  std::function<std::string(const RunSpec&)> get;
  std::function<void(RunSpec&, const std::string&)> set;
};

template <class Access>
Entry entry(std::string key, Access access) {
  return Entry{key, [access](const RunSpec& s) { return format_value(access(s)); },
               [access, key](RunSpec& s, const std::string& v) { parse_into(key, v, access(s)); }};
}

#define AXISYM_KEY(name, member) entry(name, [](auto& s) -> auto& { return s.member; })

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      AXISYM_KEY("experiment", experiment),
      AXISYM_KEY("scheme", scheme),
      AXISYM_KEY("out", out),
      AXISYM_KEY("seed", seed),
      AXISYM_KEY("threads", threads),
      AXISYM_KEY("snapshots", snapshots),
      AXISYM_KEY("samples", samples),
      AXISYM_KEY("trials", trials),
      AXISYM_KEY("target_smallness", target_smallness),
      AXISYM_KEY("refine", refine),
      AXISYM_KEY("grid.nr", grid.nr),
      AXISYM_KEY("grid.nz", grid.nz),
      AXISYM_KEY("grid.r_max", grid.r_max),
      AXISYM_KEY("grid.z_max", grid.z_max),
      AXISYM_KEY("initial.family", initial.family),
      AXISYM_KEY("initial.amplitude", initial.amplitude),
      AXISYM_KEY("initial.center_r", initial.center_r),
      AXISYM_KEY("initial.center_z", initial.center_z),
      AXISYM_KEY("initial.width", initial.width),
      AXISYM_KEY("initial.swirl_amplitude", initial.swirl_amplitude),
      AXISYM_KEY("initial.swirl_offset", initial.swirl_offset),
      AXISYM_KEY("initial.t0", initial.t0),
      AXISYM_KEY("initial.omega_file", initial.omega_file),
      AXISYM_KEY("initial.utheta_file", initial.utheta_file),
      AXISYM_KEY("solver.T", solver.T),
      AXISYM_KEY("solver.dt", solver.dt),
      AXISYM_KEY("solver.substeps", solver.substeps),
      AXISYM_KEY("solver.cadence", solver.cadence),
      AXISYM_KEY("solver.picard_tol", solver.picard_tol),
      AXISYM_KEY("solver.max_picard", solver.max_picard),
      AXISYM_KEY("solver.nonlinear", solver.nonlinear),
      AXISYM_KEY("solver.corrector", solver.corrector),
      AXISYM_KEY("solver.blowup_factor", solver.blowup_factor),
      AXISYM_KEY("solver.kernel_path", solver.bs_path),
      AXISYM_KEY("solver.source_rule", solver.source_rule),
      AXISYM_KEY("fd.cfl", fd.cfl),
      AXISYM_KEY("fd.viscous_safety", fd.viscous_safety),
      AXISYM_KEY("fd.max_dt", fd.max_dt),
      AXISYM_KEY("fd.sponge_cells", fd.sponge_cells),
      AXISYM_KEY("fd.sponge_rate", fd.sponge_rate),
      AXISYM_KEY("fd.advection", fd.advection),
      AXISYM_KEY("fd.coupling", fd.coupling),
  };
  return table;
}

#undef AXISYM_KEY

const Entry* find_entry(const std::string& key) {
  for (const auto& e : entries())
    if (e.key == key) return &e;
  return nullptr;
}

std::string env_name(const std::string& key) {
  std::string s = "AXISYM_";
  for (char c : key) s += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// The FD reference shares the horizon, cadence, blow-up guard and kernel path
// of the mild solver; the nonlinear switch turns both FD term groups off.
FDConfig effective_fd(const RunSpec& spec) {
  FDConfig fd = spec.fd;
  fd.T = spec.solver.T;
  fd.cadence = spec.solver.cadence;
  fd.blowup_factor = spec.solver.blowup_factor;
  fd.bs_path = spec.solver.bs_path;
  fd.advection = fd.advection && spec.solver.nonlinear;
  fd.coupling = fd.coupling && spec.solver.nonlinear;
  return fd;
}

std::vector<int> refine_levels(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    int n = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), n);
    if (ec != std::errc() || ptr != item.data() + item.size() || n < 4)
      throw ConfigError("config: refine entry '" + item + "' is not an integer >= 4");
    out.push_back(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
    out_ << '\n';
  }
  CsvWriter& cell(double x) { return raw(csv_number(x)); }
  CsvWriter& cell(const std::string& s) { return raw(s); }
  CsvWriter& cell(std::int64_t x) { return raw(std::to_string(x)); }
  CsvWriter& cell(int x) { return raw(std::to_string(x)); }
  void end() {
    out_ << '\n';
    first_ = true;
  }

 private:
  CsvWriter& raw(const std::string& s) {
    out_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }
  std::ofstream out_;
  bool first_ = true;
};

json json_number(double x) { return std::isfinite(x) ? json(x) : json(csv_number(x)); }

json ratio_json(const RatioReport& r) {
  json j;
  j["suite"] = r.suite;
  j["variant"] = r.variant;
  j["exponents"] = r.exponents;
  j["p"] = json_number(r.p);
  j["q"] = json_number(r.q);
  j["time_power"] = r.time_power;
  j["samples"] = r.samples;
  j["evaluated"] = r.evaluated;
  j["sup_ratio"] = json_number(r.sup_ratio);
  j["trend_slope"] = json_number(r.trend_slope);
  j["bounded"] = r.bounded();
  j["checkpoint_counts"] = r.checkpoint_counts;
  j["checkpoint_sups"] = r.checkpoint_sups;
  return j;
}

json solve_json(const SolveResult& r) {
  json j;
  j["status"] = to_string(r.status);
  j["message"] = r.message;
  j["iterations"] = r.iterations;
  j["increments"] = r.increments;
  j["increment_ratios"] = r.increment_ratios;
  j["residual"] = r.residual;
  j["seconds"] = r.seconds;
  j["samples"] = r.traj.size();
  j["final_time"] = r.traj.final_time();
  return j;
}

json et_json(const ETNorms& e) {
  return json{{"L4L2_omega_R3", e.L4L2_omega}, {"L4L4_utheta_Omega", e.L4L4_utheta}, {"Linf_r_utheta", e.Linf_r_utheta}};
}

ExitCode code_of(SolveStatus s) {
  switch (s) {
    case SolveStatus::ok: return ExitCode::ok;
    case SolveStatus::diverged: return ExitCode::diverged;
    case SolveStatus::blow_up: return ExitCode::blow_up;
  }
  return ExitCode::failure;
}

struct Context {
  const RunSpec& spec;
  fs::path dir;
  json results = json::object();
  RunOutcome outcome;

  fs::path file(const std::string& name) {
    outcome.artifacts.push_back(dir / name);
    return dir / name;
  }
};

SolveResult solve(const RunSpec& spec, const std::string& scheme, const AxiState& x0) {
  if (scheme == "picard") return picard_solve(x0, spec.solver);
  if (scheme == "fd") return fd_solve(x0, effective_fd(spec));
  return duhamel_solve(x0, spec.solver);
}

void write_snapshots(Context& ctx, const Trajectory& traj) {
  if (!ctx.spec.snapshots) return;
  const fs::path dir = ctx.dir / "snapshots";
  fs::create_directories(dir);
  for (std::size_t n = 0; n < traj.size(); ++n) {
    char name[64];
    std::snprintf(name, sizeof name, "omega_%05zu.bin", n);
    write_snapshot_binary(dir / name, traj.states[n].omega, traj.times[n]);
    std::snprintf(name, sizeof name, "utheta_%05zu.bin", n);
    write_snapshot_binary(dir / name, traj.states[n].u_theta, traj.times[n]);
  }
  ctx.outcome.artifacts.push_back(dir);
}

void record_trajectory(Context& ctx, const SolveResult& res, const std::string& prefix) {
  write_timeseries_csv(ctx.file(prefix + "timeseries.csv"), res.traj);
  if (!res.traj.empty()) {
    const double T = res.traj.final_time();
    write_xt_csv(ctx.file(prefix + "xt_components.csv"), compute_xt_components(res.traj, T));
    ctx.results[prefix + "E_T"] = et_json(et_membership(res.traj, T));
  }
}

// ---------------------------------------------------------------------------
// Experiments

void run_simulate(Context& ctx) {
  const AxiState x0 = make_initial(ctx.spec);
  const SolveResult res = solve(ctx.spec, ctx.spec.scheme, x0);
  record_trajectory(ctx, res, "");
  write_snapshots(ctx, res.traj);
  ctx.results["solve"] = solve_json(res);
  if (res.traj.size() >= 10) {
    const AsymptoticsReport a = asymptotics_report(res.traj);
    ctx.results["max_principle_r_utheta"] = a.r_utheta_nonincreasing;
  }
  ctx.outcome.code = code_of(res.status);
  ctx.outcome.message = res.message;
}

ScalarField exact_5d(const Grid& g, double t) {
  const double c = std::pow(4.0 * std::numbers::pi * t, -2.5);
  return ScalarField::from_function(
      g, [&](double r, double z) { return r * c * std::exp(-(r * r + z * z) / (4.0 * t)); }, Quantity::omega_theta);
}

double rel_l2(const ScalarField& a, const ScalarField& b) {
  const double den = lp_norm_omega(b, 2.0);
  return den > 0.0 ? lp_norm_omega(a - b, 2.0) / den : lp_norm_omega(a, 2.0);
}

// Least-squares slope of -log(err) against log(n).
double refinement_slope(const std::vector<int>& n, const std::vector<double>& err) {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < n.size(); ++k)
    if (err[k] > 0.0) {
      x.push_back(std::log(static_cast<double>(n[k])));
      y.push_back(-std::log(err[k]));
    }
  if (x.size() < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) mx += x[k], my += y[k];
  mx /= x.size();
  my /= x.size();
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) sxy += (x[k] - mx) * (y[k] - my), sxx += (x[k] - mx) * (x[k] - mx);
  return sxx > 0 ? sxy / sxx : 0.0;
}

void run_verify_kernels(Context& ctx) {
  const RunSpec& spec = ctx.spec;
  CsvWriter csv(ctx.file("kernels.csv"), {"check", "value", "limit", "pass"});
  auto row = [&](const std::string& name, double value, double limit, bool pass) {
    csv.cell(name).cell(value).cell(limit).cell(std::string(pass ? "true" : "false")).end();
    ctx.results[name] = json{{"value", json_number(value)}, {"limit", limit}, {"pass", pass}};
  };

  row("H_table_midpoint_error", h_table().max_midpoint_error, 1e-8, h_table().max_midpoint_error <= 1e-8);
  row("F_table_midpoint_error", f_table().max_midpoint_error, 1e-8, f_table().max_midpoint_error <= 1e-8);
  const double h_small = eval_H(1e-3);
  row("H_at_1e-3_minus_0.99925", std::abs(h_small - 0.99925), 5e-6, std::abs(h_small - 0.99925) <= 5e-6);
  const double h_tail = std::pow(1e6, 1.5) * eval_H(1e6);
  row("t32H_at_1e6_minus_0.443113", std::abs(h_tail - 0.443113), 1e-6, std::abs(h_tail - 0.443113) <= 1e-6);

  const std::vector<int> levels = refine_levels(spec.refine);
  const double aspect = static_cast<double>(spec.grid.nz) / spec.grid.nr;
  for (double t : {0.1, 1.0}) {
    std::vector<double> errs;
    for (int n : levels) {
      const Grid g(n, static_cast<int>(std::lround(n * aspect)), spec.grid.r_max, spec.grid.z_max);
      const double e = rel_l2(apply_S(t, exact_5d(g, spec.initial.t0)), exact_5d(g, spec.initial.t0 + t));
      errs.push_back(e);
      row("exact_family_error_t" + short_number(t) + "_n" + std::to_string(n), e, 1e-3, n < spec.grid.nr || e <= 1e-3);
    }
    const double slope = refinement_slope(levels, errs);
    row("exact_family_slope_t" + short_number(t), slope, 0.3, std::abs(slope - 2.0) <= 0.3);
  }
  {
    const Grid g = spec.grid.grid();
    const ScalarField f = exact_5d(g, spec.initial.t0);
    const double e = rel_l2(apply_S(0.3, apply_S(0.7, f)), apply_S(1.0, f));
    row("composition_error", e, 1e-3, e <= 1e-3);
  }
  {
    const Grid g(32, 32, 4.0, 4.0);
    const ScalarField w = ScalarField::from_function(
        g, [](double r, double z) { return r * std::exp(-((r - 2) * (r - 2) + z * z) / 0.5); }, Quantity::omega_theta);
    const Velocity a = BiotSavart(g, BSPath::naive).velocity(w);
    const Velocity b = BiotSavart(g, BSPath::fft).velocity(w);
    double diff = 0.0, peak = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      diff = std::max({diff, std::abs(a.ur.values()[n] - b.ur.values()[n]), std::abs(a.uz.values()[n] - b.uz.values()[n])});
      peak = std::max({peak, std::abs(a.ur.values()[n]), std::abs(a.uz.values()[n])});
    }
    row("bs_naive_vs_fft_32", diff / peak, 1e-10, diff / peak <= 1e-10);
    const Velocity z = BiotSavart(g, BSPath::fft).velocity(ScalarField(g, Quantity::omega_theta));
    row("bs_zero_input", std::max(z.ur.max_abs(), z.uz.max_abs()), 0.0, z.ur.max_abs() == 0.0 && z.uz.max_abs() == 0.0);
  }
  {
    std::vector<int> bs_levels;
    std::vector<double> div, curl;
    for (int n : levels) {
      if (n > 128) continue;  // build cost grows as n^2 log n per row pair
      const Grid g(n, 2 * n, 6.0, 6.0);
      const ScalarField w = ScalarField::from_function(
          g, [](double r, double z) { return r * std::exp(-((r - 2) * (r - 2) + z * z) / 0.5); }, Quantity::omega_theta);
      const BSResiduals res = bs_residuals(w, BiotSavart(g).velocity(w));
      bs_levels.push_back(n);
      div.push_back(res.divergence);
      curl.push_back(res.curl);
    }
    if (bs_levels.size() >= 2) {
      const double sd = refinement_slope(bs_levels, div), sc = refinement_slope(bs_levels, curl);
      row("bs_divergence_order", sd, 0.3, std::abs(sd - 2.0) <= 0.3);
      row("bs_curl_roundtrip_order", sc, 0.3, std::abs(sc - 2.0) <= 0.3);
    }
  }
}

void run_verify_semigroup(Context& ctx) {
  const std::vector<RatioReport> reports = estimate_suites(ctx.spec.samples, ctx.spec.seed);
  CsvWriter csv(ctx.file("estimates.csv"), {"suite", "variant", "p", "q", "time_power", "samples", "evaluated",
                                             "sup_ratio", "trend_slope", "bounded"});
  json list = json::array();
  bool all = true;
  for (const auto& r : reports) {
    csv.cell(r.suite).cell(r.variant).cell(r.p).cell(r.q).cell(r.time_power).cell(r.samples).cell(r.evaluated);
    csv.cell(r.sup_ratio).cell(r.trend_slope).cell(std::string(r.bounded() ? "true" : "false")).end();
    list.push_back(ratio_json(r));
    all = all && r.bounded();
  }
  ctx.results["suites"] = list;
  ctx.results["all_bounded"] = all;
}

struct FitSpec {
  NormKind kind;
  double p;
};

void run_decay_study(Context& ctx) {
  const RunSpec& spec = ctx.spec;
  const AxiState x0 = make_initial(spec);
  const SolveResult res = solve(spec, spec.scheme, x0);
  record_trajectory(ctx, res, "");
  ctx.results["solve"] = solve_json(res);
  ctx.outcome.code = code_of(res.status);
  ctx.outcome.message = res.message;
  if (res.status != SolveStatus::ok) return;

  const bool swirl = x0.u_theta.max_abs() > 0.0;
  std::vector<FitSpec> fits = {{NormKind::omega_Omega, 2.0},
                               {NormKind::omega_Omega, 4.0},
                               {NormKind::omega_Omega, std::numeric_limits<double>::infinity()},
                               {NormKind::omega_R3, 1.5}};
  if (swirl) {
    fits.push_back({NormKind::utheta_Omega, 2.0});
    fits.push_back({NormKind::utheta_Omega, 4.0});
  }
  CsvWriter csv(ctx.file("decay_fits.csv"),
                {"norm", "p", "slope", "predicted", "residual", "t_min", "t_max", "samples", "within_0.1"});
  json rows = json::array();
  for (const auto& f : fits) {
    try {
      const DecayFit fit = decay_exponent_fit(res.traj, f.kind, f.p);
      const bool ok = std::abs(fit.slope - fit.predicted) <= 0.1;
      csv.cell(std::string(to_string(f.kind))).cell(f.p).cell(fit.slope).cell(fit.predicted).cell(fit.residual);
      csv.cell(fit.t_min).cell(fit.t_max).cell(fit.samples).cell(std::string(ok ? "true" : "false")).end();
      rows.push_back(json{{"norm", fit.norm}, {"slope", fit.slope}, {"predicted", fit.predicted},
                          {"residual", fit.residual}, {"within_0.1", ok}});
    } catch (const DomainError& e) {
      rows.push_back(json{{"norm", to_string(f.kind)}, {"p", json_number(f.p)}, {"error", e.what()}});
    }
  }
  ctx.results["fits"] = rows;
  if (res.traj.size() >= 10) {
    const AsymptoticsReport a = asymptotics_report(res.traj);
    ctx.results["asymptotics"] = json{{"slope_L1_omega_Omega", a.slope_L1_omega},
                                      {"slope_L32_omega_R3", a.slope_L32_omega},
                                      {"slope_L2_utheta_Omega", a.slope_L2_utheta},
                                      {"decreasing_L1_omega_Omega", a.decreasing_L1_omega},
                                      {"decreasing_L32_omega_R3", a.decreasing_L32_omega},
                                      {"decreasing_L2_utheta_Omega", a.decreasing_L2_utheta},
                                      {"r_utheta_nonincreasing", a.r_utheta_nonincreasing}};
  }
}

void run_estimate_constants(Context& ctx) {
  const RunSpec& spec = ctx.spec;
  const ConstantsReport rep =
      estimate_constants(spec.grid.grid(), spec.trials, spec.seed, spec.solver.T, spec.solver.cadence);
  CsvWriter csv(ctx.file("constants.csv"), {"constant", "sample", "value"});
  for (std::size_t k = 0; k < rep.C1_samples.size(); ++k)
    csv.cell(std::string("C1")).cell(static_cast<int>(k)).cell(rep.C1_samples[k]).end();
  for (std::size_t k = 0; k < rep.C2_samples.size(); ++k)
    csv.cell(std::string("C2")).cell(static_cast<int>(k)).cell(rep.C2_samples[k]).end();
  ctx.results["C1"] = rep.C1;
  ctx.results["C2"] = rep.C2;
  ctx.results["trials"] = rep.trials;
}

void run_calderon(Context& ctx) {
  const RunSpec& spec = ctx.spec;
  const AxiState x0 = make_initial(spec);
  const ConstantsReport rep =
      estimate_constants(spec.grid.grid(), spec.trials, spec.seed, spec.solver.T, spec.solver.cadence);
  ctx.results["C1"] = rep.C1;
  ctx.results["C2"] = rep.C2;
  ctx.results["data_norm"] = data_norm(x0);
  const CalderonRadius cr = find_calderon_radius(x0, rep.C1, rep.C2);
  ctx.results["threshold"] = cr.threshold;
  ctx.results["radius_found"] = cr.found;
  if (!cr.found) {
    ctx.outcome.code = ExitCode::failure;
    ctx.outcome.message = "no split radius meets C1 * |outer| < 1 / (4 C2)";
    return;
  }
  double partition = 0.0;
  for (std::size_t n = 0; n < x0.grid().size(); ++n) {
    partition = std::max(partition, std::abs(cr.parts.inner.omega.values()[n] + cr.parts.outer.omega.values()[n] -
                                             x0.omega.values()[n]));
    partition = std::max(partition, std::abs(cr.parts.inner.u_theta.values()[n] +
                                             cr.parts.outer.u_theta.values()[n] - x0.u_theta.values()[n]));
  }
  ctx.results["A"] = cr.A;
  ctx.results["C1_times_outer_norm"] = cr.C1_times_norm;
  ctx.results["outer_norms"] = json{{"L1_omega_Omega", cr.parts.outer_L1_omega_Omega},
                                    {"L32_omega_R3", cr.parts.outer_L32_omega_R3},
                                    {"L2_utheta_Omega", cr.parts.outer_L2_utheta_Omega}};
  ctx.results["partition_error"] = partition;
  const SolveResult res = picard_solve(cr.parts.outer, spec.solver);
  ctx.results["outer_picard"] = solve_json(res);
  record_trajectory(ctx, res, "outer_");
  ctx.outcome.code = code_of(res.status);
  ctx.outcome.message = res.message;
}

void run_compare_solvers(Context& ctx) {
  const RunSpec& spec = ctx.spec;
  const AxiState x0 = make_initial(spec);
  const SolveResult mild = duhamel_solve(x0, spec.solver);
  const SolveResult fd = fd_solve(x0, effective_fd(spec));
  ctx.results["duhamel"] = solve_json(mild);
  ctx.results["fd"] = solve_json(fd);
  if (mild.status != SolveStatus::ok || fd.status != SolveStatus::ok) {
    ctx.outcome.code = code_of(mild.status != SolveStatus::ok ? mild.status : fd.status);
    ctx.outcome.message = mild.status != SolveStatus::ok ? mild.message : fd.message;
    return;
  }
  record_trajectory(ctx, mild, "duhamel_");
  record_trajectory(ctx, fd, "fd_");
  const GapReport gap = uniqueness_gap(mild.traj, fd.traj);
  CsvWriter csv(ctx.file("gap.csv"), {"t", "velocity_gap", "relative_velocity_gap", "relative_state_distance"});
  double final_distance = 0.0;
  for (std::size_t n = 0; n < gap.times.size(); ++n) {
    const AxiState& a = mild.traj.states[n];
    const AxiState& b = fd.traj.states[n];
    const double dw = lp_norm_omega(a.omega - b.omega, 2.0), du = lp_norm_omega(a.u_theta - b.u_theta, 2.0);
    const double nw = lp_norm_omega(b.omega, 2.0), nu = lp_norm_omega(b.u_theta, 2.0);
    const double den = std::hypot(nw, nu);
    final_distance = den > 0.0 ? std::hypot(dw, du) / den : 0.0;
    csv.cell(gap.times[n]).cell(gap.gap[n]).cell(gap.relative_gap[n]).cell(final_distance).end();
  }
  ctx.results["relative_state_distance_at_T"] = final_distance;
  ctx.results["relative_velocity_gap_at_T"] = gap.relative_gap.empty() ? 0.0 : gap.relative_gap.back();
  ctx.results["gap_growth_rate"] = gap.growth_rate;
  ctx.results["E_T_fd"] = et_json(gap.et_b);
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"simulate",       "verify-kernels",  "verify-semigroup",
                                                 "decay-study",    "calderon",        "compare-solvers",
                                                 "estimate-constants"};
  return kinds;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

void set_config_value(RunSpec& spec, const std::string& key, const std::string& value) {
  const Entry* e = find_entry(key);
  if (!e) throw ConfigError("config: unknown key '" + key + "'");
  e->set(spec, value);
}

std::string get_config_value(const RunSpec& spec, const std::string& key) {
  const Entry* e = find_entry(key);
  if (!e) throw ConfigError("config: unknown key '" + key + "'");
  return e->get(spec);
}

std::vector<std::pair<std::string, std::string>> effective_config(const RunSpec& spec) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : entries()) out.emplace_back(e.key, e.get(spec));
  return out;
}

RunSpec parse_config(std::istream& in, RunSpec base) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string key;
    for (const auto& p : item.parents) key += p + ".";
    key += item.name;
    if (item.inputs.size() != 1) throw ConfigError("config: " + key + " needs exactly one value");
    set_config_value(base, key, item.inputs.front());
  }
  return base;
}

RunSpec load_config(const fs::path& path, RunSpec base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  return parse_config(in, std::move(base));
}

std::vector<std::string> apply_env_overrides(RunSpec& spec) {
  std::vector<std::string> applied;
  for (const auto& e : entries())
    if (const char* v = std::getenv(env_name(e.key).c_str())) {
      e.set(spec, v);
      applied.push_back(e.key);
    }
  return applied;
}

std::vector<std::string> validate(const RunSpec& spec) {
  std::vector<std::string> v;
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), spec.experiment) == kinds.end())
    v.push_back("experiment: unknown kind '" + spec.experiment + "'");
  if (spec.scheme != "duhamel" && spec.scheme != "picard" && spec.scheme != "fd")
    v.push_back("scheme must be duhamel, picard or fd, got '" + spec.scheme + "'");
  const bool grid_ok = spec.grid.nr >= 4 && spec.grid.nz >= 4 && spec.grid.r_max > 0.0 && spec.grid.z_max > 0.0 &&
                       std::isfinite(spec.grid.r_max) && std::isfinite(spec.grid.z_max);
  if (!grid_ok) v.push_back("grid: need nr, nz >= 4 and positive finite r_max, z_max");
  const auto& in = spec.initial;
  if (in.family == "gaussian_ring") {
    if (!(in.center_r > 0.0)) v.push_back("initial.center_r must be positive");
    if (!(in.width > 0.0)) v.push_back("initial.width must be positive");
  } else if (in.family == "exact_5d") {
    if (!(in.t0 > 0.0)) v.push_back("initial.t0 must be positive");
  } else if (in.family == "file") {
    if (in.omega_file.empty() || !fs::exists(in.omega_file))
      v.push_back("initial.omega_file '" + in.omega_file + "' does not exist");
    if (!in.utheta_file.empty() && !fs::exists(in.utheta_file))
      v.push_back("initial.utheta_file '" + in.utheta_file + "' does not exist");
  } else if (in.family != "zero") {
    v.push_back("initial.family must be gaussian_ring, exact_5d, file or zero, got '" + in.family + "'");
  }
  if (!std::isfinite(in.amplitude) || !std::isfinite(in.swirl_amplitude))
    v.push_back("initial amplitudes must be finite");
  // Duhamel stepping composes S(dt), so its step must resolve the kernel on the grid.
  const bool stepping = spec.scheme == "duhamel" || spec.experiment == "compare-solvers";
  const std::vector<std::string> sv =
      grid_ok && stepping ? spec.solver.violations(spec.grid.grid()) : spec.solver.violations();
  v.insert(v.end(), sv.begin(), sv.end());
  const FDConfig fd = effective_fd(spec);
  const std::vector<std::string> fv = grid_ok ? fd.violations(spec.grid.grid()) : fd.violations();
  for (const auto& s : fv)
    if (s.rfind("fd.T", 0) != 0 && s.rfind("fd.cadence", 0) != 0) v.push_back(s);  // reported as solver.*
  if (spec.threads < 0) v.push_back("threads must be >= 0");
  if (spec.samples < 10) v.push_back("samples must be >= 10");
  if (spec.trials < 1) v.push_back("trials must be >= 1");
  if (!(spec.target_smallness > 0.0)) v.push_back("target_smallness must be positive");
  try {
    if (refine_levels(spec.refine).size() < 2) v.push_back("refine needs at least two levels");
  } catch (const ConfigError& e) {
    v.push_back(e.what());
  }
  if (spec.out.empty()) v.push_back("out must name a directory");
  return v;
}

AxiState make_initial(const RunSpec& spec) {
  const Grid g = spec.grid.grid();
  const InitialSpec& in = spec.initial;
  if (in.family == "zero") return AxiState::zero(g);
  if (in.family == "gaussian_ring") {
    auto profile = [&](double amp, double dz) {
      return [=, &in](double r, double z) {
        const double dr = r - in.center_r, zz = z - in.center_z - dz;
        return amp * (r / in.center_r) * std::exp(-(dr * dr + zz * zz) / (in.width * in.width));
      };
    };
    return AxiState(ScalarField::from_function(g, profile(in.amplitude, 0.0), Quantity::omega_theta),
                    ScalarField::from_function(g, profile(in.swirl_amplitude, in.swirl_offset), Quantity::u_theta));
  }
  if (in.family == "exact_5d") {
    const double c = std::pow(4.0 * std::numbers::pi * in.t0, -2.5);
    auto profile = [&](double amp) {
      return [=, &in](double r, double z) { return amp * r * c * std::exp(-(r * r + z * z) / (4.0 * in.t0)); };
    };
    return AxiState(ScalarField::from_function(g, profile(in.amplitude), Quantity::omega_theta),
                    ScalarField::from_function(g, profile(in.swirl_amplitude), Quantity::u_theta));
  }
  if (in.family == "file") {
    auto load = [&](const std::string& path) {
      const fs::path p(path);
      ScalarField f = p.extension() == ".txt" ? read_snapshot_text(p).first : read_snapshot_binary(p).first;
      if (f.grid() != g) throw ConfigError("initial: snapshot " + path + " does not match the grid spec");
      return f;
    };
    ScalarField w = load(in.omega_file);
    w.set_tag(Quantity::omega_theta);
    ScalarField u = in.utheta_file.empty() ? ScalarField(g, Quantity::u_theta) : load(in.utheta_file);
    u.set_tag(Quantity::u_theta);
    return AxiState(std::move(w), std::move(u));
  }
  throw ConfigError("initial: unknown family '" + in.family + "'");
}

std::vector<RatioReport> estimate_suites(std::int64_t samples, std::uint64_t seed) {
  std::vector<RatioReport> out;
  SemigroupCheckOptions so;
  so.samples = samples;
  so.seed = seed;
  struct Tuple {
    SemigroupItem item;
    double p, q, a, b;
  };
  const std::vector<Tuple> tuples = {
      {SemigroupItem::i, 2, 2, 0, 0},        {SemigroupItem::i, 1, 2, 0, 0},
      {SemigroupItem::i, 2, 4, -0.5, 0.5},   {SemigroupItem::i, 1.5, 3, 0, -0.5},
      {SemigroupItem::i, 1, 1, 0, 0},        {SemigroupItem::i, 2, 2, 0.5, -1},
      {SemigroupItem::ii, 2, 2, 0, 1},       {SemigroupItem::ii, 1, 2, 0.5, 0.5},
      {SemigroupItem::ii, 2, 4, 1, 0},       {SemigroupItem::ii, 1.5, 3, 0, 0},
      {SemigroupItem::ii, 1, 1, -0.5, 1},    {SemigroupItem::ii, 2, 8, 0.25, 0.5},
      {SemigroupItem::iii, 2, 2, 0, 0},      {SemigroupItem::iii, 1, 2, 0, 0},
      {SemigroupItem::iii, 2, 4, 0.5, -0.5}, {SemigroupItem::iii, 1.5, 3, 0, -1},
      {SemigroupItem::iii, 1, 1, 0.25, -0.5}, {SemigroupItem::iii, 2, 8, 0, -0.25},
  };
  for (const auto& t : tuples) out.push_back(check_semigroup_bound(t.item, t.p, t.q, t.a, t.b, so));
  out.push_back(check_pointwise_assertions('a', 0.5, 0.5, samples, seed));
  out.push_back(check_pointwise_assertions('a', 0.0, 0.0, samples, seed));
  out.push_back(check_pointwise_assertions('b', 0.0, 0.0, samples, seed));
  out.push_back(check_pointwise_assertions('b', 0.5, -0.5, samples, seed));
  SampledCheckOptions opt;
  opt.samples = samples;
  opt.seed = seed;
  for (const auto& [p, a, b] : std::vector<std::tuple<double, double, double>>{{1.5, 0, 0}, {1.2, 0.5, 0.5}, {1.5, 0, 0.5}})
    out.push_back(check_bs_weighted_estimate(p, bs_estimate_q(p, a, b), a, b, opt));
  out.push_back(check_lemur_bounds(2.0, opt));
  out.push_back(check_hardy_sobolev(opt));
  return out;
}

std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

void write_timeseries_csv(const fs::path& path, const Trajectory& traj) {
  CsvWriter csv(path, {"t", "L1_omega_Omega", "L32_omega_R3", "L2_omega_R3", "L2_utheta_Omega", "L4_utheta_Omega",
                       "Linf_r_utheta"});
  for (const auto& n : traj.norms) {
    csv.cell(n.t).cell(n.L1_omega_Omega).cell(n.L32_omega_R3).cell(n.L2_omega_R3).cell(n.L2_utheta_Omega);
    csv.cell(n.L4_utheta_Omega).cell(n.Linf_r_utheta).end();
  }
}

void write_xt_csv(const fs::path& path, const XTNormComponents& xt) {
  CsvWriter csv(path, {"component", "value"});
  for (const auto& [name, value] : xt.named()) csv.cell(name).cell(value).end();
  csv.cell(std::string("total")).cell(xt.total()).end();
}

RunOutcome run(const RunSpec& spec) {
  if (const auto v = validate(spec); !v.empty()) {
    RunOutcome bad;
    bad.code = ExitCode::config;
    bad.message = v.front();
    return bad;
  }
  if (spec.threads > 0) omp_set_num_threads(spec.threads);
  const auto t0 = Clock::now();
  Context ctx{spec, fs::path(spec.out), json::object(), RunOutcome{}};
  fs::create_directories(ctx.dir);
  json manifest;
  manifest["experiment"] = spec.experiment;
  json config = json::object();
  for (const auto& [k, v] : effective_config(spec)) config[k] = v;
  manifest["config"] = config;
  try {
    if (spec.experiment == "simulate") run_simulate(ctx);
    else if (spec.experiment == "verify-kernels") run_verify_kernels(ctx);
    else if (spec.experiment == "verify-semigroup") run_verify_semigroup(ctx);
    else if (spec.experiment == "decay-study") run_decay_study(ctx);
    else if (spec.experiment == "calderon") run_calderon(ctx);
    else if (spec.experiment == "compare-solvers") run_compare_solvers(ctx);
    else if (spec.experiment == "estimate-constants") run_estimate_constants(ctx);
  } catch (const ConfigError& e) {
    ctx.outcome.code = ExitCode::config;
    ctx.outcome.message = e.what();
  } catch (const std::exception& e) {
    ctx.outcome.code = ExitCode::failure;
    ctx.outcome.message = e.what();
  }
  manifest["exit_code"] = static_cast<int>(ctx.outcome.code);
  manifest["message"] = ctx.outcome.message;
  manifest["results"] = ctx.results;
  manifest["threads"] = omp_get_max_threads();
  manifest["seconds"] = seconds_since(t0);
  json artifacts = json::array();
  for (const auto& a : ctx.outcome.artifacts) artifacts.push_back(fs::relative(a, ctx.dir).string());
  manifest["artifacts"] = artifacts;
  const fs::path mpath = ctx.dir / "manifest.json";
  std::ofstream(mpath) << manifest.dump(2) << '\n';
  ctx.outcome.artifacts.push_back(mpath);
  return ctx.outcome;
}

}  // namespace axisym
