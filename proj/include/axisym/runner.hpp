#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "axisym/field.hpp"
#include "axisym/mild_solver.hpp"
#include "axisym/ratio_report.hpp"
#include "axisym/reference_fd.hpp"

namespace axisym {

enum class ExitCode : int { ok = 0, failure = 1, config = 2, diverged = 3, blow_up = 4 };

/// Initial data families:
///   gaussian_ring:  omega = amplitude (r/center_r) exp(-((r-center_r)^2 + (z-center_z)^2)/width^2),
///                   u_theta the same profile with swirl_amplitude, shifted by swirl_offset in z
///   exact_5d:       omega = amplitude r (4 pi t0)^{-5/2} exp(-(r^2+z^2)/(4 t0)), u_theta = swirl_amplitude * same
///   file:           snapshots of omega and (optionally) u_theta
struct InitialSpec {
  std::string family = "gaussian_ring";
  double amplitude = 0.5;
  double center_r = 2.0;
  double center_z = 0.0;
  double width = 1.0;
  double swirl_amplitude = 0.0;
  double swirl_offset = 0.5;
  double t0 = 1.0;
  std::string omega_file;
  std::string utheta_file;
};

struct GridSpec {
  int nr = 192;
  int nz = 384;
  double r_max = 12.0;
  double z_max = 12.0;
  Grid grid() const { return Grid(nr, nz, r_max, z_max); }
};

struct RunSpec {
  std::string experiment = "simulate";
  std::string scheme = "duhamel";  // simulate / decay-study: duhamel | picard | fd
  InitialSpec initial;
  GridSpec grid;
  SolverConfig solver;
  FDConfig fd;
  std::string out = "out";
  std::uint64_t seed = 1;
  int threads = 0;                 // 0: OpenMP default
  bool snapshots = true;           // field snapshots at the cadence
  std::int64_t samples = 10000;    // per estimate suite
  int trials = 8;                  // estimate-constants / calderon
  double target_smallness = 0.1;   // calderon: C1 |outer| <= target / (4 C2)
  std::string refine = "48,96,192";  // verify-kernels refinement levels (nr; nz = 2 nr)
};

const std::vector<std::string>& experiment_kinds();

/// Dotted keys accepted in config files and as AXISYM_<KEY> environment
/// overrides (dots become underscores, upper case).
const std::vector<std::string>& config_keys();
/// Throws ConfigError for an unknown key or an unparsable value.
void set_config_value(RunSpec& spec, const std::string& key, const std::string& value);
std::string get_config_value(const RunSpec& spec, const std::string& key);
/// Every key with its effective value, in config_keys() order.
std::vector<std::pair<std::string, std::string>> effective_config(const RunSpec& spec);

/// Config text: `key = value` lines, `[section]` headers prefixing keys with
/// `section.`, `#` comments.
RunSpec parse_config(std::istream& in, RunSpec base = {});
RunSpec load_config(const std::filesystem::path& path, RunSpec base = {});
/// Applies AXISYM_* variables from the environment; returns the keys applied.
std::vector<std::string> apply_env_overrides(RunSpec& spec);

/// Empty iff the spec is runnable.
std::vector<std::string> validate(const RunSpec& spec);

AxiState make_initial(const RunSpec& spec);

struct RunOutcome {
  ExitCode code = ExitCode::ok;
  std::string message;
  std::vector<std::filesystem::path> artifacts;
};

/// Runs the experiment and writes its artifacts under spec.out.
RunOutcome run(const RunSpec& spec);

/// Every sampled estimate suite of verify-semigroup: items (i)-(iii) at six
/// exponent tuples each, the pointwise assertions, the weighted velocity bounds
/// and the Hardy-Sobolev ratio.
std::vector<RatioReport> estimate_suites(std::int64_t samples, std::uint64_t seed);

/// Full-precision CSV number: 17 significant digits, scientific.
std::string csv_number(double x);
void write_timeseries_csv(const std::filesystem::path& path, const Trajectory& traj);
void write_xt_csv(const std::filesystem::path& path, const XTNormComponents& xt);

}  // namespace axisym
