#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "axisym/errors.hpp"
#include "axisym/runner.hpp"
#include "axisym/special_functions.hpp"

using namespace axisym;

int main(int argc, char** argv) {
  CLI::App app{"Axisymmetric vorticity-swirl laboratory: kernels, mild solvers, FD reference, diagnostics"};
  std::string config, experiment, out, kernel_path, dump_dir;
  std::uint64_t seed = 0;
  int threads = -1;
  std::vector<std::string> sets;
  bool check_only = false, print_config = false;
  app.add_option("--config", config, "Config file (key = value lines, [section] headers)")->check(CLI::ExistingFile);
  app.add_option("--experiment", experiment,
                 "simulate | verify-kernels | verify-semigroup | decay-study | calderon | compare-solvers | "
                 "estimate-constants");
  app.add_option("--out", out, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for every sampled quantity");
  app.add_option("--threads", threads, "Worker cap (0: OpenMP default)")->check(CLI::NonNegativeNumber);
  app.add_option("--kernel-path", kernel_path, "Biot-Savart evaluation path: naive | fft | streaming");
  app.add_option("--set", sets, "Override one config key: --set grid.nr=96 (repeatable)");
  app.add_option("--dump-tables", dump_dir, "Write the H and F tables as text into DIR and exit");
  app.add_flag("--validate", check_only, "Validate the configuration and exit");
  app.add_flag("--print-config", print_config, "Print the effective configuration and exit");
  CLI11_PARSE(app, argc, argv);

  if (!dump_dir.empty()) {
    std::filesystem::create_directories(dump_dir);
    std::ofstream h(std::filesystem::path(dump_dir) / "H_table.txt");
    h_table().dump_text(h);
    std::ofstream f(std::filesystem::path(dump_dir) / "F_table.txt");
    f_table().dump_text(f);
    std::cout << "tables written to " << dump_dir << "\n";
    return 0;
  }

  RunSpec spec;
  try {
    if (!config.empty()) spec = load_config(config, spec);
    for (const auto& key : apply_env_overrides(spec)) std::cerr << "env override: " << key << "\n";
    if (!experiment.empty()) spec.experiment = experiment;
    if (!out.empty()) spec.out = out;
    if (*seed_opt) spec.seed = seed;
    if (threads >= 0) spec.threads = threads;
    if (!kernel_path.empty()) set_config_value(spec, "solver.kernel_path", kernel_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      set_config_value(spec, s.substr(0, eq), s.substr(eq + 1));
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::config);
  }

  if (print_config) {
    for (const auto& [k, v] : effective_config(spec)) std::cout << k << " = " << v << "\n";
    return 0;
  }
  const auto violations = validate(spec);
  for (const auto& v : violations) std::cerr << "config error: " << v << "\n";
  if (!violations.empty()) return static_cast<int>(ExitCode::config);
  if (check_only) {
    std::cout << "configuration valid\n";
    return 0;
  }

  const RunOutcome outcome = run(spec);
  std::cout << spec.experiment << ": exit " << static_cast<int>(outcome.code);
  if (!outcome.message.empty()) std::cout << " (" << outcome.message << ")";
  std::cout << "\n";
  for (const auto& a : outcome.artifacts) std::cout << "  " << a.string() << "\n";
  return static_cast<int>(outcome.code);
}
