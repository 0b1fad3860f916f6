#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace axisym {

// Profile functions of the axisymmetric heat and Biot-Savart kernels:
//
//   H(t) = (pi t)^{-1/2} int_{-pi/2}^{pi/2} exp(-sin^2(phi)/t) cos(2 phi) dphi
//   F(s) = int_0^{pi/2} cos(2 phi) (sin^2(phi) + s/4)^{-1/2} dphi
//
// The eval_* entry points read the process-wide tables below; the
// direct_* functions evaluate without tables and are what the tables are
// built from.

double eval_H(double t);
double eval_H_prime(double t);
double eval_F(double s);
double eval_F_prime(double s);

// Table-free evaluation: asymptotic series near 0 and infinity, adaptive
// quadrature of the defining integrals in between.
double direct_H(double t);
double direct_H_prime(double t);
double direct_H_second(double t);
double direct_F(double s);
double direct_F_prime(double s);
double direct_F_second(double s);

// Branches used by the direct evaluators, exposed for seam tests.
namespace series {
double H_small(double t);        // 1 - 3t/4 - 15t^2/32 - ... (asymptotic, t -> 0)
double H_prime_small(double t);
double H_second_small(double t);
double H_large(double t);        // convergent; leading term sqrt(pi)/(4 t^{3/2})
double H_prime_large(double t);
double F_small(double s);        // 3 ln 2 - 2 - ln(s)/2 + O(s ln s)
double F_prime_small(double s);
double F_large(double s);        // (pi/2) s^{-3/2} - (3 pi/2) s^{-5/2} + ...
double F_prime_large(double s);
}  // namespace series

namespace quadrature_form {
double H(double t);
double H_prime(double t);
double H_second(double t);
double F(double s);
double F_prime(double s);
double F_second(double s);
}  // namespace quadrature_form

struct KernelTableParams {
  double x_lo = 1e-6;
  double x_hi = 1e6;
  int nodes = 4096;
  double check_tol = 1e-8;  // midpoint agreement demanded of the builder
};

/// Cubic Hermite table of one sign-definite function on log-spaced nodes.
/// Interpolates ln|f| against ln x with slopes x f'/f.
struct KernelSubTable {
  std::vector<double> values;
  std::vector<double> log_abs;
  std::vector<double> log_slopes;
  double sign = 1.0;
};

/// Log-spaced table for a function and its derivative (H and H', or F and F').
struct KernelTable {
  enum class Kind : std::uint32_t { H = 1, F = 2 };

  Kind kind = Kind::H;
  double x_lo = 0.0;
  double x_hi = 0.0;
  int interpolation_order = 3;
  std::vector<double> abscissae;
  KernelSubTable f;
  KernelSubTable fprime;
  double log_lo = 0.0;
  double inv_step = 0.0;
  double max_midpoint_error = 0.0;  // measured against direct evaluation at build

  static KernelTable build(Kind kind, const KernelTableParams& params = {});

  bool in_range(double x) const { return x >= x_lo && x <= x_hi; }
  double value(double x) const { return interpolate(f, x); }
  double derivative(double x) const { return interpolate(fprime, x); }

  void save_binary(const std::filesystem::path& path, std::uint64_t key) const;
  static bool load_binary(const std::filesystem::path& path, std::uint64_t key, KernelTable& out);
  void dump_text(std::ostream& os) const;

 private:
  double interpolate(const KernelSubTable& sub, double x) const;
};

/// Content hash of the build parameters, used as the cache key.
std::uint64_t table_cache_key(KernelTable::Kind kind, const KernelTableParams& params);

/// Process-wide tables. When a cache directory is set before first use (or
/// AXISYM_TABLE_CACHE names one), tables are loaded from / stored there.
void set_table_cache_dir(const std::filesystem::path& dir);
const KernelTable& h_table();
const KernelTable& f_table();

/// Seams between the small-argument series and quadrature, located once at
/// startup as the largest argument where the two agree to 1e-9.
double h_small_series_seam();
double f_small_series_seam();

struct CorHEntry {
  std::string function;               // "H" or "H'"
  double exponent = 0.0;
  std::vector<double> range_decades;  // k for each nested range [10^-k, 10^k]
  std::vector<double> range_sups;     // sup of t^a |f| over each nested range
  double sup = 0.0;                   // over the widest range
  bool bounded = true;                // sup stable (<= 10% growth) as the range widens
};

struct CorHReport {
  int samples = 0;
  std::vector<CorHEntry> entries;
};

/// Samples t log-uniformly on [1e-8, 1e8] and reports sup t^a H(t) and
/// sup t^b |H'(t)| for every requested exponent.
CorHReport check_corH_bounds(int samples, const std::vector<double>& h_exponents = {0.0, 1.5},
                             const std::vector<double>& hprime_exponents = {0.0, 2.5});

}  // namespace axisym
