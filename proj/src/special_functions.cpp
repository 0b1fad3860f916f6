#include "axisym/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

#include "axisym/errors.hpp"
#include "axisym/quadrature.hpp"

namespace axisym {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuadTol = 1e-13;
constexpr double kSeamTol = 1e-9;
constexpr std::uint32_t kTableFormatVersion = 3;

void require_positive(double x, const char* what) {
  if (!std::isfinite(x) || x <= 0.0) {
    std::ostringstream msg;
    msg << what << ": argument must be finite and positive, got " << x;
    throw DomainError(msg.str());
  }
}

// Optimal truncation of the small-t expansion H = sum c_k t^k,
// c_k = c_{k-1} * (-(4 - (2k-1)^2)) / (4k). Returns the partial sums of
// the 0th, 1st and 2nd derivatives.
struct SmallHSums {
  double h = 0.0, hp = 0.0, hpp = 0.0;
};

SmallHSums h_small_sums(double t) {
  SmallHSums out;
  double c = 1.0;
  double tk = 1.0;  // t^k
  double prev_term = std::numeric_limits<double>::infinity();
  out.h = 1.0;
  for (int k = 1; k <= 80; ++k) {
    const double twokm1 = 2.0 * k - 1.0;
    c *= -(4.0 - twokm1 * twokm1) / (4.0 * k);
    const double term = c * tk * t;
    if (std::abs(term) >= prev_term) break;
    prev_term = std::abs(term);
    out.h += term;
    out.hp += k * c * tk;
    if (k >= 2) out.hpp += k * (k - 1.0) * c * tk / t;
    tk *= t;
    if (std::abs(term) < 1e-18) break;
  }
  return out;
}

// Modified Bessel series for I0(x), I1(x); used only at small x.
void bessel_i01(double x, double& i0, double& i1) {
  const double q = 0.25 * x * x;
  double a0 = 1.0, a1 = 0.5 * x;
  i0 = a0;
  i1 = a1;
  for (int m = 1; m < 200; ++m) {
    a0 *= q / (double(m) * m);
    a1 *= q / (double(m) * (m + 1));
    i0 += a0;
    i1 += a1;
    if (a0 < 1e-18 * i0 && a1 < 1e-18 * i1) break;
  }
}

// Integrand family for H and its derivatives:
//   2 int_0^{pi/2} cos(2phi) [c0 expm1(-y) + e^{-y}(c1 y + c2 y^2)] dphi,  y = sin^2(phi)/t.
// The constant part c0 is written with expm1 since int cos(2phi) = 0.
double h_integral(double t, double c0, double c1, double c2) {
  auto f = [=](double phi) {
    const double s = std::sin(phi);
    const double y = s * s / t;
    const double e = std::exp(-y);
    return std::cos(2.0 * phi) * (c0 * std::expm1(-y) + e * y * (c1 + c2 * y));
  };
  std::vector<double> cuts;
  for (double m : {1.0, 3.0, 6.0}) {
    const double u = m * std::sqrt(t);
    if (u < 1.0) cuts.push_back(std::asin(u));
  }
  return 2.0 * integrate_gk15(f, 0.0, 0.5 * kPi, kQuadTol, 0.0, cuts).value;
}

// G_nu(k) = int_0^{pi/2} cos(2phi) (sin^2 phi + k)^{-nu} dphi.
double f_integral(double k, double nu) {
  if (k >= 0.25) {
    auto f = [=](double phi) {
      const double s = std::sin(phi);
      return std::cos(2.0 * phi) * std::expm1(-nu * std::log1p(s * s / k));
    };
    return std::pow(k, -nu) * integrate_gk15(f, 0.0, 0.5 * kPi, kQuadTol).value;
  }
  // Near-singular peak of width sqrt(k) at phi = 0: integrate in u = sin(phi)
  // up to the split, then in phi.
  const double split = std::min(2.0 * std::sqrt(k), 0.5);
  const double rk = std::sqrt(k);
  auto fu = [=](double u) {
    const double u2 = u * u;
    return (1.0 - 2.0 * u2) * std::pow(u2 + k, -nu) / std::sqrt(1.0 - u2);
  };
  std::vector<double> ucuts;
  for (double m = 0.25; m * rk < split; m *= 4.0) ucuts.push_back(m * rk);
  const double inner = integrate_gk15(fu, 0.0, split, kQuadTol, 0.0, ucuts).value;

  auto fphi = [=](double phi) {
    const double s = std::sin(phi);
    return std::cos(2.0 * phi) * std::pow(s * s + k, -nu);
  };
  const double phi0 = std::asin(split);
  std::vector<double> pcuts;
  for (double p = 4.0 * phi0; p < 0.5 * kPi; p *= 4.0) pcuts.push_back(p);
  const double outer = integrate_gk15(fphi, phi0, 0.5 * kPi, kQuadTol, 0.0, pcuts).value;
  return inner + outer;
}

template <class Series, class Quad>
double locate_small_seam(Series series, Quad quad, double start, double stop) {
  // Walk up from `start` in steps of 10^{1/8}; the seam is the last point
  // before the first disagreement beyond kSeamTol.
  double seam = start;
  const double factor = std::pow(10.0, 0.125);
  for (double x = start; x <= stop; x *= factor) {
    const double q = quad(x);
    if (std::abs(series(x) - q) > kSeamTol * std::abs(q)) break;
    seam = x;
  }
  return seam;
}

std::mutex g_cache_mutex;
std::filesystem::path g_cache_dir;
bool g_cache_dir_set = false;

std::filesystem::path cache_dir() {
  std::lock_guard lock(g_cache_mutex);
  if (!g_cache_dir_set) {
    if (const char* env = std::getenv("AXISYM_TABLE_CACHE"); env && *env) g_cache_dir = env;
    g_cache_dir_set = true;
  }
  return g_cache_dir;
}

KernelTable load_or_build(KernelTable::Kind kind) {
  const KernelTableParams params;
  const std::uint64_t key = table_cache_key(kind, params);
  const auto dir = cache_dir();
  std::filesystem::path file;
  if (!dir.empty()) {
    std::ostringstream name;
    name << (kind == KernelTable::Kind::H ? "H" : "F") << "_" << std::hex << key << ".bin";
    file = dir / name.str();
    KernelTable cached;
    if (KernelTable::load_binary(file, key, cached)) return cached;
  }
  KernelTable table = KernelTable::build(kind, params);
  if (!file.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    table.save_binary(file, key);
  }
  return table;
}

}  // namespace

namespace series {

double H_small(double t) { return h_small_sums(t).h; }
double H_prime_small(double t) { return h_small_sums(t).hp; }
double H_second_small(double t) { return h_small_sums(t).hpp; }

// H = sqrt(2 pi x) e^{-x} I1(x) with x = 1/(2t).
double H_large(double t) {
  const double x = 0.5 / t;
  double i0, i1;
  bessel_i01(x, i0, i1);
  return std::sqrt(2.0 * kPi * x) * std::exp(-x) * i1;
}

double H_prime_large(double t) {
  const double x = 0.5 / t;
  double i0, i1;
  bessel_i01(x, i0, i1);
  const double rx = std::sqrt(x);
  const double dhdx = std::sqrt(2.0 * kPi) * std::exp(-x) * (rx * (i0 - i1) - 0.5 * i1 / rx);
  return -2.0 * x * x * dhdx;
}

double F_small(double s) {
  const double k = 0.25 * s;
  const double L = std::log(4.0) - 0.5 * std::log(k) + 0.5 * k;
  return 3.0 * std::numbers::ln2 - 2.0 - 0.5 * std::log(s) + 0.5 * k + 0.75 * k * (L - 1.0);
}

double F_prime_small(double s) {
  const double k = 0.25 * s;
  const double L = std::log(4.0) - 0.5 * std::log(k) + 0.5 * k;
  return -0.5 / s + 0.25 * (0.125 + 0.75 * (L - 1.0));
}

double F_large(double s) {
  const double r = 1.0 / s;
  return kPi * std::pow(s, -1.5) * (0.5 - r * (1.5 - r * (75.0 / 16.0)));
}

double F_prime_large(double s) {
  const double r = 1.0 / s;
  return -kPi * std::pow(s, -2.5) * (0.75 - r * (3.75 - r * (525.0 / 32.0)));
}

}  // namespace series

namespace quadrature_form {

double H(double t) { return h_integral(t, 1.0, 0.0, 0.0) / std::sqrt(kPi * t); }

double H_prime(double t) {
  return h_integral(t, -0.5, 1.0, 0.0) / (std::sqrt(kPi) * t * std::sqrt(t));
}

double H_second(double t) {
  return h_integral(t, 0.75, -3.0, 1.0) / (std::sqrt(kPi) * t * t * std::sqrt(t));
}

double F(double s) { return f_integral(0.25 * s, 0.5); }
double F_prime(double s) { return -0.125 * f_integral(0.25 * s, 1.5); }
double F_second(double s) { return (3.0 / 64.0) * f_integral(0.25 * s, 2.5); }

}  // namespace quadrature_form

double h_small_series_seam() {
  static const double seam = [] {
    const double a = locate_small_seam(series::H_small, quadrature_form::H, 1e-3, 1.0);
    const double b = locate_small_seam(series::H_prime_small, quadrature_form::H_prime, 1e-3, 1.0);
    return std::min(a, b);
  }();
  return seam;
}

double f_small_series_seam() {
  static const double seam = [] {
    const double a = locate_small_seam(series::F_small, quadrature_form::F, 1e-9, 1.0);
    const double b = locate_small_seam(series::F_prime_small, quadrature_form::F_prime, 1e-9, 1.0);
    return std::min(a, b);
  }();
  return seam;
}

namespace {
constexpr double kLargeSeam = 1e6;
}

double direct_H(double t) {
  require_positive(t, "H");
  if (t < h_small_series_seam()) return series::H_small(t);
  if (t > kLargeSeam) return series::H_large(t);
  return quadrature_form::H(t);
}

double direct_H_prime(double t) {
  require_positive(t, "H'");
  if (t < h_small_series_seam()) return series::H_prime_small(t);
  if (t > kLargeSeam) return series::H_prime_large(t);
  return quadrature_form::H_prime(t);
}

double direct_H_second(double t) {
  require_positive(t, "H''");
  if (t < h_small_series_seam()) return series::H_second_small(t);
  return quadrature_form::H_second(t);
}

double direct_F(double s) {
  require_positive(s, "F");
  if (s < f_small_series_seam()) return series::F_small(s);
  if (s > kLargeSeam) return series::F_large(s);
  return quadrature_form::F(s);
}

double direct_F_prime(double s) {
  require_positive(s, "F'");
  if (s < f_small_series_seam()) return series::F_prime_small(s);
  if (s > kLargeSeam) return series::F_prime_large(s);
  return quadrature_form::F_prime(s);
}

double direct_F_second(double s) {
  require_positive(s, "F''");
  return quadrature_form::F_second(s);
}

KernelTable KernelTable::build(Kind kind, const KernelTableParams& params) {
  if (!(params.x_lo > 0.0) || !(params.x_hi > params.x_lo) || params.nodes < 4)
    throw DomainError("KernelTable: invalid range or node count");
  using Fn = double (*)(double);
  Fn fn0 = kind == Kind::H ? direct_H : direct_F;
  Fn fn1 = kind == Kind::H ? direct_H_prime : direct_F_prime;
  Fn fn2 = kind == Kind::H ? direct_H_second : direct_F_second;

  // Force the seam searches before the parallel region.
  (void)h_small_series_seam();
  (void)f_small_series_seam();

  KernelTable table;
  table.kind = kind;
  table.x_lo = params.x_lo;
  table.x_hi = params.x_hi;
  const int n = params.nodes;
  table.log_lo = std::log(params.x_lo);
  const double step = (std::log(params.x_hi) - table.log_lo) / (n - 1);
  table.inv_step = 1.0 / step;
  table.abscissae.resize(n);
  for (auto* sub : {&table.f, &table.fprime}) {
    sub->values.resize(n);
    sub->log_abs.resize(n);
    sub->log_slopes.resize(n);
  }
  std::vector<double> d2(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) {
    const double x = i == n - 1 ? params.x_hi : std::exp(table.log_lo + i * step);
    table.abscissae[i] = x;
    table.f.values[i] = fn0(x);
    table.fprime.values[i] = fn1(x);
    d2[i] = fn2(x);
  }
  table.f.sign = table.f.values[0] > 0 ? 1.0 : -1.0;
  table.fprime.sign = table.fprime.values[0] > 0 ? 1.0 : -1.0;
  for (int i = 0; i < n; ++i) {
    const double x = table.abscissae[i];
    const double v = table.f.values[i], vp = table.fprime.values[i];
    if (v * table.f.sign <= 0.0 || vp * table.fprime.sign <= 0.0)
      throw DomainError("KernelTable: tabulated function changes sign");
    table.f.log_abs[i] = std::log(std::abs(v));
    table.f.log_slopes[i] = x * vp / v;
    table.fprime.log_abs[i] = std::log(std::abs(vp));
    table.fprime.log_slopes[i] = x * d2[i] / vp;
  }

  double worst = 0.0;
#pragma omp parallel for schedule(dynamic, 16) reduction(max : worst)
  for (int i = 0; i < n - 1; ++i) {
    const double xm = std::exp(table.log_lo + (i + 0.5) * step);
    const double e0 = std::abs(table.value(xm) / fn0(xm) - 1.0);
    const double e1 = std::abs(table.derivative(xm) / fn1(xm) - 1.0);
    worst = std::max({worst, e0, e1});
  }
  table.max_midpoint_error = worst;
  if (!(worst <= params.check_tol)) {
    std::ostringstream msg;
    msg << "KernelTable: midpoint interpolation error " << worst << " exceeds " << params.check_tol;
    throw DomainError(msg.str());
  }
  return table;
}

double KernelTable::interpolate(const KernelSubTable& sub, double x) const {
  const double u = (std::log(x) - log_lo) * inv_step;
  const int last = static_cast<int>(abscissae.size()) - 2;
  int i = static_cast<int>(u);
  i = std::clamp(i, 0, last);
  const double th = u - i;
  const double om = 1.0 - th;
  const double step = 1.0 / inv_step;
  const double h00 = (1.0 + 2.0 * th) * om * om;
  const double h10 = th * om * om;
  const double h01 = th * th * (3.0 - 2.0 * th);
  const double h11 = -th * th * om;
  const double g = h00 * sub.log_abs[i] + h01 * sub.log_abs[i + 1] +
                   step * (h10 * sub.log_slopes[i] + h11 * sub.log_slopes[i + 1]);
  return sub.sign * std::exp(g);
}

std::uint64_t table_cache_key(KernelTable::Kind kind, const KernelTableParams& params) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  const auto k = static_cast<std::uint32_t>(kind);
  mix(&kTableFormatVersion, sizeof kTableFormatVersion);
  mix(&k, sizeof k);
  mix(&params.x_lo, sizeof params.x_lo);
  mix(&params.x_hi, sizeof params.x_hi);
  mix(&params.nodes, sizeof params.nodes);
  mix(&params.check_tol, sizeof params.check_tol);
  return h;
}

namespace {
constexpr char kTableMagic[4] = {'A', 'X', 'K', 'T'};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v));
}
void put_vec(std::ostream& os, const std::vector<double>& v) {
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}
bool get_vec(std::istream& is, std::vector<double>& v, std::size_t n) {
  v.resize(n);
  return static_cast<bool>(
      is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double))));
}
}  // namespace

void KernelTable::save_binary(const std::filesystem::path& path, std::uint64_t key) const {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) return;
    os.write(kTableMagic, 4);
    put(os, kTableFormatVersion);
    put(os, key);
    put(os, static_cast<std::uint32_t>(kind));
    put(os, static_cast<std::uint64_t>(abscissae.size()));
    put(os, x_lo);
    put(os, x_hi);
    put(os, max_midpoint_error);
    put(os, f.sign);
    put(os, fprime.sign);
    put_vec(os, abscissae);
    for (const auto* sub : {&f, &fprime}) {
      put_vec(os, sub->values);
      put_vec(os, sub->log_abs);
      put_vec(os, sub->log_slopes);
    }
    if (!os) return;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
}

bool KernelTable::load_binary(const std::filesystem::path& path, std::uint64_t key, KernelTable& out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return false;
  char magic[4];
  std::uint32_t version = 0, kind_raw = 0;
  std::uint64_t stored_key = 0, n = 0;
  if (!is.read(magic, 4) || std::memcmp(magic, kTableMagic, 4) != 0) return false;
  if (!get(is, version) || version != kTableFormatVersion) return false;
  if (!get(is, stored_key) || stored_key != key) return false;
  if (!get(is, kind_raw) || !get(is, n) || n < 4 || n > (1u << 24)) return false;
  KernelTable t;
  t.kind = static_cast<Kind>(kind_raw);
  if (!get(is, t.x_lo) || !get(is, t.x_hi) || !get(is, t.max_midpoint_error)) return false;
  if (!get(is, t.f.sign) || !get(is, t.fprime.sign)) return false;
  if (!get_vec(is, t.abscissae, n)) return false;
  for (auto* sub : {&t.f, &t.fprime}) {
    if (!get_vec(is, sub->values, n) || !get_vec(is, sub->log_abs, n) ||
        !get_vec(is, sub->log_slopes, n))
      return false;
  }
  t.log_lo = std::log(t.x_lo);
  t.inv_step = (n - 1) / (std::log(t.x_hi) - t.log_lo);
  out = std::move(t);
  return true;
}

void KernelTable::dump_text(std::ostream& os) const {
  const char* name = kind == Kind::H ? "H" : "F";
  os << "# " << name << " table: " << abscissae.size() << " nodes on [" << x_lo << ", " << x_hi
     << "], max midpoint error " << max_midpoint_error << "\n";
  os << "# x " << name << " " << name << "' dln" << name << "/dlnx dln" << name << "'/dlnx\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < abscissae.size(); ++i)
    os << abscissae[i] << ' ' << f.values[i] << ' ' << fprime.values[i] << ' ' << f.log_slopes[i]
       << ' ' << fprime.log_slopes[i] << '\n';
}

void set_table_cache_dir(const std::filesystem::path& dir) {
  std::lock_guard lock(g_cache_mutex);
  g_cache_dir = dir;
  g_cache_dir_set = true;
}

const KernelTable& h_table() {
  static const KernelTable table = load_or_build(KernelTable::Kind::H);
  return table;
}

const KernelTable& f_table() {
  static const KernelTable table = load_or_build(KernelTable::Kind::F);
  return table;
}

double eval_H(double t) {
  require_positive(t, "H");
  const auto& tab = h_table();
  if (t < tab.x_lo) return series::H_small(t);
  if (t > tab.x_hi) return series::H_large(t);
  return tab.value(t);
}

double eval_H_prime(double t) {
  require_positive(t, "H'");
  const auto& tab = h_table();
  if (t < tab.x_lo) return series::H_prime_small(t);
  if (t > tab.x_hi) return series::H_prime_large(t);
  return tab.derivative(t);
}

double eval_F(double s) {
  require_positive(s, "F");
  const auto& tab = f_table();
  if (s < tab.x_lo) return series::F_small(s);
  if (s > tab.x_hi) return series::F_large(s);
  return tab.value(s);
}

double eval_F_prime(double s) {
  require_positive(s, "F'");
  const auto& tab = f_table();
  if (s < tab.x_lo) return series::F_prime_small(s);
  if (s > tab.x_hi) return series::F_prime_large(s);
  return tab.derivative(s);
}

CorHReport check_corH_bounds(int samples, const std::vector<double>& h_exponents,
                             const std::vector<double>& hprime_exponents) {
  if (samples < 1) throw DomainError("check_corH_bounds: samples must be >= 1");
  const std::vector<double> decades = {4.0, 6.0, 8.0};
  std::vector<double> ts(samples), hs(samples), hps(samples);
  for (int i = 0; i < samples; ++i) {
    const double e = samples == 1 ? 0.0 : -8.0 + 16.0 * i / (samples - 1);
    ts[i] = std::pow(10.0, e);
    hs[i] = eval_H(ts[i]);
    hps[i] = eval_H_prime(ts[i]);
  }
  CorHReport report;
  report.samples = samples;
  auto scan = [&](const char* name, double a, const std::vector<double>& vals) {
    CorHEntry entry;
    entry.function = name;
    entry.exponent = a;
    entry.range_decades = decades;
    for (double k : decades) {
      double sup = 0.0;
      for (int i = 0; i < samples; ++i) {
        if (std::abs(std::log10(ts[i])) > k + 1e-12) continue;
        sup = std::max(sup, std::pow(ts[i], a) * std::abs(vals[i]));
      }
      entry.range_sups.push_back(sup);
    }
    entry.sup = entry.range_sups.back();
    for (std::size_t j = 1; j < entry.range_sups.size(); ++j)
      if (!std::isfinite(entry.range_sups[j]) || entry.range_sups[j] > 1.1 * entry.range_sups[j - 1])
        entry.bounded = false;
    report.entries.push_back(entry);
  };
  for (double a : h_exponents) scan("H", a, hs);
  for (double b : hprime_exponents) scan("H'", b, hps);
  return report;
}

}  // namespace axisym
