#include "axisym/biot_savart.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "axisym/errors.hpp"
#include "axisym/special_functions.hpp"

namespace axisym {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::pair<double, double> kernel_unchecked(double r, double dz, double rb, double dr) {
  const double s = (dr * dr + dz * dz) / (r * rb);
  const double f = eval_F(s);
  const double fp = eval_F_prime(s);
  const double pref = 1.0 / (kPi * r * std::sqrt(r * rb));
  const double gr = -pref * dz * fp;
  const double gz = pref * dr * fp + std::sqrt(rb) / (4.0 * kPi * r * std::sqrt(r)) * (f - 2.0 * s * fp);
  return {gr, gz};
}

}  // namespace

std::pair<double, double> kernel_G(double r, double z, double rb, double zb) {
  if (!(r > 0.0) || !(rb > 0.0) || !std::isfinite(r) || !std::isfinite(rb) || !std::isfinite(z) ||
      !std::isfinite(zb)) {
    std::ostringstream msg;
    msg << "kernel_G: need r, rb > 0 and finite coordinates, got r=" << r << " rb=" << rb;
    throw DomainError(msg.str());
  }
  if (r == rb && z == zb) throw SingularPointError("kernel_G: target and source coincide");
  return kernel_unchecked(r, z - zb, rb, r - rb);
}

double self_cell_weight_z(double r, double hr, double hz) {
  // Near the diagonal, with x = r - rb and y = z - zb,
  //   G_z = (1/(4 pi r)) [3 ln 2 - 1 + ln r - ln(x^2 + y^2)/2 + x^2/(x^2 + y^2)] + O(rho),
  // and the odd O(rho) terms integrate to zero over the symmetric cell.
  const double a = 0.5 * hr, b = 0.5 * hz;
  const double at_ba = std::atan(b / a), at_ab = std::atan(a / b);
  const double int_log = 4.0 * (a * b * (std::log(a * a + b * b) - 3.0) + a * a * at_ba + b * b * at_ab);
  const double int_x2 = 2.0 * a * a * at_ba + 2.0 * a * b - 2.0 * b * b * at_ab;
  const double area = 4.0 * a * b;
  return ((3.0 * std::numbers::ln2 - 1.0 + std::log(r)) * area - 0.5 * int_log + int_x2) /
         (4.0 * kPi * r);
}

const char* to_string(BSPath p) {
  switch (p) {
    case BSPath::naive: return "naive";
    case BSPath::fft: return "fft";
    case BSPath::streaming: return "streaming";
  }
  return "?";
}

BSPath bs_path_from_string(const std::string& s) {
  if (s == "naive") return BSPath::naive;
  if (s == "fft") return BSPath::fft;
  if (s == "streaming") return BSPath::streaming;
  throw DomainError("unknown Biot-Savart path '" + s + "' (expected naive, fft or streaming)");
}

BiotSavart::BiotSavart(const Grid& grid, BSPath path, SelfCell self, Exec exec)
    : grid_(grid), path_(path), self_(self), exec_(exec), zconv_(std::make_shared<ZConvolver>(grid.nz())) {
  if (path_ != BSPath::fft) return;
  const auto t0 = Clock::now();
  const int nr = grid_.nr(), nz = grid_.nz();
  auto cache = std::make_unique<BSKernelCache>();
  cache->grid_hash = grid_.hash();
  cache->nr = nr;
  cache->nz = nz;
  cache->ns = zconv_->spectrum_length();
  cache->self = self_;
  const std::size_t ns = cache->ns;
  cache->gr_imag.assign(static_cast<std::size_t>(nr) * nr * ns, 0.0);
  cache->gz_real.assign(static_cast<std::size_t>(nr) * nr * ns, 0.0);
  double worst_r = 0.0, worst_z = 0.0;
#pragma omp parallel if (exec_ == Exec::parallel)
  {
    std::vector<double> gr(2 * nz - 1), gz(2 * nz - 1);
    double local_r = 0.0, local_z = 0.0;
#pragma omp for schedule(dynamic, 1)
    for (int i = 0; i < nr; ++i) {
      for (int j = 0; j < nr; ++j) {
        fill_profiles(i, j, gr.data(), gz.data());
        const auto gr_hat = zconv_->kernel_spectrum(gr);
        const auto gz_hat = zconv_->kernel_spectrum(gz);
        const std::size_t base = (static_cast<std::size_t>(i) * nr + j) * ns;
        double scale_r = 0.0, scale_z = 0.0, res_r = 0.0, res_z = 0.0;
        for (std::size_t kk = 0; kk < ns; ++kk) {
          cache->gr_imag[base + kk] = gr_hat[kk].imag();
          cache->gz_real[base + kk] = gz_hat[kk].real();
          scale_r = std::max(scale_r, std::abs(gr_hat[kk]));
          scale_z = std::max(scale_z, std::abs(gz_hat[kk]));
          res_r = std::max(res_r, std::abs(gr_hat[kk].real()));
          res_z = std::max(res_z, std::abs(gz_hat[kk].imag()));
        }
        if (scale_r > 0.0) local_r = std::max(local_r, res_r / scale_r);
        if (scale_z > 0.0) local_z = std::max(local_z, res_z / scale_z);
      }
    }
#pragma omp critical
    {
      worst_r = std::max(worst_r, local_r);
      worst_z = std::max(worst_z, local_z);
    }
  }
  cache->max_gr_real_residual = worst_r;
  cache->max_gz_imag_residual = worst_z;
  if (worst_r > 1e-10 || worst_z > 1e-10) {
    std::ostringstream msg;
    msg << "Biot-Savart cache: profile symmetry check failed (odd residual " << worst_r
        << ", even residual " << worst_z << ")";
    throw std::runtime_error(msg.str());
  }
  cache_ = std::move(cache);
  build_seconds_ = seconds_since(t0);
}

BSTimings BiotSavart::timings() const {
  return {build_seconds_, eval_seconds_.load(), evaluations_.load()};
}

std::pair<double, double> BiotSavart::weight(int i, int j, int m) const {
  const double area = grid_.cell_area();
  if (i == j && m == 0) {
    if (self_ == SelfCell::omit) return {0.0, 0.0};
    return {0.0, self_cell_weight_z(grid_.r(i), grid_.hr(), grid_.hz())};
  }
  const double r = grid_.r(i), rb = grid_.r(j);
  const auto [gr, gz] = kernel_unchecked(r, m * grid_.hz(), rb, r - rb);
  return {area * gr, area * gz};
}

void BiotSavart::fill_profiles(int i, int j, double* gr, double* gz) const {
  // Layout of ZConvolver kernels: offset m in (-nz, nz) at index m + nz - 1.
  const int nz = grid_.nz();
  for (int m = 0; m < nz; ++m) {
    const auto [wr, wz] = weight(i, j, m);
    gr[nz - 1 + m] = wr;
    gz[nz - 1 + m] = wz;
    gr[nz - 1 - m] = -wr;
    gz[nz - 1 - m] = wz;
  }
  gr[nz - 1] = 0.0;
}

Velocity BiotSavart::velocity(const ScalarField& omega) const {
  if (omega.grid() != grid_) throw GridMismatchError("velocity_from_vorticity: grid differs from the Biot-Savart cache");
  if (cache_ && cache_->grid_hash != omega.grid().hash())
    throw GridMismatchError("velocity_from_vorticity: cache built for another grid");
  const auto t0 = Clock::now();
  Velocity v = path_ == BSPath::naive ? eval_naive(omega) : eval_spectral(omega, path_ == BSPath::streaming);
  eval_seconds_.fetch_add(seconds_since(t0));
  evaluations_.fetch_add(1);
  return v;
}

Velocity BiotSavart::eval_naive(const ScalarField& omega) const {
  const int nr = grid_.nr(), nz = grid_.nz();
  Velocity v{ScalarField(grid_, Quantity::u_r), ScalarField(grid_, Quantity::u_z)};
#pragma omp parallel for schedule(dynamic, 1) if (exec_ == Exec::parallel)
  for (int i = 0; i < nr; ++i) {
    for (int k = 0; k < nz; ++k) {
      double sr = 0.0, sz = 0.0;
      for (int j = 0; j < nr; ++j) {
        const double* src = omega.row(j);
        for (int l = 0; l < nz; ++l) {
          const auto [wr, wz] = weight(i, j, k - l);
          sr += wr * src[l];
          sz += wz * src[l];
        }
      }
      v.ur(i, k) = sr;
      v.uz(i, k) = sz;
    }
  }
  return v;
}

Velocity BiotSavart::eval_spectral(const ScalarField& omega, bool streaming) const {
  const int nr = grid_.nr(), nz = grid_.nz();
  const int ns = zconv_->spectrum_length();
  using cplx = std::complex<double>;
  std::vector<cplx> omega_hat(static_cast<std::size_t>(nr) * ns);
#pragma omp parallel for schedule(static) if (exec_ == Exec::parallel)
  for (int j = 0; j < nr; ++j) zconv_->forward(omega.row(j), omega_hat.data() + static_cast<std::size_t>(j) * ns);

  Velocity v{ScalarField(grid_, Quantity::u_r), ScalarField(grid_, Quantity::u_z)};
#pragma omp parallel if (exec_ == Exec::parallel)
  {
    std::vector<cplx> acc_r(ns), acc_z(ns);
    std::vector<double> gr, gz, gr_im, gz_re;
    if (streaming) {
      gr.resize(2 * nz - 1);
      gz.resize(2 * nz - 1);
      gr_im.resize(ns);
      gz_re.resize(ns);
    }
#pragma omp for schedule(dynamic, 1)
    for (int i = 0; i < nr; ++i) {
      std::fill(acc_r.begin(), acc_r.end(), cplx(0.0));
      std::fill(acc_z.begin(), acc_z.end(), cplx(0.0));
      for (int j = 0; j < nr; ++j) {
        const double* im_r;
        const double* re_z;
        if (streaming) {
          fill_profiles(i, j, gr.data(), gz.data());
          const auto r_hat = zconv_->kernel_spectrum(gr);
          const auto z_hat = zconv_->kernel_spectrum(gz);
          for (int kk = 0; kk < ns; ++kk) {
            gr_im[kk] = r_hat[kk].imag();
            gz_re[kk] = z_hat[kk].real();
          }
          im_r = gr_im.data();
          re_z = gz_re.data();
        } else {
          const std::size_t base = (static_cast<std::size_t>(i) * nr + j) * ns;
          im_r = cache_->gr_imag.data() + base;
          re_z = cache_->gz_real.data() + base;
        }
        const cplx* w = omega_hat.data() + static_cast<std::size_t>(j) * ns;
        for (int kk = 0; kk < ns; ++kk) {
          // (i b) * (x + i y) = -b y + i b x
          acc_r[kk] += cplx(-im_r[kk] * w[kk].imag(), im_r[kk] * w[kk].real());
          acc_z[kk] += re_z[kk] * w[kk];
        }
      }
      zconv_->inverse(acc_r.data(), v.ur.row(i));
      zconv_->inverse(acc_z.data(), v.uz.row(i));
    }
  }
  return v;
}

const BiotSavart& biot_savart_for(const Grid& grid) {
  // Caches are large (about nr^2 nz doubles), so only a few are kept.
  static std::mutex guard;
  static std::map<std::uint64_t, std::unique_ptr<BiotSavart>> registry;
  std::lock_guard lock(guard);
  auto it = registry.find(grid.hash());
  if (it != registry.end() && it->second->grid() == grid) return *it->second;
  if (registry.size() >= 2) registry.clear();
  auto& slot = registry[grid.hash()];
  slot = std::make_unique<BiotSavart>(grid);
  return *slot;
}

Velocity velocity_from_vorticity(const ScalarField& omega, BSPath path) {
  if (path == BSPath::fft) return biot_savart_for(omega.grid()).velocity(omega);
  return BiotSavart(omega.grid(), path).velocity(omega);
}

const Velocity& ensure_velocity(AxiState& state, const BiotSavart& bs) {
  if (!state.velocity) state.velocity = std::make_shared<const Velocity>(bs.velocity(state.omega));
  return *state.velocity;
}

BSResiduals bs_residuals(const ScalarField& omega, const Velocity& v) {
  const Grid& g = omega.grid();
  require_same_grid(g, v.ur.grid(), "bs_residuals");
  require_same_grid(g, v.uz.grid(), "bs_residuals");
  const double hr = g.hr(), hz = g.hz();
  double div_max = 0.0, speed_max = 0.0, curl_sq = 0.0, omega_sq = 0.0;
  for (int i = 1; i + 1 < g.nr(); ++i)
    for (int k = 1; k + 1 < g.nz(); ++k) {
      const double r = g.r(i);
      const double div = (g.r(i + 1) * v.ur(i + 1, k) - g.r(i - 1) * v.ur(i - 1, k)) / (2.0 * hr) +
                         r * (v.uz(i, k + 1) - v.uz(i, k - 1)) / (2.0 * hz);
      div_max = std::max(div_max, std::abs(div));
      speed_max = std::max(speed_max, r * std::hypot(v.ur(i, k), v.uz(i, k)));
      const double curl = (v.ur(i, k + 1) - v.ur(i, k - 1)) / (2.0 * hz) - (v.uz(i + 1, k) - v.uz(i - 1, k)) / (2.0 * hr);
      curl_sq += (curl - omega(i, k)) * (curl - omega(i, k));
      omega_sq += omega(i, k) * omega(i, k);
    }
  BSResiduals res;
  res.divergence = speed_max > 0.0 ? div_max / speed_max : 0.0;
  res.curl = omega_sq > 0.0 ? std::sqrt(curl_sq / omega_sq) : 0.0;
  return res;
}

// ---------------------------------------------------------------------------

double bs_estimate_q(double p, double alpha, double beta) {
  const double inv_q = 1.0 / p - 0.5 * (1.0 + alpha - beta);
  return inv_q > 0.0 ? 1.0 / inv_q : std::numeric_limits<double>::infinity();
}

RatioReport check_bs_weighted_estimate(double p, double q, double alpha, double beta,
                                       const SampledCheckOptions& opt) {
  std::ostringstream why;
  if (!(beta - alpha >= 0.0 && beta - alpha < 1.0)) why << "need 0 <= beta - alpha < 1; ";
  if (!(alpha >= 0.0 && alpha <= 2.0 && beta >= 0.0 && beta <= 2.0)) why << "need alpha, beta in [0, 2]; ";
  if (!(p > 1.0 && std::isfinite(p) && q > 1.0 && std::isfinite(q))) why << "need p, q in (1, inf); ";
  else if (std::abs(1.0 / q - (1.0 / p - 0.5 * (1.0 + alpha - beta))) > 1e-12)
    why << "need 1/q = 1/p - (1 + alpha - beta)/2; ";
  if (!why.str().empty()) throw DomainError("check_bs_weighted_estimate: " + why.str());

  const Grid grid = opt.grid.rescaled(opt.rescale);
  const BiotSavart bs(grid, BSPath::fft, SelfCell::analytic, Exec::serial);
  const MixtureOptions mix = mixture_for(opt.grid);
  auto sampler = [&](std::mt19937_64& rng) -> double {
    const ScalarField w = render_mixture(grid, rescaled_bumps(draw_mixture(rng, mix), opt.rescale), Quantity::omega_theta);
    const double den = weighted_lp(w, beta, p, Measure::omega);
    if (!(den > 0.0)) return kNaN;
    const Velocity v = bs.velocity(w);
    return weighted_lp_vector(v.ur, v.uz, alpha, q, Measure::omega) / den;
  };
  RatioReport report = run_ratio_suite(opt.samples, opt.seed, sampler);
  report.suite = "bs_weighted_estimate";
  report.exponents = {alpha, beta};
  report.p = p;
  report.q = q;
  return report;
}

RatioReport check_lemur_bounds(double p, const SampledCheckOptions& opt) {
  if (!(p > 1.0 && std::isfinite(p))) throw DomainError("check_lemur_bounds: need 1 < p < inf");
  const Grid grid = opt.grid.rescaled(opt.rescale);
  const BiotSavart bs(grid, BSPath::fft, SelfCell::analytic, Exec::serial);
  const MixtureOptions mix = mixture_for(opt.grid);
  auto sampler = [&](std::mt19937_64& rng) -> double {
    // omega vanishes linearly on the axis, as an axisymmetric vorticity must.
    const ScalarField w = render_mixture(grid, rescaled_bumps(draw_mixture(rng, mix), opt.rescale),
                                         Quantity::omega_theta, AxisFactor::linear);
    const double den = lp_norm_r3(w, p);
    if (!(den > 0.0)) return kNaN;
    const Velocity v = bs.velocity(w);
    const auto [urr, urz] = gradient_tilde(v.ur);
    const auto [uzr, uzz] = gradient_tilde(v.uz);
    const double num = weighted_lp_vector(urr, urz, 0.0, p, Measure::r3) +
                       weighted_lp_vector(uzr, uzz, 0.0, p, Measure::r3) +
                       weighted_lp(v.ur, -1.0, p, Measure::r3);
    return num / den;
  };
  RatioReport report = run_ratio_suite(opt.samples, opt.seed, sampler);
  report.suite = "lemur_bounds";
  report.p = p;
  report.q = p;
  return report;
}

}  // namespace axisym
