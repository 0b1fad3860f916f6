#include "axisym/semigroup.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "axisym/errors.hpp"
#include "axisym/quadrature.hpp"
#include "axisym/special_functions.hpp"

namespace axisym {

namespace {

constexpr double kPi = std::numbers::pi;
// e^{-x^2} < 1e-32 beyond x = 8.6: the r-profile and z taps vanish there.
constexpr double kGaussWindow = 8.6;
constexpr int kGaussPoints = 8;

double gauss_1d(double t, double x) { return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * kPi * t); }

// Splits [lo, hi] into `blocks` near-equal contiguous ranges; used to hand
// each thread one run of rows.
std::pair<int, int> block_range(int n, int blocks, int b) {
  const int base = n / blocks, extra = n % blocks;
  const int lo = b * base + std::min(b, extra);
  return {lo, lo + base + (b < extra ? 1 : 0)};
}

}  // namespace

double SemigroupKernelPlan::r_profile(double t, double r, double rb) {
  if (rb <= 0.0) return 0.0;
  const double g = gauss_1d(t, r - rb);
  if (g == 0.0) return 0.0;
  return std::sqrt(rb / r) * eval_H(t / (r * rb)) * g;
}

double SemigroupKernelPlan::r_profile_dr(double t, double r, double rb) {
  if (rb <= 0.0) return 0.0;
  const double g = gauss_1d(t, r - rb);
  if (g == 0.0) return 0.0;
  const double tau = t / (r * rb);
  const double w = std::sqrt(rb / r) * g;
  return w * (eval_H(tau) * (-(r - rb) / (2.0 * t) - 0.5 / r) - eval_H_prime(tau) * tau / r);
}

const char* to_string(SourceRule rule) { return rule == SourceRule::cell ? "cell" : "point"; }

Semigroup::Semigroup(const Grid& grid, ConvPath path, Exec exec, SourceRule rule)
    : grid_(grid), path_(path), exec_(exec), rule_(rule), zconv_(std::make_shared<ZConvolver>(grid.nz())) {}

double point_threshold(const Grid& grid) {
  const double h = std::max(grid.hr(), grid.hz());
  return 0.5 * h * h;
}

double Semigroup::point_threshold() const { return axisym::point_threshold(grid_); }

std::shared_ptr<const SemigroupKernelPlan> Semigroup::build_plan(double t) const {
  if (!(t > 0.0) || !std::isfinite(t)) {
    std::ostringstream msg;
    msg << "semigroup plan: t must be positive and finite, got " << t;
    throw DomainError(msg.str());
  }
  auto plan = std::make_shared<SemigroupKernelPlan>();
  const int nr = grid_.nr(), nz = grid_.nz();
  const double hr = grid_.hr(), hz = grid_.hz();
  plan->t = t;
  plan->grid_hash = grid_.hash();
  plan->nr = nr;
  plan->nz = nz;
  plan->point = rule_ == SourceRule::point && t >= point_threshold();
  plan->plain.assign(static_cast<std::size_t>(nr) * nr, 0.0);
  plan->div_r.assign(static_cast<std::size_t>(nr) * nr, 0.0);
  plan->grad_r.assign(static_cast<std::size_t>(nr) * nr, 0.0);
  plan->col_lo.assign(nr, 0);
  plan->col_hi.assign(nr, -1);

  const double s4t = 2.0 * std::sqrt(t);
  const double window = kGaussWindow * s4t;
  const double panel = std::min(hr, std::sqrt(2.0 * t));
  const auto& gl = gauss_legendre(kGaussPoints);

  // int_a^b K_t(r, x) dx and int_a^b dK_t/dr(r, x) dx, clipped to the window.
  auto integrate = [&](double r, double a, double b) -> std::pair<double, double> {
    a = std::max(a, r - window);
    b = std::min(b, r + window);
    if (!(b > a)) return {0.0, 0.0};
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
    const double w = (b - a) / panels;
    double s_plain = 0.0, s_grad = 0.0;
    for (int pnl = 0; pnl < panels; ++pnl) {
      const double c = a + (pnl + 0.5) * w;
      for (int q = 0; q < kGaussPoints; ++q) {
        const double x = c + 0.5 * w * gl.nodes[q];
        const double wq = 0.5 * w * gl.weights[q];
        s_plain += wq * SemigroupKernelPlan::r_profile(t, r, x);
        s_grad += wq * SemigroupKernelPlan::r_profile_dr(t, r, x);
      }
    }
    return {s_plain, s_grad};
  };

#pragma omp parallel for schedule(dynamic, 4) if (exec_ == Exec::parallel)
  for (int i = 0; i < nr; ++i) {
    const double r = grid_.r(i);
    const int jlo = std::max(0, static_cast<int>(std::floor((r - window) / hr)) - 1);
    const int jhi = std::min(nr - 1, static_cast<int>(std::floor((r + window) / hr)) + 1);
    plan->col_lo[i] = jlo;
    plan->col_hi[i] = jhi;
    // Segments between neighbouring nodes; the first starts on the axis and
    // the last ends at R_max, where the interpolant is pinned to zero.
    auto segment = [&](int j) -> std::pair<double, double> {  // [node j, node j+1]
      const double a = j < 0 ? 0.0 : grid_.r(j);
      const double b = j + 1 >= nr ? grid_.r_max() : grid_.r(j + 1);
      return {a, b};
    };
    if (plan->point) {
      // Midpoint sums; div acts on centred differences with odd ghosts on
      // the axis and beyond R_max.
      auto P = [&](int j) { return j < 0 || j >= nr ? 0.0 : hr * SemigroupKernelPlan::r_profile(t, r, grid_.r(j)); };
      for (int j = jlo; j <= jhi; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * nr + j;
        plan->plain[idx] = P(j);
        plan->grad_r[idx] = hr * SemigroupKernelPlan::r_profile_dr(t, r, grid_.r(j));
        double d = P(j - 1) - P(j + 1);
        if (j == 0) d += P(0);
        if (j == nr - 1) d -= P(nr - 1);
        plan->div_r[idx] = d / (2.0 * hr);
      }
      continue;
    }
    for (int j = jlo; j <= jhi; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * nr + j;
      const auto [p, gsum] = integrate(r, j * hr, (j + 1) * hr);
      plan->plain[idx] = p;
      plan->grad_r[idx] = gsum;
      const auto [la, lb] = segment(j - 1);
      const auto [ra, rb] = segment(j);
      plan->div_r[idx] = integrate(r, la, lb).first / (lb - la) - integrate(r, ra, rb).first / (rb - ra);
    }
  }

  plan->zg.assign(2 * nz - 1, 0.0);
  plan->zd.assign(2 * nz - 1, 0.0);
  for (int m = -(nz - 1); m <= nz - 1 && plan->point; ++m) {
    plan->zg[m + nz - 1] = hz * gauss_1d(t, m * hz);
    plan->zd[m + nz - 1] = (gauss_1d(t, (m + 1) * hz) - gauss_1d(t, (m - 1) * hz)) / 2.0;
  }
  for (int m = -(nz - 1); m <= nz - 1 && !plan->point; ++m) {
    const double x0 = (std::abs(m) * hz - 0.5 * hz) / s4t;
    const double x1 = (std::abs(m) * hz + 0.5 * hz) / s4t;
    plan->zg[m + nz - 1] = m == 0 ? std::erf(x1) : 0.5 * (std::erfc(x0) - std::erfc(x1));
    // erf((m+1)h/s) - 2 erf(mh/s) + erf((m-1)h/s), written with erfc for |m| >= 1
    double second = 0.0;
    if (m == 0) {
      second = 0.0;
    } else {
      const double sg = m > 0 ? 1.0 : -1.0;
      const int am = std::abs(m);
      second = sg * (-std::erfc((am + 1) * hz / s4t) + 2.0 * std::erfc(am * hz / s4t) -
                     std::erfc((am - 1) * hz / s4t));
    }
    plan->zd[m + nz - 1] = second / (2.0 * hz);
  }
  plan->z_band = std::min(nz - 1, static_cast<int>(std::ceil(window / hz)) + 1);
  if (path_ == ConvPath::fft) {
    plan->zg_hat = zconv_->kernel_spectrum(plan->zg);
    plan->zd_hat = zconv_->kernel_spectrum(plan->zd);
  }
  return plan;
}

std::shared_ptr<const SemigroupKernelPlan> Semigroup::plan(double t) const {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
  }
  auto fresh = build_plan(t);
  std::lock_guard lock(mutex_);
  if (cache_.size() >= cache_limit_) cache_.clear();
  return cache_.emplace(t, std::move(fresh)).first->second;
}

void Semigroup::clear_cache() const {
  std::lock_guard lock(mutex_);
  cache_.clear();
}

std::size_t Semigroup::cached_plans() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

void Semigroup::convolve_z(const SemigroupKernelPlan& plan, bool derivative, const ScalarField& in,
                           ScalarField& out) const {
  const int nr = grid_.nr(), nz = grid_.nz();
  const auto& taps = derivative ? plan.zd : plan.zg;
  const auto& hat = derivative ? plan.zd_hat : plan.zg_hat;
  const bool use_fft = path_ == ConvPath::fft && !hat.empty();
  auto run = [&](int lo, int hi) {
    if (hi <= lo) return;
    if (use_fft)
      zconv_->convolve_fft(hat, in.row(lo), out.row(lo), hi - lo);
    else
      convolve_direct(taps, plan.z_band, in.row(lo), out.row(lo), hi - lo, nz);
  };
  if (exec_ == Exec::serial) {
    run(0, nr);
    return;
  }
#pragma omp parallel
  {
    const auto [lo, hi] = block_range(nr, omp_get_num_threads(), omp_get_thread_num());
    run(lo, hi);
  }
}

void Semigroup::mix_r(const std::vector<double>& matrix, const SemigroupKernelPlan& plan,
                      const ScalarField& in, ScalarField& out, bool accumulate) const {
  const int nr = grid_.nr(), nz = grid_.nz();
#pragma omp parallel for schedule(dynamic, 4) if (exec_ == Exec::parallel)
  for (int i = 0; i < nr; ++i) {
    double* dst = out.row(i);
    if (!accumulate) std::fill(dst, dst + nz, 0.0);
    const double* mrow = matrix.data() + static_cast<std::size_t>(i) * nr;
    for (int j = plan.col_lo[i]; j <= plan.col_hi[i]; ++j) {
      const double c = mrow[j];
      if (c == 0.0) continue;
      const double* src = in.row(j);
      for (int k = 0; k < nz; ++k) dst[k] += c * src[k];
    }
  }
}

ScalarField Semigroup::apply(double t, const ScalarField& f) const {
  require_same_grid(grid_, f.grid(), "apply_S");
  if (t == 0.0) return f;
  auto p = plan(t);
  ScalarField tmp(grid_), out(grid_, f.tag());
  convolve_z(*p, false, f, tmp);
  mix_r(p->plain, *p, tmp, out, false);
  return out;
}

ScalarField Semigroup::apply_div(double t, const ScalarField& vr, const ScalarField& vz) const {
  require_same_grid(grid_, vr.grid(), "apply_S_div");
  require_same_grid(grid_, vz.grid(), "apply_S_div");
  if (!(t > 0.0)) throw DomainError("apply_S_div: t must be positive");
  auto p = plan(t);
  ScalarField tmp(grid_), out(grid_);
  convolve_z(*p, false, vr, tmp);
  mix_r(p->div_r, *p, tmp, out, false);
  convolve_z(*p, true, vz, tmp);
  mix_r(p->plain, *p, tmp, out, true);
  return out;
}

std::pair<ScalarField, ScalarField> Semigroup::apply_grad(double t, const ScalarField& f) const {
  require_same_grid(grid_, f.grid(), "apply_grad_S");
  if (!(t > 0.0)) throw DomainError("apply_grad_S: t must be positive");
  auto p = plan(t);
  ScalarField tmp(grid_), dr(grid_), dz(grid_);
  convolve_z(*p, false, f, tmp);
  mix_r(p->grad_r, *p, tmp, dr, false);
  convolve_z(*p, true, f, tmp);
  mix_r(p->plain, *p, tmp, dz, false);
  return {std::move(dr), std::move(dz)};
}

const Semigroup& semigroup_for(const Grid& grid, SourceRule rule) {
  static std::mutex guard;
  static std::map<std::pair<std::uint64_t, int>, std::unique_ptr<Semigroup>> registry;
  std::lock_guard lock(guard);
  const auto key = std::make_pair(grid.hash(), static_cast<int>(rule));
  if (registry.size() > 16 && !registry.count(key)) registry.clear();
  auto& slot = registry[key];
  if (!slot || slot->grid() != grid)
    slot = std::make_unique<Semigroup>(grid, ConvPath::fft, Exec::parallel, rule);
  return *slot;
}

ScalarField apply_S(double t, const ScalarField& f) {
  if (t < 0.0 || !std::isfinite(t)) throw DomainError("apply_S: t must be >= 0 and finite");
  if (t == 0.0) return f;
  return semigroup_for(f.grid()).apply(t, f);
}

ScalarField apply_S_div(double t, const ScalarField& vr, const ScalarField& vz) {
  return semigroup_for(vr.grid()).apply_div(t, vr, vz);
}

std::pair<ScalarField, ScalarField> apply_grad_S(double t, const ScalarField& f) {
  return semigroup_for(f.grid()).apply_grad(t, f);
}

}  // namespace axisym
