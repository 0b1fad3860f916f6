#include "axisym/zconv.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

#include "axisym/errors.hpp"

namespace axisym {

namespace {
// FFTW's planner is not reentrant; execution of an existing plan is.
std::mutex g_planner_mutex;

struct FftwBuffer {
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  FftwBuffer(int len) {
    real = fftw_alloc_real(len);
    cplx = fftw_alloc_complex(len / 2 + 1);
  }
  ~FftwBuffer() {
    fftw_free(real);
    fftw_free(cplx);
  }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};
}  // namespace

struct ZConvolver::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

ZConvolver::ZConvolver(int nz) : nz_(nz), len_(2 * nz), plans_(std::make_unique<Plans>()) {
  if (nz < 1) throw DomainError("ZConvolver: nz must be >= 1");
  FftwBuffer buf(len_);
  std::lock_guard lock(g_planner_mutex);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->fwd = fftw_plan_dft_r2c_1d(len_, buf.real, buf.cplx, flags);
  plans_->inv = fftw_plan_dft_c2r_1d(len_, buf.cplx, buf.real, flags);
}

ZConvolver::~ZConvolver() {
  std::lock_guard lock(g_planner_mutex);
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->inv) fftw_destroy_plan(plans_->inv);
}

std::vector<std::complex<double>> ZConvolver::kernel_spectrum(std::span<const double> kern) const {
  if (static_cast<int>(kern.size()) != 2 * nz_ - 1)
    throw DomainError("ZConvolver: kernel must have 2 nz - 1 taps");
  FftwBuffer buf(len_);
  std::fill(buf.real, buf.real + len_, 0.0);
  for (int m = -(nz_ - 1); m <= nz_ - 1; ++m) buf.real[(m + len_) % len_] = kern[m + nz_ - 1];
  std::vector<std::complex<double>> spec(spectrum_length());
  fftw_execute_dft_r2c(plans_->fwd, buf.real, reinterpret_cast<fftw_complex*>(spec.data()));
  return spec;
}

void ZConvolver::forward(const double* in, std::complex<double>* spec) const {
  FftwBuffer buf(len_);
  std::memcpy(buf.real, in, sizeof(double) * nz_);
  std::fill(buf.real + nz_, buf.real + len_, 0.0);
  fftw_execute_dft_r2c(plans_->fwd, buf.real, reinterpret_cast<fftw_complex*>(spec));
}

void ZConvolver::inverse(const std::complex<double>* spec, double* out) const {
  FftwBuffer buf(len_);
  std::memcpy(buf.cplx, spec, sizeof(fftw_complex) * spectrum_length());
  fftw_execute_dft_c2r(plans_->inv, buf.cplx, buf.real);
  const double scale = 1.0 / len_;
  for (int k = 0; k < nz_; ++k) out[k] = buf.real[k] * scale;
}

void ZConvolver::convolve_fft(std::span<const std::complex<double>> kernel_hat, const double* in,
                              double* out, int rows) const {
  const int ns = spectrum_length();
  FftwBuffer buf(len_);
  const double scale = 1.0 / len_;
  auto* spec = reinterpret_cast<std::complex<double>*>(buf.cplx);
  for (int row = 0; row < rows; ++row) {
    const double* src = in + static_cast<std::size_t>(row) * nz_;
    double* dst = out + static_cast<std::size_t>(row) * nz_;
    std::memcpy(buf.real, src, sizeof(double) * nz_);
    std::fill(buf.real + nz_, buf.real + len_, 0.0);
    fftw_execute_dft_r2c(plans_->fwd, buf.real, buf.cplx);
    for (int j = 0; j < ns; ++j) spec[j] *= kernel_hat[j];
    fftw_execute_dft_c2r(plans_->inv, buf.cplx, buf.real);
    for (int k = 0; k < nz_; ++k) dst[k] = buf.real[k] * scale;
  }
}

void convolve_direct(std::span<const double> kern, int band, const double* in, double* out,
                     int rows, int nz) {
  band = std::clamp(band, 0, nz - 1);
  const double* c = kern.data() + (nz - 1);  // c[m] for m in (-nz, nz)
  for (int row = 0; row < rows; ++row) {
    const double* src = in + static_cast<std::size_t>(row) * nz;
    double* dst = out + static_cast<std::size_t>(row) * nz;
    for (int k = 0; k < nz; ++k) {
      const int lo = std::max(0, k - band), hi = std::min(nz - 1, k + band);
      double acc = 0.0;
      for (int l = lo; l <= hi; ++l) acc += c[k - l] * src[l];
      dst[k] = acc;
    }
  }
}

}  // namespace axisym
