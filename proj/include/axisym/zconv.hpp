#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace axisym {

/// Linear convolution along z, out[k] = sum_l kern[k - l] in[l] for
/// k, l in [0, nz), with the kernel given on offsets m in (-nz, nz) as
/// kern[m + nz - 1]. The FFT path zero-pads to length 2 nz so that no
/// wrap-around occurs.
class ZConvolver {
 public:
  explicit ZConvolver(int nz);
  ~ZConvolver();
  ZConvolver(const ZConvolver&) = delete;
  ZConvolver& operator=(const ZConvolver&) = delete;

  int nz() const { return nz_; }
  int fft_length() const { return len_; }
  int spectrum_length() const { return len_ / 2 + 1; }

  /// Spectrum of a kernel laid out as above.
  std::vector<std::complex<double>> kernel_spectrum(std::span<const double> kern) const;

  /// Forward transform of one zero-padded row of nz values.
  void forward(const double* in, std::complex<double>* spec) const;
  /// Inverse transform; writes the first nz samples (already normalized).
  void inverse(const std::complex<double>* spec, double* out) const;

  /// Convolves `rows` contiguous rows of length nz through the FFT.
  void convolve_fft(std::span<const std::complex<double>> kernel_hat, const double* in,
                    double* out, int rows) const;

 private:
  struct Plans;
  int nz_ = 0;
  int len_ = 0;
  std::unique_ptr<Plans> plans_;
};

/// Direct banded convolution; only offsets |m| <= band contribute.
void convolve_direct(std::span<const double> kern, int band, const double* in, double* out,
                     int rows, int nz);

}  // namespace axisym
