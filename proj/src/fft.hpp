#pragma once

#include <complex>
#include <vector>

namespace shmvdr {

// Thin RAII wrapper over FFTW real<->complex transforms of one fixed size.
// Instances are not thread-safe; create one per thread. Plan creation and
// destruction are serialized internally (FFTW planner requirement).
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return size_; }
  int bins() const { return size_ / 2 + 1; }

  // X[k] = sum_t x[t] e^{-2 pi i k t / N}, k = 0..N/2
  void forward(const double* in, std::complex<double>* out);
  // inverse of forward, scaled by 1/N so roundtrip is the identity
  void inverse(const std::complex<double>* in, double* out);

 private:
  int size_;
  void* plan_fwd_;
  void* plan_inv_;
  double* real_buf_;
  void* cplx_buf_;
};

// Linear convolution via FFT overlap-add; result length = x.size() + h.size() - 1.
std::vector<double> fft_convolve(const std::vector<double>& x, const std::vector<double>& h);

}  // namespace shmvdr
