#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

#include "error.hpp"

namespace shmvdr {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(int size) : size_(size) {
  if (size < 2) throw Error(ErrorCode::InvalidArgument, "FFT size must be >= 2");
  real_buf_ = fftw_alloc_real(size_);
  cplx_buf_ = fftw_alloc_complex(bins());
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = fftw_plan_dft_r2c_1d(size_, real_buf_, static_cast<fftw_complex*>(cplx_buf_),
                                   FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_1d(size_, static_cast<fftw_complex*>(cplx_buf_), real_buf_,
                                   FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  }
  fftw_free(real_buf_);
  fftw_free(cplx_buf_);
}

void RealFft::forward(const double* in, std::complex<double>* out) {
  std::memcpy(real_buf_, in, sizeof(double) * size_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  std::memcpy(out, cplx_buf_, sizeof(std::complex<double>) * bins());
}

void RealFft::inverse(const std::complex<double>* in, double* out) {
  std::memcpy(cplx_buf_, in, sizeof(std::complex<double>) * bins());
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const double scale = 1.0 / size_;
  for (int i = 0; i < size_; ++i) out[i] = real_buf_[i] * scale;
}

std::vector<double> fft_convolve(const std::vector<double>& x, const std::vector<double>& h) {
  if (x.empty() || h.empty()) return {};
  const size_t out_len = x.size() + h.size() - 1;
  // single FFT when small enough, otherwise overlap-add in blocks
  size_t fft_len = 1;
  while (fft_len < std::min<size_t>(out_len, 4 * h.size())) fft_len <<= 1;
  if (fft_len < 2 * h.size()) fft_len <<= 1;
  fft_len = std::max<size_t>(fft_len, 16);
  const size_t block = fft_len - h.size() + 1;

  RealFft fft(static_cast<int>(fft_len));
  std::vector<std::complex<double>> H(fft.bins()), X(fft.bins());
  {
    std::vector<double> tmp(fft_len, 0.0);
    std::copy(h.begin(), h.end(), tmp.begin());
    fft.forward(tmp.data(), H.data());
  }
  std::vector<double> out(out_len, 0.0), tmp(fft_len, 0.0), seg(fft_len);
  for (size_t start = 0; start < x.size(); start += block) {
    const size_t n = std::min(block, x.size() - start);
    std::fill(tmp.begin(), tmp.end(), 0.0);
    std::copy(x.begin() + start, x.begin() + start + n, tmp.begin());
    fft.forward(tmp.data(), X.data());
    for (int k = 0; k < fft.bins(); ++k) X[k] *= H[k];
    fft.inverse(X.data(), seg.data());
    const size_t limit = std::min(out_len - start, fft_len);
    for (size_t i = 0; i < limit; ++i) out[start + i] += seg[i];
  }
  return out;
}

}  // namespace shmvdr
