#include "baseline.hpp"

#include <cmath>

#include "error.hpp"
#include "threading.hpp"

namespace shmvdr::baseline {

Eigen::VectorXcd steering_from_doa(double theta, double phi, const scene::ArrayGeometry& geometry,
                                   double k) {
  const Eigen::Vector3d u(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                          std::cos(theta));
  Eigen::VectorXcd a(geometry.count());
  for (int q = 0; q < geometry.count(); ++q) {
    const double proj = k * geometry.radius * geometry.direction(q).dot(u);
    a[q] = std::complex<double>(std::cos(proj), std::sin(proj));
  }
  return a;
}

std::pair<int, int> smoothing_window(int pos, int count, int width) {
  const int radius = (width - 1) / 2;
  return {std::max(0, pos - radius), std::min(count - 1, pos + radius)};
}

BaselineResult baseline_enhance(const transforms::TFTensor& x,
                                const std::vector<Eigen::MatrixXcd>& r_interference_noise,
                                double doa_theta, double doa_phi,
                                const scene::ArrayGeometry& geometry,
                                const BaselineOptions& options) {
  const size_t B = x.band.bins.size();
  const int Q = x.channels;
  const int T = x.frames;
  if (r_interference_noise.size() != B)
    throw Error(ErrorCode::InvalidArgument, "PSD bin count does not match tensor");
  if (Q != geometry.count())
    throw Error(ErrorCode::InvalidArgument, "tensor channels do not match geometry");

  BaselineResult result;
  result.weights.resize(Q, static_cast<Eigen::Index>(B));
  result.atf.resize(Q, static_cast<Eigen::Index>(B));
  result.flags.assign(B, transforms::kFlagNone);

  // stage 1: per-bin MVDR beamformer output s_hat(t, k)
  Eigen::MatrixXcd s_hat(static_cast<Eigen::Index>(B), T);
  parallel_for(
      B,
      [&](std::size_t b) {
        const auto a = steering_from_doa(doa_theta, doa_phi, geometry, x.band.bins[b].k);
        const auto w = linalg::mvdr_single_output(r_interference_noise[b], a, options.loading);
        result.weights.col(static_cast<Eigen::Index>(b)) = w;
        s_hat.row(static_cast<Eigen::Index>(b)) = w.adjoint() * x.bins[b];
      },
      options.threads);

  // stage 2: least-squares ATF with frequency smoothing; all s_hat first, then
  // the windowed sums (neighboring bins couple here)
  Eigen::MatrixXcd cross(Q, static_cast<Eigen::Index>(B));  // sum_t x_q(t,k) conj(s_hat(t,k))
  Eigen::VectorXd power(static_cast<Eigen::Index>(B));      // sum_t |s_hat(t,k)|^2
  for (size_t b = 0; b < B; ++b) {
    cross.col(static_cast<Eigen::Index>(b)) =
        x.bins[b] * s_hat.row(static_cast<Eigen::Index>(b)).adjoint();
    power[static_cast<Eigen::Index>(b)] = s_hat.row(static_cast<Eigen::Index>(b)).squaredNorm();
  }
  for (size_t b = 0; b < B; ++b) {
    const auto [lo, hi] = smoothing_window(static_cast<int>(b), static_cast<int>(B),
                                           options.smoothing_bins);
    Eigen::VectorXcd num = Eigen::VectorXcd::Zero(Q);
    double den = 0.0;
    for (int j = lo; j <= hi; ++j) {
      num += cross.col(j);
      den += power[j];
    }
    if (!(den > 1e-300)) {
      result.flags[b] |= transforms::kFlagZeroBeamOutput;
      result.atf.col(static_cast<Eigen::Index>(b)).setZero();
    } else {
      result.atf.col(static_cast<Eigen::Index>(b)) = num / den;
    }
  }

  // stage 3: projection d_hat_q(t,k) = atf_q(k) s_hat(t,k)
  result.d_mic.params = x.params;
  result.d_mic.band = x.band;
  result.d_mic.channels = Q;
  result.d_mic.frames = T;
  result.d_mic.bins.resize(B);
  for (size_t b = 0; b < B; ++b)
    result.d_mic.bins[b] =
        result.atf.col(static_cast<Eigen::Index>(b)) * s_hat.row(static_cast<Eigen::Index>(b));
  return result;
}

transforms::TFTensor apply_baseline_filters(const BaselineResult& result,
                                            const transforms::TFTensor& component) {
  const size_t B = component.band.bins.size();
  if (B != static_cast<size_t>(result.weights.cols()))
    throw Error(ErrorCode::InvalidArgument, "component tensor does not match filter count");
  transforms::TFTensor out;
  out.params = component.params;
  out.band = component.band;
  out.channels = component.channels;
  out.frames = component.frames;
  out.bins.resize(B);
  for (size_t b = 0; b < B; ++b) {
    const Eigen::Index bi = static_cast<Eigen::Index>(b);
    const Eigen::RowVectorXcd s = result.weights.col(bi).adjoint() * component.bins[b];
    out.bins[b] = result.atf.col(bi) * s;
  }
  return out;
}

transforms::SHTensor baseline_to_sh(const transforms::TFTensor& d_mic,
                                    const scene::ArrayGeometry& geometry, int threads) {
  return transforms::sht_tensor(d_mic, geometry, threads);
}

}  // namespace shmvdr::baseline
