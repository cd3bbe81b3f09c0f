#include "enhancer.hpp"

#include "error.hpp"
#include "fft.hpp"
#include "specfun.hpp"
#include "threading.hpp"

namespace shmvdr::enhancer {

Eigen::MatrixXcd estimate_psd(const Eigen::MatrixXcd& frames) {
  if (frames.cols() == 0) throw Error(ErrorCode::NoFrames, "PSD estimate needs at least one frame");
  Eigen::MatrixXcd r = frames * frames.adjoint() / static_cast<double>(frames.cols());
  // enforce exact Hermitian symmetry against accumulation roundoff
  r = 0.5 * (r + r.adjoint()).eval();
  return r;
}

Eigen::MatrixXcd rir_transfer_functions(const std::vector<std::vector<double>>& rirs,
                                        const transforms::StftParams& params,
                                        const transforms::BandPlan& band) {
  const int Q = static_cast<int>(rirs.size());
  Eigen::MatrixXcd g(Q, band.bins.size());
  RealFft fft(params.frame_size);
  std::vector<double> buf(params.frame_size);
  std::vector<std::complex<double>> spec(fft.bins());
  for (int q = 0; q < Q; ++q) {
    std::fill(buf.begin(), buf.end(), 0.0);
    const size_t n = std::min<size_t>(rirs[q].size(), buf.size());
    std::copy(rirs[q].begin(), rirs[q].begin() + n, buf.begin());
    fft.forward(buf.data(), spec.data());
    for (size_t b = 0; b < band.bins.size(); ++b) g(q, b) = spec[band.bins[b].index];
  }
  return g;
}

Eigen::VectorXd mean_stft_power(const Eigen::VectorXd& mono, const transforms::StftParams& params,
                                const transforms::BandPlan& band) {
  Eigen::VectorXd power = Eigen::VectorXd::Zero(band.bins.size());
  if (mono.size() < params.frame_size || mono.squaredNorm() == 0.0) return power;
  Eigen::MatrixXd m(1, mono.size());
  m.row(0) = mono;
  const transforms::TFTensor s = transforms::stft(m, params, band);
  for (size_t b = 0; b < band.bins.size(); ++b)
    power[b] = s.bins[b].squaredNorm() / static_cast<double>(s.frames);
  return power;
}

std::vector<Eigen::MatrixXcd> oracle_interference_psd(
    const std::vector<std::vector<double>>& interference_rirs, const Eigen::VectorXd& dry_scaled,
    const scene::ArrayGeometry& geometry, const transforms::StftParams& params,
    const transforms::BandPlan& band, int threads) {
  const Eigen::MatrixXcd g = rir_transfer_functions(interference_rirs, params, band);
  const Eigen::VectorXd sigma2 = mean_stft_power(dry_scaled, params, band);

  std::vector<Eigen::MatrixXcd> out(band.bins.size());
  parallel_for(
      band.bins.size(),
      [&](std::size_t b) {
        const auto& bin = band.bins[b];
        const auto op = transforms::make_sht_operator(geometry, bin.k, bin.order);
        const int L = shmvdr::specfun::sh_count(bin.order);
        if (op.ill || sigma2[b] == 0.0) {
          out[b] = Eigen::MatrixXcd::Zero(L, L);
          return;
        }
        const Eigen::VectorXcd g_sh = op.encode * g.col(static_cast<Eigen::Index>(b));
        out[b] = sigma2[b] * (g_sh * g_sh.adjoint());
      },
      threads);
  return out;
}

PSDSet make_psd_set(std::vector<Eigen::MatrixXcd> interference,
                    std::vector<Eigen::MatrixXcd> sensor_noise) {
  if (interference.size() != sensor_noise.size())
    throw Error(ErrorCode::InvalidArgument, "PSD lists differ in bin count");
  PSDSet set;
  set.interference = std::move(interference);
  set.sensor_noise = std::move(sensor_noise);
  set.interference_noise.reserve(set.interference.size());
  for (size_t b = 0; b < set.interference.size(); ++b)
    set.interference_noise.push_back(set.interference[b] + set.sensor_noise[b]);
  return set;
}

ReHCVector estimate_rehc(const Eigen::MatrixXcd& r) {
  if (r.rows() != r.cols() || r.rows() == 0)
    throw Error(ErrorCode::InvalidArgument, "PSD must be square");
  const double ref = std::real(r(0, 0));
  const double tr = std::real(r.trace());
  if (!(ref > 1e-14 * tr) || !(ref > 0.0))
    throw Error(ErrorCode::ZeroReference, "desired field has no order-0 energy at this bin");
  ReHCVector out;
  out.h = r.col(0) / r(0, 0);
  out.h[0] = 1.0;  // exact by construction
  return out;
}

EnhanceResult enhance(const transforms::SHTensor& x, const PSDSet& psd,
                      const std::vector<ReHCVector>& rehc, const EnhanceOptions& options) {
  const size_t B = x.band.bins.size();
  if (psd.interference_noise.size() != B || rehc.size() != B)
    throw Error(ErrorCode::InvalidArgument, "PSD/ReHC bin count does not match tensor");

  EnhanceResult result;
  result.d_hat.params = x.params;
  result.d_hat.band = x.band;
  result.d_hat.frames = x.frames;
  result.d_hat.bins.resize(B);
  result.banks.resize(B);
  result.flags = x.flags.empty() ? std::vector<uint8_t>(B, transforms::kFlagNone) : x.flags;
  result.rehc_gain.assign(B, 0.0);

  parallel_for(
      B,
      [&](std::size_t b) {
        const int L = static_cast<int>(x.bins[b].rows());
        if (result.flags[b] & transforms::kFlagIllConditioned) {
          result.banks[b].W = Eigen::MatrixXcd::Identity(L, L);
          result.d_hat.bins[b] = Eigen::MatrixXcd::Zero(L, x.frames);
          return;
        }
        if (result.flags[b] & transforms::kFlagDegenerateRehc) {
          // unusable ReHC estimate at this bin: pass-through weights
          result.banks[b].W = Eigen::MatrixXcd::Identity(L, L);
          result.d_hat.bins[b] = x.bins[b];
          return;
        }
        try {
          result.banks[b] = linalg::mvdr_multi_output(psd.interference_noise[b], rehc[b].h,
                                                      options.loading);
          const Eigen::VectorXcd rih =
              linalg::loaded_hermitian_solve(psd.interference_noise[b], rehc[b].h, options.loading);
          result.rehc_gain[b] = std::real(rehc[b].h.dot(rih));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::DegenerateConstraint && e.code() != ErrorCode::ZeroReference)
            throw;
          result.banks[b].W = Eigen::MatrixXcd::Identity(L, L);
          result.flags[b] |= transforms::kFlagDegenerateRehc;
        }
        result.d_hat.bins[b] = result.banks[b].W.adjoint() * x.bins[b];
      },
      options.threads);
  result.d_hat.flags = result.flags;
  return result;
}

transforms::SHTensor apply_banks(const EnhanceResult& result, const transforms::SHTensor& component) {
  if (component.band.bins.size() != result.banks.size())
    throw Error(ErrorCode::InvalidArgument, "component tensor does not match bank count");
  transforms::SHTensor out;
  out.params = component.params;
  out.band = component.band;
  out.frames = component.frames;
  out.flags = result.flags;
  out.bins.resize(component.bins.size());
  for (size_t b = 0; b < component.bins.size(); ++b)
    out.bins[b] = result.banks[b].W.adjoint() * component.bins[b];
  return out;
}

}  // namespace shmvdr::enhancer
