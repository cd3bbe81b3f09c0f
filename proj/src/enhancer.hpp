#pragma once

#include <Eigen/Dense>
#include <vector>

#include "linalg.hpp"
#include "transforms.hpp"

namespace shmvdr::enhancer {

// ReHC vector for one bin; h[0] == 1 exactly after normalization.
struct ReHCVector {
  Eigen::VectorXcd h;
};

// Per-bin Hermitian PSD matrices of the SH-domain components.
struct PSDSet {
  std::vector<Eigen::MatrixXcd> interference;        // R_v
  std::vector<Eigen::MatrixXcd> sensor_noise;        // R_u
  std::vector<Eigen::MatrixXcd> interference_noise;  // R_{v+u} = R_v + R_u
};

// Sample-average PSD over frames: (1/T) sum_t x(t) x(t)^H.
Eigen::MatrixXcd estimate_psd(const Eigen::MatrixXcd& frames);

// Mean per-bin STFT power of a mono signal (periodogram average).
Eigen::VectorXd mean_stft_power(const Eigen::VectorXd& mono, const transforms::StftParams& params,
                                const transforms::BandPlan& band);

// Transfer functions of simulated RIRs at the band bins: Q x num_band_bins.
Eigen::MatrixXcd rir_transfer_functions(const std::vector<std::vector<double>>& rirs,
                                        const transforms::StftParams& params,
                                        const transforms::BandPlan& band);

// Oracle interference PSD per bin: sigma_s^2(k) g(k) g(k)^H with g the SHT of
// the interference ATFs and sigma_s^2 the mean STFT power of the (scaled) dry
// interference signal. Sensor-noise PSDs come from estimate_psd on the
// simulated noise frames.
std::vector<Eigen::MatrixXcd> oracle_interference_psd(
    const std::vector<std::vector<double>>& interference_rirs, const Eigen::VectorXd& dry_scaled,
    const scene::ArrayGeometry& geometry, const transforms::StftParams& params,
    const transforms::BandPlan& band, int threads = 0);

PSDSet make_psd_set(std::vector<Eigen::MatrixXcd> interference,
                    std::vector<Eigen::MatrixXcd> sensor_noise);

// h = (R e1) / (e1^H R e1); throws ZeroReference when the order-0 reference
// power is numerically zero.
ReHCVector estimate_rehc(const Eigen::MatrixXcd& r_d_plus_u);

struct EnhanceOptions {
  double loading = linalg::kDefaultLoading;
  int threads = 0;
};

// The beamformer bank is per bin (PSDs and ReHCs are treated as stationary);
// degenerate bins fall back to pass-through weights W = I and are flagged.
struct EnhanceResult {
  transforms::SHTensor d_hat;
  std::vector<linalg::BeamformerBank> banks;
  std::vector<uint8_t> flags;          // includes flags inherited from x
  std::vector<double> rehc_gain;       // h^H R^{-1} h per bin (diagnostics)
};

EnhanceResult enhance(const transforms::SHTensor& x, const PSDSet& psd,
                      const std::vector<ReHCVector>& rehc, const EnhanceOptions& options = {});

// Applies the frozen banks to one component tensor (residual splitting).
transforms::SHTensor apply_banks(const EnhanceResult& result, const transforms::SHTensor& component);

}  // namespace shmvdr::enhancer
