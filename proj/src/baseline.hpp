#pragma once

#include <Eigen/Dense>
#include <vector>

#include "linalg.hpp"
#include "transforms.hpp"

namespace shmvdr::baseline {

// Far-field plane-wave steering vector toward (theta, phi): a_q = exp(i k u . r_q).
Eigen::VectorXcd steering_from_doa(double theta, double phi, const scene::ArrayGeometry& geometry,
                                   double k);

// Clipped smoothing window of `width` band positions centered on `pos`.
std::pair<int, int> smoothing_window(int pos, int count, int width);

struct BaselineOptions {
  int smoothing_bins = 9;
  double loading = linalg::kDefaultLoading;
  int threads = 0;
};

// Three stages: single-output TF-domain MVDR toward the known DoA, ATF
// least-squares estimate with frequency smoothing, projection back to the
// mics. Weights and ATFs are computed once from the mixture and can then be
// replayed on components (the pipeline is linear given frozen filters).
struct BaselineResult {
  transforms::TFTensor d_mic;      // estimated desired microphone signals
  Eigen::MatrixXcd weights;        // Q x B, stage-1 beamformers
  Eigen::MatrixXcd atf;            // Q x B, smoothed ATF estimates
  std::vector<uint8_t> flags;
};

BaselineResult baseline_enhance(const transforms::TFTensor& x,
                                const std::vector<Eigen::MatrixXcd>& r_interference_noise,
                                double doa_theta, double doa_phi,
                                const scene::ArrayGeometry& geometry,
                                const BaselineOptions& options = {});

// Frozen-filter pass for residual components.
transforms::TFTensor apply_baseline_filters(const BaselineResult& result,
                                            const transforms::TFTensor& component);

// SHT of the baseline output so downstream metrics are identical to the
// enhancer path.
transforms::SHTensor baseline_to_sh(const transforms::TFTensor& d_mic,
                                    const scene::ArrayGeometry& geometry, int threads = 0);

}  // namespace shmvdr::baseline
