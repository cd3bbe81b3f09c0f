#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "scene.hpp"

namespace shmvdr::transforms {

struct StftParams {
  int frame_size = 16384;
  double sample_rate = 16000.0;

  int hop() const { return frame_size / 4; }  // 75% overlap
  int bins() const { return frame_size / 2 + 1; }
  double bin_freq(int k) const { return k * sample_rate / frame_size; }
};

// The set of STFT bins a pipeline stage operates on, with the per-bin SH
// truncation order N_k = ceil(k r_a) where applicable.
struct BandPlan {
  double f_low = 0.0;
  double f_high = 0.0;
  struct Bin {
    int index = 0;      // STFT bin index
    double freq = 0.0;  // Hz
    double k = 0.0;     // wavenumber, rad/m
    int order = -1;     // N_k; -1 when no SH processing is attached
  };
  std::vector<Bin> bins;

  static BandPlan full(const StftParams& params, double speed_of_sound);
  // telephone band by default: [300, 3400] Hz
  static BandPlan band(const StftParams& params, double f_low, double f_high,
                       double array_radius, double speed_of_sound);
  int max_order() const;
};

// per-bin flag bits shared across the pipeline
enum BinFlag : uint8_t {
  kFlagNone = 0,
  kFlagBesselGuarded = 1,     // Tikhonov guard applied near a Bessel zero
  kFlagIllConditioned = 2,    // excluded from metrics
  kFlagDegenerateRehc = 4,    // enhancer fell back to pass-through weights
  kFlagZeroBeamOutput = 8,    // baseline projection denominator underflowed
};

// Complex time-frequency data; bins[i] holds channels x frames for band bin i.
struct TFTensor {
  StftParams params;
  BandPlan band;
  int channels = 0;
  int frames = 0;
  std::vector<Eigen::MatrixXcd> bins;
};

// SH coefficients per bin; bins[i] holds L_k x frames.
struct SHTensor {
  StftParams params;
  BandPlan band;
  int frames = 0;
  std::vector<Eigen::MatrixXcd> bins;
  std::vector<uint8_t> flags;
  std::vector<double> conds;  // per-bin SHT condition numbers (diagnostics)

  void init_flags() { flags.assign(band.bins.size(), kFlagNone); }
};

// Periodic-Hann analysis; only bins listed in `plan` are kept.
TFTensor stft(const Eigen::MatrixXd& signal, const StftParams& params, const BandPlan& plan);

// Weighted overlap-add inverse; bins absent from the tensor's plan are zero.
Eigen::MatrixXd istft(const TFTensor& tensor, Eigen::Index length);

int num_frames(const StftParams& params, Eigen::Index length);

std::vector<double> hann_periodic(int n);

// Least-squares SHT at one bin: rows E[q, nm] = j_n(k r_q) Y_nm(theta_q, phi_q).
// When some active |j_n(k r_a)| < 1e-4 the normal equations get a Tikhonov
// guard of 1e-8 ||E||^2 and the bin is marked guarded; if the guarded solve is
// still worse than 1e6 in condition it is ill-conditioned.
struct ShtOperator {
  Eigen::MatrixXcd forward;  // Q x L
  Eigen::MatrixXcd encode;   // L x Q
  double cond = 0.0;
  bool guarded = false;
  bool ill = false;
};

ShtOperator make_sht_operator(const scene::ArrayGeometry& geometry, double k, int order);

// Single-frame SHT; throws IllConditioned when the guarded solve is unusable.
Eigen::VectorXcd sht(const Eigen::VectorXcd& mic_frame, const scene::ArrayGeometry& geometry,
                     double k, int order);

// Whole-tensor SHT using each bin's N_k; ill bins are zeroed and flagged.
SHTensor sht_tensor(const TFTensor& tf, const scene::ArrayGeometry& geometry, int threads = 0);

struct SpherePoint {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

// P[i, nm] = j_n(k r_i) Y_nm(theta_i, phi_i)
Eigen::MatrixXcd isht_matrix(double k, const std::vector<SpherePoint>& points, int order);

// Field reconstruction p = P c inside the sweet area (r <= sweet_radius).
Eigen::VectorXcd isht_pressure(const Eigen::VectorXcd& coeffs, double k,
                               const std::vector<SpherePoint>& points, double sweet_radius);

// Flat binary container with a JSON header, used to cache SH tensors between
// pipeline stages.
void write_sh_container(const std::string& path, const SHTensor& tensor, const std::string& kind);
SHTensor read_sh_container(const std::string& path, std::string* kind = nullptr);

}  // namespace shmvdr::transforms
