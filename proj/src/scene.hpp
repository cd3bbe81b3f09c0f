#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace shmvdr::scene {

using Eigen::Vector3d;

struct RoomSpec {
  Vector3d dims{5.0, 6.0, 4.0};
  double t60 = 0.2;
  double c = 343.0;  // speed of sound, m/s
};

struct MicDirection {
  double theta = 0.0;  // angle from +z, radians
  double phi = 0.0;    // azimuth, radians
};

struct ArrayGeometry {
  Vector3d center{0.0, 0.0, 0.0};
  double radius = 0.042;
  std::vector<MicDirection> mics;

  int count() const { return static_cast<int>(mics.size()); }
  Vector3d direction(int q) const;
  Vector3d position(int q) const { return center + radius * direction(q); }
};

struct SourceSpec {
  Vector3d position{0.0, 0.0, 0.0};
  std::string signal;  // WAV path or builtin:{speech,washer,white}
};

enum class RehcSegmentMode { Desired, WhiteNoise };

struct SceneConfig {
  RoomSpec room;
  SourceSpec desired;
  SourceSpec interference;
  ArrayGeometry array;
  double snr_db = 0.0;
  double ssnr_db = 35.0;
  uint64_t seed = 1;
  double sample_rate = 16000.0;
  double duration_s = 10.0;
  RehcSegmentMode rehc_mode = RehcSegmentMode::Desired;
  double rehc_duration_s = 2.0;  // desired-only interval recorded for ReHC estimation

  void validate() const;  // throws InvalidGeometry / Config on bad setups
};

// Microphone recordings of the three scene components; the mixture is their sum.
struct ComponentSignals {
  Eigen::MatrixXd d;  // desired source at the mics, Q x T
  Eigen::MatrixXd v;  // interference source at the mics, Q x T
  Eigen::MatrixXd u;  // sensor noise, Q x T
};

// Allen-Berkley image-source RIR, omnidirectional source and receiver (open
// array, no scattering body). Uniform wall reflection coefficients from the
// Eyring inversion of t60; t60 < 0.01 s is treated as anechoic. Fractional
// delays use an 8 ms Hann-windowed sinc.
std::vector<double> simulate_rir(const RoomSpec& room, const Vector3d& src, const Vector3d& mic,
                                 double sample_rate);

// RIRs from one source to every mic of the array; shares the image set.
std::vector<std::vector<double>> simulate_rir_bank(const RoomSpec& room, const Vector3d& src,
                                                   const ArrayGeometry& array, double sample_rate,
                                                   int threads = 0);

// RIRs from one source to an arbitrary list of receiver positions.
std::vector<std::vector<double>> simulate_rir_points(const RoomSpec& room, const Vector3d& src,
                                                     const std::vector<Vector3d>& points,
                                                     double sample_rate, int threads = 0);

// Convolves the dry signals with the simulated RIRs, scales the interference
// for the requested broadband SNR (measured on the dry signals) and adds
// per-mic white sensor noise at the requested SSNR (mean mic-level desired
// power over per-mic noise power). Deterministic given scene.seed; the
// noise_stream tag separates independent recordings under one seed.
ComponentSignals synthesize(const SceneConfig& scene, const Eigen::VectorXd& dry_desired,
                            const Eigen::VectorXd& dry_interference,
                            const std::string& noise_stream = "mix", int threads = 0);

// Same, with both RIR banks already simulated.
ComponentSignals synthesize(const SceneConfig& scene, const Eigen::VectorXd& dry_desired,
                            const Eigen::VectorXd& dry_interference,
                            const std::vector<std::vector<double>>& rirs_desired,
                            const std::vector<std::vector<double>>& rirs_interference,
                            const std::string& noise_stream = "mix", int threads = 0);

// Gain applied to the dry interference so the dry-signal power ratio is snr_db.
double interference_scale(const Eigen::VectorXd& dry_desired,
                          const Eigen::VectorXd& dry_interference, double snr_db);

// (theta, phi) of a direction vector, theta from +z.
std::pair<double, double> direction_angles(const Vector3d& v);

// 32-capsule em32 layout at radius 0.042 m.
ArrayGeometry em32_geometry();

// Geometry override: CSV rows of (theta_deg, phi_deg).
ArrayGeometry geometry_from_csv(const std::string& path, const Vector3d& center, double radius);

double schroeder_t60(const std::vector<double>& rir, double sample_rate);

}  // namespace shmvdr::scene
