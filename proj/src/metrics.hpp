#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "transforms.hpp"

namespace shmvdr::metrics {

inline constexpr double kDbClamp = 120.0;

enum class ObservationKind { Sphere107, Plane441, Custom };

struct ObservationSet {
  ObservationKind kind = ObservationKind::Custom;
  double sweet_radius = 0.042;
  std::vector<transforms::SpherePoint> points;
  std::vector<bool> in_sweet;  // averaged metrics use only these points

  int count() const { return static_cast<int>(points.size()); }
};

// sphere107: 107-point Fibonacci spiral on the sweet-area surface.
// plane441: 21 x 21 grid spanning the sweet-area square on the x-y plane;
// corner points outside the inscribed disc are kept for maps but flagged.
ObservationSet observation_points(ObservationKind kind, double sweet_radius);

// Eq.-style normalized square error at one point, clamped at -120 dB.
// Throws ZeroReference for |d| = 0 (point excluded upstream).
double pointwise_error_db(std::complex<double> d, std::complex<double> d_hat);

struct RegionMetrics {
  double error_db = 0.0;
  double sdr_db = 0.0;
  double nr_db = 0.0;
};

// Region-averaged Error/SDR/NR over observation-point pressure vectors:
//   Error = 10 log10 ||d - d_est||^2 / ||d||^2
//   SDR   = 10 log10 ||d||^2 / ||d_res - d||^2
//   NR    = 10 log10 ||v||^2 / ||v_res + u_res||^2
RegionMetrics region_metrics(const Eigen::VectorXcd& true_d, const Eigen::VectorXcd& est_d,
                             const Eigen::VectorXcd& true_v, const Eigen::VectorXcd& res_d,
                             const Eigen::VectorXcd& res_v, const Eigen::VectorXcd& res_u);

struct MetricRow {
  int frame = 0;  // frame index in the tensor
  int bin = 0;    // STFT bin index
  double freq = 0.0;
  RegionMetrics values;
  bool excluded = false;
};

struct MetricReport {
  std::vector<MetricRow> rows;
  std::vector<int> frames_used;
  // per-bin dB means across the selected frames (Fig.-3-style curves)
  std::vector<double> bin_freq;
  std::vector<double> bin_error_db, bin_sdr_db, bin_nr_db;
  std::vector<bool> bin_excluded;
  // dB means across non-excluded bins
  RegionMetrics aggregate;

  void finalize();  // fills the per-bin curves and the aggregate from rows
  void write_csv(const std::string& path) const;
};

// Simulated reference pressures at the observation points; bins[b] holds one
// column per selected metric frame (points x frames.size()).
struct PointPressureSet {
  std::vector<Eigen::MatrixXcd> bins;
};

// Evaluates per (frame, bin): the estimated/residual tensors are reconstructed
// at the observation points via the ISHT while the true desired/interference
// pressures come from the simulated fields, so truncation and encoding errors
// count against the methods. Excluded bins carry any of the exclusion flags.
MetricReport evaluate(const PointPressureSet& true_d, const transforms::SHTensor& est_d,
                      const PointPressureSet& true_v, const transforms::SHTensor& res_d,
                      const transforms::SHTensor& res_v, const transforms::SHTensor& res_u,
                      const ObservationSet& obs, const std::vector<int>& frames,
                      const std::vector<uint8_t>& flags, int threads = 0);

// Frames ranked by desired SH energy (descending), ties by index.
std::vector<int> select_frames_by_energy(const transforms::SHTensor& desired, int count);

}  // namespace shmvdr::metrics
