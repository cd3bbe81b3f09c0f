#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "error.hpp"
#include "specfun.hpp"
#include "threading.hpp"

namespace shmvdr::metrics {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp_db(double x) { return std::clamp(x, -kDbClamp, kDbClamp); }

double ratio_db(double num, double den) {
  if (den <= 0.0) return kDbClamp;   // perfect (zero) residual
  if (num <= 0.0) return -kDbClamp;  // zero numerator
  return clamp_db(10.0 * std::log10(num / den));
}

}  // namespace

ObservationSet observation_points(ObservationKind kind, double sweet_radius) {
  if (!(sweet_radius > 0.0))
    throw Error(ErrorCode::InvalidArgument, "sweet radius must be positive");
  ObservationSet set;
  set.kind = kind;
  set.sweet_radius = sweet_radius;
  if (kind == ObservationKind::Sphere107) {
    const int n = 107;
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / n;
      const double phi = std::fmod(golden * i, 2.0 * kPi);
      set.points.push_back({sweet_radius, std::acos(z), phi});
      set.in_sweet.push_back(true);
    }
  } else if (kind == ObservationKind::Plane441) {
    const int n = 21;
    for (int iy = 0; iy < n; ++iy) {
      // top row first so the grid maps directly onto image rows
      const double y = sweet_radius * (1.0 - 2.0 * iy / (n - 1.0));
      for (int ix = 0; ix < n; ++ix) {
        const double x = sweet_radius * (2.0 * ix / (n - 1.0) - 1.0);
        const double r = std::hypot(x, y);
        set.points.push_back({r, kPi / 2.0, std::atan2(y, x)});
        set.in_sweet.push_back(r <= sweet_radius * (1.0 + 1e-12));
      }
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "custom observation sets are built by the caller");
  }
  return set;
}

double pointwise_error_db(std::complex<double> d, std::complex<double> d_hat) {
  const double ref = std::norm(d);
  if (ref <= 0.0) throw Error(ErrorCode::ZeroReference, "true pressure is zero at this point");
  return ratio_db(std::norm(d - d_hat), ref);
}

RegionMetrics region_metrics(const Eigen::VectorXcd& true_d, const Eigen::VectorXcd& est_d,
                             const Eigen::VectorXcd& true_v, const Eigen::VectorXcd& res_d,
                             const Eigen::VectorXcd& res_v, const Eigen::VectorXcd& res_u) {
  const auto n = true_d.size();
  if (est_d.size() != n || true_v.size() != n || res_d.size() != n || res_v.size() != n ||
      res_u.size() != n)
    throw Error(ErrorCode::InvalidArgument, "pressure vectors differ in length");
  RegionMetrics m;
  m.error_db = ratio_db((true_d - est_d).squaredNorm(), true_d.squaredNorm());
  m.sdr_db = ratio_db(true_d.squaredNorm(), (res_d - true_d).squaredNorm());
  m.nr_db = ratio_db(true_v.squaredNorm(), (res_v + res_u).squaredNorm());
  return m;
}

std::vector<int> select_frames_by_energy(const transforms::SHTensor& desired, int count) {
  std::vector<double> energy(desired.frames, 0.0);
  for (const auto& m : desired.bins)
    for (int t = 0; t < desired.frames; ++t) energy[t] += m.col(t).squaredNorm();
  std::vector<int> idx(desired.frames);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return energy[a] > energy[b]; });
  idx.resize(std::min<size_t>(idx.size(), static_cast<size_t>(count)));
  std::sort(idx.begin(), idx.end());
  return idx;
}

MetricReport evaluate(const PointPressureSet& true_d, const transforms::SHTensor& est_d,
                      const PointPressureSet& true_v, const transforms::SHTensor& res_d,
                      const transforms::SHTensor& res_v, const transforms::SHTensor& res_u,
                      const ObservationSet& obs, const std::vector<int>& frames,
                      const std::vector<uint8_t>& flags, int threads) {
  const size_t B = est_d.band.bins.size();
  for (const auto* t : {&res_d, &res_v, &res_u})
    if (t->band.bins.size() != B)
      throw Error(ErrorCode::InvalidArgument, "tensors disagree on band plan");
  if (true_d.bins.size() != B || true_v.bins.size() != B)
    throw Error(ErrorCode::InvalidArgument, "true-field pressures disagree on band plan");

  // shared angular factors: Y[i, nm] for the highest order in the plan
  const int max_order = est_d.band.max_order();
  const Eigen::MatrixXcd angular = [&] {
    Eigen::MatrixXcd y(obs.count(), specfun::sh_count(max_order));
    for (int i = 0; i < obs.count(); ++i)
      for (int n = 0; n <= max_order; ++n)
        for (int m = -n; m <= n; ++m)
          y(i, specfun::sh_flat_index({n, m})) =
              specfun::sph_harmonic(n, m, obs.points[i].theta, obs.points[i].phi);
    return y;
  }();

  MetricReport report;
  report.frames_used = frames;
  report.rows.resize(B * frames.size());
  const std::vector<int> sweet_idx = [&] {
    std::vector<int> v;
    for (int i = 0; i < obs.count(); ++i)
      if (obs.in_sweet[i]) v.push_back(i);
    return v;
  }();

  parallel_for(
      B,
      [&](std::size_t b) {
        const auto& bin = est_d.band.bins[b];
        const int L = specfun::sh_count(bin.order);
        const bool excluded =
            b < flags.size() &&
            (flags[b] & (transforms::kFlagIllConditioned | transforms::kFlagZeroBeamOutput));

        // radial scaling per point and order
        Eigen::MatrixXcd P(obs.count(), L);
        for (int i = 0; i < obs.count(); ++i) {
          for (int n = 0; n <= bin.order; ++n) {
            const double jn = specfun::sph_bessel_j(n, bin.k * obs.points[i].r);
            for (int m = -n; m <= n; ++m) {
              const int nm = specfun::sh_flat_index({n, m});
              P(i, nm) = jn * angular(i, nm);
            }
          }
        }
        Eigen::MatrixXcd Ps(sweet_idx.size(), L);
        for (size_t i = 0; i < sweet_idx.size(); ++i) Ps.row(i) = P.row(sweet_idx[i]);

        for (size_t fi = 0; fi < frames.size(); ++fi) {
          const int t = frames[fi];
          MetricRow& row = report.rows[b * frames.size() + fi];
          row.frame = t;
          row.bin = bin.index;
          row.freq = bin.freq;
          row.excluded = excluded;
          if (excluded) continue;
          Eigen::VectorXcd td(sweet_idx.size()), tv(sweet_idx.size());
          for (size_t i = 0; i < sweet_idx.size(); ++i) {
            td[static_cast<Eigen::Index>(i)] = true_d.bins[b](sweet_idx[i], fi);
            tv[static_cast<Eigen::Index>(i)] = true_v.bins[b](sweet_idx[i], fi);
          }
          row.values = region_metrics(td, Ps * est_d.bins[b].col(t), tv,
                                      Ps * res_d.bins[b].col(t), Ps * res_v.bins[b].col(t),
                                      Ps * res_u.bins[b].col(t));
        }
      },
      threads);
  report.finalize();
  return report;
}

void MetricReport::finalize() {
  bin_freq.clear();
  bin_error_db.clear();
  bin_sdr_db.clear();
  bin_nr_db.clear();
  bin_excluded.clear();
  if (rows.empty()) return;
  const size_t T = frames_used.size();
  const size_t B = rows.size() / T;
  double err_sum = 0.0, sdr_sum = 0.0, nr_sum = 0.0;
  int used = 0;
  for (size_t b = 0; b < B; ++b) {
    double e = 0.0, s = 0.0, n = 0.0;
    bool excluded = false;
    for (size_t fi = 0; fi < T; ++fi) {
      const auto& row = rows[b * T + fi];
      excluded = excluded || row.excluded;
      e += row.values.error_db;
      s += row.values.sdr_db;
      n += row.values.nr_db;
    }
    bin_freq.push_back(rows[b * T].freq);
    bin_error_db.push_back(e / T);
    bin_sdr_db.push_back(s / T);
    bin_nr_db.push_back(n / T);
    bin_excluded.push_back(excluded);
    if (!excluded) {
      err_sum += e / T;
      sdr_sum += s / T;
      nr_sum += n / T;
      ++used;
    }
  }
  if (used > 0) {
    aggregate.error_db = err_sum / used;
    aggregate.sdr_db = sdr_sum / used;
    aggregate.nr_db = nr_sum / used;
  }
}

void MetricReport::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot write CSV: " + path);
  f << "row_type,frame,bin,freq_hz,error_db,sdr_db,nr_db,excluded\r\n";
  f.setf(std::ios::fixed);
  f.precision(6);
  for (const auto& row : rows)
    f << "frame_bin," << row.frame << ',' << row.bin << ',' << row.freq << ','
      << row.values.error_db << ',' << row.values.sdr_db << ',' << row.values.nr_db << ','
      << (row.excluded ? 1 : 0) << "\r\n";
  const size_t T = frames_used.size();
  for (size_t b = 0; b < bin_freq.size(); ++b)
    f << "bin_mean,," << rows[b * T].bin << ',' << bin_freq[b] << ',' << bin_error_db[b] << ','
      << bin_sdr_db[b] << ',' << bin_nr_db[b] << ',' << (bin_excluded[b] ? 1 : 0) << "\r\n";
  f << "aggregate,,,," << aggregate.error_db << ',' << aggregate.sdr_db << ','
    << aggregate.nr_db << ",0\r\n";
  if (!f) throw Error(ErrorCode::Io, "short write to CSV: " + path);
}

}  // namespace shmvdr::metrics
