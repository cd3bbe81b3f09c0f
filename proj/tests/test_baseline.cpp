#include "baseline.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

#include "error.hpp"
#include "oracles.hpp"
#include "specfun.hpp"

using namespace shmvdr;
namespace sf = shmvdr::specfun;

namespace {

constexpr double kPi = 3.14159265358979323846;

scene::ArrayGeometry scaled_em32(double radius) {
  auto g = scene::em32_geometry();
  g.radius = radius;
  return g;
}

// free-field spherical-wave ATF from a point source to the mics
Eigen::VectorXcd greens(const scene::ArrayGeometry& g, const Eigen::Vector3d& src, double freq,
                        double c) {
  Eigen::VectorXcd out(g.count());
  for (int q = 0; q < g.count(); ++q) {
    const double d = (src - (g.center + g.radius * g.direction(q))).norm();
    const double phase = -2.0 * kPi * freq * d / c;
    out[q] = std::exp(std::complex<double>(0.0, phase)) / (4.0 * kPi * d);
  }
  return out;
}

}  // namespace

TEST_CASE("steering_from_doa: unit magnitude, center mic, brute-force phases") {
  const auto g = scaled_em32(0.042);
  const double k = sf::wavenumber(2200.0, 343.0);
  const double theta = 1.2, phi = -0.7;
  const auto a = baseline::steering_from_doa(theta, phi, g, k);
  const Eigen::Vector3d u(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                          std::cos(theta));
  for (int q = 0; q < g.count(); ++q) {
    CHECK(std::abs(std::abs(a[q]) - 1.0) < 1e-12);
    const double want_phase = k * (g.radius * g.direction(q)).dot(u);
    CHECK(std::abs(a[q] - std::exp(std::complex<double>(0.0, want_phase))) < 1e-12);
  }

  // a degenerate array at the origin sees no path difference
  scene::ArrayGeometry center;
  center.radius = 0.0;
  center.mics.assign(4, {0.3, 0.9});
  const auto a0 = baseline::steering_from_doa(theta, phi, center, k);
  for (int q = 0; q < 4; ++q) CHECK(std::abs(a0[q] - 1.0) < 1e-15);
}

TEST_CASE("smoothing_window: centered, clipped at the band edges") {
  CHECK(baseline::smoothing_window(10, 100, 9) == std::pair<int, int>{6, 14});
  CHECK(baseline::smoothing_window(0, 100, 9) == std::pair<int, int>{0, 4});    // 5 bins
  CHECK(baseline::smoothing_window(2, 100, 9) == std::pair<int, int>{0, 6});
  CHECK(baseline::smoothing_window(99, 100, 9) == std::pair<int, int>{95, 99});
  CHECK(baseline::smoothing_window(5, 100, 1) == std::pair<int, int>{5, 5});
}

TEST_CASE("baseline: anechoic noise-free single source reproduces the mics") {
  // synthetic free-field TF data on a small array so the ATF ratio is nearly
  // constant across the smoothing window
  transforms::StftParams params{16384, 16000.0};
  auto g = scaled_em32(0.004);
  g.center = Eigen::Vector3d(1.6, 4.05, 1.7);
  const Eigen::Vector3d src(4.6, 4.05, 1.7);
  const auto band = transforms::BandPlan::band(params, 300.0, 800.0, 0.042, 343.0);
  const size_t B = band.bins.size();
  const int T = 10;
  const double D = (src - g.center).norm();

  transforms::TFTensor x;
  x.params = params;
  x.band = band;
  x.channels = g.count();
  x.frames = T;
  x.bins.resize(B);
  std::vector<Eigen::MatrixXcd> r_vu(B);
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> uph(0.0, 2.0 * kPi);
  std::vector<Eigen::RowVectorXcd> s(B);
  for (size_t b = 0; b < B; ++b) {
    const auto gq = greens(g, src, band.bins[b].freq, 343.0);
    s[b].resize(T);
    for (int t = 0; t < T; ++t) s[b][t] = std::exp(std::complex<double>(0.0, uph(gen)));
    x.bins[b] = gq * s[b];
    r_vu[b] = Eigen::MatrixXcd::Identity(g.count(), g.count());
  }

  const auto [theta, phi] = scene::direction_angles(src - g.center);
  const auto result = baseline::baseline_enhance(x, r_vu, theta, phi, g);

  // interior bins (full smoothing window): projection restores the mic signals
  double worst = 0.0;
  for (size_t b = 4; b + 4 < B; ++b)
    worst = std::max(worst, (result.d_mic.bins[b] - x.bins[b]).cwiseAbs().maxCoeff() /
                                x.bins[b].cwiseAbs().maxCoeff());
  CHECK(worst < 1e-6);

  // the stage-1 output is the direct-path-aligned source signal
  for (size_t b = 4; b + 4 < B; ++b) {
    const auto w = result.weights.col(static_cast<Eigen::Index>(b));
    const Eigen::RowVectorXcd s_hat = w.adjoint() * x.bins[b];
    const std::complex<double> align =
        std::exp(std::complex<double>(0.0, -2.0 * kPi * band.bins[b].freq * D / 343.0)) /
        (4.0 * kPi * D);
    for (int t = 0; t < T; ++t)
      CHECK(std::abs(s_hat[t] - align * s[b][t]) / std::abs(align) < 1e-4);
  }
}

TEST_CASE("baseline: frequency-flat ATFs make smoothing a no-op") {
  transforms::StftParams params{2048, 16000.0};
  const auto band = transforms::BandPlan::band(params, 300.0, 3400.0, 0.042, 343.0);
  const size_t B = band.bins.size();
  // coincident mics: the steering (and with it the whole per-bin chain) is
  // frequency-flat, so the smoothed quotient averages a constant
  scene::ArrayGeometry g;
  g.radius = 0.0;
  g.mics.assign(8, {0.6, 1.4});
  const int Q = g.count(), T = 6;

  const Eigen::VectorXcd atf = oracle::random_cvec(Q, 5);
  transforms::TFTensor x;
  x.params = params;
  x.band = band;
  x.channels = Q;
  x.frames = T;
  x.bins.resize(B);
  std::vector<Eigen::MatrixXcd> r_vu(B, Eigen::MatrixXcd::Identity(Q, Q));
  std::mt19937_64 gen(23);
  std::normal_distribution<double> dist;
  for (size_t b = 0; b < B; ++b) {
    Eigen::RowVectorXcd s(T);
    for (int t = 0; t < T; ++t) s[t] = std::complex<double>(dist(gen), dist(gen));
    x.bins[b] = atf * s;
  }
  baseline::BaselineOptions wide, none;
  none.smoothing_bins = 1;
  const auto r9 = baseline::baseline_enhance(x, r_vu, 0.8, 1.9, g, wide);
  const auto r1 = baseline::baseline_enhance(x, r_vu, 0.8, 1.9, g, none);
  CHECK((r9.atf - r1.atf).cwiseAbs().maxCoeff() <= 1e-10 * r1.atf.cwiseAbs().maxCoeff());
}

TEST_CASE("baseline: stage-1 weights are distortionless, output is rank one") {
  transforms::StftParams params{2048, 16000.0};
  const auto band = transforms::BandPlan::band(params, 1000.0, 1400.0, 0.042, 343.0);
  const size_t B = band.bins.size();
  auto g = scaled_em32(0.042);
  const int Q = g.count(), T = 5;
  transforms::TFTensor x;
  x.params = params;
  x.band = band;
  x.channels = Q;
  x.frames = T;
  x.bins.resize(B);
  std::vector<Eigen::MatrixXcd> r_vu(B);
  for (size_t b = 0; b < B; ++b) {
    x.bins[b] = Eigen::MatrixXcd::Random(Q, T);
    r_vu[b] = oracle::random_psd(Q, static_cast<unsigned>(b) + 1, 100.0);
  }
  const double theta = 1.3, phi = 0.4;
  const auto result = baseline::baseline_enhance(x, r_vu, theta, phi, g);
  for (size_t b = 0; b < B; ++b) {
    const auto a = baseline::steering_from_doa(theta, phi, g, band.bins[b].k);
    CHECK(std::abs(result.weights.col(static_cast<Eigen::Index>(b)).dot(a) - 1.0) < 1e-10);
    // every column of the per-bin output is proportional to the same ATF
    const auto& m = result.d_mic.bins[b];
    const Eigen::VectorXcd ref = result.atf.col(static_cast<Eigen::Index>(b));
    for (int t = 0; t < T; ++t) {
      const Eigen::VectorXcd col = m.col(t);
      if (col.norm() == 0.0) continue;
      const std::complex<double> scale = ref.dot(col) / ref.squaredNorm();
      CHECK((col - scale * ref).norm() <= 1e-10 * col.norm());
    }
  }
}

TEST_CASE("baseline: frozen filters are linear over components") {
  transforms::StftParams params{2048, 16000.0};
  const auto band = transforms::BandPlan::band(params, 2000.0, 2500.0, 0.042, 343.0);
  const size_t B = band.bins.size();
  auto g = scaled_em32(0.042);
  const int Q = g.count(), T = 4;
  auto make = [&](unsigned seed) {
    transforms::TFTensor t;
    t.params = params;
    t.band = band;
    t.channels = Q;
    t.frames = T;
    t.bins.resize(B);
    for (size_t b = 0; b < B; ++b) {
      t.bins[b].resize(Q, T);
      for (int tt = 0; tt < T; ++tt)
        t.bins[b].col(tt) = oracle::random_cvec(Q, seed + static_cast<unsigned>(b) * 3 + tt);
    }
    return t;
  };
  const auto d = make(1), v = make(2), u = make(3);
  transforms::TFTensor x = d;
  for (size_t b = 0; b < B; ++b) x.bins[b] += v.bins[b] + u.bins[b];
  std::vector<Eigen::MatrixXcd> r_vu(B, Eigen::MatrixXcd::Identity(Q, Q));
  const auto base = baseline::baseline_enhance(x, r_vu, 0.9, 2.0, g);
  const auto rd = baseline::apply_baseline_filters(base, d);
  const auto rv = baseline::apply_baseline_filters(base, v);
  const auto ru = baseline::apply_baseline_filters(base, u);
  for (size_t b = 0; b < B; ++b) {
    const Eigen::MatrixXcd sum = rd.bins[b] + rv.bins[b] + ru.bins[b];
    CHECK((base.d_mic.bins[b] - sum).cwiseAbs().maxCoeff() <=
          1e-10 * sum.cwiseAbs().maxCoeff() + 1e-16);
  }
}

TEST_CASE("baseline: silent beam output flags the bin") {
  transforms::StftParams params{2048, 16000.0};
  const auto band = transforms::BandPlan::band(params, 1000.0, 1100.0, 0.042, 343.0);
  auto g = scaled_em32(0.042);
  transforms::TFTensor x;
  x.params = params;
  x.band = band;
  x.channels = g.count();
  x.frames = 3;
  x.bins.assign(band.bins.size(), Eigen::MatrixXcd::Zero(g.count(), 3));
  std::vector<Eigen::MatrixXcd> r_vu(band.bins.size(),
                                     Eigen::MatrixXcd::Identity(g.count(), g.count()));
  const auto result = baseline::baseline_enhance(x, r_vu, 1.0, 1.0, g);
  for (size_t b = 0; b < band.bins.size(); ++b) {
    CHECK((result.flags[b] & transforms::kFlagZeroBeamOutput) != 0);
    CHECK(result.atf.col(static_cast<Eigen::Index>(b)).norm() == 0.0);
  }
}

TEST_CASE("baseline_to_sh: matches the transforms SHT") {
  transforms::StftParams params{2048, 16000.0};
  const auto band = transforms::BandPlan::band(params, 1500.0, 1700.0, 0.042, 343.0);
  auto g = scaled_em32(0.042);
  transforms::TFTensor d;
  d.params = params;
  d.band = band;
  d.channels = g.count();
  d.frames = 2;
  d.bins.resize(band.bins.size());
  for (size_t b = 0; b < band.bins.size(); ++b)
    d.bins[b] = Eigen::MatrixXcd::Random(g.count(), 2);
  const auto sh = baseline::baseline_to_sh(d, g);
  const auto want = transforms::sht_tensor(d, g);
  REQUIRE(sh.bins.size() == want.bins.size());
  for (size_t b = 0; b < sh.bins.size(); ++b)
    CHECK((sh.bins[b] - want.bins[b]).cwiseAbs().maxCoeff() == 0.0);
}
