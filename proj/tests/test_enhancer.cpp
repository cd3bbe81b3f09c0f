#include "enhancer.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "error.hpp"
#include "linalg.hpp"
#include "oracles.hpp"
#include "signals.hpp"

using namespace shmvdr;

namespace {

// small reverberant scene shared by the oracle-PSD and ReHC-quality tests
struct MiniSim {
  scene::SceneConfig sc;
  transforms::StftParams params{4096, 16000.0};
  transforms::BandPlan band;
  scene::ComponentSignals comps;
  Eigen::VectorXd dry_v_scaled;
  std::vector<std::vector<double>> rirs_v;
  transforms::SHTensor ds, vs;
};

const MiniSim& mini_sim() {
  static const MiniSim sim = [] {
    MiniSim s;
    s.sc.room.t60 = 0.2;
    s.sc.desired.position = {4.60, 4.05, 1.70};
    s.sc.interference.position = {1.60, 1.05, 1.20};
    s.sc.array = scene::em32_geometry();
    s.sc.array.center = {1.60, 4.05, 1.70};
    s.sc.seed = 7;
    s.sc.snr_db = 0.0;
    s.sc.ssnr_db = 35.0;
    const double dur = 4.0;
    const auto dry_d = signals::builtin_speech(16000.0, dur);
    const auto dry_v = signals::builtin_washer(16000.0, dur);
    s.comps = scene::synthesize(s.sc, dry_d, dry_v);
    s.dry_v_scaled = dry_v * scene::interference_scale(dry_d, dry_v, 0.0);
    s.rirs_v = scene::simulate_rir_bank(s.sc.room, s.sc.interference.position, s.sc.array, 16000.0);
    s.band = transforms::BandPlan::band(s.params, 300.0, 3400.0, s.sc.array.radius, s.sc.room.c);
    s.ds = transforms::sht_tensor(transforms::stft(s.comps.d, s.params, s.band), s.sc.array);
    s.vs = transforms::sht_tensor(transforms::stft(s.comps.v, s.params, s.band), s.sc.array);
    return s;
  }();
  return sim;
}

}  // namespace

TEST_CASE("estimate_psd: single frame is the exact outer product") {
  const Eigen::VectorXcd x = oracle::random_cvec(5, 3);
  Eigen::MatrixXcd frames(5, 1);
  frames.col(0) = x;
  const auto r = enhancer::estimate_psd(frames);
  CHECK((r - x * x.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(linalg::is_hermitian(r));
  CHECK(linalg::is_positive_semidefinite(r));
  CHECK_THROWS_AS(enhancer::estimate_psd(Eigen::MatrixXcd(5, 0)), Error);
}

TEST_CASE("estimate_psd: white frames converge to sigma^2 I") {
  const int L = 4, T = 10000;
  const double sigma = 0.7;
  std::mt19937_64 gen(11);
  std::normal_distribution<double> dist;
  Eigen::MatrixXcd frames(L, T);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < L; ++i)
      frames(i, t) = sigma * std::sqrt(0.5) * std::complex<double>(dist(gen), dist(gen));
  const auto r = enhancer::estimate_psd(frames);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double want = i == j ? sigma * sigma : 0.0;
      CHECK(std::abs(r(i, j) - want) < 0.05 * sigma * sigma);
    }
  CHECK(linalg::is_positive_semidefinite(r));
}

TEST_CASE("estimate_rehc: exact on rank-1 PSD, reference entry pinned to 1") {
  Eigen::VectorXcd d = oracle::random_cvec(9, 21);
  const Eigen::MatrixXcd r = d * d.adjoint();
  const auto rehc = enhancer::estimate_rehc(r);
  CHECK(rehc.h[0] == std::complex<double>(1.0, 0.0));
  const Eigen::VectorXcd want = d / d[0];
  CHECK((rehc.h - want).norm() / want.norm() < 1e-14);

  // noisy PSD still yields h[0] == 1 exactly
  const auto rehc2 = enhancer::estimate_rehc(r + 0.1 * oracle::random_psd(9, 5));
  CHECK(rehc2.h[0] == std::complex<double>(1.0, 0.0));

  Eigen::MatrixXcd zero_ref = oracle::random_psd(4, 9);
  zero_ref.row(0).setZero();
  zero_ref.col(0).setZero();
  CHECK_THROWS_AS(enhancer::estimate_rehc(zero_ref), Error);
}

TEST_CASE("enhance: pure rank-1 desired field passes through every band bin") {
  const auto& sim = mini_sim();
  const size_t B = sim.band.bins.size();
  std::mt19937_64 gen(31);
  std::normal_distribution<double> dist;
  const int T = 6;

  transforms::SHTensor x;
  x.params = sim.params;
  x.band = sim.band;
  x.frames = T;
  x.bins.resize(B);
  x.init_flags();
  std::vector<enhancer::ReHCVector> rehc(B);
  enhancer::PSDSet psd;
  psd.interference.resize(B);
  psd.sensor_noise.resize(B);
  for (size_t b = 0; b < B; ++b) {
    const int L = (sim.band.bins[b].order + 1) * (sim.band.bins[b].order + 1);
    Eigen::VectorXcd h = oracle::random_cvec(L, static_cast<unsigned>(b) + 1);
    h /= h[0];
    rehc[b].h = h;
    psd.interference[b] = oracle::random_psd(L, static_cast<unsigned>(b) + 7, 100.0);
    psd.sensor_noise[b] = 0.01 * Eigen::MatrixXcd::Identity(L, L);
    x.bins[b].resize(L, T);
    for (int t = 0; t < T; ++t)
      x.bins[b].col(t) = h * std::complex<double>(dist(gen), dist(gen));
  }
  psd.interference_noise.resize(B);
  for (size_t b = 0; b < B; ++b)
    psd.interference_noise[b] = psd.interference[b] + psd.sensor_noise[b];

  const auto result = enhancer::enhance(x, psd, rehc);
  for (size_t b = 0; b < B; ++b) {
    CHECK(result.flags[b] == transforms::kFlagNone);
    CHECK((result.d_hat.bins[b] - x.bins[b]).cwiseAbs().maxCoeff() <=
          1e-8 * x.bins[b].cwiseAbs().maxCoeff());
  }
}

TEST_CASE("enhance: interference orthogonal to the constraint is nulled") {
  const int L = 9;
  Eigen::VectorXcd h = oracle::random_cvec(L, 41);
  h /= h[0];
  Eigen::VectorXcd v = oracle::random_cvec(L, 42);
  v -= h * (h.dot(v) / h.squaredNorm());  // h^H v = 0
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const Eigen::MatrixXcd r =
        v * v.adjoint() + eps * Eigen::MatrixXcd::Identity(L, L);
    const auto bank = linalg::mvdr_multi_output(r, h, 0.0);
    const Eigen::VectorXcd out = bank.W.adjoint() * v;
    CHECK(out.norm() / v.norm() < 1e-10);
  }
}

TEST_CASE("enhance: linear in the input tensor") {
  const auto& sim = mini_sim();
  const size_t B = sim.band.bins.size();
  const int T = 4;
  auto make_tensor = [&](unsigned seed) {
    transforms::SHTensor t;
    t.params = sim.params;
    t.band = sim.band;
    t.frames = T;
    t.bins.resize(B);
    t.init_flags();
    for (size_t b = 0; b < B; ++b) {
      const int L = (sim.band.bins[b].order + 1) * (sim.band.bins[b].order + 1);
      t.bins[b].resize(L, T);
      for (int tt = 0; tt < T; ++tt)
        t.bins[b].col(tt) = oracle::random_cvec(L, seed + static_cast<unsigned>(b) * 7 + tt);
    }
    return t;
  };
  const auto d = make_tensor(100), v = make_tensor(200), u = make_tensor(300);
  transforms::SHTensor x = d;
  for (size_t b = 0; b < B; ++b) x.bins[b] += v.bins[b] + u.bins[b];

  std::vector<enhancer::ReHCVector> rehc(B);
  enhancer::PSDSet psd;
  psd.interference.resize(B);
  psd.sensor_noise.resize(B);
  for (size_t b = 0; b < B; ++b) {
    const int L = (sim.band.bins[b].order + 1) * (sim.band.bins[b].order + 1);
    rehc[b].h = oracle::random_cvec(L, static_cast<unsigned>(b) + 11);
    rehc[b].h /= rehc[b].h[0];
    psd.interference[b] = oracle::random_psd(L, static_cast<unsigned>(b) + 5, 50.0);
    psd.sensor_noise[b] = 0.02 * Eigen::MatrixXcd::Identity(L, L);
  }
  psd.interference_noise.resize(B);
  for (size_t b = 0; b < B; ++b)
    psd.interference_noise[b] = psd.interference[b] + psd.sensor_noise[b];

  const auto enh = enhancer::enhance(x, psd, rehc);
  const auto rd = enhancer::apply_banks(enh, d);
  const auto rv = enhancer::apply_banks(enh, v);
  const auto ru = enhancer::apply_banks(enh, u);
  for (size_t b = 0; b < B; ++b) {
    const Eigen::MatrixXcd sum = rd.bins[b] + rv.bins[b] + ru.bins[b];
    CHECK((enh.d_hat.bins[b] - sum).cwiseAbs().maxCoeff() <=
          1e-10 * sum.cwiseAbs().maxCoeff() + 1e-14);
  }
}

TEST_CASE("enhance: output interference+noise power never beats the pass-through point") {
  const int L = 16;
  const Eigen::MatrixXcd r = oracle::random_psd(L, 61, 1e3);
  Eigen::VectorXcd h = oracle::random_cvec(L, 62);
  h /= h[0];
  const auto bank = linalg::mvdr_multi_output(r, h, 1e-9);
  const double r00 = std::real(r(0, 0));
  for (int c = 0; c < L; ++c) {
    const double out = std::real(bank.W.col(c).dot(r * bank.W.col(c)));
    CHECK(out <= std::norm(h[c]) * r00 + 1e-10);
  }
}

TEST_CASE("enhance: degenerate-flagged bins pass through unchanged") {
  const auto& sim = mini_sim();
  transforms::SHTensor x;
  x.params = sim.params;
  x.band = sim.band;
  x.frames = 2;
  x.bins.resize(sim.band.bins.size());
  x.init_flags();
  std::vector<enhancer::ReHCVector> rehc(sim.band.bins.size());
  enhancer::PSDSet psd;
  const size_t B = sim.band.bins.size();
  psd.interference.resize(B);
  psd.sensor_noise.resize(B);
  for (size_t b = 0; b < B; ++b) {
    const int L = (sim.band.bins[b].order + 1) * (sim.band.bins[b].order + 1);
    x.bins[b] = Eigen::MatrixXcd::Random(L, 2);
    rehc[b].h = Eigen::VectorXcd::Zero(L);
    rehc[b].h[0] = 1.0;
    psd.interference[b] = Eigen::MatrixXcd::Zero(L, L);
    psd.sensor_noise[b] = Eigen::MatrixXcd::Identity(L, L);
  }
  psd.interference_noise = psd.sensor_noise;
  x.flags[0] |= transforms::kFlagDegenerateRehc;
  const auto result = enhancer::enhance(x, psd, rehc);
  CHECK((result.banks[0].W -
         Eigen::MatrixXcd::Identity(x.bins[0].rows(), x.bins[0].rows()))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((result.d_hat.bins[0] - x.bins[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((result.flags[0] & transforms::kFlagDegenerateRehc) != 0);
}

TEST_CASE("oracle_interference_psd: rank-1 structure and energy consistency") {
  const auto& sim = mini_sim();
  const auto rv = enhancer::oracle_interference_psd(sim.rirs_v, sim.dry_v_scaled, sim.sc.array,
                                                    sim.params, sim.band);
  REQUIRE(rv.size() == sim.band.bins.size());

  double trace_total = 0.0, measured_total = 0.0;
  for (size_t b = 0; b < rv.size(); ++b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rv[b], Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    CHECK(ev.minCoeff() >= -1e-10 * std::max(1e-300, ev.maxCoeff()));
    if (ev.size() > 1) CHECK(ev(ev.size() - 2) <= 1e-10 * std::max(1e-300, ev.maxCoeff()));
    trace_total += rv[b].trace().real();
    measured_total += sim.vs.bins[b].squaredNorm() / sim.vs.frames;
  }
  CHECK(trace_total == doctest::Approx(measured_total).epsilon(0.10));

  // zero interference power gives zero matrices
  const auto rz = enhancer::oracle_interference_psd(
      sim.rirs_v, Eigen::VectorXd::Zero(sim.dry_v_scaled.size()), sim.sc.array, sim.params,
      sim.band);
  for (const auto& m : rz) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("estimate_rehc: simulated desired-only segment tracks the true ReHC") {
  const auto& sim = mini_sim();
  // desired-only recording with sensor noise at 35 dB SSNR
  const Eigen::VectorXd silent;
  auto sc = sim.sc;
  const auto dry_d = signals::builtin_speech(16000.0, 4.0);
  const auto seg = scene::synthesize(sc, dry_d, silent, "rehc-test");
  const Eigen::MatrixXd mix = seg.d + seg.u;
  const auto xe = transforms::sht_tensor(transforms::stft(mix, sim.params, sim.band), sc.array);

  int good = 0, total = 0;
  for (size_t b = 0; b < sim.band.bins.size(); ++b) {
    const auto h_true = enhancer::estimate_rehc(enhancer::estimate_psd(sim.ds.bins[b]));
    const auto h_est = enhancer::estimate_rehc(enhancer::estimate_psd(xe.bins[b]));
    const double rel = (h_est.h - h_true.h).norm() / h_true.h.norm();
    ++total;
    if (20.0 * std::log10(rel) < -20.0) ++good;  // amplitude ratio below -20 dB
  }
  // most of the band: the estimate is within -20 dB of the truth
  CHECK(static_cast<double>(good) / total > 0.5);
}
