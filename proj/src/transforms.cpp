#include "transforms.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "error.hpp"
#include "fft.hpp"
#include "specfun.hpp"
#include "threading.hpp"

namespace shmvdr::transforms {

using json = nlohmann::json;
namespace sf = shmvdr::specfun;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBesselGuardThreshold = 1e-4;
constexpr double kIllConditionLimit = 1e6;

}  // namespace

std::vector<double> hann_periodic(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
  return w;
}

int num_frames(const StftParams& params, Eigen::Index length) {
  if (length < params.frame_size) return 0;
  return static_cast<int>((length - params.frame_size) / params.hop()) + 1;
}

BandPlan BandPlan::full(const StftParams& params, double speed_of_sound) {
  BandPlan plan;
  plan.f_low = 0.0;
  plan.f_high = params.sample_rate / 2.0;
  plan.bins.reserve(params.bins());
  for (int k = 0; k < params.bins(); ++k)
    plan.bins.push_back({k, params.bin_freq(k), sf::wavenumber(params.bin_freq(k), speed_of_sound), -1});
  return plan;
}

BandPlan BandPlan::band(const StftParams& params, double f_low, double f_high,
                        double array_radius, double speed_of_sound) {
  if (!(f_low > 0.0) || !(f_high > f_low) || f_high > params.sample_rate / 2.0)
    throw Error(ErrorCode::Config, "band must satisfy 0 < f_low < f_high <= Nyquist");
  BandPlan plan;
  plan.f_low = f_low;
  plan.f_high = f_high;
  for (int k = 0; k < params.bins(); ++k) {
    const double f = params.bin_freq(k);
    if (f < f_low || f > f_high) continue;
    const double wn = sf::wavenumber(f, speed_of_sound);
    plan.bins.push_back({k, f, wn, sf::max_order(wn, array_radius)});
  }
  if (plan.bins.empty()) throw Error(ErrorCode::Config, "band contains no STFT bins");
  return plan;
}

int BandPlan::max_order() const {
  int n = 0;
  for (const auto& b : bins) n = std::max(n, b.order);
  return n;
}

TFTensor stft(const Eigen::MatrixXd& signal, const StftParams& params, const BandPlan& plan) {
  const Eigen::Index T = signal.cols();
  const int Q = static_cast<int>(signal.rows());
  const int frames = num_frames(params, T);
  if (frames == 0)
    throw Error(ErrorCode::SignalTooShort, "signal shorter than one STFT frame");

  TFTensor out;
  out.params = params;
  out.band = plan;
  out.channels = Q;
  out.frames = frames;
  out.bins.assign(plan.bins.size(), Eigen::MatrixXcd::Zero(Q, frames));

  const auto window = hann_periodic(params.frame_size);
  RealFft fft(params.frame_size);
  std::vector<double> buf(params.frame_size);
  std::vector<std::complex<double>> spec(fft.bins());
  for (int q = 0; q < Q; ++q) {
    for (int m = 0; m < frames; ++m) {
      const Eigen::Index start = static_cast<Eigen::Index>(m) * params.hop();
      for (int i = 0; i < params.frame_size; ++i) buf[i] = signal(q, start + i) * window[i];
      fft.forward(buf.data(), spec.data());
      for (size_t b = 0; b < plan.bins.size(); ++b)
        out.bins[b](q, m) = spec[plan.bins[b].index];
    }
  }
  return out;
}

Eigen::MatrixXd istft(const TFTensor& tensor, Eigen::Index length) {
  const auto& params = tensor.params;
  const int Q = tensor.channels;
  const int frames = tensor.frames;
  const auto window = hann_periodic(params.frame_size);

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(Q, length);
  Eigen::VectorXd norm = Eigen::VectorXd::Zero(length);
  RealFft fft(params.frame_size);
  std::vector<std::complex<double>> spec(fft.bins());
  std::vector<double> buf(params.frame_size);

  for (int m = 0; m < frames; ++m) {
    const Eigen::Index start = static_cast<Eigen::Index>(m) * params.hop();
    for (int i = 0; i < params.frame_size && start + i < length; ++i)
      norm[start + i] += window[i] * window[i];
  }
  for (int q = 0; q < Q; ++q) {
    for (int m = 0; m < frames; ++m) {
      std::fill(spec.begin(), spec.end(), std::complex<double>(0.0, 0.0));
      for (size_t b = 0; b < tensor.band.bins.size(); ++b)
        spec[tensor.band.bins[b].index] = tensor.bins[b](q, m);
      fft.inverse(spec.data(), buf.data());
      const Eigen::Index start = static_cast<Eigen::Index>(m) * params.hop();
      for (int i = 0; i < params.frame_size && start + i < length; ++i)
        out(q, start + i) += buf[i] * window[i];
    }
  }
  for (Eigen::Index i = 0; i < length; ++i)
    if (norm[i] > 1e-12) out.col(i) /= norm[i];
  return out;
}

ShtOperator make_sht_operator(const scene::ArrayGeometry& geometry, double k, int order) {
  const int Q = geometry.count();
  const int L = sf::sh_count(order);
  if (L > Q)
    throw Error(ErrorCode::InvalidArgument, "SHT needs (N+1)^2 <= Q microphones");
  if (!(k > 0.0)) throw Error(ErrorCode::InvalidArgument, "SHT needs k > 0");

  ShtOperator op;
  op.forward.resize(Q, L);
  std::vector<double> radial(order + 1);
  double min_active_j = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= order; ++n) {
    radial[n] = sf::sph_bessel_j(n, k * geometry.radius);
    min_active_j = std::min(min_active_j, std::abs(radial[n]));
  }
  for (int q = 0; q < Q; ++q) {
    const auto& mic = geometry.mics[q];
    for (int n = 0; n <= order; ++n)
      for (int m = -n; m <= n; ++m)
        op.forward(q, sf::sh_flat_index({n, m})) =
            radial[n] * sf::sph_harmonic(n, m, mic.theta, mic.phi);
  }

  Eigen::MatrixXcd normal = op.forward.adjoint() * op.forward;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(normal, Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().maxCoeff();
  double lambda = 0.0;
  if (min_active_j < kBesselGuardThreshold) {
    op.guarded = true;
    lambda = 1e-8 * emax;  // ||E||^2 = largest eigenvalue of E^H E
    normal.diagonal().array() += lambda;
  }
  const double emin = es.eigenvalues().minCoeff() + lambda;
  op.cond = emin > 0.0 ? std::sqrt((emax + lambda) / emin) : std::numeric_limits<double>::infinity();
  op.ill = !(op.cond <= kIllConditionLimit);
  if (!op.ill) op.encode = normal.ldlt().solve(op.forward.adjoint());
  return op;
}

Eigen::VectorXcd sht(const Eigen::VectorXcd& mic_frame, const scene::ArrayGeometry& geometry,
                     double k, int order) {
  if (mic_frame.size() != geometry.count())
    throw Error(ErrorCode::InvalidArgument, "mic frame size does not match geometry");
  const ShtOperator op = make_sht_operator(geometry, k, order);
  if (op.ill)
    throw Error(ErrorCode::IllConditioned, "guarded SHT condition number exceeds 1e6 at this bin");
  return op.encode * mic_frame;
}

SHTensor sht_tensor(const TFTensor& tf, const scene::ArrayGeometry& geometry, int threads) {
  SHTensor out;
  out.params = tf.params;
  out.band = tf.band;
  out.frames = tf.frames;
  out.bins.resize(tf.band.bins.size());
  out.init_flags();
  out.conds.assign(tf.band.bins.size(), 0.0);
  parallel_for(
      tf.band.bins.size(),
      [&](std::size_t b) {
        const auto& bin = tf.band.bins[b];
        if (bin.order < 0)
          throw Error(ErrorCode::InvalidArgument, "band plan lacks SH orders; use BandPlan::band");
        const ShtOperator op = make_sht_operator(geometry, bin.k, bin.order);
        out.conds[b] = op.cond;
        if (op.guarded) out.flags[b] |= kFlagBesselGuarded;
        if (op.ill) {
          out.flags[b] |= kFlagIllConditioned;
          out.bins[b] = Eigen::MatrixXcd::Zero(sf::sh_count(bin.order), tf.frames);
          return;
        }
        out.bins[b] = op.encode * tf.bins[b];
      },
      threads);
  return out;
}

Eigen::MatrixXcd isht_matrix(double k, const std::vector<SpherePoint>& points, int order) {
  const int L = sf::sh_count(order);
  Eigen::MatrixXcd P(points.size(), L);
  for (size_t i = 0; i < points.size(); ++i) {
    for (int n = 0; n <= order; ++n) {
      const double jn = sf::sph_bessel_j(n, k * points[i].r);
      for (int m = -n; m <= n; ++m)
        P(static_cast<Eigen::Index>(i), sf::sh_flat_index({n, m})) =
            jn * sf::sph_harmonic(n, m, points[i].theta, points[i].phi);
    }
  }
  return P;
}

Eigen::VectorXcd isht_pressure(const Eigen::VectorXcd& coeffs, double k,
                               const std::vector<SpherePoint>& points, double sweet_radius) {
  for (const auto& p : points)
    if (p.r > sweet_radius * (1.0 + 1e-9))
      throw Error(ErrorCode::OutsideSweetArea, "field point outside the sweet area");
  const int order = static_cast<int>(std::lround(std::sqrt(static_cast<double>(coeffs.size())))) - 1;
  if (sf::sh_count(order) != coeffs.size())
    throw Error(ErrorCode::InvalidArgument, "coefficient count is not a square");
  return isht_matrix(k, points, order) * coeffs;
}

void write_sh_container(const std::string& path, const SHTensor& tensor, const std::string& kind) {
  json header;
  header["kind"] = kind;
  header["frame_size"] = tensor.params.frame_size;
  header["hop"] = tensor.params.hop();
  header["sample_rate"] = tensor.params.sample_rate;
  header["frames"] = tensor.frames;
  header["f_low"] = tensor.band.f_low;
  header["f_high"] = tensor.band.f_high;
  header["ordering"] = "acn-complex-condon-shortley";
  json bins = json::array();
  for (size_t b = 0; b < tensor.band.bins.size(); ++b) {
    const auto& bin = tensor.band.bins[b];
    bins.push_back({{"bin", bin.index},
                    {"freq", bin.freq},
                    {"k", bin.k},
                    {"order", bin.order},
                    {"flag", tensor.flags.empty() ? 0 : tensor.flags[b]}});
  }
  header["bins"] = std::move(bins);
  const std::string head = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write container: " + path);
  f.write("SHC1", 4);
  const uint64_t head_len = head.size();
  f.write(reinterpret_cast<const char*>(&head_len), 8);
  f.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const auto& m : tensor.bins)
    f.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(std::complex<double>) * m.size()));
  if (!f) throw Error(ErrorCode::Io, "short write to container: " + path);
}

SHTensor read_sh_container(const std::string& path, std::string* kind) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open container: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::string(magic, 4) != "SHC1")
    throw Error(ErrorCode::Io, "not an SH container: " + path);
  uint64_t head_len = 0;
  f.read(reinterpret_cast<char*>(&head_len), 8);
  std::string head(head_len, '\0');
  f.read(head.data(), static_cast<std::streamsize>(head_len));
  if (!f) throw Error(ErrorCode::Io, "truncated container header: " + path);
  json header = json::parse(head, nullptr, false);
  if (header.is_discarded()) throw Error(ErrorCode::Io, "corrupt container header: " + path);

  SHTensor t;
  t.params.frame_size = header.at("frame_size").get<int>();
  t.params.sample_rate = header.at("sample_rate").get<double>();
  t.frames = header.at("frames").get<int>();
  t.band.f_low = header.at("f_low").get<double>();
  t.band.f_high = header.at("f_high").get<double>();
  for (const auto& b : header.at("bins")) {
    t.band.bins.push_back({b.at("bin").get<int>(), b.at("freq").get<double>(),
                           b.at("k").get<double>(), b.at("order").get<int>()});
    t.flags.push_back(b.value("flag", 0));
  }
  if (kind) *kind = header.value("kind", "");
  t.bins.resize(t.band.bins.size());
  for (size_t b = 0; b < t.band.bins.size(); ++b) {
    const int L = sf::sh_count(t.band.bins[b].order);
    t.bins[b].resize(L, t.frames);
    f.read(reinterpret_cast<char*>(t.bins[b].data()),
           static_cast<std::streamsize>(sizeof(std::complex<double>) * t.bins[b].size()));
  }
  if (!f) throw Error(ErrorCode::Io, "truncated container data: " + path);
  return t;
}

}  // namespace shmvdr::transforms
