#include "scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "fft.hpp"
#include "rng.hpp"
#include "threading.hpp"

namespace shmvdr::scene {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kSincHalfWidth = 64;  // +-4 ms at 16 kHz

// mh acoustics em32 Eigenmike capsule directions (theta from +z, phi azimuth,
// degrees), as published in the em32 release notes / user manual.
constexpr double kEm32Angles[32][2] = {
    {69, 0},    {90, 32},   {111, 0},   {90, 328},  {32, 0},    {55, 45},   {90, 69},
    {125, 45},  {148, 0},   {125, 315}, {90, 291},  {55, 315},  {21, 91},   {58, 90},
    {121, 90},  {159, 89},  {69, 180},  {90, 212},  {111, 180}, {90, 148},  {32, 180},
    {55, 225},  {90, 249},  {125, 225}, {148, 180}, {125, 135}, {90, 111},  {55, 135},
    {21, 269},  {58, 270},  {122, 270}, {159, 271}};

bool inside_room(const RoomSpec& room, const Vector3d& p) {
  for (int i = 0; i < 3; ++i)
    if (!(p[i] > 0.0) || !(p[i] < room.dims[i])) return false;
  return true;
}

void inject_sinc(std::vector<double>& h, double center, double amp) {
  const int i0 = std::max<int>(0, static_cast<int>(std::ceil(center - kSincHalfWidth)));
  const int i1 = std::min<int>(static_cast<int>(h.size()) - 1,
                               static_cast<int>(std::floor(center + kSincHalfWidth)));
  for (int i = i0; i <= i1; ++i) {
    const double t = i - center;
    const double w = 0.5 * (1.0 + std::cos(kPi * t / (kSincHalfWidth + 1)));
    const double s = t == 0.0 ? 1.0 : std::sin(kPi * t) / (kPi * t);
    h[i] += amp * w * s;
  }
}

struct ImageSet {
  // flat list of (x, y, z, reflection_count)
  std::vector<double> pos;
  std::vector<int> refl;
  double beta = 0.0;
  double max_dist = 0.0;
};

// Uniform wall reflection coefficient from t60 via Sabine inversion,
// beta = sqrt(1 - alpha) with alpha = 24 ln(10) V / (c S t60). Returns 0 when
// the requested t60 is below what fully absorbing walls could produce.
double sabine_beta(const RoomSpec& room) {
  const double V = room.dims.prod();
  const double S = 2.0 * (room.dims[0] * room.dims[1] + room.dims[0] * room.dims[2] +
                          room.dims[1] * room.dims[2]);
  const double alpha = 24.0 * std::log(10.0) * V / (room.c * S * room.t60);
  if (alpha >= 1.0) return 0.0;
  return std::sqrt(1.0 - alpha);
}

ImageSet build_images(const RoomSpec& room, const Vector3d& src, const Vector3d& around,
                      double margin) {
  ImageSet set;
  set.max_dist = room.c * (room.t60 + 0.1);
  set.beta = sabine_beta(room);
  const double keep_dist = set.max_dist + margin;  // covers receiver offsets from `around`
  int range[3];
  for (int i = 0; i < 3; ++i)
    range[i] = static_cast<int>(std::ceil((set.max_dist + room.dims[i]) / (2.0 * room.dims[i]))) + 1;
  for (int nx = -range[0]; nx <= range[0]; ++nx)
    for (int ny = -range[1]; ny <= range[1]; ++ny)
      for (int nz = -range[2]; nz <= range[2]; ++nz)
        for (int p = 0; p < 8; ++p) {
          const int px = p & 1, py = (p >> 1) & 1, pz = (p >> 2) & 1;
          const double ix = (1 - 2 * px) * src[0] + 2.0 * nx * room.dims[0];
          const double iy = (1 - 2 * py) * src[1] + 2.0 * ny * room.dims[1];
          const double iz = (1 - 2 * pz) * src[2] + 2.0 * nz * room.dims[2];
          const double dx = ix - around[0], dy = iy - around[1], dz = iz - around[2];
          if (dx * dx + dy * dy + dz * dz > keep_dist * keep_dist) continue;
          set.pos.push_back(ix);
          set.pos.push_back(iy);
          set.pos.push_back(iz);
          set.refl.push_back(std::abs(nx - px) + std::abs(nx) + std::abs(ny - py) + std::abs(ny) +
                             std::abs(nz - pz) + std::abs(nz));
        }
  return set;
}

std::vector<double> rir_from_images(const ImageSet& set, const RoomSpec& room, const Vector3d& mic,
                                    double sample_rate) {
  const int len = static_cast<int>(std::ceil((room.t60 + 0.1) * sample_rate)) + 2 * kSincHalfWidth;
  std::vector<double> h(len, 0.0);
  const size_t count = set.refl.size();
  // powers of beta are reused heavily; cache them
  std::vector<double> beta_pow(1, 1.0);
  for (size_t i = 0; i < count; ++i) {
    const double dx = set.pos[3 * i] - mic[0];
    const double dy = set.pos[3 * i + 1] - mic[1];
    const double dz = set.pos[3 * i + 2] - mic[2];
    const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (dist > set.max_dist || dist <= 0.0) continue;
    const int r = set.refl[i];
    while (static_cast<int>(beta_pow.size()) <= r) beta_pow.push_back(beta_pow.back() * set.beta);
    inject_sinc(h, dist / room.c * sample_rate, beta_pow[r] / (4.0 * kPi * dist));
  }
  return h;
}

std::vector<double> direct_path_rir(const RoomSpec& room, const Vector3d& src, const Vector3d& mic,
                                    double sample_rate) {
  const double dist = (src - mic).norm();
  const double delay = dist / room.c * sample_rate;
  std::vector<double> h(static_cast<int>(std::ceil(delay)) + 2 * kSincHalfWidth, 0.0);
  inject_sinc(h, delay, 1.0 / (4.0 * kPi * dist));
  return h;
}

void validate_rir_geometry(const RoomSpec& room, const Vector3d& src, const Vector3d& mic) {
  if (!inside_room(room, src) || !inside_room(room, mic))
    throw Error(ErrorCode::InvalidGeometry, "source and microphone must lie inside the room");
  if ((src - mic).norm() <= 0.0)
    throw Error(ErrorCode::InvalidGeometry, "source and microphone coincide");
  if (!(room.t60 >= 0.0) || !(room.c > 0.0) || !(room.dims.minCoeff() > 0.0))
    throw Error(ErrorCode::InvalidGeometry, "room parameters out of range");
}

double mean_square(const Eigen::VectorXd& x) { return x.squaredNorm() / std::max<Eigen::Index>(1, x.size()); }

}  // namespace

Vector3d ArrayGeometry::direction(int q) const {
  const auto& m = mics.at(q);
  return Vector3d(std::sin(m.theta) * std::cos(m.phi), std::sin(m.theta) * std::sin(m.phi),
                  std::cos(m.theta));
}

void SceneConfig::validate() const {
  if (array.count() == 0) throw Error(ErrorCode::Config, "array has no microphones");
  if (!(sample_rate > 0.0) || !(duration_s > 0.0))
    throw Error(ErrorCode::Config, "sample_rate and duration_s must be positive");
  if (!inside_room(room, array.center))
    throw Error(ErrorCode::InvalidGeometry, "array center outside room");
  for (const auto* s : {&desired, &interference}) {
    if (!inside_room(room, s->position))
      throw Error(ErrorCode::InvalidGeometry, "source outside room");
    if ((s->position - array.center).norm() <= array.radius)
      throw Error(ErrorCode::InvalidGeometry, "source inside the array sphere");
  }
  for (int q = 0; q < array.count(); ++q)
    if (!inside_room(room, array.position(q)))
      throw Error(ErrorCode::InvalidGeometry, "microphone outside room");
}

namespace {
bool effectively_anechoic(const RoomSpec& room) {
  return room.t60 < 0.01 || sabine_beta(room) == 0.0;
}
}  // namespace

std::vector<double> simulate_rir(const RoomSpec& room, const Vector3d& src, const Vector3d& mic,
                                 double sample_rate) {
  validate_rir_geometry(room, src, mic);
  if (effectively_anechoic(room)) return direct_path_rir(room, src, mic, sample_rate);
  return rir_from_images(build_images(room, src, mic, 0.01), room, mic, sample_rate);
}

std::vector<std::vector<double>> simulate_rir_points(const RoomSpec& room, const Vector3d& src,
                                                     const std::vector<Vector3d>& points,
                                                     double sample_rate, int threads) {
  std::vector<std::vector<double>> rirs(points.size());
  if (points.empty()) return rirs;
  if (effectively_anechoic(room)) {
    for (size_t i = 0; i < points.size(); ++i) {
      validate_rir_geometry(room, src, points[i]);
      rirs[i] = direct_path_rir(room, src, points[i], sample_rate);
    }
    return rirs;
  }
  Vector3d centroid = Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  double spread = 0.0;
  for (const auto& p : points) spread = std::max(spread, (p - centroid).norm());
  const ImageSet set = build_images(room, src, centroid, spread + 0.01);
  parallel_for(
      points.size(),
      [&](std::size_t i) {
        validate_rir_geometry(room, src, points[i]);
        rirs[i] = rir_from_images(set, room, points[i], sample_rate);
      },
      threads);
  return rirs;
}

std::vector<std::vector<double>> simulate_rir_bank(const RoomSpec& room, const Vector3d& src,
                                                   const ArrayGeometry& array, double sample_rate,
                                                   int threads) {
  std::vector<Vector3d> points;
  points.reserve(array.count());
  for (int q = 0; q < array.count(); ++q) points.push_back(array.position(q));
  return simulate_rir_points(room, src, points, sample_rate, threads);
}

double interference_scale(const Eigen::VectorXd& dry_desired,
                          const Eigen::VectorXd& dry_interference, double snr_db) {
  const double pv = dry_interference.size() ? mean_square(dry_interference) : 0.0;
  if (pv <= 0.0) return 0.0;
  const double pd = dry_desired.size() ? mean_square(dry_desired) : 0.0;
  if (pd <= 0.0) return 1.0;  // no desired reference: leave the level untouched
  return std::sqrt(pd / (pv * std::pow(10.0, snr_db / 10.0)));
}

std::pair<double, double> direction_angles(const Vector3d& v) {
  const double r = v.norm();
  if (r <= 0.0) throw Error(ErrorCode::InvalidArgument, "zero direction vector");
  return {std::acos(std::clamp(v[2] / r, -1.0, 1.0)), std::atan2(v[1], v[0])};
}

ComponentSignals synthesize(const SceneConfig& scene, const Eigen::VectorXd& dry_desired,
                            const Eigen::VectorXd& dry_interference,
                            const std::string& noise_stream, int threads) {
  return synthesize(scene, dry_desired, dry_interference,
                    simulate_rir_bank(scene.room, scene.desired.position, scene.array,
                                      scene.sample_rate, threads),
                    simulate_rir_bank(scene.room, scene.interference.position, scene.array,
                                      scene.sample_rate, threads),
                    noise_stream, threads);
}

ComponentSignals synthesize(const SceneConfig& scene, const Eigen::VectorXd& dry_desired,
                            const Eigen::VectorXd& dry_interference,
                            const std::vector<std::vector<double>>& rirs_d,
                            const std::vector<std::vector<double>>& rirs_v,
                            const std::string& noise_stream, int threads) {
  scene.validate();
  if (dry_desired.size() == 0) throw Error(ErrorCode::EmptySignal, "dry desired signal is empty");
  if (!dry_desired.allFinite() || !dry_interference.allFinite())
    throw Error(ErrorCode::EmptySignal, "dry signals must be finite");

  const int Q = scene.array.count();
  const Eigen::Index T = dry_desired.size();

  // interference pre-scaled so broadband dry-signal SNR hits snr_db
  Eigen::VectorXd dry_v = dry_interference * interference_scale(dry_desired, dry_interference,
                                                                scene.snr_db);
  const double pv = dry_v.size() ? mean_square(dry_v) : 0.0;

  ComponentSignals out;
  out.d.setZero(Q, T);
  out.v.setZero(Q, T);
  out.u.setZero(Q, T);

  const std::vector<double> dry_d_vec(dry_desired.data(), dry_desired.data() + T);
  const std::vector<double> dry_v_vec(dry_v.data(), dry_v.data() + dry_v.size());
  parallel_for(
      Q,
      [&](std::size_t q) {
        const auto dq = fft_convolve(dry_d_vec, rirs_d[q]);
        for (Eigen::Index i = 0; i < T; ++i) out.d(q, i) = dq[i];
        if (pv > 0.0) {
          const auto vq = fft_convolve(dry_v_vec, rirs_v[q]);
          const Eigen::Index n = std::min<Eigen::Index>(T, static_cast<Eigen::Index>(vq.size()));
          for (Eigen::Index i = 0; i < n; ++i) out.v(q, i) = vq[i];
        }
      },
      threads);

  if (std::isfinite(scene.ssnr_db)) {
    const double p_mic = out.d.squaredNorm() / static_cast<double>(Q * T);
    const double sigma = std::sqrt(p_mic * std::pow(10.0, -scene.ssnr_db / 10.0));
    for (int q = 0; q < Q; ++q) {
      Rng rng(Rng::derive_stream(scene.seed, noise_stream + "/sensor-noise/q" + std::to_string(q)));
      for (Eigen::Index i = 0; i < T; ++i) out.u(q, i) = sigma * rng.next_gaussian();
    }
  }
  return out;
}

ArrayGeometry em32_geometry() {
  ArrayGeometry g;
  g.radius = 0.042;
  g.mics.reserve(32);
  for (const auto& a : kEm32Angles)
    g.mics.push_back({a[0] * kPi / 180.0, a[1] * kPi / 180.0});
  return g;
}

ArrayGeometry geometry_from_csv(const std::string& path, const Vector3d& center, double radius) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open geometry CSV: " + path);
  ArrayGeometry g;
  g.center = center;
  g.radius = radius;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double theta_deg, phi_deg;
    if (!(ss >> theta_deg >> phi_deg))
      throw Error(ErrorCode::Config, "bad geometry CSV row: " + line);
    g.mics.push_back({theta_deg * kPi / 180.0, phi_deg * kPi / 180.0});
  }
  if (g.mics.empty()) throw Error(ErrorCode::Config, "geometry CSV has no rows: " + path);
  return g;
}

double schroeder_t60(const std::vector<double>& rir, double sample_rate) {
  if (rir.empty()) throw Error(ErrorCode::EmptySignal, "empty RIR");
  // backward-integrated energy decay, -60 dB crossing measured from the
  // direct-sound arrival
  std::vector<double> edc(rir.size());
  double acc = 0.0;
  for (size_t i = rir.size(); i-- > 0;) {
    acc += rir[i] * rir[i];
    edc[i] = acc;
  }
  if (acc <= 0.0) throw Error(ErrorCode::EmptySignal, "RIR has no energy");
  size_t direct = 0;
  double peak = 0.0;
  for (size_t i = 0; i < rir.size(); ++i)
    if (std::abs(rir[i]) > peak) {
      peak = std::abs(rir[i]);
      direct = i;
    }
  const double target = edc[0] * 1e-6;
  for (size_t i = direct; i < rir.size(); ++i)
    if (edc[i] <= target) return (static_cast<double>(i) - static_cast<double>(direct)) / sample_rate;
  return static_cast<double>(rir.size() - direct) / sample_rate;
}

}  // namespace shmvdr::scene
