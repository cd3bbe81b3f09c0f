#include "pipeline.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "baseline.hpp"
#include "error.hpp"
#include "fft.hpp"
#include "image.hpp"
#include "signals.hpp"
#include "threading.hpp"
#include "wav.hpp"

namespace shmvdr::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

json default_config() {
  return json{
      {"scene",
       {{"room", {{"dims", {5.0, 6.0, 4.0}}, {"t60", 0.2}, {"speed_of_sound", 343.0}}},
        {"desired", {{"position", {4.60, 4.05, 1.70}}, {"signal", "builtin:speech"}}},
        {"interference", {{"position", {1.60, 1.05, 1.20}}, {"signal", "builtin:washer"}}},
        {"array", {{"center", {1.60, 4.05, 1.70}}, {"radius", 0.042}, {"geometry", "em32"}}},
        {"snr_db", 0.0},
        {"ssnr_db", 35.0},
        {"seed", 20260801},
        {"sample_rate", 16000.0},
        {"duration_s", 10.0},
        {"rehc_mode", "desired"},
        {"rehc_duration_s", 2.0}}},
      {"method", "both"},
      {"band", {{"f_low", 300.0}, {"f_high", 3400.0}}},
      {"stft", {{"frame_size", 16384}}},
      {"metrics",
       {{"frames", 15},
        {"frame_selection", "desired-energy"},
        {"observation", "sphere107"},
        {"sweet_radius", 0.042}}},
      {"loading", 1e-9},
      {"threads", 0}};
}

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Config, "config field '" + path + "': " + what);
}

const json& walk(const json& j, const std::string& path) {
  const json* cur = &j;
  std::istringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!cur->is_object() || !cur->contains(part)) config_error(path, "missing");
    cur = &(*cur)[part];
  }
  return *cur;
}

template <typename T>
T field(const json& j, const std::string& path) {
  try {
    return walk(j, path).get<T>();
  } catch (const json::exception& e) {
    config_error(path, e.what());
  }
}

Eigen::Vector3d field_vec3(const json& j, const std::string& path) {
  const auto v = field<std::vector<double>>(j, path);
  if (v.size() != 3) config_error(path, "needs exactly 3 numbers");
  return Eigen::Vector3d(v[0], v[1], v[2]);
}

std::vector<Method> parse_methods(const std::string& mode) {
  if (mode == "proposed") return {Method::Proposed};
  if (mode == "proposed-accurate-rehc") return {Method::ProposedAccurateRehc};
  if (mode == "baseline") return {Method::Baseline};
  if (mode == "both") return {Method::Proposed, Method::Baseline};
  if (mode == "all")
    return {Method::Proposed, Method::ProposedAccurateRehc, Method::Baseline};
  config_error("method", "expected proposed|proposed-accurate-rehc|baseline|both|all, got " + mode);
}

std::string method_mode_string(const std::vector<Method>& methods) {
  if (methods.size() == 3) return "all";
  if (methods.size() == 2) return "both";
  if (methods.empty()) return "both";
  return method_name(methods[0]);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f << text;
  if (!f) throw Error(ErrorCode::Io, "short write to " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> flag_reasons(uint8_t flag) {
  std::vector<std::string> r;
  if (flag & transforms::kFlagBesselGuarded) r.push_back("bessel-guarded");
  if (flag & transforms::kFlagIllConditioned) r.push_back("ill-conditioned");
  if (flag & transforms::kFlagDegenerateRehc) r.push_back("degenerate-rehc");
  if (flag & transforms::kFlagZeroBeamOutput) r.push_back("zero-beam-output");
  return r;
}

AudioBuffer to_audio(const Eigen::MatrixXd& samples, double fs) {
  AudioBuffer a;
  a.samples = samples;
  a.sample_rate = fs;
  return a;
}

void write_rirs(const std::string& path, const SimArtifacts& sim) {
  json header;
  header["sample_rate"] = sim.spec.scene.sample_rate;
  json banks = json::array();
  for (const auto* bank : {&sim.rirs_desired, &sim.rirs_interference}) {
    json lengths = json::array();
    for (const auto& r : *bank) lengths.push_back(r.size());
    banks.push_back({{"count", bank->size()}, {"lengths", lengths}});
  }
  header["banks"] = banks;
  const std::string head = header.dump();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f.write("RIR1", 4);
  const uint64_t len = head.size();
  f.write(reinterpret_cast<const char*>(&len), 8);
  f.write(head.data(), static_cast<std::streamsize>(head.size()));
  for (const auto* bank : {&sim.rirs_desired, &sim.rirs_interference})
    for (const auto& r : *bank)
      f.write(reinterpret_cast<const char*>(r.data()),
              static_cast<std::streamsize>(sizeof(double) * r.size()));
  if (!f) throw Error(ErrorCode::Io, "short write to " + path);
}

void read_rirs(const std::string& path, SimArtifacts& sim) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot read " + path);
  char magic[4];
  f.read(magic, 4);
  uint64_t len = 0;
  f.read(reinterpret_cast<char*>(&len), 8);
  if (!f || std::string(magic, 4) != "RIR1")
    throw Error(ErrorCode::Io, "not a RIR container: " + path);
  std::string head(len, '\0');
  f.read(head.data(), static_cast<std::streamsize>(len));
  const json header = json::parse(head);
  auto read_bank = [&](const json& spec_bank) {
    std::vector<std::vector<double>> bank;
    for (const auto& l : spec_bank.at("lengths")) {
      bank.emplace_back(l.get<size_t>());
      f.read(reinterpret_cast<char*>(bank.back().data()),
             static_cast<std::streamsize>(sizeof(double) * bank.back().size()));
    }
    return bank;
  };
  sim.rirs_desired = read_bank(header.at("banks")[0]);
  sim.rirs_interference = read_bank(header.at("banks")[1]);
  if (!f) throw Error(ErrorCode::Io, "truncated RIR container: " + path);
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::Proposed: return "proposed";
    case Method::ProposedAccurateRehc: return "proposed-accurate-rehc";
    case Method::Baseline: return "baseline";
  }
  return "?";
}

ExperimentSpec ExperimentSpec::preset(const std::string& name) {
  if (name != "paper-default")
    throw Error(ErrorCode::Config, "unknown preset: " + name + " (available: paper-default)");
  return from_json(default_config());
}

ExperimentSpec ExperimentSpec::from_file(const std::string& path) {
  try {
    return from_json_text(read_text(path));
  } catch (const Error& e) {
    throw Error(e.code(), e.message() + " (in " + path + ")");
  }
}

ExperimentSpec ExperimentSpec::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("JSON parse error: ") + e.what());
  }
  return from_json(j);
}

ExperimentSpec ExperimentSpec::from_json(const json& user) {
  json j = default_config();
  j.merge_patch(user);

  ExperimentSpec spec;
  auto& sc = spec.scene;
  sc.room.dims = field_vec3(j, "scene.room.dims");
  sc.room.t60 = field<double>(j, "scene.room.t60");
  sc.room.c = field<double>(j, "scene.room.speed_of_sound");
  sc.desired.position = field_vec3(j, "scene.desired.position");
  sc.desired.signal = field<std::string>(j, "scene.desired.signal");
  sc.interference.position = field_vec3(j, "scene.interference.position");
  sc.interference.signal = field<std::string>(j, "scene.interference.signal");
  sc.array.center = field_vec3(j, "scene.array.center");
  sc.array.radius = field<double>(j, "scene.array.radius");
  const json& geom = walk(j, "scene.array.geometry");
  if (geom.is_string() && geom.get<std::string>() == "em32") {
    auto g = scene::em32_geometry();
    sc.array.mics = g.mics;
  } else if (geom.is_object() && geom.contains("csv")) {
    auto g = scene::geometry_from_csv(geom["csv"].get<std::string>(), sc.array.center,
                                      sc.array.radius);
    sc.array.mics = g.mics;
  } else {
    config_error("scene.array.geometry", "expected \"em32\" or {\"csv\": path}");
  }
  sc.snr_db = field<double>(j, "scene.snr_db");
  sc.ssnr_db = field<double>(j, "scene.ssnr_db");
  sc.seed = field<uint64_t>(j, "scene.seed");
  sc.sample_rate = field<double>(j, "scene.sample_rate");
  sc.duration_s = field<double>(j, "scene.duration_s");
  sc.rehc_duration_s = field<double>(j, "scene.rehc_duration_s");
  if (!(sc.rehc_duration_s > 0.0)) config_error("scene.rehc_duration_s", "must be positive");
  const auto rehc_mode = field<std::string>(j, "scene.rehc_mode");
  if (rehc_mode == "desired") sc.rehc_mode = scene::RehcSegmentMode::Desired;
  else if (rehc_mode == "white-noise") sc.rehc_mode = scene::RehcSegmentMode::WhiteNoise;
  else config_error("scene.rehc_mode", "expected desired|white-noise");

  spec.methods = parse_methods(field<std::string>(j, "method"));
  spec.f_low = field<double>(j, "band.f_low");
  spec.f_high = field<double>(j, "band.f_high");
  spec.frame_size = field<int>(j, "stft.frame_size");
  if (spec.frame_size < 8 || (spec.frame_size & 3))
    config_error("stft.frame_size", "must be >= 8 and divisible by 4");
  spec.metric_frames = field<int>(j, "metrics.frames");
  spec.frame_selection = field<std::string>(j, "metrics.frame_selection");
  if (spec.frame_selection != "desired-energy" && spec.frame_selection != "first")
    config_error("metrics.frame_selection", "expected desired-energy|first");
  const auto obs = field<std::string>(j, "metrics.observation");
  if (obs == "sphere107") spec.observation = metrics::ObservationKind::Sphere107;
  else if (obs == "plane441") spec.observation = metrics::ObservationKind::Plane441;
  else config_error("metrics.observation", "expected sphere107|plane441");
  spec.sweet_radius = field<double>(j, "metrics.sweet_radius");
  spec.loading = field<double>(j, "loading");
  spec.threads = field<int>(j, "threads");

  if (j.contains("sweep") && !j["sweep"].is_null()) {
    const json& sweep = j["sweep"];
    if (sweep.contains("t60")) spec.sweep_t60 = field<std::vector<double>>(j, "sweep.t60");
    if (sweep.contains("snr_db")) spec.sweep_snr = field<std::vector<double>>(j, "sweep.snr_db");
    if (spec.sweep_t60 && spec.sweep_snr)
      config_error("sweep", "sweep over either t60 or snr_db, not both");
    if ((spec.sweep_t60 && spec.sweep_t60->empty()) || (spec.sweep_snr && spec.sweep_snr->empty()))
      config_error("sweep", "sweep list is empty");
  }
  spec.scene.validate();
  return spec;
}

void ExperimentSpec::set(const std::string& key, const std::string& value) {
  json j = to_json();
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // plain string
  }
  json* cur = &j;
  std::istringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw Error(ErrorCode::Config, "empty override key");
  for (size_t i = 0; i + 1 < parts.size(); ++i) cur = &(*cur)[parts[i]];
  (*cur)[parts.back()] = parsed;
  *this = from_json(j);
}

json ExperimentSpec::to_json() const {
  json j = default_config();
  j["scene"]["room"]["dims"] = {scene.room.dims[0], scene.room.dims[1], scene.room.dims[2]};
  j["scene"]["room"]["t60"] = scene.room.t60;
  j["scene"]["room"]["speed_of_sound"] = scene.room.c;
  j["scene"]["desired"]["position"] = {scene.desired.position[0], scene.desired.position[1],
                                       scene.desired.position[2]};
  j["scene"]["desired"]["signal"] = scene.desired.signal;
  j["scene"]["interference"]["position"] = {scene.interference.position[0],
                                            scene.interference.position[1],
                                            scene.interference.position[2]};
  j["scene"]["interference"]["signal"] = scene.interference.signal;
  j["scene"]["array"]["center"] = {scene.array.center[0], scene.array.center[1],
                                   scene.array.center[2]};
  j["scene"]["array"]["radius"] = scene.array.radius;
  j["scene"]["snr_db"] = scene.snr_db;
  j["scene"]["ssnr_db"] = scene.ssnr_db;
  j["scene"]["seed"] = scene.seed;
  j["scene"]["sample_rate"] = scene.sample_rate;
  j["scene"]["duration_s"] = scene.duration_s;
  j["scene"]["rehc_mode"] =
      scene.rehc_mode == scene::RehcSegmentMode::Desired ? "desired" : "white-noise";
  j["scene"]["rehc_duration_s"] = scene.rehc_duration_s;
  j["method"] = method_mode_string(methods);
  j["band"]["f_low"] = f_low;
  j["band"]["f_high"] = f_high;
  j["stft"]["frame_size"] = frame_size;
  j["metrics"]["frames"] = metric_frames;
  j["metrics"]["frame_selection"] = frame_selection;
  j["metrics"]["observation"] =
      observation == metrics::ObservationKind::Sphere107 ? "sphere107" : "plane441";
  j["metrics"]["sweet_radius"] = sweet_radius;
  j["loading"] = loading;
  j["threads"] = threads;
  if (sweep_t60) j["sweep"]["t60"] = *sweep_t60;
  if (sweep_snr) j["sweep"]["snr_db"] = *sweep_snr;
  return j;
}

std::string ExperimentSpec::config_hash() const { return sha256_hex(to_json().dump()); }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::Internal, "sha256 failed");
  std::ostringstream ss;
  ss << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) ss << std::setw(2) << static_cast<int>(digest[i]);
  return ss.str();
}

SimArtifacts simulate(const ExperimentSpec& spec) {
  spec.scene.validate();
  SimArtifacts sim;
  sim.spec = spec;
  const auto& sc = spec.scene;
  // the desired source also plays alone for a leading interval that is
  // recorded for ReHC estimation; the mixture uses the material after it
  const Eigen::VectorXd dry_d_full = signals::load_source(
      sc.desired.signal, sc.sample_rate, sc.rehc_duration_s + sc.duration_s);
  const Eigen::Index est_len =
      static_cast<Eigen::Index>(std::llround(sc.rehc_duration_s * sc.sample_rate));
  const Eigen::VectorXd dry_d_est = dry_d_full.head(est_len);
  sim.dry_desired = dry_d_full.tail(dry_d_full.size() - est_len);
  Eigen::VectorXd dry_v = signals::load_source(sc.interference.signal, sc.sample_rate,
                                               sc.duration_s);
  sim.rirs_desired =
      scene::simulate_rir_bank(sc.room, sc.desired.position, sc.array, sc.sample_rate, spec.threads);
  sim.rirs_interference = scene::simulate_rir_bank(sc.room, sc.interference.position, sc.array,
                                                   sc.sample_rate, spec.threads);
  sim.mixture = scene::synthesize(sc, sim.dry_desired, dry_v, sim.rirs_desired,
                                  sim.rirs_interference, "mix", spec.threads);
  sim.dry_interference_scaled =
      dry_v * scene::interference_scale(sim.dry_desired, dry_v, sc.snr_db);

  const Eigen::VectorXd silent;
  bool want_desired_segment = false, want_white_segment = false;
  for (Method m : spec.methods) {
    if (m == Method::Proposed)
      (sc.rehc_mode == scene::RehcSegmentMode::Desired ? want_desired_segment
                                                       : want_white_segment) = true;
    if (m == Method::ProposedAccurateRehc) want_white_segment = true;
  }
  if (want_desired_segment) {
    const auto seg = scene::synthesize(sc, dry_d_est, silent, sim.rirs_desired,
                                       sim.rirs_interference, "rehc-desired", spec.threads);
    sim.rehc_mix_desired = seg.d + seg.u;
  }
  if (want_white_segment) {
    Eigen::VectorXd white = signals::builtin_white(sc.sample_rate, sc.rehc_duration_s);
    // 0 dB relative to the desired source material
    white *= std::sqrt(sim.dry_desired.squaredNorm() / sim.dry_desired.size());
    const auto seg = scene::synthesize(sc, white, silent, sim.rirs_desired, sim.rirs_interference,
                                       "rehc-white", spec.threads);
    sim.rehc_mix_white = seg.d + seg.u;
  }
  return sim;
}

void write_sim(const std::string& dir, const SimArtifacts& sim) {
  ensure_dir(dir);
  const double fs = sim.spec.scene.sample_rate;
  write_text(dir + "/spec.json", sim.spec.to_json().dump(2) + "\n");
  const Eigen::MatrixXd mix = sim.mixture.d + sim.mixture.v + sim.mixture.u;
  write_wav(dir + "/mix.wav", to_audio(mix, fs));
  write_wav(dir + "/desired.wav", to_audio(sim.mixture.d, fs));
  write_wav(dir + "/interference.wav", to_audio(sim.mixture.v, fs));
  write_wav(dir + "/noise.wav", to_audio(sim.mixture.u, fs));
  if (sim.rehc_mix_desired.size())
    write_wav(dir + "/rehc_mix_desired.wav", to_audio(sim.rehc_mix_desired, fs));
  if (sim.rehc_mix_white.size())
    write_wav(dir + "/rehc_mix_white.wav", to_audio(sim.rehc_mix_white, fs));
  write_wav(dir + "/dry_desired.wav", to_audio(sim.dry_desired.transpose(), fs));
  write_wav(dir + "/dry_interference_scaled.wav",
            to_audio(sim.dry_interference_scaled.transpose(), fs));
  write_rirs(dir + "/rirs.bin", sim);
  json manifest{{"version", kVersion},
                {"config_hash", sim.spec.config_hash()},
                {"seed", sim.spec.scene.seed}};
  write_text(dir + "/sim_manifest.json", manifest.dump(2) + "\n");
}

SimArtifacts read_sim(const std::string& dir) {
  SimArtifacts sim;
  sim.spec = ExperimentSpec::from_file(dir + "/spec.json");
  auto load = [&](const std::string& name) { return read_wav(dir + "/" + name).samples; };
  sim.mixture.d = load("desired.wav");
  sim.mixture.v = load("interference.wav");
  sim.mixture.u = load("noise.wav");
  if (fs::exists(dir + "/rehc_mix_desired.wav")) sim.rehc_mix_desired = load("rehc_mix_desired.wav");
  if (fs::exists(dir + "/rehc_mix_white.wav")) sim.rehc_mix_white = load("rehc_mix_white.wav");
  sim.dry_desired = load("dry_desired.wav").row(0);
  sim.dry_interference_scaled = load("dry_interference_scaled.wav").row(0);
  read_rirs(dir + "/rirs.bin", sim);
  return sim;
}

TransformContext build_transforms(const SimArtifacts& sim) {
  const auto& spec = sim.spec;
  TransformContext ctx;
  ctx.params.frame_size = spec.frame_size;
  ctx.params.sample_rate = spec.scene.sample_rate;
  ctx.band = transforms::BandPlan::band(ctx.params, spec.f_low, spec.f_high,
                                        spec.scene.array.radius, spec.scene.room.c);

  const Eigen::MatrixXd mix = sim.mixture.d + sim.mixture.v + sim.mixture.u;
  ctx.X = transforms::stft(mix, ctx.params, ctx.band);
  ctx.D = transforms::stft(sim.mixture.d, ctx.params, ctx.band);
  ctx.V = transforms::stft(sim.mixture.v, ctx.params, ctx.band);
  ctx.U = transforms::stft(sim.mixture.u, ctx.params, ctx.band);

  ctx.xs = transforms::sht_tensor(ctx.X, spec.scene.array, spec.threads);
  ctx.ds = transforms::sht_tensor(ctx.D, spec.scene.array, spec.threads);
  ctx.vs = transforms::sht_tensor(ctx.V, spec.scene.array, spec.threads);
  ctx.us = transforms::sht_tensor(ctx.U, spec.scene.array, spec.threads);

  // SH-domain oracle PSDs
  std::vector<Eigen::MatrixXcd> ru(ctx.band.bins.size());
  for (size_t b = 0; b < ctx.band.bins.size(); ++b) ru[b] = enhancer::estimate_psd(ctx.us.bins[b]);
  auto rv = enhancer::oracle_interference_psd(sim.rirs_interference, sim.dry_interference_scaled,
                                              spec.scene.array, ctx.params, ctx.band, spec.threads);
  ctx.psd_sh = enhancer::make_psd_set(std::move(rv), std::move(ru));

  // TF-domain oracle PSDs for the baseline: sigma_s^2 g g^H + sigma_u^2 I
  const Eigen::MatrixXcd g =
      enhancer::rir_transfer_functions(sim.rirs_interference, ctx.params, ctx.band);
  const Eigen::VectorXd sigma_s2 =
      enhancer::mean_stft_power(sim.dry_interference_scaled, ctx.params, ctx.band);
  ctx.psd_tf_interference_noise.resize(ctx.band.bins.size());
  const int Q = ctx.X.channels;
  for (size_t b = 0; b < ctx.band.bins.size(); ++b) {
    const double sigma_u2 =
        ctx.U.bins[b].squaredNorm() / static_cast<double>(Q * ctx.U.frames);
    ctx.psd_tf_interference_noise[b] =
        sigma_s2[b] * (g.col(static_cast<Eigen::Index>(b)) *
                       g.col(static_cast<Eigen::Index>(b)).adjoint()) +
        sigma_u2 * Eigen::MatrixXcd::Identity(Q, Q);
  }

  const auto [theta, phi] =
      scene::direction_angles(spec.scene.desired.position - spec.scene.array.center);
  ctx.doa_theta = theta;
  ctx.doa_phi = phi;
  return ctx;
}

namespace {

// Simulated pressures of one dry source at arbitrary observation points,
// evaluated for the selected STFT frames. This is the metric reference: it
// carries the full field, so SH truncation and array encoding errors count
// against the enhancement methods.
metrics::PointPressureSet point_truth(const Eigen::VectorXd& dry, const scene::RoomSpec& room,
                                      const Eigen::Vector3d& src,
                                      const std::vector<Eigen::Vector3d>& points,
                                      const transforms::StftParams& params,
                                      const transforms::BandPlan& band,
                                      const std::vector<int>& frames, int threads) {
  const auto rirs = scene::simulate_rir_points(room, src, points, params.sample_rate, threads);
  metrics::PointPressureSet out;
  out.bins.assign(band.bins.size(),
                  Eigen::MatrixXcd(static_cast<Eigen::Index>(points.size()),
                                   static_cast<Eigen::Index>(frames.size())));
  const std::vector<double> dry_vec(dry.data(), dry.data() + dry.size());
  const auto window = transforms::hann_periodic(params.frame_size);
  parallel_for(
      points.size(),
      [&](std::size_t i) {
        auto y = fft_convolve(dry_vec, rirs[i]);
        y.resize(dry_vec.size(), 0.0);  // align with the synthesized component length
        RealFft fft(params.frame_size);
        std::vector<double> buf(params.frame_size);
        std::vector<std::complex<double>> spec(fft.bins());
        for (size_t fi = 0; fi < frames.size(); ++fi) {
          const size_t start = static_cast<size_t>(frames[fi]) * params.hop();
          for (int j = 0; j < params.frame_size; ++j) buf[j] = y[start + j] * window[j];
          fft.forward(buf.data(), spec.data());
          for (size_t b = 0; b < band.bins.size(); ++b)
            out.bins[b](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(fi)) =
                spec[band.bins[b].index];
        }
      },
      threads);
  return out;
}

std::vector<Eigen::Vector3d> absolute_points(const metrics::ObservationSet& obs,
                                             const Eigen::Vector3d& center) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(obs.points.size());
  for (const auto& p : obs.points)
    pts.emplace_back(center + p.r * Eigen::Vector3d(std::sin(p.theta) * std::cos(p.phi),
                                                    std::sin(p.theta) * std::sin(p.phi),
                                                    std::cos(p.theta)));
  return pts;
}

// mic-domain reconstruction of an SH tensor through the forward model E(k)
Eigen::MatrixXd reconstruct_mics(const transforms::SHTensor& sh,
                                 const scene::ArrayGeometry& geometry, Eigen::Index length,
                                 int threads) {
  transforms::TFTensor tf;
  tf.params = sh.params;
  tf.band = sh.band;
  tf.channels = geometry.count();
  tf.frames = sh.frames;
  tf.bins.resize(sh.bins.size());
  parallel_for(
      sh.bins.size(),
      [&](std::size_t b) {
        const auto op =
            transforms::make_sht_operator(geometry, sh.band.bins[b].k, sh.band.bins[b].order);
        tf.bins[b] = op.forward * sh.bins[b];
      },
      threads);
  return transforms::istft(tf, length);
}

std::vector<uint8_t> merge_flags(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  std::vector<uint8_t> out(std::max(a.size(), b.size()), 0);
  for (size_t i = 0; i < a.size(); ++i) out[i] |= a[i];
  for (size_t i = 0; i < b.size(); ++i) out[i] |= b[i];
  return out;
}

}  // namespace

MethodArtifacts run_method(const SimArtifacts& sim, TransformContext& ctx, Method method) {
  const auto& spec = sim.spec;
  MethodArtifacts ma;
  ma.method = method;
  const Eigen::Index T = sim.mixture.d.cols();

  if (method == Method::Baseline) {
    baseline::BaselineOptions opts;
    opts.loading = spec.loading;
    opts.threads = spec.threads;
    const auto base = baseline::baseline_enhance(ctx.X, ctx.psd_tf_interference_noise,
                                                 ctx.doa_theta, ctx.doa_phi, spec.scene.array, opts);
    transforms::SHTensor d_hat = baseline::baseline_to_sh(base.d_mic, spec.scene.array,
                                                          spec.threads);
    ma.flags = merge_flags(merge_flags(base.flags, d_hat.flags), ctx.xs.flags);
    d_hat.flags = ma.flags;
    ma.d_hat = std::move(d_hat);
    ma.d_res = baseline::baseline_to_sh(baseline::apply_baseline_filters(base, ctx.D),
                                        spec.scene.array, spec.threads);
    ma.v_res = baseline::baseline_to_sh(baseline::apply_baseline_filters(base, ctx.V),
                                        spec.scene.array, spec.threads);
    ma.u_res = baseline::baseline_to_sh(baseline::apply_baseline_filters(base, ctx.U),
                                        spec.scene.array, spec.threads);
    ma.enhanced_audio = transforms::istft(base.d_mic, T);
    json diag = json::array();
    for (size_t b = 0; b < ctx.band.bins.size(); ++b)
      diag.push_back({{"bin", ctx.band.bins[b].index},
                      {"freq", ctx.band.bins[b].freq},
                      {"order", ctx.band.bins[b].order},
                      {"flag", ma.flags[b]},
                      {"sht_cond", ma.d_hat.conds.empty() ? 0.0 : ma.d_hat.conds[b]}});
    ma.diagnostics = std::move(diag);
    return ma;
  }

  // proposed (estimated or accurate ReHC)
  const bool white = method == Method::ProposedAccurateRehc ||
                     spec.scene.rehc_mode == scene::RehcSegmentMode::WhiteNoise;
  const Eigen::MatrixXd& segment = white ? sim.rehc_mix_white : sim.rehc_mix_desired;
  if (!segment.size())
    throw Error(ErrorCode::Internal, "estimation segment missing from simulation artifacts");
  const transforms::TFTensor seg_tf = transforms::stft(segment, ctx.params, ctx.band);
  const transforms::SHTensor seg_sh = transforms::sht_tensor(seg_tf, spec.scene.array, spec.threads);

  const size_t B = ctx.band.bins.size();
  std::vector<enhancer::ReHCVector> rehc(B);
  transforms::SHTensor x = ctx.xs;  // copy: flags get method-specific bits
  x.flags = merge_flags(x.flags, seg_sh.flags);
  for (size_t b = 0; b < B; ++b) {
    try {
      rehc[b] = enhancer::estimate_rehc(enhancer::estimate_psd(seg_sh.bins[b]));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroReference) throw;
      rehc[b].h = Eigen::VectorXcd::Zero(ctx.xs.bins[b].rows());
      rehc[b].h[0] = 1.0;
      x.flags[b] |= transforms::kFlagDegenerateRehc;
    }
  }

  enhancer::EnhanceOptions opts;
  opts.loading = spec.loading;
  opts.threads = spec.threads;
  auto enh = enhancer::enhance(x, ctx.psd_sh, rehc, opts);
  ma.flags = enh.flags;
  ma.d_hat = std::move(enh.d_hat);
  ma.d_res = enhancer::apply_banks(enh, ctx.ds);
  ma.v_res = enhancer::apply_banks(enh, ctx.vs);
  ma.u_res = enhancer::apply_banks(enh, ctx.us);
  ma.enhanced_audio = reconstruct_mics(ma.d_hat, spec.scene.array, T, spec.threads);

  json diag = json::array();
  for (size_t b = 0; b < B; ++b)
    diag.push_back({{"bin", ctx.band.bins[b].index},
                    {"freq", ctx.band.bins[b].freq},
                    {"order", ctx.band.bins[b].order},
                    {"flag", ma.flags[b]},
                    {"sht_cond", ctx.xs.conds.empty() ? 0.0 : ctx.xs.conds[b]},
                    {"rehc_gain", enh.rehc_gain[b]}});
  ma.diagnostics = std::move(diag);
  return ma;
}

namespace {

std::vector<int> metric_frame_selection(const ExperimentSpec& spec,
                                        const transforms::SHTensor& ds) {
  if (spec.frame_selection == "first") {
    std::vector<int> frames;
    for (int t = 0; t < std::min(ds.frames, spec.metric_frames); ++t) frames.push_back(t);
    return frames;
  }
  return metrics::select_frames_by_energy(ds, spec.metric_frames);
}

void evaluate_method(const ExperimentSpec& spec, const metrics::ObservationSet& obs,
                     const metrics::PointPressureSet& true_d,
                     const metrics::PointPressureSet& true_v, MethodArtifacts& ma,
                     const std::vector<int>& frames) {
  ma.report = metrics::evaluate(true_d, ma.d_hat, true_v, ma.d_res, ma.v_res, ma.u_res, obs,
                                frames, ma.flags, spec.threads);
}

void write_method_outputs(const std::string& dir, const ExperimentSpec& spec,
                          const MethodArtifacts& ma) {
  ensure_dir(dir);
  transforms::write_sh_container(dir + "/d_hat.shc", ma.d_hat, "estimated-desired");
  transforms::write_sh_container(dir + "/d_res.shc", ma.d_res, "residual-desired");
  transforms::write_sh_container(dir + "/v_res.shc", ma.v_res, "residual-interference");
  transforms::write_sh_container(dir + "/u_res.shc", ma.u_res, "residual-noise");
  write_wav(dir + "/enhanced.wav", to_audio(ma.enhanced_audio, spec.scene.sample_rate));

  std::ofstream f(dir + "/diagnostics.csv", std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write diagnostics CSV");
  f << "bin,freq_hz,order,sht_cond,flag,reasons,rehc_gain\r\n";
  f.setf(std::ios::fixed);
  f.precision(6);
  for (const auto& d : ma.diagnostics) {
    std::string reasons;
    for (const auto& r : flag_reasons(d.at("flag").get<uint8_t>()))
      reasons += (reasons.empty() ? "" : ";") + r;
    f << d.at("bin").get<int>() << ',' << d.at("freq").get<double>() << ','
      << d.at("order").get<int>() << ',' << d.value("sht_cond", 0.0) << ','
      << static_cast<int>(d.at("flag").get<uint8_t>()) << ',' << reasons << ','
      << (d.contains("rehc_gain") ? d.at("rehc_gain").get<double>() : 0.0) << "\r\n";
  }
  json meta{{"method", method_name(ma.method)}, {"version", kVersion}};
  write_text(dir + "/method.json", meta.dump(2) + "\n");
}

struct SingleRun {
  TransformContext ctx;
  std::vector<MethodArtifacts> methods;
  std::vector<int> frames;
  SimArtifacts sim;
  json summary;
};

SingleRun run_single(const ExperimentSpec& spec, const std::string& out_dir) {
  ensure_dir(out_dir);
  SingleRun out;
  out.sim = simulate(spec);
  const SimArtifacts& sim = out.sim;
  write_sim(out_dir + "/sim", sim);
  out.ctx = build_transforms(sim);
  out.frames = metric_frame_selection(spec, out.ctx.ds);

  const auto obs = metrics::observation_points(spec.observation, spec.sweet_radius);
  const auto pts = absolute_points(obs, spec.scene.array.center);
  const auto true_d = point_truth(sim.dry_desired, spec.scene.room, spec.scene.desired.position,
                                  pts, out.ctx.params, out.ctx.band, out.frames, spec.threads);
  const auto true_v =
      point_truth(sim.dry_interference_scaled, spec.scene.room, spec.scene.interference.position,
                  pts, out.ctx.params, out.ctx.band, out.frames, spec.threads);

  json summary_methods = json::object();
  json manifest_flags = json::object();
  for (Method m : spec.methods) {
    MethodArtifacts ma = run_method(sim, out.ctx, m);
    evaluate_method(spec, obs, true_d, true_v, ma, out.frames);
    const std::string name = method_name(m);
    write_method_outputs(out_dir + "/" + name, spec, ma);
    ma.report.write_csv(out_dir + "/metrics_" + name + ".csv");

    int flagged = 0;
    json flag_list = json::array();
    for (size_t b = 0; b < ma.flags.size(); ++b)
      if (ma.flags[b]) {
        ++flagged;
        flag_list.push_back({{"bin", out.ctx.band.bins[b].index},
                             {"freq", out.ctx.band.bins[b].freq},
                             {"reasons", flag_reasons(ma.flags[b])}});
      }
    manifest_flags[name] = std::move(flag_list);
    summary_methods[name] = {{"error_db", ma.report.aggregate.error_db},
                             {"sdr_db", ma.report.aggregate.sdr_db},
                             {"nr_db", ma.report.aggregate.nr_db},
                             {"flagged_bins", flagged}};
    out.methods.push_back(std::move(ma));
  }

  // aggregate table
  {
    std::ofstream f(out_dir + "/table.csv", std::ios::binary);
    f << "method,error_db,sdr_db,nr_db\r\n";
    f.setf(std::ios::fixed);
    f.precision(2);
    for (const auto& ma : out.methods)
      f << method_name(ma.method) << ',' << ma.report.aggregate.error_db << ','
        << ma.report.aggregate.sdr_db << ',' << ma.report.aggregate.nr_db << "\r\n";
  }

  json manifest{{"version", kVersion},
                {"config", spec.to_json()},
                {"config_hash", spec.config_hash()},
                {"seed", spec.scene.seed},
                {"band_bins", out.ctx.band.bins.size()},
                {"frame_selection", {{"rule", spec.frame_selection}, {"frames", out.frames}}},
                {"flags", manifest_flags},
                {"methods", summary_methods}};
  write_text(out_dir + "/manifest.json", manifest.dump(2) + "\n");
  out.summary = {{"config_hash", spec.config_hash()}, {"methods", summary_methods}};
  write_text(out_dir + "/summary.json", out.summary.dump(2) + "\n");
  return out;
}

std::string format_value(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

RunResult run(const ExperimentSpec& spec, const std::string& out_dir) {
  ensure_dir(out_dir);
  RunResult result;
  if (!spec.sweep_t60 && !spec.sweep_snr) {
    auto single = run_single(spec, out_dir);
    result.summary = std::move(single.summary);
    result.summary["runs"] = json::array({json{{"methods", result.summary["methods"]}}});
    return result;
  }

  const bool over_t60 = spec.sweep_t60.has_value();
  const auto& values = over_t60 ? *spec.sweep_t60 : *spec.sweep_snr;
  const std::string key = over_t60 ? "t60" : "snr_db";

  json runs = json::array();
  for (double v : values) {
    ExperimentSpec point = spec;
    point.sweep_t60.reset();
    point.sweep_snr.reset();
    if (over_t60) point.scene.room.t60 = v;
    else point.scene.snr_db = v;
    const std::string sub = out_dir + "/" + key + "_" + format_value(v);
    auto single = run_single(point, sub);
    runs.push_back({{"sweep_key", key},
                    {"sweep_value", v},
                    {"methods", single.summary["methods"]},
                    {"dir", sub}});
  }

  // sweep table in the paper's layout: one row per method, one column group
  // per sweep value
  {
    std::ofstream f(out_dir + "/sweep_table.csv", std::ios::binary);
    f << "method";
    for (double v : values)
      f << ",error_db@" << key << '=' << format_value(v) << ",sdr_db@" << key << '='
        << format_value(v) << ",nr_db@" << key << '=' << format_value(v);
    f << "\r\n";
    f.setf(std::ios::fixed);
    f.precision(2);
    for (Method m : spec.methods) {
      f << method_name(m);
      for (const auto& r : runs) {
        const auto& mm = r["methods"][method_name(m)];
        f << ',' << mm["error_db"].get<double>() << ',' << mm["sdr_db"].get<double>() << ','
          << mm["nr_db"].get<double>() << "";
      }
      f << "\r\n";
    }
  }
  result.summary = {{"sweep_key", key}, {"runs", runs}};
  write_text(out_dir + "/summary.json", result.summary.dump(2) + "\n");
  return result;
}

void stage_simulate(const ExperimentSpec& spec, const std::string& out_dir) {
  write_sim(out_dir, simulate(spec));
}

json stage_enhance(const std::string& sim_dir, const std::string& method,
                   const std::string& out_dir) {
  SimArtifacts sim = read_sim(sim_dir);
  const auto methods = parse_methods(method);
  TransformContext ctx = build_transforms(sim);
  json summary = json::object();
  for (Method m : methods) {
    // staged enhancement may need a segment the simulate stage skipped
    if ((m == Method::ProposedAccurateRehc ||
         (m == Method::Proposed &&
          sim.spec.scene.rehc_mode == scene::RehcSegmentMode::WhiteNoise)) &&
        !sim.rehc_mix_white.size())
      throw Error(ErrorCode::Config,
                  "simulation directory lacks rehc_mix_white.wav; simulate with an accurate-ReHC"
                  " method enabled");
    MethodArtifacts ma = run_method(sim, ctx, m);
    write_method_outputs(out_dir + "/" + method_name(m), sim.spec, ma);
    summary[method_name(m)] = {{"flags", static_cast<int>(std::count_if(
                                             ma.flags.begin(), ma.flags.end(),
                                             [](uint8_t f) { return f != 0; }))}};
  }
  write_text(out_dir + "/enhance_summary.json", summary.dump(2) + "\n");
  return summary;
}

json stage_evaluate(const std::string& enh_dir, const std::string& sim_dir,
                    const std::string& out_dir) {
  SimArtifacts sim = read_sim(sim_dir);
  TransformContext ctx = build_transforms(sim);
  const auto frames = metric_frame_selection(sim.spec, ctx.ds);
  ensure_dir(out_dir);

  const auto& spec = sim.spec;
  const auto obs = metrics::observation_points(spec.observation, spec.sweet_radius);
  const auto pts = absolute_points(obs, spec.scene.array.center);
  const auto true_d = point_truth(sim.dry_desired, spec.scene.room, spec.scene.desired.position,
                                  pts, ctx.params, ctx.band, frames, spec.threads);
  const auto true_v =
      point_truth(sim.dry_interference_scaled, spec.scene.room, spec.scene.interference.position,
                  pts, ctx.params, ctx.band, frames, spec.threads);

  json summary = json::object();
  for (const auto& entry : fs::directory_iterator(enh_dir)) {
    if (!entry.is_directory() || !fs::exists(entry.path() / "d_hat.shc")) continue;
    const std::string name = entry.path().filename().string();
    MethodArtifacts ma;
    ma.d_hat = transforms::read_sh_container((entry.path() / "d_hat.shc").string());
    ma.d_res = transforms::read_sh_container((entry.path() / "d_res.shc").string());
    ma.v_res = transforms::read_sh_container((entry.path() / "v_res.shc").string());
    ma.u_res = transforms::read_sh_container((entry.path() / "u_res.shc").string());
    if (ma.d_hat.band.bins.size() != ctx.band.bins.size())
      throw Error(ErrorCode::Config, "container band plan does not match simulation: " + name);
    ma.flags = ma.d_hat.flags;
    evaluate_method(sim.spec, obs, true_d, true_v, ma, frames);
    ma.report.write_csv(out_dir + "/metrics_" + name + ".csv");
    summary[name] = {{"error_db", ma.report.aggregate.error_db},
                     {"sdr_db", ma.report.aggregate.sdr_db},
                     {"nr_db", ma.report.aggregate.nr_db}};
  }
  if (summary.empty())
    throw Error(ErrorCode::Config, "no method outputs found under " + enh_dir);
  write_text(out_dir + "/summary.json", summary.dump(2) + "\n");
  return summary;
}

namespace {

void write_fig3(const std::string& path, const SingleRun& run) {
  const MethodArtifacts* prop = nullptr;
  const MethodArtifacts* acc = nullptr;
  const MethodArtifacts* base = nullptr;
  for (const auto& ma : run.methods) {
    if (ma.method == Method::Proposed) prop = &ma;
    if (ma.method == Method::ProposedAccurateRehc) acc = &ma;
    if (ma.method == Method::Baseline) base = &ma;
  }
  if (!prop || !acc || !base)
    throw Error(ErrorCode::Internal, "fig3 needs all three method variants");
  std::ofstream f(path, std::ios::binary);
  f << "freq_hz,error_proposed_db,error_accurate_db,error_baseline_db,"
       "sdr_proposed_db,sdr_accurate_db,sdr_baseline_db,"
       "nr_proposed_db,nr_accurate_db,nr_baseline_db\r\n";
  f.setf(std::ios::fixed);
  f.precision(4);
  const auto& r = prop->report;
  for (size_t b = 0; b < r.bin_freq.size(); ++b)
    f << r.bin_freq[b] << ',' << r.bin_error_db[b] << ',' << acc->report.bin_error_db[b] << ','
      << base->report.bin_error_db[b] << ',' << r.bin_sdr_db[b] << ','
      << acc->report.bin_sdr_db[b] << ',' << base->report.bin_sdr_db[b] << ',' << r.bin_nr_db[b]
      << ',' << acc->report.bin_nr_db[b] << ',' << base->report.bin_nr_db[b] << "\r\n";
}

void write_fig2(const std::string& dir, const ExperimentSpec& spec, const SingleRun& run) {
  ensure_dir(dir);
  const MethodArtifacts* prop = nullptr;
  const MethodArtifacts* base = nullptr;
  for (const auto& ma : run.methods) {
    if (ma.method == Method::Proposed) prop = &ma;
    if (ma.method == Method::Baseline) base = &ma;
  }
  if (!prop || !base) throw Error(ErrorCode::Internal, "fig2 needs proposed and baseline");

  // band bin closest to 1500 Hz, highest-desired-energy frame
  const auto& band = run.ctx.band;
  size_t bsel = 0;
  for (size_t b = 0; b < band.bins.size(); ++b)
    if (std::abs(band.bins[b].freq - 1500.0) < std::abs(band.bins[bsel].freq - 1500.0)) bsel = b;
  int frame = run.frames.empty() ? 0 : run.frames[0];
  double best_e = -1.0;
  for (int t : run.frames) {
    double etot = 0.0;
    for (const auto& m : run.ctx.ds.bins) etot += m.col(t).squaredNorm();
    if (etot > best_e) {
      best_e = etot;
      frame = t;
    }
  }

  const auto obs = metrics::observation_points(metrics::ObservationKind::Plane441,
                                               spec.sweet_radius);
  const auto pts = absolute_points(obs, spec.scene.array.center);
  const std::vector<int> fig_frames{frame};
  const auto td = point_truth(run.sim.dry_desired, spec.scene.room, spec.scene.desired.position,
                              pts, run.ctx.params, run.ctx.band, fig_frames, spec.threads);
  const auto tv = point_truth(run.sim.dry_interference_scaled, spec.scene.room,
                              spec.scene.interference.position, pts, run.ctx.params, run.ctx.band,
                              fig_frames, spec.threads);
  const auto P = transforms::isht_matrix(band.bins[bsel].k, obs.points, band.bins[bsel].order);
  const Eigen::VectorXcd true_d = td.bins[bsel].col(0);
  const Eigen::VectorXcd true_v = tv.bins[bsel].col(0);
  const Eigen::VectorXcd est_p = P * prop->d_hat.bins[bsel].col(frame);
  const Eigen::VectorXcd est_b = P * base->d_hat.bins[bsel].col(frame);

  const int n = 21;
  auto to_grid = [&](const Eigen::VectorXcd& v) {
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n * n; ++i) g(i / n, i % n) = v[i].real();
    return g;
  };
  auto error_grid = [&](const Eigen::VectorXcd& est) {
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n * n; ++i) {
      const double ref = std::norm(true_d[i]);
      const double err = std::norm(true_d[i] - est[i]);
      g(i / n, i % n) =
          ref > 0.0 ? std::clamp(10.0 * std::log10(err / ref), -metrics::kDbClamp,
                                 metrics::kDbClamp)
                    : metrics::kDbClamp;
    }
    return g;
  };
  auto disc_mean_error = [&](const Eigen::VectorXcd& est) {
    double sum = 0.0;
    int count = 0;
    for (int i = 0; i < n * n; ++i) {
      if (!obs.in_sweet[i] || std::norm(true_d[i]) <= 0.0) continue;
      sum += std::clamp(10.0 * std::log10(std::norm(true_d[i] - est[i]) / std::norm(true_d[i])),
                        -metrics::kDbClamp, metrics::kDbClamp);
      ++count;
    }
    return count ? sum / count : 0.0;
  };

  const Eigen::MatrixXd g_true = to_grid(true_d);
  const double amp = std::max(1e-12, g_true.cwiseAbs().maxCoeff());
  const image::GrayMap field_map{-amp, amp};
  const image::GrayMap err_map{-40.0, 0.0};

  struct Panel {
    const char* name;
    Eigen::MatrixXd grid;
    const image::GrayMap* map;
  };
  const Eigen::MatrixXd g_mixed = to_grid(true_d + true_v);
  const Eigen::MatrixXd g_prop = to_grid(est_p);
  const Eigen::MatrixXd g_base = to_grid(est_b);
  const Eigen::MatrixXd e_prop = error_grid(est_p);
  const Eigen::MatrixXd e_base = error_grid(est_b);
  const Panel panels[] = {{"a_mixed", g_mixed, &field_map},
                          {"b_true_desired", g_true, &field_map},
                          {"c_proposed_estimate", g_prop, &field_map},
                          {"d_proposed_error", e_prop, &err_map},
                          {"e_baseline_estimate", g_base, &field_map},
                          {"f_baseline_error", e_base, &err_map}};
  for (const auto& p : panels) {
    image::write_pgm(dir + "/fig2_" + p.name + ".pgm", p.grid, *p.map);
    image::write_png(dir + "/fig2_" + p.name + ".png", p.grid, *p.map);
  }
  json meta{{"bin", band.bins[bsel].index},
            {"freq_hz", band.bins[bsel].freq},
            {"order", band.bins[bsel].order},
            {"frame", frame},
            {"field_scale", amp},
            {"error_scale_db", {-40.0, 0.0}},
            {"disc_mean_error_db",
             {{"proposed", disc_mean_error(est_p)}, {"baseline", disc_mean_error(est_b)}}}};
  write_text(dir + "/fig2.json", meta.dump(2) + "\n");
}

}  // namespace

RunResult reproduce(const std::string& target, const std::string& out_dir, int threads) {
  ensure_dir(out_dir);
  ExperimentSpec spec = ExperimentSpec::preset("paper-default");
  spec.threads = threads;

  if (target == "table1") {
    spec.sweep_t60 = std::vector<double>{0.0, 0.2, 0.4};
    RunResult r = run(spec, out_dir);
    fs::copy_file(out_dir + "/sweep_table.csv", out_dir + "/table1.csv",
                  fs::copy_options::overwrite_existing);
    return r;
  }
  if (target == "table2") {
    spec.sweep_snr = std::vector<double>{5.0, 0.0, -5.0};
    RunResult r = run(spec, out_dir);
    fs::copy_file(out_dir + "/sweep_table.csv", out_dir + "/table2.csv",
                  fs::copy_options::overwrite_existing);
    return r;
  }
  if (target == "fig3") {
    spec.methods = parse_methods("all");
    auto single = run_single(spec, out_dir);
    write_fig3(out_dir + "/fig3.csv", single);
    RunResult r;
    r.summary = std::move(single.summary);
    return r;
  }
  if (target == "fig2") {
    auto single = run_single(spec, out_dir);
    write_fig2(out_dir, spec, single);
    RunResult r;
    r.summary = std::move(single.summary);
    return r;
  }
  throw Error(ErrorCode::Config, "unknown reproduce target: " + target +
                                     " (available: fig2, fig3, table1, table2)");
}

}  // namespace shmvdr::pipeline
