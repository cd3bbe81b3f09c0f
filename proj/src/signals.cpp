#include "signals.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "error.hpp"
#include "rng.hpp"
#include "wav.hpp"

namespace shmvdr::signals {

namespace {

constexpr double kPi = 3.14159265358979323846;

// two-pole resonator with time-varying center frequency / bandwidth
struct Resonator {
  double y1 = 0.0, y2 = 0.0;

  double tick(double x, double f0, double bw, double fs) {
    const double r = std::exp(-kPi * bw / fs);
    const double a1 = 2.0 * r * std::cos(2.0 * kPi * f0 / fs);
    const double a2 = -r * r;
    const double g = (1.0 - r) * std::sqrt(1.0 - 2.0 * r * std::cos(4.0 * kPi * f0 / fs) + r * r);
    const double y = g * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

void normalize_rms(Eigen::VectorXd& x, double rms) {
  const double cur = std::sqrt(x.squaredNorm() / std::max<Eigen::Index>(1, x.size()));
  if (cur > 0.0) x *= rms / cur;
}

// Peterson-Barney-style vowel targets (F1, F2, F3)
constexpr double kVowels[][3] = {{730, 1090, 2440}, {270, 2290, 3010}, {300, 870, 2240},
                                 {660, 1720, 2410}, {530, 1840, 2480}, {440, 1020, 2240}};

}  // namespace

Eigen::VectorXd builtin_speech(double sample_rate, double duration_s) {
  const auto T = static_cast<Eigen::Index>(std::llround(sample_rate * duration_s));
  Eigen::VectorXd out(T);
  Rng rng(Rng::derive_stream(0x73706565636831ull, "builtin-speech"));

  Resonator f1, f2, f3;
  double phase = 0.0;
  double hp_state = 0.0;
  double tilt1 = 0.0, tilt2 = 0.0;

  // segment schedule: vowels, fricatives and pauses, with a sentence-level
  // pause every few seconds; pitch and formants glide instead of jumping
  enum Seg { kVowel, kFricative, kPause };
  Seg seg = kVowel;
  double seg_t = 0.0, seg_len = 0.22;
  int syllables_in_sentence = 0;
  int vowel = 0;
  double f0_target = 140.0, f0 = 140.0;
  double F[3] = {kVowels[0][0], kVowels[0][1], kVowels[0][2]};
  double Ftarget[3] = {F[0], F[1], F[2]};
  double env = 0.0;

  const double dt = 1.0 / sample_rate;
  const double glide = 1.0 - std::exp(-dt / 0.055);    // formant/pitch glide, ~55 ms
  const double attack = 1.0 - std::exp(-dt / 0.020);   // envelope smoothing, ~20 ms

  for (Eigen::Index i = 0; i < T; ++i) {
    const double t = i * dt;
    seg_t += dt;
    if (seg_t >= seg_len) {
      seg_t = 0.0;
      const double r = rng.next_double();
      if (++syllables_in_sentence > 10 && rng.next_double() < 0.45) {
        seg = kPause;
        seg_len = 0.30 + 0.25 * rng.next_double();  // sentence break
        syllables_in_sentence = 0;
      } else if (r < 0.62) {
        seg = kVowel;
        seg_len = 0.12 + 0.22 * rng.next_double();
        vowel = static_cast<int>(rng.next_double() * 6.0) % 6;
        for (int k = 0; k < 3; ++k)
          Ftarget[k] = kVowels[vowel][k] * (0.94 + 0.12 * rng.next_double());
        f0_target = 112.0 + 40.0 * rng.next_double();
      } else if (r < 0.78) {
        seg = kFricative;
        seg_len = 0.07 + 0.10 * rng.next_double();
      } else {
        seg = kPause;
        seg_len = 0.10 + 0.18 * rng.next_double();
      }
    }

    const double target_gain = seg == kVowel ? 1.0 : (seg == kFricative ? 0.38 : 0.0);
    env += attack * (target_gain - env);
    f0 += glide * (f0_target - f0);
    for (int k = 0; k < 3; ++k) F[k] += glide * (Ftarget[k] - F[k]);

    // glottal source: sawtooth with vibrato and jitter, tilted -12 dB/oct
    const double vib = 1.0 + 0.004 * std::sin(2.0 * kPi * 5.3 * t) +
                       0.003 * std::sin(2.0 * kPi * 1.7 * t + 0.8);
    phase += f0 * vib * dt;
    phase -= std::floor(phase);
    const double noise = rng.next_gaussian();
    const double saw = 2.0 * phase - 1.0 + 0.012 * noise;
    tilt1 += 0.24 * (saw - tilt1);
    tilt2 += 0.24 * (tilt1 - tilt2);
    const double source = tilt2;

    double voiced = f1.tick(source, F[0], 85.0, sample_rate) +
                    0.55 * f2.tick(source, F[1], 120.0, sample_rate) +
                    0.30 * f3.tick(source, F[2], 180.0, sample_rate);

    // fricative band: high-passed noise
    hp_state += 0.45 * (noise - hp_state);
    const double fric = noise - hp_state;

    double y = 0.0;
    if (seg == kFricative) y = env * 0.45 * fric;
    else y = env * (voiced + 0.010 * fric);
    y += 0.0004 * noise;  // faint breath floor
    out[i] = y;
  }
  normalize_rms(out, 0.1);
  return out;
}

Eigen::VectorXd builtin_washer(double sample_rate, double duration_s) {
  const auto T = static_cast<Eigen::Index>(std::llround(sample_rate * duration_s));
  Eigen::VectorXd out(T);
  Rng rng(Rng::derive_stream(0x7761736865727aull, "builtin-washer"));
  Resonator drum, knock;
  double hp_state = 0.0;
  for (Eigen::Index i = 0; i < T; ++i) {
    const double t = i / sample_rate;
    // motor hum with a few harmonics and slow drift
    double hum = 0.0;
    const double fhum = 55.0 * (1.0 + 0.004 * std::sin(2.0 * kPi * 0.21 * t));
    for (int k = 1; k <= 6; ++k)
      hum += (0.4 / k) * std::sin(2.0 * kPi * fhum * k * t + 0.7 * k);
    const double noise = rng.next_gaussian();
    // drum rumble with tumbling amplitude modulation
    const double am = 1.0 + 0.22 * std::sin(2.0 * kPi * 1.7 * t) + 0.1 * std::sin(2.0 * kPi * 0.43 * t + 1.1);
    double rumble = drum.tick(noise, 290.0, 180.0, sample_rate) * am;
    double mid = knock.tick(noise, 900.0, 500.0, sample_rate);
    // wideband hiss so the full band carries interference energy
    hp_state += 0.25 * (noise - hp_state);
    const double hiss = noise - hp_state;
    out[i] = 0.18 * hum + 2.2 * rumble + 1.3 * mid + 0.5 * hiss;
  }
  normalize_rms(out, 0.1);
  return out;
}

Eigen::VectorXd builtin_white(double sample_rate, double duration_s) {
  const auto T = static_cast<Eigen::Index>(std::llround(sample_rate * duration_s));
  Eigen::VectorXd out(T);
  Rng rng(Rng::derive_stream(0x77686974656e6full, "builtin-white"));
  for (Eigen::Index i = 0; i < T; ++i) out[i] = rng.next_gaussian();
  normalize_rms(out, 1.0);
  return out;
}

bool is_builtin(const std::string& name) { return name.rfind("builtin:", 0) == 0; }

Eigen::VectorXd load_source(const std::string& name, double sample_rate, double duration_s) {
  if (is_builtin(name)) {
    const std::string kind = name.substr(8);
    if (kind == "speech") return builtin_speech(sample_rate, duration_s);
    if (kind == "washer") return builtin_washer(sample_rate, duration_s);
    if (kind == "white") return builtin_white(sample_rate, duration_s);
    throw Error(ErrorCode::Config, "unknown builtin source: " + name);
  }
  namespace fs = std::filesystem;
  fs::path path(name);
  if (!fs::exists(path)) {
    if (const char* dir = std::getenv("SHMVDR_DATA"); dir && fs::exists(fs::path(dir) / name))
      path = fs::path(dir) / name;
    else if (fs::exists(fs::path("data") / name))
      path = fs::path("data") / name;
    else
      throw Error(ErrorCode::Io, "source file not found (also tried $SHMVDR_DATA and ./data): " + name);
  }
  AudioBuffer wav = read_wav(path.string());
  if (wav.channels() != 1)
    throw Error(ErrorCode::Config, "dry source must be mono: " + path.string());
  if (std::abs(wav.sample_rate - sample_rate) > 0.5)
    throw Error(ErrorCode::Config, "dry source sample rate mismatch: " + path.string());
  const auto want = static_cast<Eigen::Index>(std::llround(sample_rate * duration_s));
  Eigen::VectorXd out(want);
  const Eigen::Index have = wav.length();
  if (have == 0) throw Error(ErrorCode::EmptySignal, "empty source file: " + path.string());
  for (Eigen::Index i = 0; i < want; ++i) out[i] = wav.samples(0, i % have);
  return out;
}

}  // namespace shmvdr::signals
