#include "shmvdr/shmvdr.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <string>

#include "error.hpp"
#include "pipeline.hpp"
#include "specfun.hpp"

using shmvdr::Error;
using shmvdr::ErrorCode;

struct shmvdr_experiment {
  shmvdr::pipeline::ExperimentSpec spec;
  nlohmann::json summary;
};

namespace {

thread_local std::string g_last_error;

shmvdr_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return SHMVDR_ERR_CONFIG;
    case ErrorCode::Io: return SHMVDR_ERR_IO;
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidGeometry:
    case ErrorCode::EmptySignal:
    case ErrorCode::SignalTooShort:
    case ErrorCode::OutsideSweetArea: return SHMVDR_ERR_INVALID_ARGUMENT;
    case ErrorCode::NotFactorizable:
    case ErrorCode::DegenerateConstraint:
    case ErrorCode::IllConditioned:
    case ErrorCode::ZeroReference:
    case ErrorCode::NoFrames:
    case ErrorCode::ZeroBeamOutput: return SHMVDR_ERR_NUMERIC;
    case ErrorCode::Internal: return SHMVDR_ERR_INTERNAL;
  }
  return SHMVDR_ERR_INTERNAL;
}

template <typename Fn>
shmvdr_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SHMVDR_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SHMVDR_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SHMVDR_ERR_INTERNAL;
  }
}

shmvdr_status require(bool ok, const char* what) {
  if (ok) return SHMVDR_OK;
  g_last_error = what;
  return SHMVDR_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* shmvdr_version(void) { return shmvdr::pipeline::kVersion; }

const char* shmvdr_status_name(shmvdr_status status) {
  switch (status) {
    case SHMVDR_OK: return "ok";
    case SHMVDR_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case SHMVDR_ERR_CONFIG: return "config";
    case SHMVDR_ERR_IO: return "io";
    case SHMVDR_ERR_NUMERIC: return "numeric";
    case SHMVDR_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* shmvdr_last_error(void) { return g_last_error.c_str(); }

shmvdr_status shmvdr_experiment_preset(const char* name, shmvdr_experiment** out) {
  if (auto s = require(name && out, "null argument")) return s;
  return guarded([&] {
    *out = new shmvdr_experiment{shmvdr::pipeline::ExperimentSpec::preset(name), {}};
  });
}

shmvdr_status shmvdr_experiment_from_file(const char* path, shmvdr_experiment** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return guarded([&] {
    *out = new shmvdr_experiment{shmvdr::pipeline::ExperimentSpec::from_file(path), {}};
  });
}

shmvdr_status shmvdr_experiment_from_json(const char* json_text, shmvdr_experiment** out) {
  if (auto s = require(json_text && out, "null argument")) return s;
  return guarded([&] {
    *out = new shmvdr_experiment{shmvdr::pipeline::ExperimentSpec::from_json_text(json_text), {}};
  });
}

void shmvdr_experiment_free(shmvdr_experiment* experiment) { delete experiment; }

shmvdr_status shmvdr_experiment_set(shmvdr_experiment* experiment, const char* key,
                                    const char* value) {
  if (auto s = require(experiment && key && value, "null argument")) return s;
  return guarded([&] { experiment->spec.set(key, value); });
}

shmvdr_status shmvdr_experiment_config(const shmvdr_experiment* experiment, char** out_json) {
  if (auto s = require(experiment && out_json, "null argument")) return s;
  return guarded([&] { *out_json = dup_string(experiment->spec.to_json().dump(2)); });
}

shmvdr_status shmvdr_experiment_run(shmvdr_experiment* experiment, const char* out_dir) {
  if (auto s = require(experiment && out_dir, "null argument")) return s;
  return guarded([&] {
    experiment->summary = shmvdr::pipeline::run(experiment->spec, out_dir).summary;
  });
}

shmvdr_status shmvdr_experiment_summary(const shmvdr_experiment* experiment, char** out_json) {
  if (auto s = require(experiment && out_json, "null argument")) return s;
  if (auto s = require(!experiment->summary.is_null(), "no run summary yet")) return s;
  return guarded([&] { *out_json = dup_string(experiment->summary.dump(2)); });
}

shmvdr_status shmvdr_experiment_simulate(const shmvdr_experiment* experiment,
                                         const char* out_dir) {
  if (auto s = require(experiment && out_dir, "null argument")) return s;
  return guarded([&] { shmvdr::pipeline::stage_simulate(experiment->spec, out_dir); });
}

shmvdr_status shmvdr_enhance(const char* sim_dir, const char* method, const char* out_dir) {
  if (auto s = require(sim_dir && method && out_dir, "null argument")) return s;
  return guarded([&] { shmvdr::pipeline::stage_enhance(sim_dir, method, out_dir); });
}

shmvdr_status shmvdr_evaluate(const char* enh_dir, const char* sim_dir, const char* out_dir) {
  if (auto s = require(enh_dir && sim_dir && out_dir, "null argument")) return s;
  return guarded([&] { shmvdr::pipeline::stage_evaluate(enh_dir, sim_dir, out_dir); });
}

shmvdr_status shmvdr_reproduce(const char* target, const char* out_dir, int threads) {
  if (auto s = require(target && out_dir, "null argument")) return s;
  return guarded([&] { shmvdr::pipeline::reproduce(target, out_dir, threads); });
}

void shmvdr_string_free(char* text) { std::free(text); }

double shmvdr_sph_bessel_j(int n, double x) {
  double value = std::numeric_limits<double>::quiet_NaN();
  guarded([&] { value = shmvdr::specfun::sph_bessel_j(n, x); });
  return value;
}

shmvdr_status shmvdr_sph_harmonic(int n, int m, double theta, double phi, double* out_re,
                                  double* out_im) {
  if (auto s = require(out_re && out_im, "null argument")) return s;
  return guarded([&] {
    const auto y = shmvdr::specfun::sph_harmonic(n, m, theta, phi);
    *out_re = y.real();
    *out_im = y.imag();
  });
}

int shmvdr_max_order(double frequency_hz, double speed_of_sound, double array_radius) {
  int order = -1;
  guarded([&] {
    order = shmvdr::specfun::max_order(
        shmvdr::specfun::wavenumber(frequency_hz, speed_of_sound), array_radius);
  });
  return order;
}

}  // extern "C"
