#include <shmvdr/shmvdr.h>

#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "specfun.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Handle {
  shmvdr_experiment* exp = nullptr;
  ~Handle() { shmvdr_experiment_free(exp); }
};

std::string take_string(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  shmvdr_string_free(s);
  return out;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::path("/tmp/shmvdr_capi_tests") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void make_tiny(Handle& h) {
  REQUIRE(shmvdr_experiment_preset("paper-default", &h.exp) == SHMVDR_OK);
  CHECK(shmvdr_experiment_set(h.exp, "scene.duration_s", "1.2") == SHMVDR_OK);
  CHECK(shmvdr_experiment_set(h.exp, "scene.room.t60", "0") == SHMVDR_OK);
  CHECK(shmvdr_experiment_set(h.exp, "stft.frame_size", "2048") == SHMVDR_OK);
  CHECK(shmvdr_experiment_set(h.exp, "metrics.frames", "4") == SHMVDR_OK);
}

}  // namespace

TEST_CASE("capi: version and status names") {
  CHECK(std::string(shmvdr_version()) == "0.1.0");
  CHECK(std::string(shmvdr_status_name(SHMVDR_OK)) == "ok");
  CHECK(std::string(shmvdr_status_name(SHMVDR_ERR_CONFIG)) == "config");
}

TEST_CASE("capi: construction and error reporting") {
  shmvdr_experiment* exp = nullptr;
  CHECK(shmvdr_experiment_preset(nullptr, &exp) == SHMVDR_ERR_INVALID_ARGUMENT);
  CHECK(shmvdr_experiment_preset("nope", &exp) == SHMVDR_ERR_CONFIG);
  CHECK(std::string(shmvdr_last_error()).find("preset") != std::string::npos);
  CHECK(shmvdr_experiment_from_json("{ bad", &exp) == SHMVDR_ERR_CONFIG);
  CHECK(shmvdr_experiment_from_file("/nonexistent/config.json", &exp) == SHMVDR_ERR_IO);

  Handle h;
  REQUIRE(shmvdr_experiment_preset("paper-default", &h.exp) == SHMVDR_OK);
  CHECK(shmvdr_experiment_set(h.exp, "scene.room.t60", "\"slow\"") == SHMVDR_ERR_CONFIG);
  CHECK(std::string(shmvdr_last_error()).find("t60") != std::string::npos);

  char* text = nullptr;
  CHECK(shmvdr_experiment_summary(h.exp, &text) == SHMVDR_ERR_INVALID_ARGUMENT);  // no run yet
}

TEST_CASE("capi: config overrides are visible in the resolved JSON") {
  Handle h;
  REQUIRE(shmvdr_experiment_preset("paper-default", &h.exp) == SHMVDR_OK);
  REQUIRE(shmvdr_experiment_set(h.exp, "scene.snr_db", "-5") == SHMVDR_OK);
  char* text = nullptr;
  REQUIRE(shmvdr_experiment_config(h.exp, &text) == SHMVDR_OK);
  const json cfg = json::parse(take_string(text));
  CHECK(cfg.at("scene").at("snr_db").get<double>() == -5.0);
  CHECK(cfg.at("scene").at("array").at("radius").get<double>() == 0.042);
}

TEST_CASE("capi: math utilities") {
  CHECK(shmvdr_sph_bessel_j(0, 1.0) == doctest::Approx(0.841470984807896507).epsilon(1e-12));
  CHECK(std::isnan(shmvdr_sph_bessel_j(-1, 1.0)));

  double re = 0.0, im = 0.0;
  REQUIRE(shmvdr_sph_harmonic(3, -2, 0.5, 0.9, &re, &im) == SHMVDR_OK);
  const auto want = shmvdr::specfun::sph_harmonic(3, -2, 0.5, 0.9);
  CHECK(re == doctest::Approx(want.real()).epsilon(1e-12));
  CHECK(im == doctest::Approx(want.imag()).epsilon(1e-12));
  CHECK(shmvdr_sph_harmonic(1, 2, 0.5, 0.9, &re, &im) == SHMVDR_ERR_INVALID_ARGUMENT);

  CHECK(shmvdr_max_order(3400.0, 343.0, 0.042) == 3);
  CHECK(shmvdr_max_order(-1.0, 343.0, 0.042) == -1);
}

TEST_CASE("capi: full run and summary through the C surface") {
  Handle h;
  make_tiny(h);
  REQUIRE(shmvdr_experiment_set(h.exp, "method", "proposed") == SHMVDR_OK);
  const auto dir = fresh_dir("run");
  REQUIRE(shmvdr_experiment_run(h.exp, dir.string().c_str()) == SHMVDR_OK);

  char* text = nullptr;
  REQUIRE(shmvdr_experiment_summary(h.exp, &text) == SHMVDR_OK);
  const json summary = json::parse(take_string(text));
  CHECK(std::isfinite(summary.at("methods").at("proposed").at("error_db").get<double>()));
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "metrics_proposed.csv"));
}

TEST_CASE("capi: staged pipeline through the C surface") {
  Handle h;
  make_tiny(h);
  const auto sim = fresh_dir("sim");
  const auto enh = fresh_dir("enh");
  const auto eval = fresh_dir("eval");
  REQUIRE(shmvdr_experiment_simulate(h.exp, sim.string().c_str()) == SHMVDR_OK);
  REQUIRE(shmvdr_enhance(sim.string().c_str(), "baseline", enh.string().c_str()) == SHMVDR_OK);
  REQUIRE(shmvdr_evaluate(enh.string().c_str(), sim.string().c_str(), eval.string().c_str()) ==
          SHMVDR_OK);
  CHECK(fs::exists(eval / "metrics_baseline.csv"));

  CHECK(shmvdr_enhance("/nonexistent/sim", "baseline", enh.string().c_str()) != SHMVDR_OK);
  CHECK(shmvdr_reproduce("fig9", eval.string().c_str(), 1) == SHMVDR_ERR_CONFIG);
}
