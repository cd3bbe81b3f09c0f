#include "pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "error.hpp"

using namespace shmvdr;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

pipeline::ExperimentSpec tiny_spec(double t60 = 0.15) {
  auto spec = pipeline::ExperimentSpec::preset("paper-default");
  spec.set("scene.duration_s", "2.0");
  spec.set("scene.room.t60", std::to_string(t60));
  spec.set("stft.frame_size", "2048");
  spec.set("metrics.frames", "5");
  return spec;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::path("/tmp/shmvdr_pipeline_tests") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("experiment spec: preset, JSON roundtrip, overrides, diagnostics") {
  auto spec = pipeline::ExperimentSpec::preset("paper-default");
  CHECK(spec.scene.array.count() == 32);
  CHECK(spec.scene.room.t60 == 0.2);
  CHECK(spec.frame_size == 16384);
  CHECK(spec.metric_frames == 15);

  const auto j = spec.to_json();
  const auto back = pipeline::ExperimentSpec::from_json(j);
  CHECK(back.config_hash() == spec.config_hash());

  spec.set("scene.room.t60", "0.4");
  CHECK(spec.scene.room.t60 == 0.4);
  CHECK(spec.config_hash() != back.config_hash());
  spec.set("method", "proposed");
  CHECK(spec.methods.size() == 1);
  spec.set("sweep.t60", "[0,0.2]");
  REQUIRE(spec.sweep_t60.has_value());
  CHECK(spec.sweep_t60->size() == 2);

  CHECK_THROWS_AS(pipeline::ExperimentSpec::preset("nope"), Error);
  CHECK_THROWS_WITH_AS(spec.set("scene.room.t60", "\"fast\""),
                       doctest::Contains("scene.room.t60"), Error);
  CHECK_THROWS_WITH_AS(spec.set("metrics.observation", "cube"),
                       doctest::Contains("metrics.observation"), Error);
  CHECK_THROWS_AS(pipeline::ExperimentSpec::from_json_text("{ not json"), Error);
}

TEST_CASE("run: artifacts, summary, determinism, manifest regeneration") {
  auto spec = tiny_spec();
  const auto dir1 = fresh_dir("run1");
  const auto result = pipeline::run(spec, dir1.string());

  for (const char* f :
       {"manifest.json", "table.csv", "metrics_proposed.csv", "metrics_baseline.csv",
        "sim/mix.wav", "sim/desired.wav", "sim/interference.wav", "sim/noise.wav",
        "sim/rehc_mix_desired.wav", "sim/rirs.bin", "sim/spec.json", "proposed/d_hat.shc",
        "proposed/d_res.shc", "proposed/v_res.shc", "proposed/u_res.shc",
        "proposed/enhanced.wav", "proposed/diagnostics.csv", "baseline/d_hat.shc",
        "baseline/enhanced.wav"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir1 / f));
  }
  const auto& methods = result.summary.at("methods");
  for (const char* m : {"proposed", "baseline"}) {
    CHECK(std::isfinite(methods.at(m).at("error_db").get<double>()));
    CHECK(std::isfinite(methods.at(m).at("sdr_db").get<double>()));
    CHECK(std::isfinite(methods.at(m).at("nr_db").get<double>()));
  }

  // byte-identical rerun from the same spec
  const auto dir2 = fresh_dir("run2");
  pipeline::run(spec, dir2.string());
  CHECK(slurp((dir1 / "metrics_proposed.csv").string()) ==
        slurp((dir2 / "metrics_proposed.csv").string()));
  CHECK(slurp((dir1 / "metrics_baseline.csv").string()) ==
        slurp((dir2 / "metrics_baseline.csv").string()));
  CHECK(slurp((dir1 / "manifest.json").string()) == slurp((dir2 / "manifest.json").string()));

  // the manifest's embedded config regenerates identical outputs
  const json manifest = json::parse(slurp((dir1 / "manifest.json").string()));
  CHECK(manifest.at("config_hash") == spec.config_hash());
  const auto respec = pipeline::ExperimentSpec::from_json(manifest.at("config"));
  const auto dir3 = fresh_dir("run3");
  pipeline::run(respec, dir3.string());
  CHECK(slurp((dir1 / "metrics_proposed.csv").string()) ==
        slurp((dir3 / "metrics_proposed.csv").string()));

  // flagged bins are reported per method (empty lists are fine)
  CHECK(manifest.at("flags").contains("proposed"));
  CHECK(manifest.at("flags").contains("baseline"));
  CHECK(manifest.at("frame_selection").at("frames").size() == 5);
}

TEST_CASE("staged pipeline: simulate / enhance / evaluate round trip") {
  auto spec = tiny_spec(0.0);
  spec.set("method", "proposed");
  const auto sim_dir = fresh_dir("sim");
  const auto enh_dir = fresh_dir("enh");
  const auto eval_dir = fresh_dir("eval");

  pipeline::stage_simulate(spec, sim_dir.string());
  CHECK(fs::exists(sim_dir / "spec.json"));
  CHECK(fs::exists(sim_dir / "rirs.bin"));

  const auto enh_summary = pipeline::stage_enhance(sim_dir.string(), "proposed", enh_dir.string());
  CHECK(enh_summary.contains("proposed"));
  CHECK(fs::exists(enh_dir / "proposed/d_hat.shc"));

  const auto eval_summary =
      pipeline::stage_evaluate(enh_dir.string(), sim_dir.string(), eval_dir.string());
  CHECK(fs::exists(eval_dir / "metrics_proposed.csv"));
  CHECK(std::isfinite(eval_summary.at("proposed").at("error_db").get<double>()));

  // staged result agrees with the in-memory run (float32 WAV cache in between)
  const auto run_dir = fresh_dir("run_ref");
  const auto ref = pipeline::run(spec, run_dir.string());
  const double staged = eval_summary.at("proposed").at("error_db").get<double>();
  const double direct = ref.summary.at("methods").at("proposed").at("error_db").get<double>();
  CHECK(staged == doctest::Approx(direct).epsilon(0.02));

  CHECK_THROWS_AS(pipeline::stage_enhance(sim_dir.string(), "proposed-accurate-rehc",
                                          fresh_dir("enh2").string()),
                  Error);
}

TEST_CASE("run: sweep over t60 produces per-point directories and the sweep table") {
  auto spec = tiny_spec(0.0);
  spec.set("scene.duration_s", "1.0");
  spec.set("metrics.frames", "3");
  spec.set("sweep.t60", "[0,0.15]");
  const auto dir = fresh_dir("sweep");
  const auto result = pipeline::run(spec, dir.string());
  CHECK(fs::exists(dir / "sweep_table.csv"));
  CHECK(fs::exists(dir / "t60_0/manifest.json"));
  CHECK(fs::exists(dir / "t60_0.15/manifest.json"));
  CHECK(result.summary.at("runs").size() == 2);

  const std::string table = slurp((dir / "sweep_table.csv").string());
  CHECK(table.find("error_db@t60=0") != std::string::npos);
  CHECK(table.find("proposed") != std::string::npos);
  CHECK(table.find("baseline") != std::string::npos);
}

TEST_CASE("run: guarded bins are flagged in the manifest with a reason code") {
  // bin 256 of a 2048-point frame at 16 kHz sits at 2000 Hz; with the array
  // radius at 343/4000 m that bin lands exactly on the first zero of j_0
  auto spec = tiny_spec(0.0);
  spec.set("scene.array.radius", "0.08575");
  spec.set("band.f_low", "1960");
  spec.set("band.f_high", "2040");
  spec.set("scene.duration_s", "1.0");
  spec.set("metrics.frames", "2");
  spec.set("method", "proposed");
  const auto dir = fresh_dir("guarded");
  pipeline::run(spec, dir.string());
  const json manifest = json::parse(slurp((dir / "manifest.json").string()));
  const auto& flags = manifest.at("flags").at("proposed");
  REQUIRE(!flags.empty());
  bool found = false;
  for (const auto& f : flags) {
    if (f.at("bin").get<int>() != 256) continue;
    for (const auto& r : f.at("reasons"))
      if (r.get<std::string>() == "bessel-guarded") found = true;
  }
  CHECK(found);
  // the diagnostics CSV carries the per-bin condition numbers
  const std::string diag = slurp((dir / "proposed/diagnostics.csv").string());
  CHECK(diag.find("sht_cond") != std::string::npos);
}

TEST_CASE("reproduce: rejects unknown targets") {
  CHECK_THROWS_AS(pipeline::reproduce("fig9", fresh_dir("bad").string()), Error);
}
