// Command-line front end; talks to the library through the C API only.

#include <shmvdr/shmvdr.h>

#include <CLI11.hpp>
#include <cstdio>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace {

struct ExperimentDeleter {
  void operator()(shmvdr_experiment* e) const { shmvdr_experiment_free(e); }
};
using ExperimentPtr = std::unique_ptr<shmvdr_experiment, ExperimentDeleter>;

int fail(shmvdr_status status) {
  std::fprintf(stderr, "error (%s): %s\n", shmvdr_status_name(status), shmvdr_last_error());
  return 1;
}

struct CommonOpts {
  std::string config;
  std::string preset = "paper-default";
  std::vector<std::string> sets;
  std::string method;
  std::string out;
  std::string sweep_t60;
  std::string sweep_snr;
  long long seed = -1;
  int threads = 0;
};

void add_config_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config, "experiment config JSON file");
  cmd->add_option("--preset", opts.preset, "named preset (paper-default)");
  cmd->add_option("--set", opts.sets, "dotted-path override, e.g. scene.room.t60=0.4")
      ->take_all();
  cmd->add_option("--seed", opts.seed, "override scene.seed");
  cmd->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
}

ExperimentPtr make_experiment(const CommonOpts& opts, shmvdr_status& status) {
  shmvdr_experiment* raw = nullptr;
  status = opts.config.empty() ? shmvdr_experiment_preset(opts.preset.c_str(), &raw)
                               : shmvdr_experiment_from_file(opts.config.c_str(), &raw);
  ExperimentPtr exp(raw);
  if (status != SHMVDR_OK) return exp;
  auto set = [&](const std::string& key, const std::string& value) {
    if (status == SHMVDR_OK) status = shmvdr_experiment_set(exp.get(), key.c_str(), value.c_str());
  };
  for (const auto& kv : opts.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      status = SHMVDR_ERR_CONFIG;
      return exp;
    }
    set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.method.empty()) set("method", opts.method);
  if (opts.seed >= 0) set("scene.seed", std::to_string(opts.seed));
  if (opts.threads > 0) set("threads", std::to_string(opts.threads));
  if (!opts.sweep_t60.empty()) set("sweep.t60", "[" + opts.sweep_t60 + "]");
  if (!opts.sweep_snr.empty()) set("sweep.snr_db", "[" + opts.sweep_snr + "]");
  return exp;
}

void print_summary(const shmvdr_experiment* exp) {
  char* text = nullptr;
  if (shmvdr_experiment_summary(exp, &text) != SHMVDR_OK) return;
  const auto summary = nlohmann::json::parse(text, nullptr, false);
  shmvdr_string_free(text);
  if (summary.is_discarded()) return;

  auto print_methods = [](const nlohmann::json& methods, const std::string& label) {
    for (auto it = methods.begin(); it != methods.end(); ++it) {
      std::printf("  %-24s %s error %7.2f dB   sdr %7.2f dB   nr %7.2f dB\n", it.key().c_str(),
                  label.c_str(), it.value().value("error_db", 0.0),
                  it.value().value("sdr_db", 0.0), it.value().value("nr_db", 0.0));
    }
  };
  if (summary.contains("runs") && summary["runs"].is_array()) {
    for (const auto& r : summary["runs"]) {
      std::string label;
      if (r.contains("sweep_key"))
        label = r["sweep_key"].get<std::string>() + "=" +
                nlohmann::json(r["sweep_value"]).dump();
      print_methods(r["methods"], label);
    }
  } else if (summary.contains("methods")) {
    print_methods(summary["methods"], "");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spherical-harmonic-domain multi-output MVDR enhancement lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(shmvdr_version()));

  CommonOpts run_opts, sim_opts;
  std::string enh_in, enh_out, enh_method = "both";
  std::string eval_in, eval_sim, eval_out;
  std::string repro_target, repro_out;
  int repro_threads = 0;

  auto* run_cmd = app.add_subcommand("run", "full pipeline: simulate, enhance, evaluate");
  add_config_flags(run_cmd, run_opts);
  run_cmd->add_option("--method", run_opts.method,
                      "proposed | proposed-accurate-rehc | baseline | both | all");
  run_cmd->add_option("--sweep-t60", run_opts.sweep_t60, "comma-separated T60 values");
  run_cmd->add_option("--sweep-snr", run_opts.sweep_snr, "comma-separated SNR values (dB)");
  run_cmd->add_option("--out", run_opts.out, "output directory")->required();

  auto* sim_cmd = app.add_subcommand("simulate", "simulate the scene and cache WAVs + RIRs");
  add_config_flags(sim_cmd, sim_opts);
  sim_cmd->add_option("--method", sim_opts.method, "methods the cache should support");
  sim_cmd->add_option("--out", sim_opts.out, "output directory")->required();

  auto* enh_cmd = app.add_subcommand("enhance", "enhance a cached simulation");
  enh_cmd->add_option("--in", enh_in, "simulation directory")->required();
  enh_cmd->add_option("--method", enh_method,
                      "proposed | proposed-accurate-rehc | baseline | both | all");
  enh_cmd->add_option("--out", enh_out, "output directory")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate cached enhancement outputs");
  eval_cmd->add_option("--in", eval_in, "enhancement directory")->required();
  eval_cmd->add_option("--sim", eval_sim, "simulation directory")->required();
  eval_cmd->add_option("--out", eval_out, "output directory")->required();

  auto* repro_cmd = app.add_subcommand("reproduce", "rebuild a published figure or table");
  repro_cmd->add_option("target", repro_target, "fig2 | fig3 | table1 | table2")->required();
  repro_cmd->add_option("--out", repro_out, "output directory")->required();
  repro_cmd->add_option("--threads", repro_threads, "worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) {
    shmvdr_status status = SHMVDR_OK;
    auto exp = make_experiment(run_opts, status);
    if (status != SHMVDR_OK) return fail(status);
    status = shmvdr_experiment_run(exp.get(), run_opts.out.c_str());
    if (status != SHMVDR_OK) return fail(status);
    std::printf("run complete: %s\n", run_opts.out.c_str());
    print_summary(exp.get());
    return 0;
  }
  if (sim_cmd->parsed()) {
    shmvdr_status status = SHMVDR_OK;
    auto exp = make_experiment(sim_opts, status);
    if (status != SHMVDR_OK) return fail(status);
    status = shmvdr_experiment_simulate(exp.get(), sim_opts.out.c_str());
    if (status != SHMVDR_OK) return fail(status);
    std::printf("simulation cached: %s\n", sim_opts.out.c_str());
    return 0;
  }
  if (enh_cmd->parsed()) {
    const auto status = shmvdr_enhance(enh_in.c_str(), enh_method.c_str(), enh_out.c_str());
    if (status != SHMVDR_OK) return fail(status);
    std::printf("enhancement written: %s\n", enh_out.c_str());
    return 0;
  }
  if (eval_cmd->parsed()) {
    const auto status = shmvdr_evaluate(eval_in.c_str(), eval_sim.c_str(), eval_out.c_str());
    if (status != SHMVDR_OK) return fail(status);
    std::printf("metrics written: %s\n", eval_out.c_str());
    return 0;
  }
  if (repro_cmd->parsed()) {
    const auto status = shmvdr_reproduce(repro_target.c_str(), repro_out.c_str(), repro_threads);
    if (status != SHMVDR_OK) return fail(status);
    std::printf("%s written to %s\n", repro_target.c_str(), repro_out.c_str());
    return 0;
  }
  return 0;
}
