#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "enhancer.hpp"
#include "metrics.hpp"
#include "scene.hpp"
#include "transforms.hpp"

namespace shmvdr::pipeline {

inline constexpr const char* kVersion = "0.1.0";

enum class Method { Proposed, ProposedAccurateRehc, Baseline };
const char* method_name(Method m);

struct ExperimentSpec {
  scene::SceneConfig scene;
  std::vector<Method> methods{Method::Proposed, Method::Baseline};
  double f_low = 300.0;
  double f_high = 3400.0;
  int frame_size = 16384;
  int metric_frames = 15;
  std::string frame_selection = "desired-energy";  // or "first"
  metrics::ObservationKind observation = metrics::ObservationKind::Sphere107;
  double sweet_radius = 0.042;
  double loading = linalg::kDefaultLoading;
  int threads = 0;
  std::optional<std::vector<double>> sweep_t60;
  std::optional<std::vector<double>> sweep_snr;

  static ExperimentSpec preset(const std::string& name);
  static ExperimentSpec from_json(const nlohmann::json& j);
  static ExperimentSpec from_file(const std::string& path);
  static ExperimentSpec from_json_text(const std::string& text);

  // dotted-path override, e.g. set("scene.room.t60", "0.4") or set("method", "both")
  void set(const std::string& key, const std::string& value);

  nlohmann::json to_json() const;
  std::string config_hash() const;  // sha256 of the canonical JSON
};

// In-memory simulation products shared by the stages.
struct SimArtifacts {
  ExperimentSpec spec;
  Eigen::VectorXd dry_desired;
  Eigen::VectorXd dry_interference_scaled;
  scene::ComponentSignals mixture;                  // d, v, u
  Eigen::MatrixXd rehc_mix_desired;                 // estimation segment, desired source active
  Eigen::MatrixXd rehc_mix_white;                   // only when accurate-ReHC requested
  std::vector<std::vector<double>> rirs_desired;
  std::vector<std::vector<double>> rirs_interference;
};

SimArtifacts simulate(const ExperimentSpec& spec);
void write_sim(const std::string& dir, const SimArtifacts& sim);
SimArtifacts read_sim(const std::string& dir);

struct MethodArtifacts {
  Method method = Method::Proposed;
  transforms::SHTensor d_hat, d_res, v_res, u_res;
  std::vector<uint8_t> flags;
  metrics::MetricReport report;
  Eigen::MatrixXd enhanced_audio;        // Q x T mic-domain reconstruction
  nlohmann::json diagnostics;            // per-bin extras for the CSV
};

// Shared transform products for one simulated scene.
struct TransformContext {
  transforms::StftParams params;
  transforms::BandPlan band;
  transforms::TFTensor X, D, V, U;
  transforms::SHTensor xs, ds, vs, us;
  enhancer::PSDSet psd_sh;
  std::vector<Eigen::MatrixXcd> psd_tf_interference_noise;
  double doa_theta = 0.0, doa_phi = 0.0;
};

TransformContext build_transforms(const SimArtifacts& sim);
MethodArtifacts run_method(const SimArtifacts& sim, TransformContext& ctx, Method method);

struct RunResult {
  nlohmann::json summary;
};

// Full pipeline: simulate -> transform -> enhance per method -> metrics,
// writing WAVs, containers, CSVs, heatmap-ready data and a JSON manifest.
// Handles sweeps by running each point into a subdirectory.
RunResult run(const ExperimentSpec& spec, const std::string& out_dir);

// Staged entry points operating through the cached file formats.
void stage_simulate(const ExperimentSpec& spec, const std::string& out_dir);
nlohmann::json stage_enhance(const std::string& sim_dir, const std::string& method,
                             const std::string& out_dir);
nlohmann::json stage_evaluate(const std::string& enh_dir, const std::string& sim_dir,
                              const std::string& out_dir);

// fig2 | fig3 | table1 | table2 on the paper-default preset.
RunResult reproduce(const std::string& target, const std::string& out_dir, int threads = 0);

std::string sha256_hex(const std::string& bytes);

}  // namespace shmvdr::pipeline
