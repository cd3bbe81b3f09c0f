#pragma once

#include <Eigen/Dense>
#include <string>

namespace shmvdr::signals {

// Deterministic stand-in source material (fixed internal seeds, independent of
// the scene seed): a formant-synthesized speech-like clip and a washer-style
// machine noise. "builtin:white" is unit-RMS white noise for the accurate-ReHC
// estimation segment.
Eigen::VectorXd builtin_speech(double sample_rate, double duration_s);
Eigen::VectorXd builtin_washer(double sample_rate, double duration_s);
Eigen::VectorXd builtin_white(double sample_rate, double duration_s);

bool is_builtin(const std::string& name);

// Resolves `name` to samples: builtin token, or WAV file looked up directly,
// then under SHMVDR_DATA, then under ./data. Mono only; resampling is not
// supported, the file must match sample_rate. Loops/truncates to duration.
Eigen::VectorXd load_source(const std::string& name, double sample_rate, double duration_s);

}  // namespace shmvdr::signals
