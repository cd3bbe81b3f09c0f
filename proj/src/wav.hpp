#pragma once

#include <Eigen/Dense>
#include <string>

namespace shmvdr {

// channels x samples, one row per channel
struct AudioBuffer {
  Eigen::MatrixXd samples;
  double sample_rate = 16000.0;

  int channels() const { return static_cast<int>(samples.rows()); }
  Eigen::Index length() const { return samples.cols(); }
};

// RIFF/WAVE: reads PCM16 and IEEE float32; writes IEEE float32.
AudioBuffer read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioBuffer& audio);

}  // namespace shmvdr
