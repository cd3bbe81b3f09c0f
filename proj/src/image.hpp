#pragma once

#include <Eigen/Dense>
#include <string>

namespace shmvdr::image {

// value -> pixel mapping is linear from lo (black) to hi (white), clamped
struct GrayMap {
  double lo = -40.0;
  double hi = 0.0;
};

// Binary PGM (P5), bit-exact and easy to golden-test.
void write_pgm(const std::string& path, const Eigen::MatrixXd& values, const GrayMap& map);

// Grayscale 8-bit PNG of the same mapping (zlib-compressed).
void write_png(const std::string& path, const Eigen::MatrixXd& values, const GrayMap& map);

}  // namespace shmvdr::image
