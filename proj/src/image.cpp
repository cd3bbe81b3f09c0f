#include "image.hpp"

#include <zlib.h>

#include <cstdint>
#include <fstream>
#include <vector>

#include "error.hpp"

namespace shmvdr::image {

namespace {

std::vector<uint8_t> to_pixels(const Eigen::MatrixXd& values, const GrayMap& map) {
  std::vector<uint8_t> px(values.size());
  const double span = map.hi - map.lo;
  size_t i = 0;
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      double t = span != 0.0 ? (values(r, c) - map.lo) / span : 0.0;
      t = std::min(1.0, std::max(0.0, t));
      px[i++] = static_cast<uint8_t>(std::lround(t * 255.0));
    }
  return px;
}

void put_be32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(static_cast<uint8_t>(x >> 24));
  v.push_back(static_cast<uint8_t>(x >> 16));
  v.push_back(static_cast<uint8_t>(x >> 8));
  v.push_back(static_cast<uint8_t>(x));
}

void put_chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& data) {
  put_be32(out, static_cast<uint32_t>(data.size()));
  const size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
  put_be32(out, static_cast<uint32_t>(crc));
}

}  // namespace

void write_pgm(const std::string& path, const Eigen::MatrixXd& values, const GrayMap& map) {
  const auto px = to_pixels(values, map);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write PGM: " + path);
  f << "P5\n" << values.cols() << ' ' << values.rows() << "\n255\n";
  f.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!f) throw Error(ErrorCode::Io, "short write to PGM: " + path);
}

void write_png(const std::string& path, const Eigen::MatrixXd& values, const GrayMap& map) {
  const auto px = to_pixels(values, map);
  const auto w = static_cast<uint32_t>(values.cols());
  const auto h = static_cast<uint32_t>(values.rows());

  // raw scanlines, filter byte 0 per row
  std::vector<uint8_t> raw;
  raw.reserve((w + 1) * h);
  for (uint32_t r = 0; r < h; ++r) {
    raw.push_back(0);
    raw.insert(raw.end(), px.begin() + static_cast<size_t>(r) * w,
               px.begin() + static_cast<size_t>(r + 1) * w);
  }
  uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> comp(comp_len);
  if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw Error(ErrorCode::Internal, "deflate failed for PNG: " + path);
  comp.resize(comp_len);

  std::vector<uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<uint8_t> ihdr;
  put_be32(ihdr, w);
  put_be32(ihdr, h);
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", comp);
  put_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write PNG: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::Io, "short write to PNG: " + path);
}

}  // namespace shmvdr::image
