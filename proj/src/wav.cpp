#include "wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "error.hpp"

namespace shmvdr {

namespace {

void put_u32(std::vector<char>& v, uint32_t x) {
  v.push_back(static_cast<char>(x & 0xff));
  v.push_back(static_cast<char>((x >> 8) & 0xff));
  v.push_back(static_cast<char>((x >> 16) & 0xff));
  v.push_back(static_cast<char>((x >> 24) & 0xff));
}

void put_u16(std::vector<char>& v, uint16_t x) {
  v.push_back(static_cast<char>(x & 0xff));
  v.push_back(static_cast<char>((x >> 8) & 0xff));
}

uint32_t get_u32(const char* p) {
  uint32_t x;
  std::memcpy(&x, p, 4);
  return x;  // little-endian host assumed
}

uint16_t get_u16(const char* p) {
  uint16_t x;
  std::memcpy(&x, p, 2);
  return x;
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open WAV file: " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::Io, "not a RIFF/WAVE file: " + path);

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const char* data = nullptr;
  uint32_t data_len = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = bytes.data() + pos;
    uint32_t len = get_u32(bytes.data() + pos + 4);
    const char* body = bytes.data() + pos + 8;
    if (pos + 8 + len > bytes.size()) len = static_cast<uint32_t>(bytes.size() - pos - 8);
    if (std::memcmp(id, "fmt ", 4) == 0 && len >= 16) {
      format = get_u16(body);
      channels = get_u16(body + 2);
      rate = get_u32(body + 4);
      bits = get_u16(body + 14);
      if (format == 0xfffe && len >= 40) format = get_u16(body + 24);  // extensible
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = body;
      data_len = len;
    }
    pos += 8 + len + (len & 1);
  }
  if (!data || channels == 0) throw Error(ErrorCode::Io, "WAV missing fmt/data chunk: " + path);

  AudioBuffer out;
  out.sample_rate = rate;
  Eigen::Index frames = 0;
  if (format == 1 && bits == 16) {
    frames = data_len / (2 * channels);
    out.samples.resize(channels, frames);
    for (Eigen::Index i = 0; i < frames; ++i)
      for (int c = 0; c < channels; ++c) {
        int16_t s;
        std::memcpy(&s, data + 2 * (i * channels + c), 2);
        out.samples(c, i) = s / 32768.0;
      }
  } else if (format == 3 && bits == 32) {
    frames = data_len / (4 * channels);
    out.samples.resize(channels, frames);
    for (Eigen::Index i = 0; i < frames; ++i)
      for (int c = 0; c < channels; ++c) {
        float s;
        std::memcpy(&s, data + 4 * (i * channels + c), 4);
        out.samples(c, i) = s;
      }
  } else {
    throw Error(ErrorCode::Io, "unsupported WAV encoding (want PCM16 or float32): " + path);
  }
  return out;
}

void write_wav(const std::string& path, const AudioBuffer& audio) {
  const int channels = audio.channels();
  const Eigen::Index frames = audio.length();
  if (channels == 0) throw Error(ErrorCode::InvalidArgument, "no channels to write");
  const uint32_t data_len = static_cast<uint32_t>(4 * channels * frames);
  std::vector<char> bytes;
  bytes.reserve(58 + data_len);
  bytes.insert(bytes.end(), {'R', 'I', 'F', 'F'});
  put_u32(bytes, 50 + data_len);
  bytes.insert(bytes.end(), {'W', 'A', 'V', 'E'});
  bytes.insert(bytes.end(), {'f', 'm', 't', ' '});
  put_u32(bytes, 18);
  put_u16(bytes, 3);  // IEEE float
  put_u16(bytes, static_cast<uint16_t>(channels));
  put_u32(bytes, static_cast<uint32_t>(audio.sample_rate));
  put_u32(bytes, static_cast<uint32_t>(audio.sample_rate) * 4 * channels);
  put_u16(bytes, static_cast<uint16_t>(4 * channels));
  put_u16(bytes, 32);
  put_u16(bytes, 0);  // cbSize
  bytes.insert(bytes.end(), {'f', 'a', 'c', 't'});
  put_u32(bytes, 4);
  put_u32(bytes, static_cast<uint32_t>(frames));
  bytes.insert(bytes.end(), {'d', 'a', 't', 'a'});
  put_u32(bytes, data_len);
  for (Eigen::Index i = 0; i < frames; ++i)
    for (int c = 0; c < channels; ++c) {
      const float s = static_cast<float>(audio.samples(c, i));
      const char* p = reinterpret_cast<const char*>(&s);
      bytes.insert(bytes.end(), p, p + 4);
    }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write WAV file: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::Io, "short write to WAV file: " + path);
}

}  // namespace shmvdr
