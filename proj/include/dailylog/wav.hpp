#pragma once
// Minimal RIFF/WAV reader and writer for mono PCM16 and float32 files.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "dailylog/common.hpp"
#include "dailylog/ingest.hpp"

namespace dailylog::wav {

using ingest::AudioClip;

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
  s.push_back(static_cast<char>((v >> 16) & 0xFF));
  s.push_back(static_cast<char>((v >> 24) & 0xFF));
}

inline void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace detail

inline AudioClip parse_wav(const std::vector<unsigned char>& bytes) {
  using namespace detail;
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error("not a RIFF/WAVE file");
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_off = 0, data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t len = read_u32(bytes.data() + pos + 4);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (pos + 8 + 16 > bytes.size()) throw Error("truncated fmt chunk");
      format = read_u16(bytes.data() + pos + 8);
      channels = read_u16(bytes.data() + pos + 10);
      rate = read_u32(bytes.data() + pos + 12);
      bits = read_u16(bytes.data() + pos + 22);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = pos + 8;
      data_len = len;
      break;
    }
    pos += 8 + len + (len & 1);
  }
  if (data_off == 0) throw Error("WAV file has no data chunk");
  if (channels != 1) throw Error("only mono WAV files are supported");
  if (data_off + data_len > bytes.size()) data_len = bytes.size() - data_off;
  AudioClip clip;
  clip.sample_rate_hz = static_cast<double>(rate);
  if (format == 1 && bits == 16) {
    const std::size_t n = data_len / 2;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::int16_t v = static_cast<std::int16_t>(
          bytes[data_off + 2 * i] | (bytes[data_off + 2 * i + 1] << 8));
      clip.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    const std::size_t n = data_len / 4;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      float f;
      std::memcpy(&f, bytes.data() + data_off + 4 * i, 4);
      clip.samples[i] = f;
    }
  } else {
    throw Error("unsupported WAV encoding (need mono PCM16 or float32)");
  }
  for (double& s : clip.samples) s = std::min(1.0, std::max(-1.0, s));
  if (clip.samples.empty()) throw Error("WAV file has no samples");
  return clip;
}

inline AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open WAV file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return parse_wav(bytes);
}

inline void write_wav_pcm16(const std::string& path, const AudioClip& clip) {
  using namespace detail;
  std::string data;
  data.reserve(44 + clip.samples.size() * 2);
  const std::uint32_t rate = static_cast<std::uint32_t>(clip.sample_rate_hz);
  const std::uint32_t n_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  data += "RIFF";
  put_u32(data, 36 + n_bytes);
  data += "WAVEfmt ";
  put_u32(data, 16);
  put_u16(data, 1);  // PCM
  put_u16(data, 1);  // mono
  put_u32(data, rate);
  put_u32(data, rate * 2);
  put_u16(data, 2);
  put_u16(data, 16);
  data += "data";
  put_u32(data, n_bytes);
  for (double s : clip.samples) {
    const double c = std::min(1.0, std::max(-1.0, s));
    const auto v = static_cast<std::int16_t>(std::lround(c * 32767.0));
    put_u16(data, static_cast<std::uint16_t>(v));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write WAV file: " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

}  // namespace dailylog::wav
