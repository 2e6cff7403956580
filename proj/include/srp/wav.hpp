#pragma once
// Multichannel WAV interchange, integer PCM at 16 or 24 bits. Samples are
// doubles in [-1, 1]; writing clamps, reading rescales by the same
// symmetric full-scale factor so a round trip is lossless up to
// quantization.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

namespace srp {

struct WavData {
  std::vector<std::vector<double>> channels;
  double fs = 0.0;
  int bits = 0;
};

namespace detail {

inline void put_u16(std::ofstream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)};
  out.write(b, 2);
}
inline void put_u32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::int32_t quantize(double v, std::int32_t full_scale) {
  if (v > 1.0) v = 1.0;
  if (v < -1.0) v = -1.0;
  return static_cast<std::int32_t>(std::llround(v * full_scale));
}

}  // namespace detail

inline void write_wav(const std::string& path, const std::vector<std::vector<double>>& channels,
                      double fs, int bits = 16) {
  if (channels.empty() || channels[0].empty())
    throw std::invalid_argument("write_wav: no samples");
  if (bits != 16 && bits != 24) throw std::invalid_argument("write_wav: bits must be 16 or 24");
  if (fs <= 0.0) throw std::invalid_argument("write_wav: bad sample rate");
  const std::size_t frames = channels[0].size();
  for (const auto& ch : channels)
    if (ch.size() != frames) throw std::invalid_argument("write_wav: channel length mismatch");

  const auto n_ch = static_cast<std::uint16_t>(channels.size());
  const auto rate = static_cast<std::uint32_t>(std::llround(fs));
  const std::uint16_t sample_bytes = static_cast<std::uint16_t>(bits / 8);
  const std::uint16_t block = static_cast<std::uint16_t>(n_ch * sample_bytes);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * block);
  const std::int32_t full_scale = bits == 16 ? 32767 : 8388607;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_wav: cannot open " + path);
  out.write("RIFF", 4);
  detail::put_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);  // integer PCM
  detail::put_u16(out, n_ch);
  detail::put_u32(out, rate);
  detail::put_u32(out, rate * block);
  detail::put_u16(out, block);
  detail::put_u16(out, static_cast<std::uint16_t>(bits));
  out.write("data", 4);
  detail::put_u32(out, data_bytes);

  for (std::size_t t = 0; t < frames; ++t) {
    for (const auto& ch : channels) {
      const std::int32_t q = detail::quantize(ch[t], full_scale);
      const char b[3] = {static_cast<char>(q & 0xFF), static_cast<char>((q >> 8) & 0xFF),
                         static_cast<char>((q >> 16) & 0xFF)};
      out.write(b, sample_bytes);
    }
  }
  if (!out) throw std::runtime_error("write_wav: write failed for " + path);
}

inline WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_wav: cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("read_wav: not a RIFF/WAVE file: " + path);

  WavData wav;
  std::uint16_t n_ch = 0, block = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = detail::get_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size())
      throw std::runtime_error("read_wav: truncated chunk in " + path);

    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw std::runtime_error("read_wav: short fmt chunk in " + path);
      const std::uint16_t codec = detail::get_u16(bytes.data() + body);
      n_ch = detail::get_u16(bytes.data() + body + 2);
      wav.fs = static_cast<double>(detail::get_u32(bytes.data() + body + 4));
      block = detail::get_u16(bytes.data() + body + 12);
      wav.bits = detail::get_u16(bytes.data() + body + 14);
      if (codec != 1) throw std::runtime_error("read_wav: only integer PCM supported: " + path);
      if (wav.bits != 16 && wav.bits != 24)
        throw std::runtime_error("read_wav: only 16/24-bit PCM supported: " + path);
      if (n_ch == 0 || block != n_ch * wav.bits / 8)
        throw std::runtime_error("read_wav: inconsistent fmt chunk in " + path);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw std::runtime_error("read_wav: data before fmt in " + path);
      if (size % block != 0)
        throw std::runtime_error("read_wav: data length not a whole number of frames: " + path);
      const std::size_t frames = size / block;
      const std::size_t sample_bytes = static_cast<std::size_t>(wav.bits) / 8;
      const double scale = wav.bits == 16 ? 1.0 / 32767.0 : 1.0 / 8388607.0;
      wav.channels.assign(n_ch, std::vector<double>(frames));
      const unsigned char* p = bytes.data() + body;
      for (std::size_t t = 0; t < frames; ++t) {
        for (std::uint16_t ch = 0; ch < n_ch; ++ch) {
          std::int32_t q;
          if (sample_bytes == 2) {
            q = static_cast<std::int16_t>(p[0] | (p[1] << 8));
          } else {
            q = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
            if (q & 0x800000) q -= 0x1000000;  // sign-extend 24-bit
          }
          wav.channels[ch][t] = static_cast<double>(q) * scale;
          p += sample_bytes;
        }
      }
      return wav;
    }
    pos = body + size + (size & 1);  // chunks are word-aligned
  }
  throw std::runtime_error("read_wav: no data chunk in " + path);
}

}  // namespace srp
