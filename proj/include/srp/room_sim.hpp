#pragma once
// Shoebox room simulation via the image-source method with a uniform wall
// reflection coefficient, plus microphone-signal rendering with optional
// additive noise. Everything is deterministic given the seed.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "srp/correlation.hpp"
#include "srp/geometry.hpp"

namespace srp {

// Sabine reverberation with uniform absorption over all six walls.
inline double beta_to_t60(const Vec3& size, double beta) {
  const double volume = size.x * size.y * size.z;
  const double surface = 2.0 * (size.x * size.y + size.x * size.z + size.y * size.z);
  return 0.161 * volume / (surface * (1.0 - beta * beta));
}

inline double t60_to_beta(const Vec3& size, double t60) {
  if (t60 <= 0.0) throw std::invalid_argument("t60_to_beta: reverberation time must be positive");
  const double volume = size.x * size.y * size.z;
  const double surface = 2.0 * (size.x * size.y + size.x * size.z + size.y * size.z);
  const double absorption = 0.161 * volume / (surface * t60);
  if (absorption >= 1.0)
    throw std::domain_error("t60_to_beta: target decay needs absorption above one");
  return std::sqrt(1.0 - absorption);
}

struct RoomSpec {
  Vec3 size;
  double beta = 0.0;  // uniform wall reflection coefficient
  double fs = 48000.0;
  double c = 343.0;

  RoomSpec(const Vec3& sz, double b, double sample_rate, double speed)
      : size(sz), beta(b), fs(sample_rate), c(speed) {
    if (!(size.x > 0.0 && size.y > 0.0 && size.z > 0.0))
      throw std::invalid_argument("RoomSpec: dimensions must be positive");
    if (beta < 0.0 || beta >= 1.0) throw std::invalid_argument("RoomSpec: need 0 <= beta < 1");
    if (fs <= 0.0 || c <= 0.0) throw std::invalid_argument("RoomSpec: need fs > 0 and c > 0");
  }

  static RoomSpec anechoic(const Vec3& sz, double fs, double c) { return RoomSpec(sz, 0.0, fs, c); }
  static RoomSpec from_t60(const Vec3& sz, double t60, double fs, double c) {
    return RoomSpec(sz, t60_to_beta(sz, t60), fs, c);
  }

  double t60() const { return beta == 0.0 ? 0.0 : beta_to_t60(size, beta); }

  bool contains(const Vec3& p) const {
    return p.x > 0.0 && p.x < size.x && p.y > 0.0 && p.y < size.y && p.z > 0.0 && p.z < size.z;
  }
};

struct ImageOptions {
  std::int64_t length = 0;   // impulse response samples; 0 picks 1.25 * T60
  int max_order = -1;        // cap on total reflection count; -1 means no cap
  bool fractional = false;   // windowed-sinc tap placement instead of nearest sample
};

namespace detail {

// Hann-windowed sinc spread over +-half_width samples around the arrival.
inline void place_fractional(std::vector<double>& h, double delay, double gain, double fs) {
  const std::int64_t half_width = static_cast<std::int64_t>(std::llround(0.004 * fs));
  const std::int64_t center = static_cast<std::int64_t>(std::floor(delay));
  for (std::int64_t t = center - half_width; t <= center + half_width + 1; ++t) {
    if (t < 0 || t >= static_cast<std::int64_t>(h.size())) continue;
    const double u = static_cast<double>(t) - delay;
    if (std::abs(u) > static_cast<double>(half_width)) continue;
    const double window = 0.5 * (1.0 + std::cos(std::numbers::pi * u / static_cast<double>(half_width)));
    const double sinc = u == 0.0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
    h[static_cast<std::size_t>(t)] += gain * window * sinc;
  }
}

}  // namespace detail

// Impulse response between a fixed source and microphone. Mirror sources
// are enumerated per axis out to the furthest period that can still land a
// tap inside the response length.
inline std::vector<double> image_method_rir(const RoomSpec& room, const Vec3& source,
                                            const Vec3& mic, const ImageOptions& opts = {}) {
  if (!room.contains(source)) throw std::invalid_argument("image_method_rir: source outside room");
  if (!room.contains(mic)) throw std::invalid_argument("image_method_rir: microphone outside room");

  const double direct = norm(source - mic);
  std::int64_t n = opts.length;
  if (n <= 0) {
    const std::int64_t tail = static_cast<std::int64_t>(std::llround(1.25 * room.t60() * room.fs));
    const std::int64_t reach = static_cast<std::int64_t>(std::llround(direct * room.fs / room.c)) + 65;
    n = std::max(tail, reach);
  }

  std::vector<double> h(static_cast<std::size_t>(n), 0.0);
  const double radius = static_cast<double>(n) * room.c / room.fs;
  std::int64_t periods[3];
  for (int k = 0; k < 3; ++k)
    periods[k] = static_cast<std::int64_t>(std::ceil(radius / (2.0 * room.size[k]))) + 1;

  const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
  for (std::int64_t mx = -periods[0]; mx <= periods[0]; ++mx) {
    for (std::int64_t my = -periods[1]; my <= periods[1]; ++my) {
      for (std::int64_t mz = -periods[2]; mz <= periods[2]; ++mz) {
        for (int q = 0; q <= 1; ++q) {
          for (int j = 0; j <= 1; ++j) {
            for (int k = 0; k <= 1; ++k) {
              const int order = static_cast<int>(std::llabs(2 * mx - q) + std::llabs(2 * my - j) +
                                                 std::llabs(2 * mz - k));
              if (opts.max_order >= 0 && order > opts.max_order) continue;
              const Vec3 image{(1 - 2 * q) * source.x + 2.0 * static_cast<double>(mx) * room.size.x,
                               (1 - 2 * j) * source.y + 2.0 * static_cast<double>(my) * room.size.y,
                               (1 - 2 * k) * source.z + 2.0 * static_cast<double>(mz) * room.size.z};
              const double dist = norm(image - mic);
              const double delay = dist * room.fs / room.c;
              if (delay >= static_cast<double>(n)) continue;
              const double gain = std::pow(room.beta, order) * inv4pi / dist;
              if (opts.fractional) {
                detail::place_fractional(h, delay, gain, room.fs);
              } else {
                const std::int64_t tap = std::llround(delay);
                if (tap < n) h[static_cast<std::size_t>(tap)] += gain;
              }
            }
          }
        }
      }
    }
  }
  return h;
}

struct RenderOptions {
  ImageOptions rir;
  std::optional<double> snr_db;  // per-channel noise level; absent = clean
  std::uint32_t seed = 0;
};

// Microphone signals for one source: convolve the dry signal with each
// microphone's impulse response, equalize lengths (auto-sized responses
// differ per microphone), then add independent white noise scaled to the
// requested per-channel signal-to-noise ratio.
inline std::vector<std::vector<double>> render_mic_signals(const RoomSpec& room, const Vec3& source,
                                                           std::span<const double> signal,
                                                           const MicArray& array,
                                                           const RenderOptions& opts = {}) {
  if (signal.empty()) throw std::invalid_argument("render_mic_signals: empty source signal");
  std::vector<std::vector<double>> out;
  out.reserve(array.mic_count());
  std::size_t longest = 0;
  for (std::size_t ch = 0; ch < array.mic_count(); ++ch) {
    const std::vector<double> h = image_method_rir(room, source, array.mic(ch), opts.rir);
    out.push_back(fft_convolve(signal, h));
    longest = std::max(longest, out.back().size());
  }
  for (auto& y : out) y.resize(longest, 0.0);

  if (opts.snr_db) {
    for (std::size_t ch = 0; ch < out.size(); ++ch) {
      auto& y = out[ch];
      double power = 0.0;
      for (const double v : y) power += v * v;
      power /= static_cast<double>(y.size());
      const double sigma = std::sqrt(power / std::pow(10.0, *opts.snr_db / 10.0));
      if (sigma > 0.0) {
        std::seed_seq seq{opts.seed, static_cast<std::uint32_t>(ch), 0x9e3779b9u};
        std::mt19937 rng(seq);
        std::normal_distribution<double> g(0.0, sigma);
        for (double& v : y) v += g(rng);
      }
    }
  }
  return out;
}

}  // namespace srp
