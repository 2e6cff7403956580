#pragma once
// Frame extraction and generalized cross-correlation. Correlations are
// evaluated once per frame over a symmetric lag window and then read by the
// search stages; the lag window must cover every table lag, which callers
// validate once up front.
//
// Sign convention: a positive lag means the second channel of a pair
// arrives later, matching the sign of the geometric TDoA.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "srp/geometry.hpp"

namespace srp {

// Sliding frames, rectangular window.
struct FramePlan {
  std::size_t frame_length = 4096;
  std::size_t hop = 2048;
};

inline std::size_t frame_count(const FramePlan& plan, std::size_t samples) {
  if (plan.frame_length == 0 || plan.hop == 0 || plan.hop > plan.frame_length)
    throw std::invalid_argument("FramePlan: need 0 < hop <= frame_length");
  if (samples < plan.frame_length) return 0;
  return (samples - plan.frame_length) / plan.hop + 1;
}

inline std::span<const double> frame_view(const FramePlan& plan, std::span<const double> x,
                                          std::size_t f) {
  if (f >= frame_count(plan, x.size())) throw std::out_of_range("frame_view: frame index");
  return x.subspan(f * plan.hop, plan.frame_length);
}

// Direct-sum cross-correlation over a symmetric lag window; the reference
// the transform path is checked against.
inline std::vector<double> cross_correlation_time(std::span<const double> s1,
                                                  std::span<const double> s2, int max_lag) {
  if (s1.size() != s2.size()) throw std::invalid_argument("cross_correlation_time: length mismatch");
  if (max_lag < 0) throw std::invalid_argument("cross_correlation_time: negative lag window");
  const std::int64_t n = static_cast<std::int64_t>(s1.size());
  std::vector<double> out(2 * static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int z = -max_lag; z <= max_lag; ++z) {
    const std::int64_t lo = std::max<std::int64_t>(0, -z);
    const std::int64_t hi = std::min<std::int64_t>(n, n - z);
    double acc = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) acc += s1[static_cast<std::size_t>(i)] *
                                                  s2[static_cast<std::size_t>(i + z)];
    out[static_cast<std::size_t>(z + max_lag)] = acc;
  }
  return out;
}

// One-size real FFT pair (forward r2c, inverse c2r), planned once.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    if (n_ == 0) throw std::invalid_argument("RealFft: zero length");
    buf_ = fftw_alloc_real(n_);
    spec_ = fftw_alloc_complex(n_ / 2 + 1);
    if (!buf_ || !spec_) throw std::bad_alloc();
    fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), buf_, spec_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec_, buf_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
    fftw_free(spec_);
  }

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // Zero-pads the input to the transform length.
  void forward(std::span<const double> in, std::complex<double>* out) {
    if (in.size() > n_) throw std::invalid_argument("RealFft::forward: input longer than transform");
    std::memcpy(buf_, in.data(), in.size() * sizeof(double));
    std::memset(buf_ + in.size(), 0, (n_ - in.size()) * sizeof(double));
    fftw_execute(fwd_);
    std::memcpy(out, spec_, bins() * sizeof(std::complex<double>));
  }

  // Unnormalized inverse; divide by size() to invert forward().
  void inverse(const std::complex<double>* in, double* out) {
    std::memcpy(spec_, in, bins() * sizeof(std::complex<double>));
    fftw_execute(inv_);
    std::memcpy(out, buf_, n_ * sizeof(double));
  }

 private:
  std::size_t n_;
  double* buf_;
  fftw_complex* spec_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

// Per-frame correlations for every pair, stored row-major over a symmetric
// lag window. Row pointers let the search loops index lags directly.
class CorrelationSet {
 public:
  CorrelationSet(std::size_t pairs, int max_lag)
      : pairs_(pairs),
        max_lag_(max_lag),
        width_(2 * static_cast<std::size_t>(max_lag) + 1),
        values_(pairs * width_, 0.0),
        degenerate_(pairs, 0) {
    if (max_lag < 0) throw std::invalid_argument("CorrelationSet: negative lag window");
  }

  std::size_t pair_count() const { return pairs_; }
  int max_lag() const { return max_lag_; }

  // Base pointer such that row(p)[z] is the correlation at lag z for
  // z in [-max_lag, max_lag].
  const double* row(std::size_t p) const { return values_.data() + p * width_ + max_lag_; }
  double* row(std::size_t p) { return values_.data() + p * width_ + max_lag_; }

  double value(std::size_t p, int lag) const {
    if (lag < -max_lag_ || lag > max_lag_) throw std::out_of_range("CorrelationSet: lag");
    return row(p)[lag];
  }

  bool degenerate(std::size_t p) const { return degenerate_[p] != 0; }
  void set_degenerate(std::size_t p, bool d) { degenerate_[p] = d ? 1 : 0; }
  bool any_degenerate() const {
    return std::any_of(degenerate_.begin(), degenerate_.end(), [](std::uint8_t d) { return d != 0; });
  }

 private:
  std::size_t pairs_;
  int max_lag_;
  std::size_t width_;
  std::vector<double> values_;
  std::vector<std::uint8_t> degenerate_;
};

namespace detail {
inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}
}  // namespace detail

// Transform-domain correlator for fixed frame length and lag window.
// Spectra are computed once per channel, then combined per pair; the
// optional magnitude weighting whitens each cross-spectrum bin.
class GccEngine {
 public:
  GccEngine(std::size_t frame_length, int max_lag, bool phat)
      : frame_(frame_length),
        zmax_(max_lag),
        phat_(phat),
        fft_len_(detail::next_pow2(2 * std::max(frame_length, static_cast<std::size_t>(max_lag) + 1))),
        fft_(fft_len_),
        cross_(fft_len_ / 2 + 1),
        corr_(fft_len_) {
    if (frame_ == 0) throw std::invalid_argument("GccEngine: zero frame length");
    if (zmax_ < 0) throw std::invalid_argument("GccEngine: negative lag window");
  }

  std::size_t frame_length() const { return frame_; }
  int max_lag() const { return zmax_; }
  bool phat() const { return phat_; }

  CorrelationSet compute(const std::vector<std::span<const double>>& channels,
                         std::span<const MicPair> pairs) {
    const std::size_t bins = fft_.bins();
    spectra_.resize(channels.size() * bins);
    for (std::size_t ch = 0; ch < channels.size(); ++ch) {
      if (channels[ch].size() != frame_)
        throw std::invalid_argument("GccEngine: channel frame length mismatch");
      fft_.forward(channels[ch], spectra_.data() + ch * bins);
    }

    CorrelationSet out(pairs.size(), zmax_);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const MicPair pr = pairs[p];
      if (pr.m1 < 0 || pr.m2 < 0 || static_cast<std::size_t>(pr.m1) >= channels.size() ||
          static_cast<std::size_t>(pr.m2) >= channels.size())
        throw std::out_of_range("GccEngine: pair channel index");
      const std::complex<double>* a = spectra_.data() + static_cast<std::size_t>(pr.m1) * bins;
      const std::complex<double>* b = spectra_.data() + static_cast<std::size_t>(pr.m2) * bins;
      for (std::size_t k = 0; k < bins; ++k) cross_[k] = std::conj(a[k]) * b[k];

      double peak = 0.0;
      for (std::size_t k = 0; k < bins; ++k) peak = std::max(peak, std::abs(cross_[k]));
      if (peak == 0.0) {
        out.set_degenerate(p, true);
        continue;  // row stays zero
      }
      if (phat_) {
        const double floor = 1e-12 * peak;
        for (std::size_t k = 0; k < bins; ++k) {
          const double mag = std::abs(cross_[k]);
          cross_[k] = mag <= floor ? 0.0 : cross_[k] / mag;
        }
      }

      fft_.inverse(cross_.data(), corr_.data());
      const double scale = 1.0 / static_cast<double>(fft_len_);
      double* row = out.row(p);
      for (int z = -zmax_; z <= zmax_; ++z) {
        const std::size_t src = static_cast<std::size_t>(
            z >= 0 ? static_cast<std::int64_t>(z) : static_cast<std::int64_t>(fft_len_) + z);
        row[z] = corr_[src] * scale;
      }
    }
    return out;
  }

 private:
  std::size_t frame_;
  int zmax_;
  bool phat_;
  std::size_t fft_len_;
  RealFft fft_;
  std::vector<std::complex<double>> spectra_;
  std::vector<std::complex<double>> cross_;
  std::vector<double> corr_;
};

struct GccResult {
  std::vector<double> values;  // lags -max_lag..max_lag
  bool degenerate = false;
};

// Single-pair convenience wrapper.
inline GccResult gcc(std::span<const double> s1, std::span<const double> s2, int max_lag,
                     bool phat) {
  if (s1.size() != s2.size()) throw std::invalid_argument("gcc: length mismatch");
  GccEngine engine(s1.size(), max_lag, phat);
  const MicPair pair{0, 1};
  const CorrelationSet set = engine.compute({s1, s2}, std::span<const MicPair>(&pair, 1));
  GccResult r;
  r.values.assign(set.row(0) - max_lag, set.row(0) + max_lag + 1);
  r.degenerate = set.degenerate(0);
  return r;
}

// Lag window wide enough for every source position the array can see, plus
// a safety margin in samples.
inline int correlation_max_lag(const MicArray& array, double fs, double c, int margin = 8) {
  const double baseline = array.max_baseline();
  return static_cast<int>(std::llround(baseline * fs / c)) + margin;
}

// Full linear convolution, length a.size() + b.size() - 1.
inline std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("fft_convolve: empty input");
  const std::size_t out_len = a.size() + b.size() - 1;
  RealFft fft(detail::next_pow2(out_len));
  std::vector<std::complex<double>> sa(fft.bins()), sb(fft.bins());
  fft.forward(a, sa.data());
  fft.forward(b, sb.data());
  for (std::size_t k = 0; k < fft.bins(); ++k) sa[k] *= sb[k];
  std::vector<double> full(fft.size());
  fft.inverse(sa.data(), full.data());
  const double scale = 1.0 / static_cast<double>(fft.size());
  full.resize(out_len);
  for (double& v : full) v *= scale;
  return full;
}

}  // namespace srp
