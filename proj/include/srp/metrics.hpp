#pragma once
// Localization error statistics: per-frame Euclidean errors over the
// configured coordinate count, summarized as mean, median, and a 5-cm
// histogram whose last bin collects everything past 30 cm.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "srp/geometry.hpp"

namespace srp {

inline constexpr double kHistogramBinCm = 5.0;
inline constexpr std::size_t kHistogramBins = 7;  // six 5-cm bins plus overflow

struct ErrorStats {
  std::vector<double> errors_cm;                     // per estimate, input order
  double mean_cm = 0.0;
  double median_cm = 0.0;
  std::array<std::uint64_t, kHistogramBins> histogram{};  // [0,5) .. [25,30), then >=30
};

// dims = 2 ignores z (linear-array experiments); dims = 3 is the full
// Euclidean distance.
inline ErrorStats error_metrics(std::span<const Vec3> estimates, std::span<const Vec3> truths,
                                int dims) {
  if (estimates.size() != truths.size())
    throw std::invalid_argument("error_metrics: length mismatch");
  if (estimates.empty()) throw std::invalid_argument("error_metrics: no estimates");
  if (dims != 2 && dims != 3) throw std::invalid_argument("error_metrics: dims must be 2 or 3");

  ErrorStats stats;
  stats.errors_cm.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const Vec3 d = estimates[i] - truths[i];
    const double sq = d.x * d.x + d.y * d.y + (dims == 3 ? d.z * d.z : 0.0);
    stats.errors_cm.push_back(std::sqrt(sq) * 100.0);
  }

  double sum = 0.0;
  for (const double e : stats.errors_cm) {
    sum += e;
    const auto bin = static_cast<std::size_t>(e / kHistogramBinCm);
    ++stats.histogram[std::min(bin, kHistogramBins - 1)];
  }
  stats.mean_cm = sum / static_cast<double>(stats.errors_cm.size());

  std::vector<double> sorted = stats.errors_cm;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  stats.median_cm = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return stats;
}

}  // namespace srp
