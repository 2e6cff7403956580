#pragma once
// Steered-response-power search strategies over precomputed lag tables:
// dense point search, volumetric search over deduplicated lag sets, the
// two-stage coarse-to-fine search, and the contiguous-range variant driven
// by local TDoA gradients.
//
// Ties break toward the lowest element index (strict improvement only).
// Every search reports the additions its objective evaluation actually
// performed, counted inside the loops; combining k terms costs k - 1.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "srp/correlation.hpp"
#include "srp/geometry.hpp"
#include "srp/lag_tables.hpp"

namespace srp {

struct Estimate {
  Vec3 position{0.0, 0.0, 0.0};
  double score = 0.0;
  std::int64_t index = -1;
};

// The correlation window must cover every lag a search will read; checked
// once here so the scoring loops can index unchecked.
inline void validate_lag_window(int min_lag, int max_lag, const CorrelationSet& corr) {
  if (min_lag < -corr.max_lag() || max_lag > corr.max_lag())
    throw std::runtime_error("correlation lag window does not cover the search lags");
}

inline void validate_lag_window(const PointLagTable& table, const CorrelationSet& corr) {
  if (table.pair_count() != corr.pair_count())
    throw std::invalid_argument("pair count mismatch between table and correlations");
  validate_lag_window(table.min_lag(), table.max_lag(), corr);
}

inline void validate_lag_window(const VolumeLagSets& sets, const CorrelationSet& corr) {
  if (sets.pair_count() != corr.pair_count())
    throw std::invalid_argument("pair count mismatch between lag sets and correlations");
  validate_lag_window(sets.min_lag(), sets.max_lag(), corr);
}

struct PointSearchResult {
  Estimate best;
  std::uint64_t additions = 0;
};

// Dense search: every grid point scores the sum of its per-pair
// correlations at the tabulated lags.
inline PointSearchResult csrp_localize(const PointLagTable& table, const PointGrid& grid,
                                       const CorrelationSet& corr) {
  if (table.point_count() != grid.size())
    throw std::invalid_argument("csrp_localize: table does not match the grid");
  validate_lag_window(table, corr);

  const std::size_t pairs = table.pair_count();
  std::vector<const double*> rows(pairs);
  for (std::size_t p = 0; p < pairs; ++p) rows[p] = corr.row(p);

  PointSearchResult res;
  double best = 0.0;
  std::int64_t best_i = -1;
  std::uint64_t adds = 0;
  const std::int64_t n = table.point_count();
  for (std::int64_t i = 0; i < n; ++i) {
    const lag_t* lags = table.point_row(i);
    double acc = rows[0][lags[0]];
    for (std::size_t p = 1; p < pairs; ++p) {
      acc += rows[p][lags[p]];
      ++adds;
    }
    if (best_i < 0 || acc > best) {
      best = acc;
      best_i = i;
    }
  }
  res.best = {grid.point(best_i), best, best_i};
  res.additions = adds;
  return res;
}

// Score of every grid point, same evaluation as the dense search.
inline std::vector<double> point_scores(const PointLagTable& table, const CorrelationSet& corr) {
  validate_lag_window(table, corr);
  const std::size_t pairs = table.pair_count();
  std::vector<const double*> rows(pairs);
  for (std::size_t p = 0; p < pairs; ++p) rows[p] = corr.row(p);
  std::vector<double> scores(static_cast<std::size_t>(table.point_count()));
  for (std::int64_t i = 0; i < table.point_count(); ++i) {
    const lag_t* lags = table.point_row(i);
    double acc = rows[0][lags[0]];
    for (std::size_t p = 1; p < pairs; ++p) acc += rows[p][lags[p]];
    scores[static_cast<std::size_t>(i)] = acc;
  }
  return scores;
}

struct VolumeSearchResult {
  std::int64_t volume = -1;
  Vec3 center{0.0, 0.0, 0.0};
  double score = 0.0;
  std::uint64_t additions = 0;
};

// Volumetric search: each volume scores the sum of its per-pair lag sets,
// every distinct lag contributing once.
inline VolumeSearchResult vsrp_localize(const VolumeLagSets& sets, const VolumetricGrid& vgrid,
                                        const CorrelationSet& corr) {
  if (sets.volume_count() != vgrid.volume_count())
    throw std::invalid_argument("vsrp_localize: lag sets do not match the volume grid");
  validate_lag_window(sets, corr);

  const std::size_t pairs = sets.pair_count();
  std::vector<const double*> rows(pairs);
  for (std::size_t p = 0; p < pairs; ++p) rows[p] = corr.row(p);

  VolumeSearchResult res;
  double best = 0.0;
  std::int64_t best_v = -1;
  std::uint64_t adds = 0;
  const std::int64_t n = sets.volume_count();
  for (std::int64_t v = 0; v < n; ++v) {
    double acc = 0.0;
    bool first = true;
    for (std::size_t p = 0; p < pairs; ++p) {
      const double* row = rows[p];
      for (const lag_t z : sets.entry(v, p)) {
        if (first) {
          acc = row[z];
          first = false;
        } else {
          acc += row[z];
          ++adds;
        }
      }
    }
    if (best_v < 0 || acc > best) {
      best = acc;
      best_v = v;
    }
  }
  res.volume = best_v;
  res.center = vgrid.center(best_v);
  res.score = best;
  res.additions = adds;
  return res;
}

struct TwoStageResult {
  Estimate best;            // refined position; index is the refine-lattice index
  std::int64_t volume = -1; // stage-one winner
  std::uint64_t stage1_additions = 0;
  std::uint64_t stage2_additions = 0;
  std::uint64_t additions() const { return stage1_additions + stage2_additions; }
};

// Two-stage search: volumetric pass over the whole region, then a dense
// pass across the winning volume with TDoAs computed on the fly.
inline TwoStageResult rvsrp_localize(const VolumeLagSets& sets, const VolumetricGrid& vgrid,
                                     const MicArray& array, const CorrelationSet& corr, double fs,
                                     double c, double refine_spacing, bool closed_refine = true) {
  if (refine_spacing <= 0.0) throw std::invalid_argument("rvsrp_localize: refine spacing");
  const int reach = static_cast<int>(std::llround(array.max_baseline() * fs / c));
  validate_lag_window(-reach, reach, corr);

  const VolumeSearchResult coarse = vsrp_localize(sets, vgrid, corr);
  const VolumeBox box = vgrid.box(coarse.volume);

  const std::size_t pairs = array.pair_count();
  std::vector<const double*> rows(pairs);
  for (std::size_t p = 0; p < pairs; ++p) rows[p] = corr.row(p);

  std::int64_t counts[3];
  for (int k = 0; k < 3; ++k) {
    counts[k] = vgrid.region().axis_degenerate(k)
                    ? 1
                    : refine_axis_points(box.upper[k] - box.lower[k], refine_spacing,
                                         closed_refine);
  }

  TwoStageResult res;
  res.volume = coarse.volume;
  res.stage1_additions = coarse.additions;

  double best = 0.0;
  std::int64_t best_i = -1;
  Vec3 best_pos{0.0, 0.0, 0.0};
  std::uint64_t adds = 0;
  std::int64_t linear = 0;
  for (std::int64_t iz = 0; iz < counts[2]; ++iz) {
    for (std::int64_t iy = 0; iy < counts[1]; ++iy) {
      for (std::int64_t ix = 0; ix < counts[0]; ++ix, ++linear) {
        const Vec3 x{box.lower.x + static_cast<double>(ix) * refine_spacing,
                     box.lower.y + static_cast<double>(iy) * refine_spacing,
                     box.lower.z + static_cast<double>(iz) * refine_spacing};
        double acc = rows[0][array.tdoa(x, 0, fs, c)];
        for (std::size_t p = 1; p < pairs; ++p) {
          acc += rows[p][array.tdoa(x, p, fs, c)];
          ++adds;
        }
        if (best_i < 0 || acc > best) {
          best = acc;
          best_i = linear;
          best_pos = x;
        }
      }
    }
  }
  res.best = {best_pos, best, best_i};
  res.stage2_additions = adds;
  return res;
}

struct MsrpBounds {
  int lo = 0;
  int hi = 0;
  bool clipped = false;
};

// Lag range subtended by a cube of side r centered at x, from the local
// TDoA gradient: the extreme delays sit where the level planes exit the
// cube. The range is clipped to the lags the pair can physically produce.
inline MsrpBounds msrp_lag_bounds(const Vec3& x, const Vec3& m1, const Vec3& m2, double fs,
                                  double c, double r) {
  if (r <= 0.0) throw std::invalid_argument("msrp_lag_bounds: cube side must be positive");
  const Vec3 d2 = x - m2;
  const Vec3 d1 = x - m1;
  const double n2 = norm(d2);
  const double n1 = norm(d1);
  if (n1 == 0.0 || n2 == 0.0)
    throw std::invalid_argument("msrp_lag_bounds: point coincides with a microphone");

  const double tau = (n2 - n1) / c;
  const Vec3 grad{(d2.x / n2 - d1.x / n1) / c, (d2.y / n2 - d1.y / n1) / c,
                  (d2.z / n2 - d1.z / n1) / c};
  const double gnorm = norm(grad);

  MsrpBounds b;
  if (gnorm < 1e-15) {
    b.lo = b.hi = static_cast<int>(std::llround(tau * fs));
  } else {
    const double umax =
        std::max({std::abs(grad.x), std::abs(grad.y), std::abs(grad.z)}) / gnorm;
    const double reach = gnorm * (0.5 * r) / umax;
    b.lo = static_cast<int>(std::llround((tau - reach) * fs));
    b.hi = static_cast<int>(std::llround((tau + reach) * fs));
  }

  const int limit = static_cast<int>(std::llround(norm(m2 - m1) * fs / c));
  if (b.lo < -limit) {
    b.lo = -limit;
    b.clipped = true;
  }
  if (b.hi > limit) {
    b.hi = limit;
    b.clipped = true;
  }
  return b;
}

struct RangeSearchResult {
  std::int64_t volume = -1;
  Vec3 center{0.0, 0.0, 0.0};
  double score = 0.0;
  std::uint64_t additions = 0;
  std::uint64_t clipped_ranges = 0;
};

// Contiguous-range search: each volume sums whole lag intervals around its
// center instead of the exact member lag sets.
inline RangeSearchResult msrp_localize(const VolumetricGrid& vgrid, const MicArray& array,
                                       const CorrelationSet& corr, double fs, double c) {
  if (array.pair_count() != corr.pair_count())
    throw std::invalid_argument("msrp_localize: pair count mismatch");
  const int reach = static_cast<int>(std::llround(array.max_baseline() * fs / c));
  validate_lag_window(-reach, reach, corr);

  const std::size_t pairs = array.pair_count();
  std::vector<const double*> rows(pairs);
  for (std::size_t p = 0; p < pairs; ++p) rows[p] = corr.row(p);

  RangeSearchResult res;
  double best = 0.0;
  std::int64_t best_v = -1;
  std::uint64_t adds = 0, clipped = 0;
  const double r = vgrid.edge();
  const std::int64_t n = vgrid.volume_count();
  for (std::int64_t v = 0; v < n; ++v) {
    const Vec3 x = vgrid.center(v);
    double acc = 0.0;
    bool first = true;
    for (std::size_t p = 0; p < pairs; ++p) {
      const MicPair pr = array.pair(p);
      const MsrpBounds b = msrp_lag_bounds(x, array.mic(static_cast<std::size_t>(pr.m1)),
                                           array.mic(static_cast<std::size_t>(pr.m2)), fs, c, r);
      if (b.clipped) ++clipped;
      const double* row = rows[p];
      for (int z = b.lo; z <= b.hi; ++z) {
        if (first) {
          acc = row[z];
          first = false;
        } else {
          acc += row[z];
          ++adds;
        }
      }
    }
    if (best_v < 0 || acc > best) {
      best = acc;
      best_v = v;
    }
  }
  res.volume = best_v;
  res.center = vgrid.center(best_v);
  res.score = best;
  res.additions = adds;
  res.clipped_ranges = clipped;
  return res;
}

// Additions the contiguous-range search will perform, from the same bounds.
inline std::uint64_t predict_ops_msrp(const VolumetricGrid& vgrid, const MicArray& array,
                                      double fs, double c) {
  const std::size_t pairs = array.pair_count();
  const double r = vgrid.edge();
  std::uint64_t total = 0;
  const std::int64_t n = vgrid.volume_count();
  for (std::int64_t v = 0; v < n; ++v) {
    const Vec3 x = vgrid.center(v);
    std::uint64_t terms = 0;
    for (std::size_t p = 0; p < pairs; ++p) {
      const MicPair pr = array.pair(p);
      const MsrpBounds b = msrp_lag_bounds(x, array.mic(static_cast<std::size_t>(pr.m1)),
                                           array.mic(static_cast<std::size_t>(pr.m2)), fs, c, r);
      terms += static_cast<std::uint64_t>(b.hi - b.lo + 1);
    }
    total += terms - 1;
  }
  return total;
}

}  // namespace srp
