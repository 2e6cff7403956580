#pragma once
// Precomputed TDoA machinery: dense per-point lag tables, per-volume
// deduplicated lag sets, the per-frame addition-count predictors, and a
// binary cache for the dense tables.
//
// Lag tables are built once per (array, grid) configuration and are
// immutable afterwards; all search-stage cost predictions count additions
// in objective evaluation only.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "srp/geometry.hpp"

namespace srp {

using lag_t = std::int16_t;

namespace detail {
inline lag_t to_lag16(int lag) {
  if (lag < -32768 || lag > 32767)
    throw std::runtime_error("lag exceeds 16-bit table range; lower fs or shrink the region");
  return static_cast<lag_t>(lag);
}
}  // namespace detail

// Dense table of integer TDoAs, one entry per (pair, point). Stored
// point-major so that scoring a point touches P contiguous entries.
class PointLagTable {
 public:
  PointLagTable(std::size_t pairs, std::int64_t points, std::vector<lag_t> lags, int min_lag,
                int max_lag)
      : pairs_(pairs), points_(points), lags_(std::move(lags)), min_(min_lag), max_(max_lag) {
    if (lags_.size() != static_cast<std::size_t>(points_) * pairs_)
      throw std::invalid_argument("PointLagTable: size mismatch");
  }

  std::size_t pair_count() const { return pairs_; }
  std::int64_t point_count() const { return points_; }
  lag_t lag(std::size_t p, std::int64_t i) const {
    return lags_[static_cast<std::size_t>(i) * pairs_ + p];
  }
  const lag_t* point_row(std::int64_t i) const {
    return lags_.data() + static_cast<std::size_t>(i) * pairs_;
  }
  int min_lag() const { return min_; }
  int max_lag() const { return max_; }
  std::size_t bytes() const { return lags_.size() * sizeof(lag_t); }
  const std::vector<lag_t>& raw() const { return lags_; }

 private:
  std::size_t pairs_;
  std::int64_t points_;
  std::vector<lag_t> lags_;
  int min_;
  int max_;
};

inline PointLagTable build_point_table(const PointGrid& grid, const MicArray& array, double fs,
                                       double c) {
  const std::size_t pairs = array.pair_count();
  const std::int64_t n = grid.size();
  std::vector<lag_t> lags(static_cast<std::size_t>(n) * pairs);
  int lo = 0, hi = 0;
  std::size_t w = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const Vec3 x = grid.point(i);
    for (std::size_t p = 0; p < pairs; ++p) {
      const int lag = array.tdoa(x, p, fs, c);
      lo = std::min(lo, lag);
      hi = std::max(hi, lag);
      lags[w++] = detail::to_lag16(lag);
    }
  }
  return PointLagTable(pairs, n, std::move(lags), lo, hi);
}

// For every (pair, volume): the sorted duplicate-free list of TDoAs
// produced by the volume's member points. Entries are stored back to back;
// per-entry cardinality and min/max lag fall out of the flat layout.
class VolumeLagSets {
 public:
  VolumeLagSets(std::int64_t volumes, std::size_t pairs, int alpha, int dims,
                std::vector<std::uint32_t> offsets, std::vector<lag_t> values)
      : volumes_(volumes),
        pairs_(pairs),
        alpha_(alpha),
        dims_(dims),
        offsets_(std::move(offsets)),
        values_(std::move(values)) {
    if (offsets_.size() != static_cast<std::size_t>(volumes_) * pairs_ + 1)
      throw std::invalid_argument("VolumeLagSets: offset table size mismatch");
    if (offsets_.back() != values_.size())
      throw std::invalid_argument("VolumeLagSets: value count mismatch");
  }

  std::int64_t volume_count() const { return volumes_; }
  std::size_t pair_count() const { return pairs_; }
  int alpha() const { return alpha_; }
  int dims() const { return dims_; }
  std::size_t total_values() const { return values_.size(); }

  std::span<const lag_t> entry(std::int64_t v, std::size_t p) const {
    const std::size_t e = static_cast<std::size_t>(v) * pairs_ + p;
    return {values_.data() + offsets_[e], values_.data() + offsets_[e + 1]};
  }
  std::size_t cardinality(std::int64_t v, std::size_t p) const { return entry(v, p).size(); }
  lag_t lag_min(std::int64_t v, std::size_t p) const { return entry(v, p).front(); }
  lag_t lag_max(std::int64_t v, std::size_t p) const { return entry(v, p).back(); }

  int min_lag() const {
    int lo = 0;
    for (std::size_t e = 0; e + 1 < offsets_.size(); ++e)
      if (offsets_[e + 1] > offsets_[e]) lo = std::min(lo, static_cast<int>(values_[offsets_[e]]));
    return lo;
  }
  int max_lag() const {
    int hi = 0;
    for (std::size_t e = 0; e + 1 < offsets_.size(); ++e)
      if (offsets_[e + 1] > offsets_[e])
        hi = std::max(hi, static_cast<int>(values_[offsets_[e + 1] - 1]));
    return hi;
  }

  std::size_t bytes() const {
    return offsets_.size() * sizeof(std::uint32_t) + values_.size() * sizeof(lag_t);
  }

 private:
  std::int64_t volumes_;
  std::size_t pairs_;
  int alpha_;
  int dims_;
  std::vector<std::uint32_t> offsets_;
  std::vector<lag_t> values_;
};

namespace detail {

// Shared builder: `lag_of(point_index, pair)` supplies the integer TDoA.
template <class LagFn>
VolumeLagSets build_lag_sets_impl(const VolumetricGrid& vgrid, std::size_t pairs, LagFn&& lag_of) {
  const std::int64_t volumes = vgrid.volume_count();

  std::vector<std::uint32_t> offsets;
  offsets.reserve(static_cast<std::size_t>(volumes) * pairs + 1);
  offsets.push_back(0);
  std::vector<lag_t> values;
  std::vector<std::int64_t> members;
  std::vector<lag_t> scratch;

  for (std::int64_t v = 0; v < volumes; ++v) {
    members.clear();
    vgrid.for_each_member(v, [&](std::int64_t i) { members.push_back(i); });
    for (std::size_t p = 0; p < pairs; ++p) {
      scratch.clear();
      for (const std::int64_t i : members) scratch.push_back(to_lag16(lag_of(i, p)));
      std::sort(scratch.begin(), scratch.end());
      scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
      if (values.size() + scratch.size() > 0xFFFFFFFFull)
        throw std::runtime_error("VolumeLagSets: configuration too large for 32-bit offsets");
      values.insert(values.end(), scratch.begin(), scratch.end());
      offsets.push_back(static_cast<std::uint32_t>(values.size()));
    }
  }
  values.shrink_to_fit();
  return VolumeLagSets(volumes, pairs, vgrid.alpha(), vgrid.region().dims(), std::move(offsets),
                       std::move(values));
}

}  // namespace detail

// Deduplicated lag sets from a prebuilt dense table over the volumetric
// grid's internal points.
inline VolumeLagSets build_volume_lag_sets(const VolumetricGrid& vgrid,
                                           const PointLagTable& table) {
  if (table.point_count() != vgrid.points().size())
    throw std::invalid_argument("build_volume_lag_sets: table does not match the internal grid");
  auto lag_of = [&](std::int64_t i, std::size_t p) -> int { return table.lag(p, i); };
  return detail::build_lag_sets_impl(vgrid, table.pair_count(), lag_of);
}

// Same result computed on the fly, without materializing the dense table.
// Preferred for large 3-D configurations.
inline VolumeLagSets build_volume_lag_sets(const VolumetricGrid& vgrid, const MicArray& array,
                                           double fs, double c) {
  const PointGrid& grid = vgrid.points();
  auto lag_of = [&](std::int64_t i, std::size_t p) -> int {
    return array.tdoa(grid.point(i), p, fs, c);
  };
  return detail::build_lag_sets_impl(vgrid, array.pair_count(), lag_of);
}

inline double mean_cardinality(const VolumeLagSets& sets) {
  const std::size_t entries = static_cast<std::size_t>(sets.volume_count()) * sets.pair_count();
  if (entries == 0) throw std::invalid_argument("mean_cardinality: empty lag sets");
  return static_cast<double>(sets.total_values()) / static_cast<double>(entries);
}

// Additions per frame for the classical point search: one objective
// evaluation of P terms per grid point.
inline std::uint64_t predict_ops_csrp(std::int64_t n_points, std::size_t pairs) {
  if (n_points < 1) throw std::invalid_argument("predict_ops_csrp: need at least one point");
  if (pairs < 2) throw std::invalid_argument("predict_ops_csrp: need at least two pairs");
  return static_cast<std::uint64_t>(n_points) * (pairs - 1);
}

// Additions per frame for the volumetric search: per volume, the summed
// cardinalities of its lag sets minus one.
inline std::uint64_t predict_ops_vsrp(const VolumeLagSets& sets) {
  return static_cast<std::uint64_t>(sets.total_values()) -
         static_cast<std::uint64_t>(sets.volume_count());
}

// Points per axis of the refinement grid spanning one volume. The closed
// variant includes both faces; the open variant drops the upper face point
// when the spacing divides the edge.
inline std::int64_t refine_axis_points(double edge, double spacing, bool closed) {
  const std::int64_t cells = grid_cells(edge, spacing);
  const double q = edge / spacing;
  const bool divides = std::abs(q - std::llround(q)) < 1e-9;
  if (closed) return cells + 1;
  return divides ? cells : cells + 1;
}

// Volumetric search over the whole region plus a classical search over one
// volume at the refinement spacing.
inline std::uint64_t predict_ops_rvsrp(const VolumeLagSets& sets, double volume_edge,
                                       double refine_spacing, std::size_t pairs,
                                       bool closed_refine = true) {
  const std::int64_t per_axis = refine_axis_points(volume_edge, refine_spacing, closed_refine);
  std::int64_t refine_points = 1;
  for (int k = 0; k < sets.dims(); ++k) refine_points *= per_axis;
  return predict_ops_vsrp(sets) + predict_ops_csrp(refine_points, pairs);
}

// Configuration summary printed by the `tables` command.
struct ComplexityReport {
  std::int64_t n_grid_points = 0;
  std::int64_t n_volumes = 0;
  std::size_t pairs = 0;
  int alpha = 0;
  double mean_lag_set_size = 0.0;
  std::uint64_t ops_csrp = 0;
  std::uint64_t ops_vsrp = 0;
  std::uint64_t ops_rvsrp = 0;
  std::uint64_t ops_msrp = 0;
  std::size_t point_table_bytes = 0;
  std::size_t lag_set_bytes = 0;
};

// --- binary table cache ----------------------------------------------------

namespace detail {
inline void fnv1a(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* b = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= 1099511628211ull;
  }
}
inline void fnv1a_double(std::uint64_t& h, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  fnv1a(h, &bits, sizeof(bits));
}
}  // namespace detail

// Key identifying a dense-table configuration: array geometry, region,
// spacing, sample rate, and sound speed.
inline std::uint64_t table_cache_key(const MicArray& array, const SearchRegion& region,
                                     double spacing, double fs, double c) {
  std::uint64_t h = 1469598103934665603ull;
  for (const Vec3& m : array.mics()) {
    detail::fnv1a_double(h, m.x);
    detail::fnv1a_double(h, m.y);
    detail::fnv1a_double(h, m.z);
  }
  for (int k = 0; k < 3; ++k) {
    detail::fnv1a_double(h, region.origin[k]);
    detail::fnv1a_double(h, region.extents[k]);
  }
  detail::fnv1a_double(h, spacing);
  detail::fnv1a_double(h, fs);
  detail::fnv1a_double(h, c);
  return h;
}

inline constexpr char kTableMagic[8] = {'S', 'R', 'P', 'L', 'A', 'G', 'T', '1'};

inline void save_point_table(const std::string& path, const PointLagTable& table,
                             std::uint64_t key) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_point_table: cannot open " + path);
  out.write(kTableMagic, sizeof(kTableMagic));
  const std::uint64_t pairs = table.pair_count();
  const std::int64_t points = table.point_count();
  const std::int32_t lo = table.min_lag(), hi = table.max_lag();
  out.write(reinterpret_cast<const char*>(&key), sizeof(key));
  out.write(reinterpret_cast<const char*>(&pairs), sizeof(pairs));
  out.write(reinterpret_cast<const char*>(&points), sizeof(points));
  out.write(reinterpret_cast<const char*>(&lo), sizeof(lo));
  out.write(reinterpret_cast<const char*>(&hi), sizeof(hi));
  out.write(reinterpret_cast<const char*>(table.raw().data()),
            static_cast<std::streamsize>(table.bytes()));
  if (!out) throw std::runtime_error("save_point_table: write failed for " + path);
}

inline PointLagTable load_point_table(const std::string& path, std::uint64_t expected_key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_point_table: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kTableMagic))
    throw std::runtime_error("load_point_table: not a lag-table cache: " + path);
  std::uint64_t key = 0, pairs = 0;
  std::int64_t points = 0;
  std::int32_t lo = 0, hi = 0;
  in.read(reinterpret_cast<char*>(&key), sizeof(key));
  in.read(reinterpret_cast<char*>(&pairs), sizeof(pairs));
  in.read(reinterpret_cast<char*>(&points), sizeof(points));
  in.read(reinterpret_cast<char*>(&lo), sizeof(lo));
  in.read(reinterpret_cast<char*>(&hi), sizeof(hi));
  if (key != expected_key)
    throw std::runtime_error("load_point_table: cache key mismatch (stale table?): " + path);
  std::vector<lag_t> lags(static_cast<std::size_t>(points) * pairs);
  in.read(reinterpret_cast<char*>(lags.data()), static_cast<std::streamsize>(lags.size() * 2));
  if (!in) throw std::runtime_error("load_point_table: truncated file: " + path);
  return PointLagTable(pairs, points, std::move(lags), lo, hi);
}

}  // namespace srp
