#pragma once
// Microphone arrays, rectangular search regions, and the uniform point /
// volumetric grids used by the steered-response power localizers.
//
// Conventions used throughout:
//  - coordinates are meters, right-handed axes, z up;
//  - grid points are ordered x-fastest, then y, then z;
//  - a volumetric grid tiles the region with disjoint half-open boxes
//    (lower faces closed, upper faces open), so every interior grid point
//    belongs to exactly one volume.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace srp {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

// Absolute slack added before flooring extent/spacing ratios, so that an
// extent which is an exact multiple of the spacing is never undercounted by
// one cell due to the division rounding down (e.g. 4.0/0.2 -> 19.999...).
inline constexpr double kGridEps = 1e-9;

// Number of whole cells of size `spacing` along an extent. Zero extent
// (a degenerate axis) has zero cells.
inline std::int64_t grid_cells(double extent, double spacing) {
  if (spacing <= 0.0) throw std::invalid_argument("grid spacing must be > 0");
  if (extent <= 0.0) return 0;
  return static_cast<std::int64_t>(std::floor(extent / spacing + kGridEps));
}

// Integer TDoA in samples of a point relative to a microphone pair: positive
// when the wavefront reaches `m2` later than `m1`. Rounding is half away
// from zero, which makes the value negate exactly under a pair swap.
inline int tdoa_samples(const Vec3& x, const Vec3& m1, const Vec3& m2, double fs, double c) {
  if (fs <= 0.0 || c <= 0.0) throw std::invalid_argument("tdoa_samples: fs and c must be > 0");
  const double delta = norm(m2 - x) - norm(m1 - x);
  return static_cast<int>(std::llround(delta * fs / c));
}

struct MicPair {
  int m1 = 0;
  int m2 = 0;
};

// Microphone positions plus the enumerated list of all M(M-1)/2 distinct
// pairs, ordered (0,1), (0,2), ..., (0,M-1), (1,2), ...
class MicArray {
 public:
  explicit MicArray(std::vector<Vec3> positions) : positions_(std::move(positions)) {
    if (positions_.size() < 2) throw std::invalid_argument("MicArray: need at least 2 microphones");
    for (const Vec3& p : positions_)
      if (!is_finite(p)) throw std::invalid_argument("MicArray: non-finite microphone position");
    const int m = static_cast<int>(positions_.size());
    pairs_.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) pairs_.push_back({i, j});
  }

  std::size_t mic_count() const { return positions_.size(); }
  std::size_t pair_count() const { return pairs_.size(); }
  const Vec3& mic(std::size_t i) const { return positions_[i]; }
  const std::vector<Vec3>& mics() const { return positions_; }
  const MicPair& pair(std::size_t p) const { return pairs_[p]; }
  const std::vector<MicPair>& pairs() const { return pairs_; }

  double pair_baseline(std::size_t p) const {
    return norm(positions_[pairs_[p].m2] - positions_[pairs_[p].m1]);
  }

  // Largest inter-microphone distance; bounds every attainable TDoA.
  double max_baseline() const {
    double b = 0.0;
    for (std::size_t p = 0; p < pairs_.size(); ++p) b = std::max(b, pair_baseline(p));
    return b;
  }

  int tdoa(const Vec3& x, std::size_t p, double fs, double c) const {
    return tdoa_samples(x, positions_[pairs_[p].m1], positions_[pairs_[p].m2], fs, c);
  }

 private:
  std::vector<Vec3> positions_;
  std::vector<MicPair> pairs_;
};

// Rectangular parallelepiped search space. A zero extent degenerates the
// region to a plane or a line; the corresponding axis carries one grid point.
struct SearchRegion {
  Vec3 origin;
  Vec3 extents;

  SearchRegion() = default;
  SearchRegion(const Vec3& o, const Vec3& e) : origin(o), extents(e) {
    if (!is_finite(o) || !is_finite(e)) throw std::invalid_argument("SearchRegion: non-finite");
    if (e.x < 0.0 || e.y < 0.0 || e.z < 0.0)
      throw std::invalid_argument("SearchRegion: extents must be >= 0");
  }

  bool axis_degenerate(int k) const { return extents[k] <= 0.0; }

  // Number of non-degenerate axes (search dimensionality).
  int dims() const {
    return (axis_degenerate(0) ? 0 : 1) + (axis_degenerate(1) ? 0 : 1) +
           (axis_degenerate(2) ? 0 : 1);
  }
};

// Uniform lattice of search points anchored at the region origin (origin
// inclusive). Points are addressed by a linear index, x-fastest; coordinates
// are computed on demand so large grids cost no point storage.
class PointGrid {
 public:
  PointGrid(const SearchRegion& region, double spacing, const std::array<std::int64_t, 3>& counts)
      : region_(region), spacing_(spacing), counts_(counts) {
    for (int k = 0; k < 3; ++k)
      if (counts_[k] < 1) throw std::invalid_argument("PointGrid: axis count must be >= 1");
  }

  const SearchRegion& region() const { return region_; }
  double spacing() const { return spacing_; }
  const std::array<std::int64_t, 3>& axis_counts() const { return counts_; }
  std::int64_t size() const { return counts_[0] * counts_[1] * counts_[2]; }

  std::array<std::int64_t, 3> decompose(std::int64_t i) const {
    const std::int64_t ix = i % counts_[0];
    const std::int64_t iy = (i / counts_[0]) % counts_[1];
    const std::int64_t iz = i / (counts_[0] * counts_[1]);
    return {ix, iy, iz};
  }

  Vec3 point(std::int64_t i) const {
    const auto idx = decompose(i);
    return {region_.origin.x + static_cast<double>(idx[0]) * spacing_,
            region_.origin.y + static_cast<double>(idx[1]) * spacing_,
            region_.origin.z + static_cast<double>(idx[2]) * spacing_};
  }

 private:
  SearchRegion region_;
  double spacing_;
  std::array<std::int64_t, 3> counts_;
};

// Uniform closed lattice over the region: floor(extent/spacing)+1 points per
// axis, one point on a degenerate axis.
inline PointGrid build_point_grid(const SearchRegion& region, double g_x) {
  if (g_x <= 0.0) throw std::invalid_argument("build_point_grid: spacing must be > 0");
  std::array<std::int64_t, 3> counts;
  for (int k = 0; k < 3; ++k) counts[k] = grid_cells(region.extents[k], g_x) + 1;
  return PointGrid(region, g_x, counts);
}

struct VolumeBox {
  Vec3 lower;
  Vec3 upper;
};

// Tiling of the search region into disjoint half-open boxes of edge g_V,
// each owning the alpha^d points of an internal PointGrid of spacing
// g_V/alpha that fall inside it (d = number of non-degenerate axes).
// Membership is resolved in lattice-index space, which realizes the
// closed-lower / open-upper face rule exactly. A trailing strip of the
// region not covered by a whole volume is dropped, and its points belong
// to no volume.
class VolumetricGrid {
 public:
  VolumetricGrid(const SearchRegion& region, double edge, int alpha)
      : region_(region),
        edge_(edge),
        alpha_(alpha),
        grid_(build_point_grid(region, edge / alpha)) {
    if (alpha < 2)
      throw std::invalid_argument("VolumetricGrid: alpha must be >= 2 (use singletons() for 1)");
    if (edge <= 0.0) throw std::invalid_argument("VolumetricGrid: edge must be > 0");
    for (int k = 0; k < 3; ++k) {
      vol_counts_[k] = region.axis_degenerate(k) ? 1 : grid_cells(region.extents[k], edge);
      if (vol_counts_[k] < 1)
        throw std::invalid_argument("VolumetricGrid: region extent smaller than one volume edge");
    }
  }

  // One volume per grid point, for configurations where the volumetric
  // objective must coincide with the point objective. Boxes are centered on
  // their point so the reported volume center is the point itself.
  static VolumetricGrid singletons(const PointGrid& grid) {
    return VolumetricGrid(grid, SingletonTag{});
  }

  const SearchRegion& region() const { return region_; }
  const PointGrid& points() const { return grid_; }
  double edge() const { return edge_; }
  int alpha() const { return alpha_; }
  bool singleton() const { return singleton_; }
  const std::array<std::int64_t, 3>& axis_counts() const { return vol_counts_; }
  std::int64_t volume_count() const { return vol_counts_[0] * vol_counts_[1] * vol_counts_[2]; }

  std::array<std::int64_t, 3> decompose(std::int64_t v) const {
    const std::int64_t vx = v % vol_counts_[0];
    const std::int64_t vy = (v / vol_counts_[0]) % vol_counts_[1];
    const std::int64_t vz = v / (vol_counts_[0] * vol_counts_[1]);
    return {vx, vy, vz};
  }

  VolumeBox box(std::int64_t v) const {
    const auto idx = decompose(v);
    VolumeBox b;
    for (int k = 0; k < 3; ++k) {
      if (singleton_) {
        const double p = region_.origin[k] + static_cast<double>(idx[k]) * grid_.spacing();
        const double h = region_.axis_degenerate(k) ? 0.0 : 0.5 * grid_.spacing();
        b.lower[k] = p - h;
        b.upper[k] = p + h;
      } else if (region_.axis_degenerate(k)) {
        b.lower[k] = b.upper[k] = region_.origin[k];
      } else {
        b.lower[k] = region_.origin[k] + static_cast<double>(idx[k]) * edge_;
        b.upper[k] = b.lower[k] + edge_;
      }
    }
    return b;
  }

  Vec3 center(std::int64_t v) const {
    const VolumeBox b = box(v);
    return {0.5 * (b.lower.x + b.upper.x), 0.5 * (b.lower.y + b.upper.y),
            0.5 * (b.lower.z + b.upper.z)};
  }

  // Per-axis [begin, end) ranges of member point indices in the internal grid.
  std::array<std::array<std::int64_t, 2>, 3> member_ranges(std::int64_t v) const {
    const auto idx = decompose(v);
    std::array<std::array<std::int64_t, 2>, 3> r;
    for (int k = 0; k < 3; ++k) {
      if (singleton_ || region_.axis_degenerate(k)) {
        r[k] = {idx[k], idx[k] + 1};
      } else {
        r[k] = {idx[k] * alpha_, idx[k] * alpha_ + alpha_};
      }
    }
    return r;
  }

  std::int64_t member_count(std::int64_t v) const {
    const auto r = member_ranges(v);
    return (r[0][1] - r[0][0]) * (r[1][1] - r[1][0]) * (r[2][1] - r[2][0]);
  }

  template <class F>
  void for_each_member(std::int64_t v, F&& f) const {
    const auto r = member_ranges(v);
    const auto& n = grid_.axis_counts();
    for (std::int64_t iz = r[2][0]; iz < r[2][1]; ++iz)
      for (std::int64_t iy = r[1][0]; iy < r[1][1]; ++iy)
        for (std::int64_t ix = r[0][0]; ix < r[0][1]; ++ix)
          f(ix + n[0] * (iy + n[1] * iz));
  }

 private:
  struct SingletonTag {};
  VolumetricGrid(const PointGrid& grid, SingletonTag)
      : region_(grid.region()),
        edge_(grid.spacing()),
        alpha_(1),
        grid_(grid),
        vol_counts_(grid.axis_counts()),
        singleton_(true) {}

  SearchRegion region_;
  double edge_;
  int alpha_;
  PointGrid grid_;
  std::array<std::int64_t, 3> vol_counts_{1, 1, 1};
  bool singleton_ = false;
};

inline VolumetricGrid build_volumetric_grid(const SearchRegion& region, double g_V, int alpha) {
  return VolumetricGrid(region, g_V, alpha);
}

// Closed-box containment with a small slack, used to check that a refined
// estimate stays inside the winning volume.
inline bool closed_box_contains(const VolumeBox& b, const Vec3& p, double tol = 1e-9) {
  for (int k = 0; k < 3; ++k)
    if (p[k] < b.lower[k] - tol || p[k] > b.upper[k] + tol) return false;
  return true;
}

}  // namespace srp
