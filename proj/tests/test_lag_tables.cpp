#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <random>
#include <set>
#include <vector>

#include "srp/lag_tables.hpp"

using namespace srp;

namespace {

MicArray random_array(std::mt19937& rng, int mics) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pos;
  for (int i = 0; i < mics; ++i) pos.push_back({u(rng), u(rng), u(rng)});
  return MicArray(std::move(pos));
}

}  // namespace

TEST_CASE("dense table entries match direct recomputation") {
  std::mt19937 rng(9001);
  std::uniform_real_distribution<double> off(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const MicArray array = random_array(rng, 4);
    const SearchRegion region({off(rng), off(rng) + 3.0, off(rng)}, {0.9, 1.2, 0.6});
    const PointGrid grid = build_point_grid(region, 0.3);
    REQUIRE(grid.size() == 4 * 5 * 3);
    const double fs = 48000.0, c = 343.0;
    const PointLagTable table = build_point_table(grid, array, fs, c);

    REQUIRE(table.point_count() == grid.size());
    REQUIRE(table.pair_count() == array.pair_count());
    int lo = 0, hi = 0;
    for (std::int64_t i = 0; i < grid.size(); ++i) {
      const Vec3 x = grid.point(i);
      const lag_t* row = table.point_row(i);
      for (std::size_t p = 0; p < array.pair_count(); ++p) {
        const int expect = array.tdoa(x, p, fs, c);
        REQUIRE(static_cast<int>(table.lag(p, i)) == expect);
        REQUIRE(static_cast<int>(row[p]) == expect);
        lo = std::min(lo, expect);
        hi = std::max(hi, expect);
      }
    }
    REQUIRE(table.min_lag() == lo);
    REQUIRE(table.max_lag() == hi);
  }
}

TEST_CASE("dense table rejects lags beyond 16-bit range") {
  const MicArray array({{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}});
  const SearchRegion region({-1.0, 1.0, 0.0}, {2.0, 0.0, 0.0});
  const PointGrid grid = build_point_grid(region, 0.5);
  // Absurd propagation speed pushes lags to ~480k samples.
  REQUIRE_THROWS_AS(build_point_table(grid, array, 48000.0, 0.1), std::runtime_error);
}

TEST_CASE("volume lag sets match a brute-force set per pair and volume") {
  std::mt19937 rng(412);
  std::uniform_real_distribution<double> off(-0.5, 0.5);
  const double fs = 48000.0, c = 340.0;
  for (int trial = 0; trial < 12; ++trial) {
    const int alpha = 2 + static_cast<int>(rng() % 3);
    const MicArray array = random_array(rng, 3 + static_cast<int>(rng() % 3));
    const SearchRegion region({off(rng), off(rng) + 2.0, off(rng)}, {1.5, 1.0, 0.5});
    const VolumetricGrid vgrid = build_volumetric_grid(region, 0.5, alpha);
    const PointLagTable table = build_point_table(vgrid.points(), array, fs, c);
    const VolumeLagSets sets = build_volume_lag_sets(vgrid, table);

    REQUIRE(sets.volume_count() == vgrid.volume_count());
    REQUIRE(sets.pair_count() == array.pair_count());
    REQUIRE(sets.alpha() == alpha);
    REQUIRE(sets.dims() == 3);

    for (std::int64_t v = 0; v < vgrid.volume_count(); ++v) {
      for (std::size_t p = 0; p < array.pair_count(); ++p) {
        std::set<int> expect;
        vgrid.for_each_member(
            v, [&](std::int64_t i) { expect.insert(array.tdoa(vgrid.points().point(i), p, fs, c)); });
        const auto got = sets.entry(v, p);
        REQUIRE(got.size() == expect.size());
        auto it = expect.begin();
        for (const lag_t z : got) REQUIRE(static_cast<int>(z) == *it++);
        REQUIRE(sets.cardinality(v, p) == expect.size());
        REQUIRE(static_cast<int>(sets.lag_min(v, p)) == *expect.begin());
        REQUIRE(static_cast<int>(sets.lag_max(v, p)) == *expect.rbegin());
        REQUIRE(expect.size() >= 1);
        REQUIRE(expect.size() <= static_cast<std::size_t>(alpha) * alpha * alpha);
      }
    }
  }
}

TEST_CASE("streaming and table-based set builders agree") {
  std::mt19937 rng(77);
  const MicArray array = random_array(rng, 5);
  const SearchRegion region({-1.0, 1.0, -0.5}, {2.0, 1.5, 1.0});
  const VolumetricGrid vgrid = build_volumetric_grid(region, 0.25, 3);
  const double fs = 44100.0, c = 343.0;

  const PointLagTable table = build_point_table(vgrid.points(), array, fs, c);
  const VolumeLagSets a = build_volume_lag_sets(vgrid, table);
  const VolumeLagSets b = build_volume_lag_sets(vgrid, array, fs, c);

  REQUIRE(a.volume_count() == b.volume_count());
  REQUIRE(a.total_values() == b.total_values());
  for (std::int64_t v = 0; v < a.volume_count(); ++v) {
    for (std::size_t p = 0; p < a.pair_count(); ++p) {
      const auto ea = a.entry(v, p);
      const auto eb = b.entry(v, p);
      REQUIRE(ea.size() == eb.size());
      for (std::size_t k = 0; k < ea.size(); ++k) REQUIRE(ea[k] == eb[k]);
    }
  }
}

TEST_CASE("cube of member points yields the vertex lag extremes") {
  // Two mics on the x axis, one cubic volume whose eight member points are
  // the cube vertices; the lag extremes land on opposite vertex pairs.
  const MicArray array({{-2.0, 0.0, 0.0}, {2.0, 0.0, 0.0}});
  const SearchRegion region({-0.5, 1.5, -0.5}, {2.0, 2.0, 2.0});
  const VolumetricGrid vgrid = build_volumetric_grid(region, 2.0, 2);
  REQUIRE(vgrid.volume_count() == 1);
  REQUIRE(vgrid.member_count(0) == 8);

  const VolumeLagSets sets = build_volume_lag_sets(vgrid, array, 48000.0, 340.0);
  const auto z = sets.entry(0, 0);
  REQUIRE(z.size() == 4);
  REQUIRE(z[0] == -110);
  REQUIRE(z[1] == -86);
  REQUIRE(z[2] == 86);
  REQUIRE(z[3] == 110);
  REQUIRE(sets.min_lag() == -110);
  REQUIRE(sets.max_lag() == 110);
}

TEST_CASE("point-search cost is grid size times pairs minus one") {
  const SearchRegion region({0.0, 0.0, 0.0}, {3.5, 4.0, 0.0});
  REQUIRE(predict_ops_csrp(build_point_grid(region, 0.01).size(), 28) == 3800277);
  REQUIRE(predict_ops_csrp(build_point_grid(region, 0.10).size(), 28) == 39852);
  REQUIRE(predict_ops_csrp(build_point_grid(region, 0.20).size(), 28) == 10206);
  REQUIRE(predict_ops_csrp(build_point_grid(region, 0.50).size(), 28) == 1944);
  REQUIRE(predict_ops_csrp(1, 2) == 1);
  REQUIRE_THROWS_AS(predict_ops_csrp(0, 28), std::invalid_argument);
  REQUIRE_THROWS_AS(predict_ops_csrp(10, 1), std::invalid_argument);
}

TEST_CASE("volume-search cost equals total set values minus volume count") {
  std::mt19937 rng(5150);
  const MicArray array = random_array(rng, 4);
  const SearchRegion region({-0.8, 0.8, -0.4}, {1.6, 1.6, 0.8});
  const VolumetricGrid vgrid = build_volumetric_grid(region, 0.4, 2);
  const VolumeLagSets sets = build_volume_lag_sets(vgrid, array, 48000.0, 343.0);

  std::uint64_t total = 0;
  for (std::int64_t v = 0; v < sets.volume_count(); ++v)
    for (std::size_t p = 0; p < sets.pair_count(); ++p) total += sets.cardinality(v, p);
  REQUIRE(total == sets.total_values());
  REQUIRE(predict_ops_vsrp(sets) == total - static_cast<std::uint64_t>(sets.volume_count()));

  // Mean-cardinality form of the same count, in exact integer arithmetic.
  const double mean = mean_cardinality(sets);
  const double entries = static_cast<double>(sets.volume_count()) *
                         static_cast<double>(sets.pair_count());
  REQUIRE(mean * entries == Catch::Approx(static_cast<double>(total)).epsilon(1e-12));
}

TEST_CASE("singleton volumes cost exactly the point search") {
  std::mt19937 rng(31337);
  const MicArray array = random_array(rng, 4);
  const SearchRegion region({-0.6, 1.0, 0.0}, {1.2, 0.9, 0.0});
  const PointGrid grid = build_point_grid(region, 0.3);
  const VolumetricGrid vgrid = VolumetricGrid::singletons(grid);
  const VolumeLagSets sets = build_volume_lag_sets(vgrid, array, 48000.0, 343.0);

  REQUIRE(sets.volume_count() == grid.size());
  for (std::int64_t v = 0; v < sets.volume_count(); ++v)
    for (std::size_t p = 0; p < sets.pair_count(); ++p) REQUIRE(sets.cardinality(v, p) == 1);
  REQUIRE(predict_ops_vsrp(sets) == predict_ops_csrp(grid.size(), array.pair_count()));
}

TEST_CASE("worst case degenerates to full member enumeration per volume") {
  // Hand-built sets where every entry holds alpha^3 distinct lags.
  const std::int64_t volumes = 3;
  const std::size_t pairs = 2;
  const int alpha = 2;
  std::vector<std::uint32_t> offsets{0};
  std::vector<lag_t> values;
  for (std::int64_t e = 0; e < volumes * static_cast<std::int64_t>(pairs); ++e) {
    for (lag_t z = 0; z < 8; ++z) values.push_back(z);
    offsets.push_back(static_cast<std::uint32_t>(values.size()));
  }
  const VolumeLagSets sets(volumes, pairs, alpha, 3, std::move(offsets), std::move(values));
  REQUIRE(predict_ops_vsrp(sets) ==
          static_cast<std::uint64_t>(volumes) * (pairs * 8 - 1));
}

TEST_CASE("volume-search cost stays below the scaled point-search bound") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> off(-0.5, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    const int alpha = 2 + static_cast<int>(rng() % 4);
    const MicArray array = random_array(rng, 3 + static_cast<int>(rng() % 4));
    const SearchRegion region({off(rng), off(rng) + 1.5, off(rng)}, {1.2, 1.2, 0.6});
    const VolumetricGrid vgrid = build_volumetric_grid(region, 0.3, alpha);
    const VolumeLagSets sets = build_volume_lag_sets(vgrid, array, 48000.0, 340.0);

    const double P = static_cast<double>(array.pair_count());
    const double csrp = static_cast<double>(predict_ops_csrp(vgrid.points().size(),
                                                             array.pair_count()));
    const double a3 = std::pow(static_cast<double>(alpha), sets.dims());
    const double bound = csrp * mean_cardinality(sets) / a3 * (1.0 + 1.0 / (P - 1.0));
    REQUIRE(static_cast<double>(predict_ops_vsrp(sets)) < bound);
  }
}

TEST_CASE("doubling the member density never shrinks a lag set") {
  std::mt19937 rng(606);
  const MicArray array = random_array(rng, 4);
  const SearchRegion region({-0.7, 0.9, -0.3}, {1.4, 1.2, 0.6});
  const double fs = 48000.0, c = 343.0;
  for (const int alpha : {2, 3, 4}) {
    const VolumetricGrid coarse = build_volumetric_grid(region, 0.3, alpha);
    const VolumetricGrid fine = build_volumetric_grid(region, 0.3, 2 * alpha);
    REQUIRE(coarse.volume_count() == fine.volume_count());
    const VolumeLagSets a = build_volume_lag_sets(coarse, array, fs, c);
    const VolumeLagSets b = build_volume_lag_sets(fine, array, fs, c);
    for (std::int64_t v = 0; v < a.volume_count(); ++v)
      for (std::size_t p = 0; p < a.pair_count(); ++p)
        REQUIRE(a.cardinality(v, p) <= b.cardinality(v, p));
  }
}

TEST_CASE("far-field volumes collapse well below full enumeration") {
  // A volume ten meters out subtends a tiny lag spread: member points
  // collapse onto few distinct lags.
  const MicArray array({{-0.1, 0.0, 0.0}, {0.1, 0.0, 0.0}, {0.0, 0.1, 0.0}, {0.0, -0.1, 0.0}});
  const SearchRegion region({10.0, 10.0, 0.0}, {0.2, 0.2, 0.2});
  const VolumetricGrid vgrid = build_volumetric_grid(region, 0.2, 4);
  REQUIRE(vgrid.volume_count() == 1);
  const VolumeLagSets sets = build_volume_lag_sets(vgrid, array, 48000.0, 343.0);
  for (std::size_t p = 0; p < sets.pair_count(); ++p)
    REQUIRE(sets.cardinality(0, p) < 64);
}

TEST_CASE("refinement grid axis counts honor the boundary convention") {
  REQUIRE(refine_axis_points(0.10, 0.01, true) == 11);
  REQUIRE(refine_axis_points(0.10, 0.01, false) == 10);
  REQUIRE(refine_axis_points(0.04, 0.01, true) == 5);
  REQUIRE(refine_axis_points(0.04, 0.01, false) == 4);
  // Non-dividing spacing keeps the last interior point either way.
  REQUIRE(refine_axis_points(0.10, 0.03, true) == 4);
  REQUIRE(refine_axis_points(0.10, 0.03, false) == 4);
}

TEST_CASE("two-stage cost adds the refinement point search") {
  std::mt19937 rng(8080);
  const MicArray array = random_array(rng, 8);
  REQUIRE(array.pair_count() == 28);
  const SearchRegion region({0.0, 0.5, 0.0}, {1.0, 1.0, 0.0});
  const VolumetricGrid vgrid = build_volumetric_grid(region, 0.1, 4);
  const VolumeLagSets sets = build_volume_lag_sets(vgrid, array, 48000.0, 340.0);
  REQUIRE(sets.dims() == 2);

  const std::uint64_t base = predict_ops_vsrp(sets);
  REQUIRE(predict_ops_rvsrp(sets, 0.1, 0.01, 28, true) - base == 11 * 11 * 27);
  REQUIRE(predict_ops_rvsrp(sets, 0.1, 0.01, 28, false) - base == 10 * 10 * 27);
}

TEST_CASE("table cache restores the exact table and rejects stale keys") {
  std::mt19937 rng(1234);
  const MicArray array = random_array(rng, 4);
  const SearchRegion region({-0.5, 0.5, 0.0}, {1.0, 0.8, 0.4});
  const PointGrid grid = build_point_grid(region, 0.2);
  const double fs = 48000.0, c = 343.0;
  const PointLagTable table = build_point_table(grid, array, fs, c);
  const std::uint64_t key = table_cache_key(array, region, 0.2, fs, c);

  const std::string path = "lag_table_cache_test.bin";
  save_point_table(path, table, key);
  const PointLagTable back = load_point_table(path, key);
  REQUIRE(back.point_count() == table.point_count());
  REQUIRE(back.pair_count() == table.pair_count());
  REQUIRE(back.min_lag() == table.min_lag());
  REQUIRE(back.max_lag() == table.max_lag());
  REQUIRE(back.raw() == table.raw());

  REQUIRE_THROWS_AS(load_point_table(path, key + 1), std::runtime_error);
  REQUIRE_THROWS_AS(load_point_table("no_such_table.bin", key), std::runtime_error);

  // Any ingredient change moves the key.
  REQUIRE(table_cache_key(array, region, 0.2, fs, c) == key);
  REQUIRE(table_cache_key(array, region, 0.25, fs, c) != key);
  REQUIRE(table_cache_key(array, region, 0.2, 44100.0, c) != key);
  std::remove(path.c_str());
}
