#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "srp/experiment.hpp"

using namespace srp;

// --- error metrics -------------------------------------------------------------

TEST_CASE("error metrics: mean, median, and binning on hand-checked inputs") {
  const Vec3 truth{0.0, 0.0, 0.0};
  const std::vector<Vec3> truths(3, truth);
  const std::vector<Vec3> estimates = {
      {0.01, 0.0, 0.0}, {0.0, 0.02, 0.0}, {0.0, 0.0, 1.0}};  // 1 cm, 2 cm, 100 cm

  const ErrorStats stats = error_metrics(estimates, truths, 3);
  REQUIRE(stats.errors_cm.size() == 3);
  CHECK(stats.errors_cm[0] == Catch::Approx(1.0));
  CHECK(stats.errors_cm[1] == Catch::Approx(2.0));
  CHECK(stats.errors_cm[2] == Catch::Approx(100.0));
  CHECK(stats.mean_cm == Catch::Approx(103.0 / 3.0));
  CHECK(stats.median_cm == Catch::Approx(2.0));
  CHECK(stats.histogram[0] == 2);  // 1 cm and 2 cm
  CHECK(stats.histogram[6] == 1);  // 100 cm in the open-ended bin
}

TEST_CASE("error metrics: exact estimates put all mass in the first bin") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<Vec3> truths(17);
  for (auto& t : truths) t = {u(rng), u(rng), u(rng)};
  const ErrorStats stats = error_metrics(truths, truths, 3);
  CHECK(stats.mean_cm == 0.0);
  CHECK(stats.median_cm == 0.0);
  CHECK(stats.histogram[0] == 17);
  for (std::size_t b = 1; b < stats.histogram.size(); ++b) CHECK(stats.histogram[b] == 0);
}

TEST_CASE("error metrics: bin edges land errors in the right buckets") {
  // Errors in cm: 0, 4.999, 5, 29.999, 30, 1000.
  const std::vector<double> cm = {0.0, 4.999, 5.0, 29.999, 30.0, 1000.0};
  std::vector<Vec3> estimates, truths;
  for (const double e : cm) {
    truths.push_back({0.0, 0.0, 0.0});
    estimates.push_back({e / 100.0, 0.0, 0.0});
  }
  const ErrorStats stats = error_metrics(estimates, truths, 3);
  CHECK(stats.histogram[0] == 2);
  CHECK(stats.histogram[1] == 1);
  CHECK(stats.histogram[5] == 1);
  CHECK(stats.histogram[6] == 2);
  const auto total = std::accumulate(stats.histogram.begin(), stats.histogram.end(), std::uint64_t{0});
  CHECK(total == cm.size());
}

TEST_CASE("error metrics: even counts average the two middle errors") {
  const std::vector<Vec3> truths(4, Vec3{0.0, 0.0, 0.0});
  const std::vector<Vec3> estimates = {
      {0.01, 0.0, 0.0}, {0.03, 0.0, 0.0}, {0.02, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  const ErrorStats stats = error_metrics(estimates, truths, 3);
  CHECK(stats.median_cm == Catch::Approx(2.5));  // (2 + 3) / 2
}

TEST_CASE("error metrics: planar evaluation ignores the vertical axis") {
  const std::vector<Vec3> truths = {{1.0, 2.0, 0.5}};
  const std::vector<Vec3> estimates = {{1.0, 2.0, 1.7}};
  CHECK(error_metrics(estimates, truths, 2).mean_cm == 0.0);
  CHECK(error_metrics(estimates, truths, 3).mean_cm == Catch::Approx(120.0));
}

TEST_CASE("error metrics: random batch matches an independent recomputation") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 51;
  std::vector<Vec3> truths(n), estimates(n);
  for (std::size_t i = 0; i < n; ++i) {
    truths[i] = {u(rng), u(rng), u(rng)};
    estimates[i] = {truths[i].x + 0.2 * u(rng), truths[i].y + 0.2 * u(rng),
                    truths[i].z + 0.2 * u(rng)};
  }
  const ErrorStats stats = error_metrics(estimates, truths, 3);

  std::vector<double> expected(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = estimates[i].x - truths[i].x;
    const double dy = estimates[i].y - truths[i].y;
    const double dz = estimates[i].z - truths[i].z;
    expected[i] = std::sqrt(dx * dx + dy * dy + dz * dz) * 100.0;
  }
  double mean = 0.0;
  for (const double e : expected) mean += e;
  mean /= static_cast<double>(n);
  std::vector<double> sorted = expected;
  std::sort(sorted.begin(), sorted.end());

  for (std::size_t i = 0; i < n; ++i) CHECK(stats.errors_cm[i] == Catch::Approx(expected[i]));
  CHECK(stats.mean_cm == Catch::Approx(mean));
  CHECK(stats.median_cm == Catch::Approx(sorted[n / 2]));
  std::array<std::uint64_t, 7> hist{};
  for (const double e : expected) hist[std::min<std::size_t>(static_cast<std::size_t>(e / 5.0), 6)]++;
  for (std::size_t b = 0; b < 7; ++b) CHECK(stats.histogram[b] == hist[b]);
}

TEST_CASE("error metrics: malformed inputs are rejected") {
  const std::vector<Vec3> one = {{0, 0, 0}};
  const std::vector<Vec3> two = {{0, 0, 0}, {1, 1, 1}};
  CHECK_THROWS_AS(error_metrics(one, two, 3), std::invalid_argument);
  CHECK_THROWS_AS(error_metrics({}, {}, 3), std::invalid_argument);
  CHECK_THROWS_AS(error_metrics(one, one, 4), std::invalid_argument);
  CHECK_THROWS_AS(error_metrics(one, one, 1), std::invalid_argument);
}

// --- experiment driver -----------------------------------------------------------

namespace {

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& stem) {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           (stem + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
  std::string str() const { return path.string(); }
};

// Small anechoic setup that runs in well under a second.
ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.seed = 11;
  cfg.fs = 48000.0;
  cfg.c = 343.0;
  cfg.frames = {2048, 1024};
  cfg.phat = true;
  cfg.error_dims = 2;
  cfg.mic_positions = {{1.0, 0.4, 1.2}, {1.4, 0.4, 1.2}, {1.8, 0.4, 1.2},
                       {1.0, 0.4, 0.8}, {1.8, 0.4, 0.8}};
  cfg.region_origin = {0.7, 1.0, 1.0};
  cfg.region_extents = {1.4, 1.4, 0.0};
  RoomConfig room;
  room.size = {3.0, 3.0, 2.5};
  cfg.room = room;  // anechoic
  cfg.signal.duration = 0.2;
  cfg.sources.positions = {{1.3, 1.3, 1.0}};

  MethodSpec csrp{"dense", MethodKind::PointSearch, 0.05, 0.0, 0, 0.0, true};
  MethodSpec vsrp{"coarse", MethodKind::VolumeSearch, 0.0, 0.2, 4, 0.0, true};
  MethodSpec rvsrp{"twostage", MethodKind::TwoStage, 0.0, 0.2, 4, 0.05, true};
  MethodSpec msrp{"ranges", MethodKind::RangeSearch, 0.0, 0.2, 0, 0.0, true};
  cfg.methods = {csrp, vsrp, rvsrp, msrp};
  return cfg;
}

}  // namespace

TEST_CASE("experiment: report shape and counter identities for all methods") {
  const ExperimentConfig cfg = small_config();
  const RunReport report = run_experiment(cfg);

  CHECK(report.fs == cfg.fs);
  CHECK(report.error_dims == 2);
  REQUIRE(report.source_positions.size() == 1);
  REQUIRE(report.methods.size() == 4);
  CHECK(report.total_frames > 0);

  for (const MethodReport& m : report.methods) {
    INFO("method " << m.spec.name);
    REQUIRE(m.estimates.size() == report.total_frames);
    REQUIRE(m.errors.errors_cm.size() == report.total_frames);

    // One prediction per frame, counted additions must match it exactly.
    CHECK(m.predicted_per_frame > 0);
    CHECK(m.measured_additions == m.predicted_per_frame * report.total_frames);

    // The histogram accounts for every frame.
    const auto total =
        std::accumulate(m.errors.histogram.begin(), m.errors.histogram.end(), std::uint64_t{0});
    CHECK(total == report.total_frames);

    // Per-frame errors regenerate the summary statistics.
    std::vector<Vec3> positions;
    std::vector<Vec3> truths;
    for (const FrameEstimate& e : m.estimates) {
      positions.push_back(e.position);
      truths.push_back(report.source_positions[static_cast<std::size_t>(e.source)]);
    }
    const ErrorStats redo = error_metrics(positions, truths, report.error_dims);
    CHECK(m.errors.mean_cm == redo.mean_cm);
    CHECK(m.errors.median_cm == redo.median_cm);
    for (std::size_t i = 0; i < report.total_frames; ++i) {
      CHECK(m.estimates[i].error_cm == redo.errors_cm[i]);
      // Estimates stay inside the search region.
      const VolumeBox hull{cfg.region_origin,
                           {cfg.region_origin.x + cfg.region_extents.x,
                            cfg.region_origin.y + cfg.region_extents.y,
                            cfg.region_origin.z + cfg.region_extents.z}};
      CHECK(closed_box_contains(hull, m.estimates[i].position));
    }
  }

  // Clean anechoic noise burst: the point-level searches should land within
  // a few grid steps; the volume-level searches return 20 cm box centers and
  // inherit that lattice offset.
  for (const MethodReport& m : report.methods) {
    INFO("method " << m.spec.name);
    CHECK(m.errors.median_cm <= 25.0);
  }
  CHECK(report.methods[0].errors.median_cm <= 10.0);  // dense, 5 cm grid
  CHECK(report.methods[2].errors.median_cm <= 10.0);  // two-stage, 5 cm refine
}

TEST_CASE("experiment: identical seeds reproduce estimates and counters bit for bit") {
  ExperimentConfig cfg = small_config();
  cfg.sources.positions.clear();
  cfg.sources.random_count = 2;
  cfg.sources.margin = 0.3;
  cfg.signal.snr_db = 15.0;
  cfg.methods.resize(2);

  const RunReport a = run_experiment(cfg);
  const RunReport b = run_experiment(cfg);

  REQUIRE(a.source_positions.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(a.source_positions[s].x == b.source_positions[s].x);
    CHECK(a.source_positions[s].y == b.source_positions[s].y);
    CHECK(a.source_positions[s].z == b.source_positions[s].z);
  }
  REQUIRE(a.total_frames == b.total_frames);
  for (std::size_t m = 0; m < a.methods.size(); ++m) {
    CHECK(a.methods[m].measured_additions == b.methods[m].measured_additions);
    for (std::size_t i = 0; i < a.methods[m].estimates.size(); ++i) {
      CHECK(a.methods[m].estimates[i].position.x == b.methods[m].estimates[i].position.x);
      CHECK(a.methods[m].estimates[i].position.y == b.methods[m].estimates[i].position.y);
      CHECK(a.methods[m].estimates[i].position.z == b.methods[m].estimates[i].position.z);
      CHECK(a.methods[m].estimates[i].score == b.methods[m].estimates[i].score);
    }
  }

  // A different seed draws different positions.
  cfg.seed = 12;
  const RunReport c = run_experiment(cfg);
  CHECK((c.source_positions[0].x != a.source_positions[0].x ||
         c.source_positions[0].y != a.source_positions[0].y));
}

TEST_CASE("experiment: random sources respect the region margin and the room") {
  ExperimentConfig cfg = small_config();
  cfg.sources.positions.clear();
  cfg.sources.random_count = 8;
  cfg.sources.margin = 0.25;
  cfg.methods.resize(1);
  cfg.signal.duration = 0.15;

  const RunReport report = run_experiment(cfg);
  REQUIRE(report.source_positions.size() == 8);
  for (const Vec3& p : report.source_positions) {
    CHECK(p.x >= cfg.region_origin.x + 0.25);
    CHECK(p.x <= cfg.region_origin.x + cfg.region_extents.x - 0.25);
    CHECK(p.y >= cfg.region_origin.y + 0.25);
    CHECK(p.y <= cfg.region_origin.y + cfg.region_extents.y - 0.25);
    CHECK(p.z == cfg.region_origin.z);  // flat region pins the vertical axis
  }
}

TEST_CASE("experiment: prerecorded input replaces simulation") {
  ExperimentConfig cfg = small_config();
  cfg.room.reset();
  cfg.mic_positions = {{1.0, 0.4, 1.2}, {1.4, 0.4, 1.2}, {1.8, 0.4, 1.2}};

  // Synthesize three channels of noise; content is arbitrary for this test.
  std::mt19937 rng(3);
  std::normal_distribution<double> g(0.0, 0.25);
  std::vector<std::vector<double>> channels(3, std::vector<double>(4500));
  for (auto& ch : channels)
    for (double& v : ch) v = g(rng);

  TempFile wav("srp-exp-input");
  write_wav(wav.str(), channels, cfg.fs, 16);
  cfg.sources.wav_paths = {wav.str()};

  const RunReport report = run_experiment(cfg);
  CHECK(report.total_frames == 3);  // (4500 - 2048) / 1024 + 1
  CHECK(report.methods[0].estimates.size() == 3);

  SECTION("channel-count mismatch is rejected") {
    ExperimentConfig bad = cfg;
    bad.mic_positions = small_config().mic_positions;  // five mics, three channels
    CHECK_THROWS_WITH(run_experiment(bad), Catch::Matchers::ContainsSubstring("channel count"));
  }
  SECTION("sample-rate mismatch is rejected") {
    ExperimentConfig bad = cfg;
    bad.fs = 16000.0;
    CHECK_THROWS_WITH(run_experiment(bad), Catch::Matchers::ContainsSubstring("sample rate"));
  }
}

TEST_CASE("experiment: report serialization produces the declared files") {
  ExperimentConfig cfg = small_config();
  cfg.methods.resize(2);
  cfg.signal.duration = 0.15;
  const RunReport report = run_experiment(cfg);

  SECTION("json carries the full report") {
    const nlohmann::json j = to_json(report);
    CHECK(j["fs"] == cfg.fs);
    CHECK(j["total_frames"] == report.total_frames);
    REQUIRE(j["methods"].size() == 2);
    CHECK(j["methods"][0]["name"] == "dense");
    CHECK(j["methods"][0]["kind"] == "csrp");
    CHECK(j["methods"][0]["estimates"].size() == report.total_frames);
    CHECK(j["methods"][0]["measured_additions"] == report.methods[0].measured_additions);
    CHECK(j["methods"][0]["histogram"].size() == 7);
    CHECK(j["methods"][0]["complexity"]["ops_csrp"] ==
          report.methods[0].complexity.ops_csrp);

    TempFile file("srp-exp-json");
    write_report_json(file.str(), report);
    std::ifstream in(file.str());
    nlohmann::json back;
    in >> back;
    CHECK(back["total_frames"] == report.total_frames);
  }

  SECTION("csv writers emit one row per estimate and per bin") {
    TempFile est("srp-exp-est");
    TempFile hist("srp-exp-hist");
    write_estimates_csv(est.str(), report);
    write_histogram_csv(hist.str(), report);

    auto count_lines = [](const std::string& path) {
      std::ifstream in(path);
      std::string line;
      std::size_t n = 0;
      while (std::getline(in, line))
        if (!line.empty()) ++n;
      return n;
    };
    CHECK(count_lines(est.str()) == 1 + 2 * report.total_frames);  // header + rows
    CHECK(count_lines(hist.str()) == 1 + 2 * 7);
  }

  SECTION("energy map matches the grid") {
    const PointGrid grid = build_point_grid(cfg.make_region(), 0.35);
    std::vector<double> scores(static_cast<std::size_t>(grid.size()), 1.5);
    TempFile map("srp-exp-map");
    write_energymap_csv(map.str(), grid, scores);
    std::ifstream in(map.str());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
      if (!line.empty()) ++n;
    CHECK(n == 1 + static_cast<std::size_t>(grid.size()));
    scores.pop_back();
    CHECK_THROWS_AS(write_energymap_csv(map.str(), grid, scores), std::invalid_argument);
  }
}

TEST_CASE("experiment: configs that cannot run are rejected up front") {
  ExperimentConfig cfg = small_config();
  cfg.methods[0].spacing = -1.0;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);

  ExperimentConfig no_signal = small_config();
  no_signal.signal.duration = 0.01;  // 160 samples, shorter than one frame
  CHECK_THROWS_WITH(run_experiment(no_signal), Catch::Matchers::ContainsSubstring("frame"));
}
