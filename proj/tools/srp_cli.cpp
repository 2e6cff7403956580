// Command-line front end for the localization toolkit.
//
//   srp tables    --config cfg.toml   search-structure sizes and op counts
//   srp simulate  --config cfg.toml   render microphone WAV files
//   srp localize  --config cfg.toml   per-frame position estimates as CSV
//   srp bench     --config cfg.toml   full run: report JSON + CSV outputs
//   srp energymap --config cfg.toml   objective value of every grid point
//
// Every command is driven by the same TOML experiment configuration; the
// subcommand decides which part of the pipeline runs. Exit code 0 means
// the whole requested pipeline succeeded.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "srp/experiment.hpp"

namespace {

using namespace srp;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint32_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "experiment configuration (TOML)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "override the configured random seed");
}

ExperimentConfig load(const CommonArgs& args) {
  ExperimentConfig cfg = load_experiment_config_file(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (!args.out.empty()) cfg.output_dir = args.out;
  return cfg;
}

std::filesystem::path ensure_output_dir(const ExperimentConfig& cfg) {
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

// --- tables --------------------------------------------------------------------

int run_tables(const CommonArgs& args, const std::string& cache_dir) {
  const ExperimentConfig cfg = load(args);
  const MicArray array = cfg.make_array();
  const SearchRegion region = cfg.make_region();

  nlohmann::json out = nlohmann::json::array();
  for (const MethodSpec& spec : cfg.methods) {
    const auto state = detail::build_method_state(spec, region, array, cfg.fs, cfg.c);
    const ComplexityReport cx = detail::summarize_method(state, array, cfg.fs, cfg.c);
    nlohmann::json entry = to_json(cx);
    entry["name"] = spec.name;
    entry["kind"] = method_kind_name(spec.kind);

    if (state.table && !cache_dir.empty()) {
      std::filesystem::create_directories(cache_dir);
      const auto path = std::filesystem::path(cache_dir) / (spec.name + ".lags");
      save_point_table(path.string(), *state.table,
                       table_cache_key(array, region, spec.spacing, cfg.fs, cfg.c));
      entry["cache_file"] = path.string();
    }
    out.push_back(std::move(entry));
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

// --- simulate ------------------------------------------------------------------

int run_simulate(const CommonArgs& args, int bits) {
  const ExperimentConfig cfg = load(args);
  if (!cfg.room)
    throw std::runtime_error("simulate needs a [room] section; nothing to render");
  const MicArray array = cfg.make_array();
  const SearchRegion region = cfg.make_region();
  const std::filesystem::path dir = ensure_output_dir(cfg);

  const std::vector<Vec3> positions = resolve_source_positions(cfg, region);
  for (std::size_t s = 0; s < positions.size(); ++s) {
    const auto signals = render_source_signals(cfg, array, positions[s], static_cast<int>(s));
    double peak = 0.0;
    for (const auto& ch : signals)
      for (const double v : ch) peak = std::max(peak, std::abs(v));
    auto scaled = signals;
    if (peak > 0.0)
      for (auto& ch : scaled)
        for (double& v : ch) v *= 0.9 / peak;  // common gain keeps TDoAs intact

    const auto path = dir / ("source_" + std::to_string(s) + ".wav");
    write_wav(path.string(), scaled, cfg.fs, bits);
    std::cout << path.string() << "  (" << signals.size() << " ch, " << signals[0].size()
              << " samples at " << cfg.fs << " Hz, truth " << positions[s].x << ","
              << positions[s].y << "," << positions[s].z << ")\n";
  }
  return 0;
}

// --- localize / bench ------------------------------------------------------------

int run_localize(const CommonArgs& args, const std::vector<std::string>& wavs) {
  ExperimentConfig cfg = load(args);
  if (!wavs.empty()) {
    // Estimate positions for prerecorded input; ground truth is unknown, so
    // reported errors are relative to the region center and only the
    // estimates themselves are meaningful.
    const SearchRegion region = cfg.make_region();
    Vec3 center = region.origin;
    for (int k = 0; k < 3; ++k) center[k] += 0.5 * region.extents[k];
    cfg.sources.positions.assign(wavs.size(), center);
    cfg.sources.random_count = 0;
    cfg.sources.wav_paths = wavs;
    std::cerr << "note: no ground truth for prerecorded input; error columns are "
                 "relative to the region center\n";
  }
  const RunReport report = run_experiment(cfg);

  std::ostringstream csv;
  csv << "method,source,frame,x,y,z,score\n";
  csv.precision(12);
  for (const MethodReport& m : report.methods)
    for (const FrameEstimate& e : m.estimates)
      csv << m.spec.name << ',' << e.source << ',' << e.frame << ',' << e.position.x << ','
          << e.position.y << ',' << e.position.z << ',' << e.score << "\n";
  std::cout << csv.str();
  return 0;
}

int run_bench(const CommonArgs& args) {
  const ExperimentConfig cfg = load(args);
  const std::filesystem::path dir = ensure_output_dir(cfg);
  const RunReport report = run_experiment(cfg);

  write_report_json((dir / "report.json").string(), report);
  write_estimates_csv((dir / "estimates.csv").string(), report);
  write_histogram_csv((dir / "histogram.csv").string(), report);

  std::printf("%-12s %10s %10s %16s %16s %10s\n", "method", "median/cm", "mean/cm",
              "adds/frame", "adds measured", "ms/frame");
  for (const MethodReport& m : report.methods) {
    const double frames = static_cast<double>(report.total_frames);
    std::printf("%-12s %10.2f %10.2f %16llu %16llu %10.2f\n", m.spec.name.c_str(),
                m.errors.median_cm, m.errors.mean_cm,
                static_cast<unsigned long long>(m.predicted_per_frame),
                static_cast<unsigned long long>(m.measured_additions),
                m.wall_ms / frames);
  }
  std::printf("report: %s\n", (dir / "report.json").string().c_str());

  for (const MethodReport& m : report.methods) {
    const bool countable = m.spec.kind == MethodKind::PointSearch ||
                           m.spec.kind == MethodKind::VolumeSearch;
    if (countable && m.measured_additions != m.predicted_per_frame * report.total_frames) {
      std::fprintf(stderr, "error: measured additions diverge from the prediction for '%s'\n",
                   m.spec.name.c_str());
      return 1;
    }
  }
  return 0;
}

// --- energymap -------------------------------------------------------------------

int run_energymap(const CommonArgs& args, int source, int frame, double spacing) {
  const ExperimentConfig cfg = load(args);
  const MicArray array = cfg.make_array();
  const SearchRegion region = cfg.make_region();
  const std::filesystem::path dir = ensure_output_dir(cfg);

  if (spacing <= 0.0) {
    for (const MethodSpec& m : cfg.methods)
      if (m.kind == MethodKind::PointSearch) {
        spacing = m.spacing;
        break;
      }
    if (spacing <= 0.0) spacing = 0.05;
  }

  const std::vector<Vec3> positions = resolve_source_positions(cfg, region);
  if (source < 0 || static_cast<std::size_t>(source) >= positions.size())
    throw std::runtime_error("energymap: source index out of range");
  const auto signals = render_source_signals(cfg, array, positions[static_cast<std::size_t>(source)],
                                             source);
  const std::size_t frames = frame_count(cfg.frames, signals[0].size());
  if (frame < 0 || static_cast<std::size_t>(frame) >= frames)
    throw std::runtime_error("energymap: frame index out of range (signal has " +
                             std::to_string(frames) + " frames)");

  const int zmax = correlation_max_lag(array, cfg.fs, cfg.c, cfg.corr_margin);
  GccEngine engine(cfg.frames.frame_length, zmax, cfg.phat);
  std::vector<std::span<const double>> views;
  for (const auto& ch : signals)
    views.push_back(frame_view(cfg.frames, ch, static_cast<std::size_t>(frame)));
  const CorrelationSet corr = engine.compute(views, array.pairs());

  const PointGrid grid = build_point_grid(region, spacing);
  const PointLagTable table = build_point_table(grid, array, cfg.fs, cfg.c);
  const std::vector<double> scores = point_scores(table, corr);

  const auto path = dir / "energymap.csv";
  write_energymap_csv(path.string(), grid, scores);
  std::cout << path.string() << "  (" << grid.size() << " points at " << spacing << " m)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steered-response-power source localization toolkit"};
  app.require_subcommand(1);

  CommonArgs tables_args, sim_args, loc_args, bench_args, map_args;
  std::string cache_dir;
  int sim_bits = 24;
  std::vector<std::string> loc_wavs;
  int map_source = 0, map_frame = 0;
  double map_spacing = 0.0;

  CLI::App* tables = app.add_subcommand("tables", "build search structures, report size and cost");
  add_common(tables, tables_args);
  tables->add_option("--cache", cache_dir, "directory for reusable lag-table files");

  CLI::App* simulate =
      app.add_subcommand("simulate", "render microphone signals to WAV files");
  add_common(simulate, sim_args);
  simulate->add_option("-o,--out", sim_args.out, "output directory (default: config output_dir)");
  simulate->add_option("--bits", sim_bits, "WAV sample depth (16 or 24)")
      ->check(CLI::IsMember({16, 24}));

  CLI::App* localize =
      app.add_subcommand("localize", "per-frame position estimates as CSV on stdout");
  add_common(localize, loc_args);
  localize->add_option("--wav", loc_wavs, "prerecorded input, one multichannel file per source");

  CLI::App* bench = app.add_subcommand("bench", "run the full experiment and write reports");
  add_common(bench, bench_args);
  bench->add_option("-o,--out", bench_args.out, "output directory (default: config output_dir)");

  CLI::App* energymap =
      app.add_subcommand("energymap", "objective value of every grid point for one frame");
  add_common(energymap, map_args);
  energymap->add_option("-o,--out", map_args.out, "output directory (default: config output_dir)");
  energymap->add_option("--source", map_source, "source index (default 0)");
  energymap->add_option("--frame", map_frame, "frame index (default 0)");
  energymap->add_option("--spacing", map_spacing,
                        "grid step in meters (default: first point-search method)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (tables->parsed()) return run_tables(tables_args, cache_dir);
    if (simulate->parsed()) return run_simulate(sim_args, sim_bits);
    if (localize->parsed()) return run_localize(loc_args, loc_wavs);
    if (bench->parsed()) return run_bench(bench_args);
    if (energymap->parsed()) return run_energymap(map_args, map_source, map_frame, map_spacing);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
