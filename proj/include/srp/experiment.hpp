#pragma once
// End-to-end experiment driver: realize the configuration (array, region,
// per-method search structures), obtain microphone signals by simulation
// or from WAV files, then localize every frame with every method and
// aggregate errors, operation counts, and timings.
//
// Given the same configuration the estimates, errors, and counters are
// bit-identical across runs; only the wall-clock fields vary.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "srp/config.hpp"
#include "srp/correlation.hpp"
#include "srp/geometry.hpp"
#include "srp/lag_tables.hpp"
#include "srp/localizers.hpp"
#include "srp/metrics.hpp"
#include "srp/room_sim.hpp"
#include "srp/wav.hpp"

namespace srp {

struct FrameEstimate {
  int source = 0;
  int frame = 0;
  Vec3 position{0.0, 0.0, 0.0};
  double score = 0.0;
  double error_cm = 0.0;
};

struct MethodReport {
  MethodSpec spec;
  ComplexityReport complexity;
  std::vector<FrameEstimate> estimates;
  ErrorStats errors;
  std::uint64_t measured_additions = 0;
  std::uint64_t predicted_per_frame = 0;
  double wall_ms = 0.0;
};

struct RunReport {
  double fs = 0.0;
  double c = 0.0;
  int error_dims = 3;
  std::uint64_t total_frames = 0;
  std::vector<Vec3> source_positions;
  std::vector<MethodReport> methods;
};

namespace detail {

// Search structures built once per method and reused for every frame.
struct MethodState {
  MethodSpec spec;
  std::optional<PointGrid> grid;
  std::optional<PointLagTable> table;
  std::optional<VolumetricGrid> vgrid;
  std::optional<VolumeLagSets> sets;
};

inline MethodState build_method_state(const MethodSpec& spec, const SearchRegion& region,
                                      const MicArray& array, double fs, double c) {
  MethodState st;
  st.spec = spec;
  switch (spec.kind) {
    case MethodKind::PointSearch:
      st.grid = build_point_grid(region, spec.spacing);
      st.table = build_point_table(*st.grid, array, fs, c);
      break;
    case MethodKind::VolumeSearch:
    case MethodKind::TwoStage:
      st.vgrid = build_volumetric_grid(region, spec.volume_edge, spec.alpha);
      st.sets = build_volume_lag_sets(*st.vgrid, array, fs, c);
      break;
    case MethodKind::RangeSearch:
      st.vgrid = build_volumetric_grid(region, spec.volume_edge,
                                       spec.alpha >= 2 ? spec.alpha : 2);
      break;
  }
  return st;
}

inline ComplexityReport summarize_method(const MethodState& st, const MicArray& array, double fs,
                                         double c) {
  ComplexityReport rep;
  rep.pairs = array.pair_count();
  if (st.grid) {
    rep.n_grid_points = st.grid->size();
    rep.ops_csrp = predict_ops_csrp(st.grid->size(), array.pair_count());
  }
  if (st.table) rep.point_table_bytes = st.table->bytes();
  if (st.vgrid) {
    rep.n_volumes = st.vgrid->volume_count();
    rep.alpha = st.vgrid->alpha();
    rep.n_grid_points = st.vgrid->points().size();
  }
  if (st.sets) {
    rep.mean_lag_set_size = mean_cardinality(*st.sets);
    rep.lag_set_bytes = st.sets->bytes();
    rep.ops_vsrp = predict_ops_vsrp(*st.sets);
    if (st.spec.kind == MethodKind::TwoStage)
      rep.ops_rvsrp = predict_ops_rvsrp(*st.sets, st.spec.volume_edge, st.spec.refine_spacing,
                                        array.pair_count(), st.spec.closed_refine);
  }
  if (st.spec.kind == MethodKind::RangeSearch)
    rep.ops_msrp = predict_ops_msrp(*st.vgrid, array, fs, c);
  return rep;
}

struct OneShot {
  Vec3 position{0.0, 0.0, 0.0};
  double score = 0.0;
  std::uint64_t additions = 0;
};

inline OneShot localize_frame(MethodState& st, const MicArray& array, const CorrelationSet& corr,
                              double fs, double c) {
  OneShot out;
  switch (st.spec.kind) {
    case MethodKind::PointSearch: {
      const PointSearchResult r = csrp_localize(*st.table, *st.grid, corr);
      out = {r.best.position, r.best.score, r.additions};
      break;
    }
    case MethodKind::VolumeSearch: {
      const VolumeSearchResult r = vsrp_localize(*st.sets, *st.vgrid, corr);
      out = {r.center, r.score, r.additions};
      break;
    }
    case MethodKind::TwoStage: {
      const TwoStageResult r = rvsrp_localize(*st.sets, *st.vgrid, array, corr, fs, c,
                                              st.spec.refine_spacing, st.spec.closed_refine);
      out = {r.best.position, r.best.score, r.additions()};
      break;
    }
    case MethodKind::RangeSearch: {
      const RangeSearchResult r = msrp_localize(*st.vgrid, array, corr, fs, c);
      out = {r.center, r.score, r.additions};
      break;
    }
  }
  return out;
}

}  // namespace detail

// Ground-truth positions for a run: the explicit list, or seeded draws
// inside the region shrunk by the configured margin.
inline std::vector<Vec3> resolve_source_positions(const ExperimentConfig& cfg,
                                                  const SearchRegion& region) {
  if (!cfg.sources.positions.empty()) return cfg.sources.positions;
  std::vector<Vec3> out;
  std::seed_seq seq{cfg.seed, 0xA5u};
  std::mt19937 rng(seq);
  for (int i = 0; i < cfg.sources.random_count; ++i) {
    Vec3 p = region.origin;
    for (int k = 0; k < 3; ++k) {
      if (region.axis_degenerate(k)) continue;
      std::uniform_real_distribution<double> u(region.origin[k] + cfg.sources.margin,
                                               region.origin[k] + region.extents[k] -
                                                   cfg.sources.margin);
      p[k] = u(rng);
    }
    out.push_back(p);
  }
  return out;
}

// Microphone signals for one source: prerecorded input when configured,
// otherwise a seeded noise burst rendered through the room.
inline std::vector<std::vector<double>> render_source_signals(const ExperimentConfig& cfg,
                                                              const MicArray& array,
                                                              const Vec3& position, int index) {
  if (!cfg.sources.wav_paths.empty()) {
    const WavData wav = read_wav(cfg.sources.wav_paths[static_cast<std::size_t>(index)]);
    if (wav.channels.size() != array.mic_count())
      throw std::runtime_error(cfg.sources.wav_paths[static_cast<std::size_t>(index)] +
                               ": channel count does not match the array");
    if (wav.fs != cfg.fs)
      throw std::runtime_error(cfg.sources.wav_paths[static_cast<std::size_t>(index)] +
                               ": sample rate does not match the config");
    return wav.channels;
  }

  const RoomConfig& rc = *cfg.room;
  const RoomSpec room = rc.t60 > 0.0 ? RoomSpec::from_t60(rc.size, rc.t60, cfg.fs, cfg.c)
                                     : RoomSpec(rc.size, rc.beta, cfg.fs, cfg.c);
  if (!room.contains(position))
    throw std::invalid_argument("source position outside the room");

  const auto n = static_cast<std::size_t>(std::llround(cfg.signal.duration * cfg.fs));
  std::seed_seq seq{cfg.seed, 0x51u, static_cast<std::uint32_t>(index)};
  std::mt19937 rng(seq);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> excitation(n);
  for (double& v : excitation) v = g(rng);

  RenderOptions opts;
  opts.rir.fractional = rc.fractional;
  opts.snr_db = cfg.signal.snr_db;
  opts.seed = cfg.seed + static_cast<std::uint32_t>(index) * 7919u;
  return render_mic_signals(room, position, excitation, array, opts);
}

inline RunReport run_experiment(const ExperimentConfig& cfg) {
  validate_experiment_config(cfg);
  const MicArray array = cfg.make_array();
  const SearchRegion region = cfg.make_region();

  RunReport report;
  report.fs = cfg.fs;
  report.c = cfg.c;
  report.error_dims = cfg.error_dims;
  report.source_positions = resolve_source_positions(cfg, region);

  std::vector<detail::MethodState> states;
  for (const MethodSpec& spec : cfg.methods)
    states.push_back(detail::build_method_state(spec, region, array, cfg.fs, cfg.c));

  report.methods.resize(states.size());
  for (std::size_t m = 0; m < states.size(); ++m) {
    report.methods[m].spec = states[m].spec;
    report.methods[m].complexity = detail::summarize_method(states[m], array, cfg.fs, cfg.c);
    const ComplexityReport& cx = report.methods[m].complexity;
    switch (states[m].spec.kind) {
      case MethodKind::PointSearch: report.methods[m].predicted_per_frame = cx.ops_csrp; break;
      case MethodKind::VolumeSearch: report.methods[m].predicted_per_frame = cx.ops_vsrp; break;
      case MethodKind::TwoStage: report.methods[m].predicted_per_frame = cx.ops_rvsrp; break;
      case MethodKind::RangeSearch: report.methods[m].predicted_per_frame = cx.ops_msrp; break;
    }
  }

  const int zmax = correlation_max_lag(array, cfg.fs, cfg.c, cfg.corr_margin);
  GccEngine engine(cfg.frames.frame_length, zmax, cfg.phat);

  std::vector<Vec3> truths;  // one entry per processed frame
  for (std::size_t s = 0; s < report.source_positions.size(); ++s) {
    const Vec3 truth = report.source_positions[s];
    const auto signals = render_source_signals(cfg, array, truth, static_cast<int>(s));
    const std::size_t frames = frame_count(cfg.frames, signals[0].size());
    if (frames == 0)
      throw std::runtime_error("signal shorter than one frame for source " + std::to_string(s));

    for (std::size_t f = 0; f < frames; ++f) {
      std::vector<std::span<const double>> views;
      views.reserve(signals.size());
      for (const auto& ch : signals) views.push_back(frame_view(cfg.frames, ch, f));
      const CorrelationSet corr = engine.compute(views, array.pairs());
      truths.push_back(truth);
      ++report.total_frames;

      for (std::size_t m = 0; m < states.size(); ++m) {
        const auto t0 = std::chrono::steady_clock::now();
        const detail::OneShot shot =
            detail::localize_frame(states[m], array, corr, cfg.fs, cfg.c);
        const auto t1 = std::chrono::steady_clock::now();
        report.methods[m].wall_ms +=
            std::chrono::duration<double, std::milli>(t1 - t0).count();
        report.methods[m].measured_additions += shot.additions;
        report.methods[m].estimates.push_back({static_cast<int>(s), static_cast<int>(f),
                                               shot.position, shot.score, 0.0});
      }
    }
  }

  for (auto& method : report.methods) {
    std::vector<Vec3> positions;
    positions.reserve(method.estimates.size());
    for (const auto& e : method.estimates) positions.push_back(e.position);
    method.errors = error_metrics(positions, truths, cfg.error_dims);
    for (std::size_t i = 0; i < method.estimates.size(); ++i)
      method.estimates[i].error_cm = method.errors.errors_cm[i];
  }
  return report;
}

// --- serialization -----------------------------------------------------------

inline nlohmann::json to_json(const ComplexityReport& cx) {
  return {{"grid_points", cx.n_grid_points},
          {"volumes", cx.n_volumes},
          {"pairs", cx.pairs},
          {"alpha", cx.alpha},
          {"mean_lag_set_size", cx.mean_lag_set_size},
          {"ops_csrp", cx.ops_csrp},
          {"ops_vsrp", cx.ops_vsrp},
          {"ops_rvsrp", cx.ops_rvsrp},
          {"ops_msrp", cx.ops_msrp},
          {"point_table_bytes", cx.point_table_bytes},
          {"lag_set_bytes", cx.lag_set_bytes}};
}

inline nlohmann::json to_json(const RunReport& report) {
  nlohmann::json sources = nlohmann::json::array();
  for (const Vec3& p : report.source_positions) sources.push_back({p.x, p.y, p.z});

  nlohmann::json methods = nlohmann::json::array();
  for (const MethodReport& m : report.methods) {
    nlohmann::json estimates = nlohmann::json::array();
    for (const FrameEstimate& e : m.estimates)
      estimates.push_back({{"source", e.source},
                           {"frame", e.frame},
                           {"position", {e.position.x, e.position.y, e.position.z}},
                           {"score", e.score},
                           {"error_cm", e.error_cm}});
    methods.push_back({{"name", m.spec.name},
                       {"kind", method_kind_name(m.spec.kind)},
                       {"params",
                        {{"spacing", m.spec.spacing},
                         {"volume_edge", m.spec.volume_edge},
                         {"alpha", m.spec.alpha},
                         {"refine_spacing", m.spec.refine_spacing},
                         {"closed_refine", m.spec.closed_refine}}},
                       {"mean_error_cm", m.errors.mean_cm},
                       {"median_error_cm", m.errors.median_cm},
                       {"histogram", m.errors.histogram},
                       {"measured_additions", m.measured_additions},
                       {"predicted_additions_per_frame", m.predicted_per_frame},
                       {"complexity", to_json(m.complexity)},
                       {"wall_ms", m.wall_ms},
                       {"estimates", std::move(estimates)}});
  }

  return {{"fs", report.fs},
          {"c", report.c},
          {"error_dims", report.error_dims},
          {"total_frames", report.total_frames},
          {"sources", std::move(sources)},
          {"methods", std::move(methods)}};
}

inline void write_report_json(const std::string& path, const RunReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(report).dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline void write_estimates_csv(const std::string& path, const RunReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "method,source,frame,x,y,z,score,error_cm\n";
  out.precision(12);
  for (const MethodReport& m : report.methods)
    for (const FrameEstimate& e : m.estimates)
      out << m.spec.name << ',' << e.source << ',' << e.frame << ',' << e.position.x << ','
          << e.position.y << ',' << e.position.z << ',' << e.score << ',' << e.error_cm << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline void write_histogram_csv(const std::string& path, const RunReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "method,bin_low_cm,bin_high_cm,count\n";
  for (const MethodReport& m : report.methods) {
    for (std::size_t b = 0; b < m.errors.histogram.size(); ++b) {
      out << m.spec.name << ',' << b * 5;
      if (b + 1 < m.errors.histogram.size())
        out << ',' << (b + 1) * 5;
      else
        out << ",";  // open-ended overflow bin
      out << ',' << m.errors.histogram[b] << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

// Objective value of every grid point for one frame, as x,y,z,score rows.
inline void write_energymap_csv(const std::string& path, const PointGrid& grid,
                                const std::vector<double>& scores) {
  if (scores.size() != static_cast<std::size_t>(grid.size()))
    throw std::invalid_argument("write_energymap_csv: score count does not match the grid");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "x,y,z,score\n";
  out.precision(12);
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    const Vec3 p = grid.point(i);
    out << p.x << ',' << p.y << ',' << p.z << ',' << scores[static_cast<std::size_t>(i)] << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace srp
