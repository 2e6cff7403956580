#pragma once
// Experiment configuration: typed schema, TOML ingestion, array-layout
// generators, and the validation run before any experiment starts.

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "srp/correlation.hpp"
#include "srp/geometry.hpp"
#include "srp/toml.hpp"

namespace srp {

enum class MethodKind { PointSearch, VolumeSearch, TwoStage, RangeSearch };

inline MethodKind method_kind_from_string(const std::string& s) {
  if (s == "csrp") return MethodKind::PointSearch;
  if (s == "vsrp") return MethodKind::VolumeSearch;
  if (s == "rvsrp") return MethodKind::TwoStage;
  if (s == "msrp") return MethodKind::RangeSearch;
  throw std::invalid_argument("unknown method kind '" + s + "' (csrp|vsrp|rvsrp|msrp)");
}

inline const char* method_kind_name(MethodKind k) {
  switch (k) {
    case MethodKind::PointSearch: return "csrp";
    case MethodKind::VolumeSearch: return "vsrp";
    case MethodKind::TwoStage: return "rvsrp";
    case MethodKind::RangeSearch: return "msrp";
  }
  return "?";
}

struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::PointSearch;
  double spacing = 0.0;         // point search: grid step
  double volume_edge = 0.0;     // volume-based methods: box edge
  int alpha = 0;                // member points per axis inside a volume
  double refine_spacing = 0.0;  // two-stage: second-pass step
  bool closed_refine = true;    // include both faces of the refine lattice
};

struct RoomConfig {
  Vec3 size{0.0, 0.0, 0.0};
  double t60 = 0.0;         // exactly one of t60/beta may be positive
  double beta = 0.0;        // both zero means anechoic
  bool fractional = false;  // windowed-sinc taps instead of nearest-sample
};

struct SignalConfig {
  double duration = 1.0;          // seconds of white-noise excitation
  std::optional<double> snr_db;   // per-channel additive noise, absent = clean
};

struct SourceConfig {
  std::vector<Vec3> positions;          // explicit ground truth
  int random_count = 0;                 // or: draw this many inside the region
  double margin = 0.5;                  // keep-out from region faces for draws
  std::vector<std::string> wav_paths;   // prerecorded input, one per position
};

struct ExperimentConfig {
  std::uint32_t seed = 0;
  std::string output_dir = ".";
  double fs = 48000.0;
  double c = 343.0;
  FramePlan frames;
  bool phat = true;
  int corr_margin = 8;
  int error_dims = 3;
  std::vector<Vec3> mic_positions;
  Vec3 region_origin{0.0, 0.0, 0.0};
  Vec3 region_extents{0.0, 0.0, 0.0};
  std::optional<RoomConfig> room;
  SignalConfig signal;
  SourceConfig sources;
  std::vector<MethodSpec> methods;

  MicArray make_array() const { return MicArray(mic_positions); }
  SearchRegion make_region() const { return SearchRegion(region_origin, region_extents); }
};

// --- array layout generators -------------------------------------------------

// Equally spaced colinear microphones centered on `center`, along axis
// 0=x, 1=y, 2=z.
inline MicArray make_ula(int count, double spacing, const Vec3& center, int axis) {
  if (count < 2) throw std::invalid_argument("make_ula: need at least 2 microphones");
  if (spacing <= 0.0) throw std::invalid_argument("make_ula: spacing must be positive");
  if (axis < 0 || axis > 2) throw std::invalid_argument("make_ula: axis must be 0, 1, or 2");
  std::vector<Vec3> pos(static_cast<std::size_t>(count), center);
  const double start = -0.5 * spacing * static_cast<double>(count - 1);
  for (int i = 0; i < count; ++i)
    pos[static_cast<std::size_t>(i)][axis] = center[axis] + start + spacing * i;
  return MicArray(std::move(pos));
}

// rows x cols rectangular panel spanning width x height, centered on
// `center`, facing along `normal` (0=x, 1=y, 2=z). Rows step the height,
// columns the width; corner microphones sit on the panel edges.
inline MicArray make_panel(int rows, int cols, double width, double height, const Vec3& center,
                           int normal) {
  if (rows < 1 || cols < 1 || rows * cols < 2)
    throw std::invalid_argument("make_panel: need at least 2 microphones");
  if (width <= 0.0 || height <= 0.0)
    throw std::invalid_argument("make_panel: panel dimensions must be positive");
  if (normal < 0 || normal > 2) throw std::invalid_argument("make_panel: normal must be 0, 1, or 2");
  const int u_axis = normal == 0 ? 1 : 0;             // width axis
  const int v_axis = normal == 2 ? 1 : 2;             // height axis
  std::vector<Vec3> pos;
  pos.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int col = 0; col < cols; ++col) {
      Vec3 m = center;
      m[u_axis] += cols == 1 ? 0.0 : -0.5 * width + width * col / static_cast<double>(cols - 1);
      m[v_axis] += rows == 1 ? 0.0 : -0.5 * height + height * r / static_cast<double>(rows - 1);
      pos.push_back(m);
    }
  }
  return MicArray(std::move(pos));
}

// --- TOML ingestion ----------------------------------------------------------

namespace config_detail {

inline Vec3 to_vec3(const TomlValue& v, const std::string& key) {
  if (!v.is_array() || v.as_array().size() != 3)
    throw std::invalid_argument(key + ": expected an array of 3 numbers");
  const auto& a = v.as_array();
  return {a[0].as_double(), a[1].as_double(), a[2].as_double()};
}

inline int axis_from_string(const std::string& s, const std::string& key) {
  if (s == "x") return 0;
  if (s == "y") return 1;
  if (s == "z") return 2;
  throw std::invalid_argument(key + ": expected \"x\", \"y\", or \"z\"");
}

inline std::vector<Vec3> read_positions(const TomlValue& v, const std::string& key) {
  if (!v.is_array()) throw std::invalid_argument(key + ": expected an array of positions");
  std::vector<Vec3> out;
  for (const auto& item : v.as_array()) out.push_back(to_vec3(item, key));
  return out;
}

inline std::vector<Vec3> read_array_section(const TomlValue& arr) {
  if (arr.contains("positions")) return read_positions(arr.at("positions"), "array.positions");
  const std::string kind = arr.at("kind").as_string();
  if (kind == "ula") {
    return make_ula(static_cast<int>(arr.at("count").as_int()), arr.at("spacing").as_double(),
                    to_vec3(arr.at("center"), "array.center"),
                    axis_from_string(arr.at("axis").as_string(), "array.axis"))
        .mics();
  }
  if (kind == "panel") {
    return make_panel(static_cast<int>(arr.at("rows").as_int()),
                      static_cast<int>(arr.at("cols").as_int()), arr.at("width").as_double(),
                      arr.at("height").as_double(), to_vec3(arr.at("center"), "array.center"),
                      axis_from_string(arr.at("normal").as_string(), "array.normal"))
        .mics();
  }
  throw std::invalid_argument("array.kind: expected \"ula\" or \"panel\" (or give positions)");
}

}  // namespace config_detail

inline void validate_experiment_config(const ExperimentConfig& cfg);

inline ExperimentConfig load_experiment_config(const TomlValue& root) {
  using config_detail::to_vec3;
  ExperimentConfig cfg;

  if (root.contains("seed")) cfg.seed = static_cast<std::uint32_t>(root.at("seed").as_int());
  if (root.contains("output_dir")) cfg.output_dir = root.at("output_dir").as_string();
  if (root.contains("fs")) cfg.fs = root.at("fs").as_double();
  if (root.contains("c")) cfg.c = root.at("c").as_double();

  if (root.contains("frames")) {
    const auto& f = root.at("frames");
    if (f.contains("length")) cfg.frames.frame_length = static_cast<std::size_t>(f.at("length").as_int());
    if (f.contains("hop")) cfg.frames.hop = static_cast<std::size_t>(f.at("hop").as_int());
  }
  if (root.contains("correlation")) {
    const auto& co = root.at("correlation");
    if (co.contains("phat")) cfg.phat = co.at("phat").as_bool();
    if (co.contains("margin")) cfg.corr_margin = static_cast<int>(co.at("margin").as_int());
  }
  if (root.contains("metrics")) {
    const auto& m = root.at("metrics");
    if (m.contains("dims")) cfg.error_dims = static_cast<int>(m.at("dims").as_int());
  }

  cfg.mic_positions = config_detail::read_array_section(root.at("array"));

  const auto& region = root.at("region");
  cfg.region_origin = to_vec3(region.at("origin"), "region.origin");
  cfg.region_extents = to_vec3(region.at("extents"), "region.extents");

  if (root.contains("room")) {
    const auto& r = root.at("room");
    RoomConfig room;
    room.size = to_vec3(r.at("size"), "room.size");
    if (r.contains("t60")) room.t60 = r.at("t60").as_double();
    if (r.contains("beta")) room.beta = r.at("beta").as_double();
    if (r.contains("fractional")) room.fractional = r.at("fractional").as_bool();
    cfg.room = room;
  }
  if (root.contains("signal")) {
    const auto& s = root.at("signal");
    if (s.contains("duration")) cfg.signal.duration = s.at("duration").as_double();
    if (s.contains("snr_db")) cfg.signal.snr_db = s.at("snr_db").as_double();
  }
  if (root.contains("sources")) {
    const auto& s = root.at("sources");
    if (s.contains("positions"))
      cfg.sources.positions = config_detail::read_positions(s.at("positions"), "sources.positions");
    if (s.contains("count")) cfg.sources.random_count = static_cast<int>(s.at("count").as_int());
    if (s.contains("margin")) cfg.sources.margin = s.at("margin").as_double();
    if (s.contains("wav")) {
      for (const auto& w : s.at("wav").as_array()) cfg.sources.wav_paths.push_back(w.as_string());
    }
  }

  if (!root.contains("method")) throw std::invalid_argument("config: no [[method]] entries");
  for (const auto& m : root.at("method").as_array()) {
    MethodSpec spec;
    spec.kind = method_kind_from_string(m.at("kind").as_string());
    spec.name = m.contains("name") ? m.at("name").as_string() : method_kind_name(spec.kind);
    if (m.contains("spacing")) spec.spacing = m.at("spacing").as_double();
    if (m.contains("volume_edge")) spec.volume_edge = m.at("volume_edge").as_double();
    if (m.contains("alpha")) spec.alpha = static_cast<int>(m.at("alpha").as_int());
    if (m.contains("refine_spacing")) spec.refine_spacing = m.at("refine_spacing").as_double();
    if (m.contains("closed_refine")) spec.closed_refine = m.at("closed_refine").as_bool();
    cfg.methods.push_back(std::move(spec));
  }

  validate_experiment_config(cfg);
  return cfg;
}

inline ExperimentConfig load_experiment_config_file(const std::string& path) {
  return load_experiment_config(parse_toml_file(path));
}

// Fails fast with the offending key; everything downstream may then assume
// a coherent configuration.
inline void validate_experiment_config(const ExperimentConfig& cfg) {
  if (cfg.fs <= 0.0) throw std::invalid_argument("fs must be positive");
  if (cfg.c <= 0.0) throw std::invalid_argument("c must be positive");
  if (cfg.error_dims != 2 && cfg.error_dims != 3)
    throw std::invalid_argument("metrics.dims must be 2 or 3");
  if (cfg.corr_margin < 0) throw std::invalid_argument("correlation.margin must be >= 0");
  frame_count(cfg.frames, 0);  // validates the plan

  const MicArray array = cfg.make_array();  // validates mic count/finiteness
  const SearchRegion region = cfg.make_region();

  const int needed = correlation_max_lag(array, cfg.fs, cfg.c, cfg.corr_margin);
  if (needed > 32767)
    throw std::invalid_argument("lag window exceeds 16-bit table range; lower fs or shrink the array");

  if (cfg.methods.empty()) throw std::invalid_argument("config: no methods");
  std::set<std::string> names;
  for (const auto& m : cfg.methods) {
    if (!names.insert(m.name).second)
      throw std::invalid_argument("duplicate method name '" + m.name + "'");
    switch (m.kind) {
      case MethodKind::PointSearch:
        if (m.spacing <= 0.0)
          throw std::invalid_argument("method '" + m.name + "': spacing must be positive");
        break;
      case MethodKind::VolumeSearch:
      case MethodKind::TwoStage:
        if (m.volume_edge <= 0.0)
          throw std::invalid_argument("method '" + m.name + "': volume_edge must be positive");
        if (m.alpha < 2)
          throw std::invalid_argument("method '" + m.name + "': alpha must be at least 2");
        if (m.kind == MethodKind::TwoStage &&
            (m.refine_spacing <= 0.0 || m.refine_spacing > m.volume_edge))
          throw std::invalid_argument("method '" + m.name +
                                      "': refine_spacing must be in (0, volume_edge]");
        break;
      case MethodKind::RangeSearch:
        if (m.volume_edge <= 0.0)
          throw std::invalid_argument("method '" + m.name + "': volume_edge must be positive");
        break;
    }
  }

  if (cfg.room) {
    const RoomConfig& room = *cfg.room;
    if (!(room.size.x > 0.0 && room.size.y > 0.0 && room.size.z > 0.0))
      throw std::invalid_argument("room.size must be positive");
    if (room.t60 > 0.0 && room.beta > 0.0)
      throw std::invalid_argument("room: give either t60 or beta, not both");
    if (room.beta < 0.0 || room.beta >= 1.0)
      throw std::invalid_argument("room.beta must be in [0, 1)");
    for (int k = 0; k < 3; ++k) {
      if (region.origin[k] < 0.0 || region.origin[k] + region.extents[k] > room.size[k])
        throw std::invalid_argument("search region leaves the room");
    }
    for (const Vec3& m : cfg.mic_positions) {
      if (!(m.x > 0.0 && m.x < room.size.x && m.y > 0.0 && m.y < room.size.y && m.z > 0.0 &&
            m.z < room.size.z))
        throw std::invalid_argument("microphone outside the room");
    }
    for (const Vec3& s : cfg.sources.positions) {
      if (!(s.x > 0.0 && s.x < room.size.x && s.y > 0.0 && s.y < room.size.y && s.z > 0.0 &&
            s.z < room.size.z))
        throw std::invalid_argument("source position outside the room");
    }
    if (cfg.signal.duration <= 0.0) throw std::invalid_argument("signal.duration must be positive");
  }

  const bool have_explicit = !cfg.sources.positions.empty();
  const bool have_random = cfg.sources.random_count > 0;
  if (have_explicit == have_random)
    throw std::invalid_argument("sources: give either explicit positions or a random count");
  if (have_random) {
    if (cfg.sources.margin < 0.0) throw std::invalid_argument("sources.margin must be >= 0");
    for (int k = 0; k < 3; ++k) {
      if (!region.axis_degenerate(k) && region.extents[k] <= 2.0 * cfg.sources.margin)
        throw std::invalid_argument("sources.margin leaves no room to draw positions");
    }
  }
  if (!cfg.sources.wav_paths.empty()) {
    if (!have_explicit || cfg.sources.wav_paths.size() != cfg.sources.positions.size())
      throw std::invalid_argument("sources.wav needs one file per explicit position");
  } else if (!cfg.room) {
    throw std::invalid_argument("config: need either a [room] to simulate or sources.wav input");
  }
}

}  // namespace srp
