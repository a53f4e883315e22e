#include "uuv/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace uuv {

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}: {}", line, field, message)
                                  : fmt::format("{}: {}", field, message)),
      field_(std::move(field)),
      line_(line),
      message_(message) {}

Posed CameraMount::pose() const {
  return Posed{Vec3d(x, y, z), rot_z(yaw) * rot_x(tilt_x) * rot_y(tilt_y)};
}

namespace {

enum class Unit { kNone, kLength, kAngle, kVolume };

struct Context {
  std::string key;
  int line = 0;
  double scale = 1.0;
  std::filesystem::path base_dir;
  bool* neutral_fill_set = nullptr;
};

[[noreturn]] void fail(const Context& ctx, const std::string& msg) {
  throw ConfigError(ctx.key, ctx.line, msg);
}

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

double parse_double(const Context& ctx, const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    fail(ctx, fmt::format("'{}' is not a finite number", text));
  }
  return value * ctx.scale;
}

long long parse_int(const Context& ctx, const std::string& text, long long lo, long long hi) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(ctx, fmt::format("'{}' is not an integer", text));
  }
  if (value < lo || value > hi) {
    fail(ctx, fmt::format("{} outside [{}, {}]", value, lo, hi));
  }
  return value;
}

bool parse_bool(const Context& ctx, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  fail(ctx, fmt::format("'{}' is not a boolean", text));
}

using Setter = std::function<void(Scenario&, const std::string&, const Context&)>;

struct KeySpec {
  Unit unit;
  Setter set;
};

Setter real(double Scenario::*field) {
  return [field](Scenario& s, const std::string& v, const Context& c) {
    s.*field = parse_double(c, v);
  };
}

template <class Owner>
Setter real(Owner Scenario::*owner, double Owner::*field) {
  return [owner, field](Scenario& s, const std::string& v, const Context& c) {
    (s.*owner).*field = parse_double(c, v);
  };
}

const std::map<std::string, KeySpec>& key_table();

void apply_key_value(Scenario& s, const std::string& raw_key, const std::string& value, int line,
                     const std::filesystem::path& base_dir, bool& neutral_fill_set);

void load_params_file(Scenario& s, const Context& ctx, const std::string& path_text,
                      bool& neutral_fill_set) {
  std::filesystem::path path(path_text);
  if (path.is_relative() && !ctx.base_dir.empty()) path = ctx.base_dir / path;
  std::ifstream in(path);
  if (!in) fail(ctx, fmt::format("cannot open parameter file '{}'", path.string()));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.filename().string(), line_no, "expected 'name = value'");
    }
    const std::string name = trim(body.substr(0, eq));
    try {
      apply_key_value(s, "vehicle." + name, trim(body.substr(eq + 1)), line_no, ctx.base_dir,
                      neutral_fill_set);
    } catch (const ConfigError& e) {
      throw ConfigError(e.field(), e.line(),
                        fmt::format("in parameter file '{}': {}", path.filename().string(),
                                    e.what()));
    }
  }
}

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = [] {
    std::map<std::string, KeySpec> t;
    auto add = [&t](const std::string& key, Unit unit, Setter set) {
      t.emplace(key, KeySpec{unit, std::move(set)});
    };

    add("name", Unit::kNone, [](Scenario& s, const std::string& v, const Context& c) {
      if (v.empty() || v.find_first_of(" \t,") != std::string::npos) {
        fail(c, "name must be a single word");
      }
      s.name = v;
    });
    add("duration", Unit::kNone, real(&Scenario::duration));
    add("seed", Unit::kNone, [](Scenario& s, const std::string& v, const Context& c) {
      std::uint64_t value = 0;
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
      if (ec != std::errc{} || ptr != v.data() + v.size()) fail(c, "'" + v + "' is not a u64");
      s.seed = value;
    });
    add("sim.rate", Unit::kNone, real(&Scenario::sim_rate));
    add("telemetry.rate", Unit::kNone, real(&Scenario::telemetry_rate));
    add("plot_frame", Unit::kNone, [](Scenario& s, const std::string& v, const Context& c) {
      if (v == "xy_swapped") {
        s.plot_frame = PlotFrame::kSwapped;
      } else if (v == "ned") {
        s.plot_frame = PlotFrame::kNed;
      } else {
        fail(c, "expected 'xy_swapped' or 'ned'");
      }
    });

    add("tank.side", Unit::kLength, real(&Scenario::tank, &TankConfig::side));
    add("tank.depth", Unit::kLength, real(&Scenario::tank, &TankConfig::depth));

    add("start.x", Unit::kLength, [](Scenario& s, const std::string& v, const Context& c) {
      s.start.position.x() = parse_double(c, v);
    });
    add("start.y", Unit::kLength, [](Scenario& s, const std::string& v, const Context& c) {
      s.start.position.y() = parse_double(c, v);
    });
    add("start.depth", Unit::kLength, [](Scenario& s, const std::string& v, const Context& c) {
      s.start.position.z() = parse_double(c, v);
    });
    add("start.psi", Unit::kAngle, real(&Scenario::start, &VehicleState::psi));
    add("start.fill", Unit::kVolume, real(&Scenario::start, &VehicleState::syringe_fill));

    add("vehicle.mass", Unit::kNone, real(&Scenario::vehicle, &VehicleParams::mass));
    add("vehicle.body_length", Unit::kLength, real(&Scenario::vehicle, &VehicleParams::body_length));
    add("vehicle.propeller_separation", Unit::kLength,
        real(&Scenario::vehicle, &VehicleParams::propeller_separation));
    add("vehicle.max_thrust_per_prop", Unit::kNone,
        real(&Scenario::vehicle, &VehicleParams::max_thrust_per_prop));
    add("vehicle.motor_time_constant", Unit::kNone,
        real(&Scenario::vehicle, &VehicleParams::motor_time_constant));
    add("vehicle.drag_surge", Unit::kNone, real(&Scenario::vehicle, &VehicleParams::drag_surge));
    add("vehicle.drag_sway", Unit::kNone, real(&Scenario::vehicle, &VehicleParams::drag_sway));
    add("vehicle.drag_heave", Unit::kNone, real(&Scenario::vehicle, &VehicleParams::drag_heave));
    add("vehicle.drag_yaw", Unit::kNone, real(&Scenario::vehicle, &VehicleParams::drag_yaw));
    add("vehicle.yaw_inertia", Unit::kNone, real(&Scenario::vehicle, &VehicleParams::yaw_inertia));
    add("vehicle.syringe_capacity", Unit::kVolume,
        real(&Scenario::vehicle, &VehicleParams::syringe_capacity));
    add("vehicle.neutral_fill", Unit::kVolume,
        [](Scenario& s, const std::string& v, const Context& c) {
          s.vehicle.neutral_fill = parse_double(c, v);
          if (c.neutral_fill_set) *c.neutral_fill_set = true;
        });
    add("vehicle.pump_max_rate", Unit::kNone,
        real(&Scenario::vehicle, &VehicleParams::pump_max_rate));
    add("vehicle.water_density", Unit::kNone,
        real(&Scenario::vehicle, &VehicleParams::water_density));
    add("vehicle.gravity", Unit::kNone, real(&Scenario::vehicle, &VehicleParams::gravity));
    add("vehicle.params_file", Unit::kNone,
        [](Scenario& s, const std::string& v, const Context& c) {
          bool dummy = false;
          load_params_file(s, c, v, c.neutral_fill_set ? *c.neutral_fill_set : dummy);
        });

    add("camera.x", Unit::kLength, real(&Scenario::camera_mount, &CameraMount::x));
    add("camera.y", Unit::kLength, real(&Scenario::camera_mount, &CameraMount::y));
    add("camera.z", Unit::kLength, real(&Scenario::camera_mount, &CameraMount::z));
    add("camera.yaw", Unit::kAngle, real(&Scenario::camera_mount, &CameraMount::yaw));
    add("camera.tilt_x", Unit::kAngle, real(&Scenario::camera_mount, &CameraMount::tilt_x));
    add("camera.tilt_y", Unit::kAngle, real(&Scenario::camera_mount, &CameraMount::tilt_y));
    add("camera.frame_rate", Unit::kNone, real(&Scenario::camera, &CameraConfig::frame_rate));
    add("camera.timestamp_jitter_sigma", Unit::kNone,
        real(&Scenario::camera, &CameraConfig::timestamp_jitter_sigma));
    add("camera.translation_noise_sigma", Unit::kLength,
        real(&Scenario::camera, &CameraConfig::translation_noise_sigma));
    add("camera.rotation_noise_sigma", Unit::kAngle,
        real(&Scenario::camera, &CameraConfig::rotation_noise_sigma));
    add("camera.dropout_prob", Unit::kNone, real(&Scenario::camera, &CameraConfig::dropout_prob));
    add("camera.spurious_outliers", Unit::kNone,
        [](Scenario& s, const std::string& v, const Context& c) {
          s.camera.spurious_outliers = parse_bool(c, v);
        });
    add("camera.spurious_prob", Unit::kNone, real(&Scenario::camera, &CameraConfig::spurious_prob));
    add("camera.spurious_z_offset", Unit::kLength,
        real(&Scenario::camera, &CameraConfig::spurious_z_offset));
    add("camera.visibility_depth", Unit::kLength,
        real(&Scenario::camera, &CameraConfig::visibility_depth));
    add("camera.glare", Unit::kLength, [](Scenario& s, const std::string& v, const Context& c) {
      if (v == "none") {
        s.camera.glare_regions.clear();
        return;
      }
      const auto w = words(v);
      if (w.size() != 4) fail(c, "expected 'center_x center_y radius dropout_prob'");
      Context unitless = c;
      unitless.scale = 1.0;
      s.camera.glare_regions.push_back(GlareRegion{parse_double(c, w[0]), parse_double(c, w[1]),
                                                   parse_double(c, w[2]),
                                                   parse_double(unitless, w[3])});
    });

    add("tag.id", Unit::kNone, [](Scenario& s, const std::string& v, const Context& c) {
      s.tag.tag_id = static_cast<int>(parse_int(c, v, 0, 586));
    });
    add("tag.size", Unit::kLength, real(&Scenario::tag, &TagConfig::size));
    auto mount_axis = [](int axis) {
      return [axis](Scenario& s, const std::string& v, const Context& c) {
        s.tag.mount_offset.translation(axis) = parse_double(c, v);
      };
    };
    add("tag.mount_x", Unit::kLength, mount_axis(0));
    add("tag.mount_y", Unit::kLength, mount_axis(1));
    add("tag.mount_z", Unit::kLength, mount_axis(2));
    add("tag.mount_yaw", Unit::kAngle, [](Scenario& s, const std::string& v, const Context& c) {
      s.tag.mount_offset.rotation = rot_z(parse_double(c, v));
    });

    add("channel.d0", Unit::kLength, real(&Scenario::channel, &link::ChannelConfig::d0));
    add("channel.d1", Unit::kLength, real(&Scenario::channel, &link::ChannelConfig::d1));
    add("channel.base_loss", Unit::kNone, real(&Scenario::channel, &link::ChannelConfig::base_loss));
    add("channel.latency", Unit::kNone, real(&Scenario::channel, &link::ChannelConfig::latency));

    add("pipeline.smoothing_window", Unit::kNone,
        [](Scenario& s, const std::string& v, const Context& c) {
          s.pipeline.smoothing_window = static_cast<int>(parse_int(c, v, 1, 10000));
        });
    add("pipeline.output_rate", Unit::kNone,
        real(&Scenario::pipeline, &PipelineConfig::output_rate));
    add("pipeline.max_gap", Unit::kNone, real(&Scenario::pipeline, &PipelineConfig::max_gap));
    add("pipeline.outlier_z_jump", Unit::kLength,
        real(&Scenario::pipeline, &PipelineConfig::outlier_z_jump));
    add("pipeline.outlier_history", Unit::kNone,
        [](Scenario& s, const std::string& v, const Context& c) {
          s.pipeline.outlier_history = static_cast<int>(parse_int(c, v, 1, 1000));
        });

    add("pipeline.min_plane_extent", Unit::kLength,
        real(&Scenario::pipeline, &PipelineConfig::min_plane_extent));

    add("sensors.depth_noise", Unit::kLength, real(&Scenario::sensors, &SensorConfig::depth_noise));
    add("sensors.ir_noise", Unit::kNone, real(&Scenario::sensors, &SensorConfig::ir_noise));
    add("sensors.ir_surface_ambient", Unit::kNone,
        real(&Scenario::sensors, &SensorConfig::ir_surface_ambient));
    add("sensors.ir_ambient_depth", Unit::kLength,
        real(&Scenario::sensors, &SensorConfig::ir_ambient_depth));
    add("sensors.ir_bob_frequency", Unit::kNone,
        real(&Scenario::sensors, &SensorConfig::ir_bob_frequency));
    return t;
  }();
  return table;
}

struct Suffix {
  std::string_view text;
  Unit unit;
  double scale;
};

constexpr Suffix kSuffixes[] = {
    {"_ft", Unit::kLength, 0.3048},
    {"_in", Unit::kLength, 0.0254},
    {"_mL", Unit::kVolume, 1.0},
    {"_deg", Unit::kAngle, std::numbers::pi / 180.0},
};

void apply_key_value(Scenario& s, const std::string& raw_key, const std::string& value, int line,
                     const std::filesystem::path& base_dir, bool& neutral_fill_set) {
  Context ctx{raw_key, line, 1.0, base_dir, &neutral_fill_set};
  const auto& table = key_table();
  auto it = table.find(raw_key);
  if (it == table.end()) {
    for (const auto& suffix : kSuffixes) {
      if (raw_key.size() > suffix.text.size() && raw_key.ends_with(suffix.text)) {
        const std::string base = raw_key.substr(0, raw_key.size() - suffix.text.size());
        auto base_it = table.find(base);
        if (base_it == table.end()) break;
        if (base_it->second.unit != suffix.unit) {
          fail(ctx, fmt::format("unit suffix '{}' does not apply to '{}'", suffix.text, base));
        }
        ctx.scale = suffix.scale;
        base_it->second.set(s, value, ctx);
        return;
      }
    }
    fail(ctx, "unknown key");
  }
  it->second.set(s, value, ctx);
}

link::Message parse_message(const std::vector<std::string>& w, std::size_t at, const Context& ctx) {
  if (at >= w.size()) fail(ctx, "missing command");
  const std::string& cmd = w[at];
  const std::size_t argc = w.size() - at - 1;
  auto expect_args = [&](std::size_t n, const char* usage) {
    if (argc != n) fail(ctx, fmt::format("usage: {}", usage));
  };
  if (cmd == "set_motors") {
    expect_args(2, "set_motors LEFT RIGHT (percent, -100..100)");
    return link::SetMotors{static_cast<std::int8_t>(parse_int(ctx, w[at + 1], -100, 100)),
                           static_cast<std::int8_t>(parse_int(ctx, w[at + 2], -100, 100))};
  }
  if (cmd == "pump") {
    expect_args(2, "pump off|intake|expel DURATION_MS");
    std::uint8_t mode = 0;
    if (w[at + 1] == "off") {
      mode = 0;
    } else if (w[at + 1] == "intake") {
      mode = 1;
    } else if (w[at + 1] == "expel") {
      mode = 2;
    } else {
      fail(ctx, fmt::format("unknown pump mode '{}'", w[at + 1]));
    }
    return link::Pump{mode, static_cast<std::uint16_t>(parse_int(ctx, w[at + 2], 0, 65535))};
  }
  if (cmd == "start_sequence") {
    expect_args(1, "start_sequence ID");
    return link::StartSequence{static_cast<std::uint8_t>(parse_int(ctx, w[at + 1], 0, 255))};
  }
  fail(ctx, fmt::format("unknown command '{}'", cmd));
}

void apply_command_line(Scenario& s, const std::vector<std::string>& w, int line) {
  Context ctx{"script", line, 1.0, {}, nullptr};
  if (w[0] == "at") {
    if (w.size() < 3) fail(ctx, "usage: at TIME COMMAND ...");
    const double t = parse_double(ctx, w[1]);
    s.command_script.push_back(ScriptEntry{t, parse_message(w, 2, ctx)});
    return;
  }
  // seq ID at TIME COMMAND ...
  ctx.key = "sequence";
  if (w.size() < 5 || w[2] != "at") fail(ctx, "usage: seq ID at OFFSET COMMAND ...");
  const int id = static_cast<int>(parse_int(ctx, w[1], 0, 255));
  const double t = parse_double(ctx, w[3]);
  s.sequences[id].push_back(ScriptEntry{t, parse_message(w, 4, ctx)});
}

void finalize(Scenario& s, bool neutral_fill_set) {
  if (!neutral_fill_set) s.vehicle.neutral_fill = 0.5 * s.vehicle.syringe_capacity;
  s.vehicle.tank_depth = s.tank.depth;
  s.camera.pose = s.camera_mount.pose();
}

std::string message_text(const link::Message& m) { return link::describe(m); }

std::string base_key(const std::string& raw) {
  for (const auto& suffix : kSuffixes) {
    if (raw.size() > suffix.text.size() && raw.ends_with(suffix.text)) {
      return raw.substr(0, raw.size() - suffix.text.size());
    }
  }
  return raw;
}

// Line where `field` (or, for a group such as "camera", any key in it) was
// last assigned. 0 when it came from an override or a default.
int line_of(const std::map<std::string, int>& lines, const std::string& field) {
  if (const auto it = lines.find(field); it != lines.end()) return it->second;
  int line = 0;
  for (const auto& [key, l] : lines) {
    if (key.starts_with(field + ".")) line = std::max(line, l);
  }
  return line;
}

}  // namespace

void Scenario::validate() const {
  auto bad = [](const std::string& field, const std::string& msg) {
    throw ConfigError(field, 0, msg);
  };
  if (!(duration > 0.0)) bad("duration", "must be > 0");
  if (!(sim_rate >= 20.0)) bad("sim.rate", "must be >= 20 Hz (step <= 0.05 s)");
  if (!(telemetry_rate > 0.0 && telemetry_rate <= sim_rate)) {
    bad("telemetry.rate", "must lie in (0, sim.rate]");
  }
  if (!(tank.side > 0.0)) bad("tank.side", "must be > 0");
  if (!(tank.depth > 0.0)) bad("tank.depth", "must be > 0");

  try {
    vehicle.validate();
  } catch (const VehicleError& e) {
    bad("vehicle", e.what());
  }
  if (!(start.syringe_fill >= 0.0 && start.syringe_fill <= vehicle.syringe_capacity)) {
    bad("start.fill", fmt::format("{} outside [0, {}]", start.syringe_fill,
                                  vehicle.syringe_capacity));
  }
  if (!(start.position.z() >= 0.0 && start.position.z() <= tank.depth)) {
    bad("start.depth", "must lie within the tank depth");
  }
  for (int axis = 0; axis < 2; ++axis) {
    const double p = start.position(axis);
    if (!(p >= 0.0 && p <= tank.side)) {
      bad(axis == 0 ? "start.x" : "start.y", fmt::format("{} outside the tank [0, {}]", p,
                                                         tank.side));
    }
  }
  try {
    camera.validate();
    tag.validate();
  } catch (const std::invalid_argument& e) {
    bad("camera", e.what());
  }
  try {
    channel.validate();
  } catch (const link::LinkError& e) {
    bad("channel", e.what());
  }
  try {
    pipeline.validate();
  } catch (const TrackingError& e) {
    bad("pipeline", e.what());
  }
  if (sensors.depth_noise < 0.0) bad("sensors.depth_noise", "must be >= 0");
  if (sensors.ir_noise < 0.0) bad("sensors.ir_noise", "must be >= 0");
  if (!(sensors.ir_ambient_depth > 0.0)) bad("sensors.ir_ambient_depth", "must be > 0");

  double last = 0.0;
  for (const auto& e : command_script) {
    if (!(e.time >= last)) bad("script", fmt::format("time {} is earlier than {}", e.time, last));
    if (e.time > duration) bad("script", fmt::format("time {} beyond duration {}", e.time, duration));
    last = e.time;
    if (const auto* start_seq = std::get_if<link::StartSequence>(&e.message)) {
      if (!sequences.contains(start_seq->seq_id)) {
        bad("script", fmt::format("start_sequence {} has no matching 'seq' block",
                                  start_seq->seq_id));
      }
    }
  }
  for (const auto& [id, entries] : sequences) {
    double prev = 0.0;
    for (const auto& e : entries) {
      if (!(e.time >= prev)) {
        bad("sequence", fmt::format("sequence {}: offset {} is earlier than {}", id, e.time, prev));
      }
      prev = e.time;
      if (std::holds_alternative<link::StartSequence>(e.message)) {
        bad("sequence", fmt::format("sequence {} may not start another sequence", id));
      }
    }
  }
}

Scenario parse_scenario(std::string_view text, const std::vector<std::string>& overrides,
                        const std::filesystem::path& base_dir) {
  Scenario s;
  bool neutral_fill_set = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  std::map<std::string, int> key_lines;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto w = words(body);
    if (w[0] == "at" || w[0] == "seq") {
      apply_command_line(s, w, line_no);
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(w[0], line_no, "expected 'key = value', 'at ...' or 'seq ...'");
    }
    const std::string key = trim(body.substr(0, eq));
    apply_key_value(s, key, trim(body.substr(eq + 1)), line_no, base_dir, neutral_fill_set);
    key_lines[base_key(key)] = line_no;
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) throw ConfigError(ov, 0, "override must be key=value");
    const std::string key = trim(ov.substr(0, eq));
    apply_key_value(s, key, trim(ov.substr(eq + 1)), 0, base_dir, neutral_fill_set);
    key_lines[base_key(key)] = 0;
  }
  finalize(s, neutral_fill_set);
  try {
    s.validate();
  } catch (const ConfigError& e) {
    const int l = line_of(key_lines, e.field());
    if (l == 0) throw;
    throw ConfigError(e.field(), l, e.message());
  }
  return s;
}

Scenario load_scenario(const std::string& name_or_path, const std::vector<std::string>& overrides) {
  const auto builtin = builtin_scenario_text(name_or_path);
  if (!builtin.empty()) return parse_scenario(builtin, overrides);

  std::ifstream in(name_or_path);
  if (!in) {
    throw ConfigError("scenario", 0,
                      fmt::format("'{}' is neither a built-in scenario nor a readable file",
                                  name_or_path));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), overrides,
                        std::filesystem::path(name_or_path).parent_path());
}

std::string to_text(const Scenario& s) {
  std::string out;
  auto kv = [&out](std::string_view key, auto value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  kv("name", s.name);
  kv("duration", s.duration);
  kv("seed", s.seed);
  kv("sim.rate", s.sim_rate);
  kv("telemetry.rate", s.telemetry_rate);
  kv("plot_frame", s.plot_frame == PlotFrame::kSwapped ? "xy_swapped" : "ned");
  kv("tank.side", s.tank.side);
  kv("tank.depth", s.tank.depth);
  kv("start.x", s.start.position.x());
  kv("start.y", s.start.position.y());
  kv("start.depth", s.start.position.z());
  kv("start.psi", s.start.psi);
  kv("start.fill", s.start.syringe_fill);
  const auto& v = s.vehicle;
  kv("vehicle.mass", v.mass);
  kv("vehicle.body_length", v.body_length);
  kv("vehicle.propeller_separation", v.propeller_separation);
  kv("vehicle.max_thrust_per_prop", v.max_thrust_per_prop);
  kv("vehicle.motor_time_constant", v.motor_time_constant);
  kv("vehicle.drag_surge", v.drag_surge);
  kv("vehicle.drag_sway", v.drag_sway);
  kv("vehicle.drag_heave", v.drag_heave);
  kv("vehicle.drag_yaw", v.drag_yaw);
  kv("vehicle.yaw_inertia", v.yaw_inertia);
  kv("vehicle.syringe_capacity", v.syringe_capacity);
  kv("vehicle.neutral_fill", v.neutral_fill);
  kv("vehicle.pump_max_rate", v.pump_max_rate);
  kv("vehicle.water_density", v.water_density);
  kv("vehicle.gravity", v.gravity);
  const auto& m = s.camera_mount;
  kv("camera.x", m.x);
  kv("camera.y", m.y);
  kv("camera.z", m.z);
  kv("camera.yaw", m.yaw);
  kv("camera.tilt_x", m.tilt_x);
  kv("camera.tilt_y", m.tilt_y);
  const auto& c = s.camera;
  kv("camera.frame_rate", c.frame_rate);
  kv("camera.timestamp_jitter_sigma", c.timestamp_jitter_sigma);
  kv("camera.translation_noise_sigma", c.translation_noise_sigma);
  kv("camera.rotation_noise_sigma", c.rotation_noise_sigma);
  kv("camera.dropout_prob", c.dropout_prob);
  kv("camera.spurious_outliers", c.spurious_outliers ? 1 : 0);
  kv("camera.spurious_prob", c.spurious_prob);
  kv("camera.spurious_z_offset", c.spurious_z_offset);
  kv("camera.visibility_depth", c.visibility_depth);
  for (const auto& g : c.glare_regions) {
    out += fmt::format("camera.glare = {} {} {} {}\n", g.center_x, g.center_y, g.radius,
                       g.dropout_prob);
  }
  kv("tag.id", s.tag.tag_id);
  kv("tag.size", s.tag.size);
  kv("tag.mount_x", s.tag.mount_offset.translation.x());
  kv("tag.mount_y", s.tag.mount_offset.translation.y());
  kv("tag.mount_z", s.tag.mount_offset.translation.z());
  kv("tag.mount_yaw", extract_yaw(s.tag.mount_offset.rotation));
  kv("channel.d0", s.channel.d0);
  kv("channel.d1", s.channel.d1);
  kv("channel.base_loss", s.channel.base_loss);
  kv("channel.latency", s.channel.latency);
  kv("pipeline.smoothing_window", s.pipeline.smoothing_window);
  kv("pipeline.output_rate", s.pipeline.output_rate);
  kv("pipeline.max_gap", s.pipeline.max_gap);
  kv("pipeline.outlier_z_jump", s.pipeline.outlier_z_jump);
  kv("pipeline.outlier_history", s.pipeline.outlier_history);
  kv("pipeline.min_plane_extent", s.pipeline.min_plane_extent);
  kv("sensors.depth_noise", s.sensors.depth_noise);
  kv("sensors.ir_noise", s.sensors.ir_noise);
  kv("sensors.ir_surface_ambient", s.sensors.ir_surface_ambient);
  kv("sensors.ir_ambient_depth", s.sensors.ir_ambient_depth);
  kv("sensors.ir_bob_frequency", s.sensors.ir_bob_frequency);
  for (const auto& [id, entries] : s.sequences) {
    for (const auto& e : entries) {
      out += fmt::format("seq {} at {} {}\n", id, e.time, message_text(e.message));
    }
  }
  for (const auto& e : s.command_script) {
    out += fmt::format("at {} {}\n", e.time, message_text(e.message));
  }
  return out;
}

}  // namespace uuv
