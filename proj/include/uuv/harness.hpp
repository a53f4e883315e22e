#pragma once

// Scenario runner: wires the vehicle, camera, radio link and tracking
// pipeline into one deterministic fixed-step loop, then scores the estimates
// against ground truth.

#include "uuv/camera.hpp"
#include "uuv/link.hpp"
#include "uuv/tracking.hpp"
#include "uuv/vehicle.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace uuv {

/// Scenario configuration problem. `field` names the offending key and
/// `line` is the 1-based line in the scenario text (0 when not from a file).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& message);

  const std::string& field() const { return field_; }
  int line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  std::string field_;
  int line_;
  std::string message_;
};

struct TankConfig {
  double side = 4.1148;   // 13.5 ft
  double depth = 1.3716;  // 4.5 ft
};

/// Camera placement in the NED world frame; the camera's own axes start
/// aligned with NED (looking down) and are rotated by yaw, then tilt.
struct CameraMount {
  double x = 2.0574;
  double y = 2.0574;
  double z = -2.0;  // above the water surface
  double yaw = 0.0;
  double tilt_x = 0.0;
  double tilt_y = 0.0;

  Posed pose() const;
};

struct SensorConfig {
  double depth_noise = 0.002;     // m
  double ir_noise = 0.005;
  double ir_surface_ambient = 0.9;
  double ir_ambient_depth = 0.25;  // m
  double ir_bob_frequency = 0.5;   // Hz
};

struct ScriptEntry {
  double time = 0.0;
  link::Message message;
};

enum class PlotFrame { kSwapped, kNed };

struct Scenario {
  std::string name = "unnamed";
  double duration = 10.0;
  std::uint64_t seed = 1;
  double sim_rate = 240.0;
  double telemetry_rate = 5.0;
  TankConfig tank;
  VehicleState start;
  VehicleParams vehicle;
  CameraMount camera_mount;
  CameraConfig camera;  // pose is filled from camera_mount
  TagConfig tag;
  link::ChannelConfig channel;
  PipelineConfig pipeline;
  SensorConfig sensors;
  PlotFrame plot_frame = PlotFrame::kSwapped;
  std::vector<ScriptEntry> command_script;
  std::map<int, std::vector<ScriptEntry>> sequences;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Parses scenario text. `overrides` are `key=value` strings applied after
/// the text. Relative `vehicle.params_file` paths resolve against `base_dir`.
Scenario parse_scenario(std::string_view text, const std::vector<std::string>& overrides = {},
                        const std::filesystem::path& base_dir = {});

/// Loads a file path or a built-in scenario name.
Scenario load_scenario(const std::string& name_or_path,
                       const std::vector<std::string>& overrides = {});

/// Canonical text form; parse_scenario(to_text(s)) reproduces s.
std::string to_text(const Scenario& s);

std::vector<std::string> builtin_scenario_names();
std::string_view builtin_scenario_text(std::string_view name);

struct TruthSample {
  double t = 0.0;
  VehicleState state;
};

struct SensorSample {
  double t = 0.0;
  double depth = 0.0;
  IrReading ir;
  double fill_estimate = 0.0;  // NaN when the IR array has no signal
  double contrast = 0.0;
  bool degraded = false;
};

struct TelemetrySample {
  double t_received = 0.0;
  link::Telemetry telemetry;
};

enum class CommandSource { kGround, kOnboard };
enum class CommandStatus { kApplied, kLost, kIgnored };

struct CommandRecord {
  double t_sent = 0.0;
  double t_applied = 0.0;  // NaN unless applied
  CommandSource source = CommandSource::kGround;
  CommandStatus status = CommandStatus::kLost;
  double depth_at_send = 0.0;
  std::string message;
};

struct RunArtifacts {
  Scenario scenario;
  std::vector<TruthSample> truth;
  std::vector<SensorSample> sensors;
  std::vector<TelemetrySample> telemetry;
  std::vector<CommandRecord> commands;
  std::vector<double> frame_times;
  std::vector<TagDetection> detections;
  std::vector<SegmentEstimate> segments;
  std::map<std::string, double> metrics;

  std::vector<KinematicState> estimates() const;
};

RunArtifacts run_scenario(const Scenario& s);

/// Writes every CSV artifact plus scenario.txt into `dir`.
void write_artifacts(const RunArtifacts& run, const std::filesystem::path& dir);

/// Recomputes metrics from a run directory written by write_artifacts.
std::map<std::string, double> metrics_from_run_dir(const std::filesystem::path& dir);

// Metrics --------------------------------------------------------------

class MetricsError : public std::runtime_error {
 public:
  enum class Kind { kCollinear, kNoOverlap };

  MetricsError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Circle {
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 0.0;
};

/// Algebraic (Kasa) least-squares circle.
Circle circle_fit(const std::vector<std::pair<double, double>>& points);

/// Ground truth expressed in a segment's estimation frame.
struct AlignedTruth {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double u = 0.0;
  double v = 0.0;
  double r = 0.0;
};

/// Maps truth into the world frame of one estimated segment by pushing the
/// noiseless tag pose through the same camera-to-world transform.
std::vector<AlignedTruth> align_truth(const std::vector<TruthSample>& truth,
                                      const SegmentFrame& frame, const CameraConfig& cam,
                                      const TagConfig& tag);

struct EstimateComparison {
  std::vector<AlignedTruth> truth;       // aligned to the segment's frame
  std::vector<KinematicState> estimates;  // one segment
};

/// RMSE of x-y, psi (wrapped), u, v and r. Truth is linearly interpolated
/// onto estimate timestamps; velocity fields are compared against truth
/// delayed by the trailing smoothing lag (window-1)/2 samples. Samples within
/// one smoothing window of either segment end are excluded.
std::map<std::string, double> compute_metrics(const std::vector<EstimateComparison>& segments,
                                              const PipelineConfig& config,
                                              std::size_t frames_captured,
                                              std::size_t detections);

/// Sign changes of `series` once it has left the band [-threshold, threshold].
int count_sign_changes(const std::vector<double>& series, double threshold);

/// Direction reversals of `series` that exceed `hysteresis` from the last extreme.
int count_reversals(const std::vector<double>& series, double hysteresis);

}  // namespace uuv
