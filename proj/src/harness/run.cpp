#include "internal.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>

namespace uuv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Independent, reproducible random streams per subsystem.
enum class Stream : std::uint32_t { kDownlink = 1, kUplink = 2, kCamera = 3, kSensors = 4 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

PumpMode pump_mode_of(std::uint8_t mode) {
  switch (mode) {
    case 1: return PumpMode::kIntake;
    case 2: return PumpMode::kExpel;
    default: return PumpMode::kOff;
  }
}

/// Onboard command handling: motor setpoints, timed pump runs and the
/// pre-programmed sequences triggered over the radio.
class Onboard {
 public:
  explicit Onboard(const Scenario& s) : scenario_(s) {}

  CommandStatus apply(const link::Message& msg, double now) {
    if (const auto* m = std::get_if<link::SetMotors>(&msg)) {
      cmd_.motor_left = m->left / 100.0;
      cmd_.motor_right = m->right / 100.0;
      return CommandStatus::kApplied;
    }
    if (const auto* p = std::get_if<link::Pump>(&msg)) {
      cmd_.pump = pump_mode_of(p->mode);
      pump_until_ = now + p->duration_ms / 1000.0;
      return CommandStatus::kApplied;
    }
    if (const auto* st = std::get_if<link::StartSequence>(&msg)) {
      if (running_ || !scenario_.sequences.contains(st->seq_id)) return CommandStatus::kIgnored;
      running_ = st->seq_id;
      seq_start_ = now;
      seq_next_ = 0;
      return CommandStatus::kApplied;
    }
    return CommandStatus::kIgnored;
  }

  /// Fires due sequence entries and expires the pump timer.
  void tick(double now, double depth, std::vector<CommandRecord>& log) {
    if (running_) {
      const auto& entries = scenario_.sequences.at(*running_);
      while (seq_next_ < entries.size() && seq_start_ + entries[seq_next_].time <= now + 1e-12) {
        const auto& entry = entries[seq_next_++];
        const CommandStatus status = apply(entry.message, now);
        log.push_back(CommandRecord{now, status == CommandStatus::kApplied ? now : kNaN,
                                    CommandSource::kOnboard, status, depth,
                                    link::describe(entry.message)});
      }
      if (seq_next_ >= entries.size()) running_.reset();
    }
    if (cmd_.pump != PumpMode::kOff && now >= pump_until_ - 1e-12) cmd_.pump = PumpMode::kOff;
  }

  const ActuatorCommand& command() const { return cmd_; }
  bool sequence_running() const { return running_.has_value(); }

 private:
  const Scenario& scenario_;
  ActuatorCommand cmd_;
  double pump_until_ = 0.0;
  std::optional<int> running_;
  double seq_start_ = 0.0;
  std::size_t seq_next_ = 0;
};

double ir_ambient(const SensorConfig& cfg, double depth, double t) {
  const double depth_factor = std::max(0.0, 1.0 - depth / cfg.ir_ambient_depth);
  const double bob = 0.75 + 0.25 * std::sin(2.0 * std::numbers::pi * cfg.ir_bob_frequency * t);
  return cfg.ir_surface_ambient * depth_factor * bob;
}

SensorSample read_sensors(const Scenario& s, const VehicleState& state, double t,
                          std::mt19937_64& rng) {
  SensorSample out;
  out.t = t;
  out.depth = depth_reading(state, s.sensors.depth_noise, rng);
  out.ir = ir_response(state.syringe_fill, ir_ambient(s.sensors, state.position.z(), t), s.vehicle);
  if (s.sensors.ir_noise > 0.0) {
    std::normal_distribution<double> noise(0.0, s.sensors.ir_noise);
    for (double& c : out.ir.channels) c = std::clamp(c + noise(rng), 0.0, 1.0);
  }
  try {
    const PlungerEstimate est = estimate_plunger(out.ir, s.vehicle.syringe_capacity);
    out.fill_estimate = est.fill;
    out.contrast = est.contrast;
    out.degraded = est.degraded;
  } catch (const VehicleError&) {
    out.fill_estimate = kNaN;
    const auto [lo, hi] = std::minmax_element(out.ir.channels.begin(), out.ir.channels.end());
    out.contrast = *hi - *lo;
    out.degraded = true;
  }
  return out;
}

link::Telemetry make_telemetry(const SensorSample& s, bool pump_active, bool seq_running) {
  link::Telemetry t;
  t.depth_mm = static_cast<std::uint16_t>(std::clamp(std::round(s.depth * 1000.0), 0.0, 65535.0));
  for (std::size_t k = 0; k < t.ir.size(); ++k) {
    t.ir[k] = static_cast<std::uint8_t>(std::round(s.ir.channels[k] * 255.0));
  }
  if (std::isnan(s.fill_estimate)) {
    t.flags |= link::telemetry_flags::kIrNoSignal;
  } else {
    t.fill_est_tenth_ml =
        static_cast<std::uint8_t>(std::clamp(std::round(s.fill_estimate * 10.0), 0.0, 250.0));
  }
  if (s.degraded) t.flags |= link::telemetry_flags::kIrDegraded;
  if (pump_active) t.flags |= link::telemetry_flags::kPumpActive;
  if (seq_running) t.flags |= link::telemetry_flags::kSequenceRunning;
  return t;
}

VehicleState interpolate(const VehicleState& a, const VehicleState& b, double alpha) {
  auto lerp = [alpha](double x, double y) { return x + alpha * (y - x); };
  VehicleState s = a;
  s.position = a.position + alpha * (b.position - a.position);
  s.psi = wrap_angle(a.psi + alpha * wrap_angle(b.psi - a.psi));
  s.u = lerp(a.u, b.u);
  s.v = lerp(a.v, b.v);
  s.w = lerp(a.w, b.w);
  s.r = lerp(a.r, b.r);
  s.syringe_fill = lerp(a.syringe_fill, b.syringe_fill);
  s.motor_thrust_left = lerp(a.motor_thrust_left, b.motor_thrust_left);
  s.motor_thrust_right = lerp(a.motor_thrust_right, b.motor_thrust_right);
  return s;
}

VehicleState truth_at(const std::vector<TruthSample>& truth, double sim_rate, double t) {
  const double pos = t * sim_rate;
  const auto last = static_cast<double>(truth.size() - 1);
  if (pos <= 0.0) return truth.front().state;
  if (pos >= last) return truth.back().state;
  const auto k = static_cast<std::size_t>(std::floor(pos));
  return interpolate(truth[k].state, truth[k + 1].state, pos - static_cast<double>(k));
}

}  // namespace

std::vector<KinematicState> RunArtifacts::estimates() const {
  std::vector<KinematicState> all;
  for (const auto& seg : segments) all.insert(all.end(), seg.states.begin(), seg.states.end());
  return all;
}

RunArtifacts run_scenario(const Scenario& scenario) {
  scenario.validate();
  RunArtifacts run;
  run.scenario = scenario;
  const Scenario& s = run.scenario;

  const double dt = 1.0 / s.sim_rate;
  const auto steps = static_cast<long>(std::llround(s.duration * s.sim_rate));
  const long telemetry_every =
      std::max<long>(1, std::lround(s.sim_rate / s.telemetry_rate));

  link::Channel downlink(s.channel, make_rng(s.seed, Stream::kDownlink)());
  link::Channel uplink(s.channel, make_rng(s.seed, Stream::kUplink)());
  auto sensor_rng = make_rng(s.seed, Stream::kSensors);
  auto camera_rng = make_rng(s.seed, Stream::kCamera);

  Onboard onboard(s);
  link::StreamDecoder vehicle_rx;
  link::StreamDecoder ground_rx;
  std::deque<std::size_t> pending;  // command-log indices of frames in flight, in send order

  VehicleState state = s.start;
  std::size_t next_script = 0;
  std::size_t telemetry_sent = 0;
  run.truth.reserve(static_cast<std::size_t>(steps) + 1);

  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double depth = state.position.z();

    while (next_script < s.command_script.size() && s.command_script[next_script].time <= t + 1e-12) {
      const auto& entry = s.command_script[next_script++];
      const bool sent = downlink.send(t, link::encode(entry.message), depth);
      run.commands.push_back(CommandRecord{t, kNaN, CommandSource::kGround,
                                           sent ? CommandStatus::kApplied : CommandStatus::kLost,
                                           depth, link::describe(entry.message)});
      if (sent) pending.push_back(run.commands.size() - 1);
    }

    for (const auto& frame : downlink.receive(t + 1e-12)) vehicle_rx.push(frame);
    for (const auto& msg : vehicle_rx.poll().messages) {
      const CommandStatus status = onboard.apply(msg, t);
      if (!pending.empty()) {
        CommandRecord& rec = run.commands[pending.front()];
        pending.pop_front();
        rec.status = status;
        if (status == CommandStatus::kApplied) rec.t_applied = t;
      }
    }
    onboard.tick(t, depth, run.commands);

    if (k % telemetry_every == 0) {
      SensorSample sample = read_sensors(s, state, t, sensor_rng);
      const link::Telemetry tm = make_telemetry(sample, onboard.command().pump != PumpMode::kOff,
                                                onboard.sequence_running());
      uplink.send(t, link::encode(tm), depth);
      ++telemetry_sent;
      run.sensors.push_back(std::move(sample));
    }
    for (const auto& frame : uplink.receive(t + 1e-12)) ground_rx.push(frame);
    for (const auto& msg : ground_rx.poll().messages) {
      if (const auto* tm = std::get_if<link::Telemetry>(&msg)) {
        run.telemetry.push_back(TelemetrySample{t, *tm});
      }
    }

    run.truth.push_back(TruthSample{t, state});
    if (k < steps) state = step(state, onboard.command(), dt, s.vehicle);
  }
  // Frames still in flight at the end of the run were never applied.
  for (std::size_t idx : pending) {
    run.commands[idx].status = CommandStatus::kLost;
  }

  // Camera: sample the recorded truth at each capture time. Capture times
  // already carry the frame-rate jitter, so observe() adds none.
  run.frame_times = frame_clock(s.camera, s.duration, camera_rng);
  CameraConfig capture = s.camera;
  capture.timestamp_jitter_sigma = 0.0;
  for (double tc : run.frame_times) {
    const VehicleState at = truth_at(run.truth, s.sim_rate, tc);
    if (auto det = observe(at, capture, s.tag, tc, camera_rng)) run.detections.push_back(*det);
  }

  std::size_t skipped = 0;
  std::size_t fallback = 0;
  if (!run.detections.empty()) {
    std::vector<TagDetection> own;
    for (const auto& d : run.detections) {
      if (d.tag_id == s.tag.tag_id) own.push_back(d);
    }
    if (!own.empty()) {
      for (const auto& seg : segment_stream(own, s.pipeline)) {
        try {
          run.segments.push_back(estimate_segment(seg, s.pipeline));
          if (run.segments.back().frame.horizontal_fallback) ++fallback;
        } catch (const TrackingError& e) {
          if (e.kind() != TrackingError::Kind::kSegmentTooShort) throw;
          ++skipped;
        }
      }
    }
  }

  run.metrics = scenario_metrics(s, run.truth, run.segments, run.frame_times.size(),
                                 run.detections.size());
  std::size_t applied = 0;
  std::size_t lost = 0;
  std::size_t ground = 0;
  for (const auto& c : run.commands) {
    if (c.source != CommandSource::kGround) continue;
    ++ground;
    if (c.status == CommandStatus::kApplied) ++applied;
    if (c.status == CommandStatus::kLost) ++lost;
  }
  run.metrics["frames_captured"] = static_cast<double>(run.frame_times.size());
  run.metrics["detections"] = static_cast<double>(run.detections.size());
  run.metrics["segments"] = static_cast<double>(run.segments.size());
  run.metrics["segments_skipped"] = static_cast<double>(skipped);
  run.metrics["segments_flat_plane"] = static_cast<double>(fallback);
  run.metrics["commands_sent"] = static_cast<double>(ground);
  run.metrics["commands_applied"] = static_cast<double>(applied);
  run.metrics["commands_lost"] = static_cast<double>(lost);
  run.metrics["telemetry_sent"] = static_cast<double>(telemetry_sent);
  run.metrics["telemetry_received"] = static_cast<double>(run.telemetry.size());
  return run;
}

std::map<std::string, double> scenario_metrics(const Scenario& s,
                                               const std::vector<TruthSample>& truth,
                                               const std::vector<SegmentEstimate>& segments,
                                               std::size_t frames_captured,
                                               std::size_t detections) {
  std::map<std::string, double> out;

  double path = 0.0;
  double u_max = 0.0;
  double max_depth = 0.0;
  std::vector<double> depth_series;
  depth_series.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& st = truth[i].state;
    if (i > 0) path += (st.position - truth[i - 1].state.position).head<2>().norm();
    u_max = std::max(u_max, std::hypot(st.u, st.v));
    max_depth = std::max(max_depth, st.position.z());
    depth_series.push_back(st.position.z());
  }
  out["truth_path_length"] = path;
  out["truth_u_max"] = u_max;
  out["truth_max_depth"] = max_depth;
  out["truth_depth_reversals"] = count_reversals(depth_series, 0.05);

  // Steady yaw rate: second half of the samples where the vehicle is under
  // way with both motor thrusts settled.
  std::vector<double> steady_r;
  const double dt = 1.0 / s.sim_rate;
  const double settled = 1e-3 * s.vehicle.max_thrust_per_prop;
  for (std::size_t i = 1; i < truth.size(); ++i) {
    const auto& a = truth[i - 1].state;
    const auto& b = truth[i].state;
    const double rate_l = std::abs(b.motor_thrust_left - a.motor_thrust_left) / dt;
    const double rate_r = std::abs(b.motor_thrust_right - a.motor_thrust_right) / dt;
    const bool thrusting = std::abs(b.motor_thrust_left) + std::abs(b.motor_thrust_right) >
                           0.05 * s.vehicle.max_thrust_per_prop;
    if (thrusting && std::max(rate_l, rate_r) * s.vehicle.motor_time_constant < settled) {
      steady_r.push_back(b.r);
    }
  }
  if (steady_r.size() > 10) {
    const auto half = steady_r.begin() + static_cast<std::ptrdiff_t>(steady_r.size() / 2);
    const auto [lo, hi] = std::minmax_element(half, steady_r.end());
    double mean = 0.0;
    for (auto it = half; it != steady_r.end(); ++it) mean += *it;
    mean /= static_cast<double>(steady_r.end() - half);
    out["truth_r_steady_mean"] = mean;
    if (std::abs(mean) > 0.02) out["truth_r_steady_variation"] = (*hi - *lo) / std::abs(mean);
  }

  if (segments.empty()) return out;

  std::vector<EstimateComparison> comparisons;
  comparisons.reserve(segments.size());
  for (const auto& seg : segments) {
    comparisons.push_back(
        EstimateComparison{align_truth(truth, seg.frame, s.camera, s.tag), seg.states});
  }
  try {
    for (const auto& [k, v] : compute_metrics(comparisons, s.pipeline, frames_captured, detections)) {
      out[k] = v;
    }
    if (u_max > 1e-3) out["rmse_u_pct"] = 100.0 * out["rmse_u"] / u_max;
  } catch (const MetricsError&) {
    // no overlap: kinematic RMSE metrics are omitted
  }

  const int window = s.pipeline.smoothing_window;
  // Shape metrics use the same edge trimming as the RMSE comparison.
  std::vector<double> all_r;
  double sum_v = 0.0;
  std::size_t n_v = 0;
  for (const auto& seg : segments) {
    const auto m = static_cast<long>(seg.states.size());
    for (long k = 0; k < m; ++k) {
      if (k < window || k >= m - window) continue;
      const auto& e = seg.states[static_cast<std::size_t>(k)];
      all_r.push_back(e.r);
      sum_v += e.v;
      ++n_v;
    }
  }
  out["est_r_sign_changes"] = count_sign_changes(all_r, 0.05);
  if (n_v > 0) out["est_mean_v"] = sum_v / static_cast<double>(n_v);

  // Circle fits on the longest segment, restricted to samples where the
  // vehicle moves at more than half its top speed.
  const auto longest = std::max_element(
      comparisons.begin(), comparisons.end(),
      [](const auto& a, const auto& b) { return a.estimates.size() < b.estimates.size(); });
  std::vector<std::pair<double, double>> est_pts;
  std::vector<std::pair<double, double>> truth_pts;
  const SegmentFrame& frame =
      segments[static_cast<std::size_t>(longest - comparisons.begin())].frame;
  const auto m = static_cast<long>(longest->estimates.size());
  for (long k = window; k < m - window; ++k) {
    const auto& e = longest->estimates[static_cast<std::size_t>(k)];
    const VehicleState at = truth_at(truth, s.sim_rate, e.timestamp);
    if (std::hypot(at.u, at.v) <= 0.5 * u_max) continue;
    est_pts.emplace_back(e.x, e.y);
    const Posed in_cam = tag_in_camera(at, s.camera, s.tag);
    const Vec3d p = to_world(in_cam.translation, frame.origin, frame.r_oc);
    truth_pts.emplace_back(p.x(), p.y());
  }
  try {
    const Circle est = circle_fit(est_pts);
    const Circle tru = circle_fit(truth_pts);
    // Radii beyond 1 km are straight lines for any practical purpose.
    if (est.radius < 1000.0 && tru.radius < 1000.0) {
      out["est_circle_radius"] = est.radius;
      out["truth_circle_radius"] = tru.radius;
    }
  } catch (const MetricsError&) {
    // straight or too short: no circle metrics
  }
  return out;
}

}  // namespace uuv
