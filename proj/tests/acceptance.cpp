// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include "uuv/camera.hpp"
#include "uuv/harness.hpp"
#include "uuv/link.hpp"
#include "uuv/signal.hpp"
#include "uuv/tracking.hpp"
#include "uuv/vehicle.hpp"

#include "pipeline_oracle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace uuv;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kCenter = 2.0574;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("uuv_accept_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

double metric(const std::map<std::string, double>& m, const std::string& key) {
  const auto it = m.find(key);
  return it == m.end() ? std::nan("") : it->second;
}

Outcome frames_suite() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> slope(-0.5, 0.5), off(-3.0, 3.0), coord(-2.0, 2.0);
  double worst_orth = 0, worst_det = 0, worst_res = 0, worst_norm = 0;
  for (int i = 0; i < 1000; ++i) {
    PlaneCoefficientsd truth;
    truth.a = slope(rng);
    truth.b = slope(rng);
    truth.d = off(rng);
    std::vector<Vec3d> pts;
    for (int k = 0; k < 20; ++k) {
      const double x = coord(rng), y = coord(rng);
      pts.emplace_back(x, y, truth.a * x + truth.b * y + truth.d);
    }
    const auto fit = fit_plane<double>(pts);
    for (const auto& p : pts) worst_res = std::max(worst_res, std::abs(fit.residual(p)));

    const RotationMatrixd w = world_rotation(fit);
    worst_orth = std::max(worst_orth, (w * w.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    worst_det = std::max(worst_det, std::abs(w.determinant() - 1.0));

    const double xd = coord(rng), yd = coord(rng), psi = off(rng);
    const Vec3d body = body_velocities(xd, yd, psi);
    worst_norm = std::max(worst_norm, std::abs(body.norm() - std::hypot(xd, yd)));
    const Vec3d q = pts[3];
    worst_norm = std::max(worst_norm, std::abs(to_world(q, pts[0], w).norm() - (q - pts[0]).norm()));
  }
  const double elapsed = seconds_since(t0);
  o.require(worst_orth < 1e-9, fmt::format("orthonormality {:.2e}", worst_orth));
  o.require(worst_det < 1e-9, fmt::format("det {:.2e}", worst_det));
  o.require(worst_res < 1e-9, fmt::format("residual {:.2e}", worst_res));
  o.require(worst_norm < 1e-12, fmt::format("norm {:.2e}", worst_norm));
  o.require(elapsed < 1.0, fmt::format("runtime {:.3f} s", elapsed));
  if (o.pass) {
    o.detail = fmt::format("orth {:.1e}, det {:.1e}, residual {:.1e}, norm {:.1e}, {:.3f} s", worst_orth,
                           worst_det, worst_res, worst_norm, elapsed);
  }
  return o;
}

DetectionSegment noiseless_segment(const std::function<VehicleState(double)>& path, int n,
                                   const Posed& cam_pose) {
  CameraConfig cam;
  cam.pose = cam_pose;
  DetectionSegment seg;
  for (int k = 0; k < n; ++k) {
    const double t = k / 30.0;
    seg.detections.push_back(TagDetection{t, 0, tag_in_camera(path(t), cam, TagConfig{})});
  }
  return seg;
}

VehicleState arc(double t) {
  VehicleState s;
  s.psi = 0.4 + 0.8 * t;
  s.position = Vec3d(1.0 + 0.9 * t, 1.5 + 0.3 * t * t, 0.0);
  return s;
}

// Largest |difference| over every output field, or -1 when the sample counts differ.
double oracle_difference(const DetectionSegment& seg, const PipelineConfig& cfg) {
  std::vector<oracle::Sample> in;
  for (const auto& d : seg.detections) {
    oracle::Sample s{};
    s.t = d.timestamp;
    for (int i = 0; i < 3; ++i) {
      s.q[i] = d.pose.translation(i);
      for (int j = 0; j < 3; ++j) s.R[i][j] = d.pose.rotation(i, j);
    }
    in.push_back(s);
  }
  const auto expected = oracle::pipeline(in, cfg.output_rate, cfg.smoothing_window);
  const auto got = run_pipeline(seg, cfg);
  if (got.size() != expected.size()) return -1.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    const auto& g = got[k];
    const auto& e = expected[k];
    for (double d : {g.timestamp - e.t, g.x - e.x, g.y - e.y, wrap_angle(g.psi - e.psi), g.u - e.u,
                     g.v - e.v, g.r - e.r}) {
      worst = std::max(worst, std::abs(d));
    }
  }
  return worst;
}

Outcome pipeline_oracle() {
  Outcome o;
  const Posed cam{Vec3d(kCenter, kCenter, -2.0), rot_z(0.2) * rot_x(3 * kDeg) * rot_y(1 * kDeg)};
  // A 20-sample stream needs window <= 10 to clear the 2 * window minimum.
  PipelineConfig short_cfg;
  short_cfg.smoothing_window = 8;
  const DetectionSegment short_seg = noiseless_segment(arc, 20, cam);
  o.require(!estimate_segment(short_seg, short_cfg).frame.horizontal_fallback,
            "plane fit fell back to horizontal");
  const double d20 = oracle_difference(short_seg, short_cfg);
  const double d60 = oracle_difference(noiseless_segment(arc, 60, cam), PipelineConfig{});
  o.require(d20 >= 0.0 && d20 < 1e-9, fmt::format("20 samples, window 8: {:.2e}", d20));
  o.require(d60 >= 0.0 && d60 < 1e-9, fmt::format("60 samples, window 12: {:.2e}", d60));
  if (o.pass) {
    o.detail = fmt::format("max difference {:.1e} (20 samples, window 8), {:.1e} (60 samples, window 12)",
                           d20, d60);
  }
  return o;
}

Outcome tilt_correction() {
  Outcome o;
  const double tilt = 3.0 * kDeg;
  const Posed cam{Vec3d(kCenter, kCenter, -2.0), rot_x(tilt)};
  const auto seg = noiseless_segment(
      [](double t) {
        VehicleState s;
        s.psi = 0.3 * t;
        s.position = Vec3d(kCenter + 1.5 * std::sin(0.3 * t), kCenter - 1.5 * std::cos(0.3 * t), 0.0);
        return s;
      },
      300, cam);
  const SegmentEstimate est = estimate_segment(seg, PipelineConfig{});
  const Vec3d n = est.frame.plane.normal().normalized();
  const Vec3d truth = cam.rotation.transpose() * Vec3d::UnitZ();
  const double err = std::acos(std::clamp(std::abs(n.dot(truth)), 0.0, 1.0));
  double worst_z = 0.0;
  for (const auto& d : seg.detections) {
    worst_z = std::max(worst_z, std::abs(to_world(d.pose.translation, est.frame.origin, est.frame.r_oc).z()));
  }
  o.require(err < 0.01 * kDeg, fmt::format("normal error {:.2e} deg", err / kDeg));
  o.require(worst_z < 1e-9, fmt::format("max |z| {:.2e}", worst_z));
  if (o.pass) o.detail = fmt::format("normal error {:.1e} deg, max |z| {:.1e}", err / kDeg, worst_z);
  return o;
}

Outcome end_to_end_line() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const RunArtifacts run = run_scenario(load_scenario("line"));
  const double elapsed = seconds_since(t0);
  const auto& m = run.metrics;
  const double rmse_pct = 100.0 * metric(m, "rmse_u") / metric(m, "truth_u_max");
  const double mean_v = metric(m, "est_mean_v");
  const double path = metric(m, "truth_path_length");
  o.require(rmse_pct < 3.0, fmt::format("rmse_u {:.2f}% of u", rmse_pct));
  o.require(std::abs(mean_v) < 0.01, fmt::format("mean v {:.4f}", mean_v));
  o.require(std::abs(path - 3.05) / 3.05 < 0.05, fmt::format("path {:.3f} m", path));
  o.require(elapsed < 10.0, fmt::format("runtime {:.2f} s", elapsed));
  if (o.pass) {
    o.detail = fmt::format("rmse_u {:.2f}% of u, mean v {:.4f} m/s, path {:.3f} m, {:.2f} s", rmse_pct,
                           mean_v, path, elapsed);
  }
  return o;
}

Outcome end_to_end_circle() {
  Outcome o;
  const auto m = run_scenario(load_scenario("circle")).metrics;
  const double est = metric(m, "est_circle_radius");
  const double tru = metric(m, "truth_circle_radius");
  const double var = metric(m, "truth_r_steady_variation");
  o.require(std::abs(est - tru) / tru < 0.05, fmt::format("radius {:.3f} vs truth {:.3f}", est, tru));
  o.require(std::abs(tru - 1.83) / 1.83 < 0.05, fmt::format("truth radius {:.3f}", tru));
  o.require(var < 0.03, fmt::format("steady r variation {:.3g}", var));
  if (o.pass) {
    o.detail = fmt::format("radius {:.4f} m vs truth {:.4f} m, steady r variation {:.1e}", est, tru, var);
  }
  return o;
}

Outcome zigzag() {
  Outcome o;
  const auto m = run_scenario(load_scenario("zigzag")).metrics;
  const double n = metric(m, "est_r_sign_changes");
  o.require(n == 4.0, fmt::format("{} sign changes", n));
  if (o.pass) o.detail = "4 sign changes of estimated r";
  return o;
}

Outcome buoyancy() {
  Outcome o;
  const VehicleParams p;
  const double dt = 1.0 / 240.0;
  double fill = 0.0;
  int steps = 0;
  while (fill < p.syringe_capacity) {
    fill = pump_step(fill, PumpMode::kIntake, dt, p);
    ++steps;
  }
  o.require(std::abs(steps - 3600) <= 1, fmt::format("fill took {} steps", steps));

  const auto m = run_scenario(load_scenario("pump_test")).metrics;
  const double depth = metric(m, "truth_max_depth");
  const double reversals = metric(m, "truth_depth_reversals");
  o.require(std::abs(depth - 1.0) <= 0.15, fmt::format("max depth {:.3f} m", depth));
  o.require(reversals >= 2, fmt::format("{} reversals", reversals));

  double worst = 0.0;
  for (int f = 2; f <= 23; ++f) {
    worst = std::max(worst, std::abs(estimate_plunger(ir_response(f, 0.0, p)).fill - f));
  }
  o.require(worst < 0.5, fmt::format("IR round trip error {:.3f} mL", worst));

  bool flagged = true;
  for (double f = 0.0; f <= 25.0; f += 0.25) {
    for (double ambient : {0.9, 0.95, 1.0}) {
      try {
        flagged = flagged && estimate_plunger(ir_response(f, ambient, p)).degraded;
      } catch (const VehicleError& e) {
        flagged = flagged && e.kind() == VehicleError::Kind::kNoSignal;
      }
    }
  }
  o.require(flagged, "bright ambient not flagged");
  if (o.pass) {
    o.detail = fmt::format("{} steps, max depth {:.3f} m, {} reversals, IR error {:.3f} mL", steps, depth,
                           reversals, worst);
  }
  return o;
}

Outcome protocol() {
  Outcome o;
  using namespace uuv::link;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> kind(0, 3), motor(-100, 100), byte(0, 255), word(0, 65535),
      mode(0, 2), fill(0, 250);
  auto random_message = [&]() -> Message {
    switch (kind(rng)) {
      case 0: return SetMotors{static_cast<std::int8_t>(motor(rng)), static_cast<std::int8_t>(motor(rng))};
      case 1: return Pump{static_cast<std::uint8_t>(mode(rng)), static_cast<std::uint16_t>(word(rng))};
      case 2: return StartSequence{static_cast<std::uint8_t>(byte(rng))};
      default: {
        Telemetry t;
        t.depth_mm = static_cast<std::uint16_t>(word(rng));
        for (auto& c : t.ir) c = static_cast<std::uint8_t>(byte(rng));
        t.fill_est_tenth_ml = static_cast<std::uint8_t>(fill(rng));
        t.flags = static_cast<std::uint8_t>(byte(rng));
        return t;
      }
    }
  };

  int mismatches = 0;
  for (int i = 0; i < 100000; ++i) {
    const Message m = random_message();
    if (!(decode(encode(m)) == m)) ++mismatches;
  }
  o.require(mismatches == 0, fmt::format("{} round-trip mismatches", mismatches));

  int crashes = 0;
  std::uniform_int_distribution<std::size_t> len(0, 128);
  for (int i = 0; i < 20000; ++i) {
    Bytes b(len(rng));
    for (auto& x : b) x = static_cast<std::uint8_t>(byte(rng));
    if (i % 2 == 0 && b.size() >= 2) {
      b[0] = kSync0;
      b[1] = kSync1;
    }
    try {
      decode(b);
      decode_stream(b);
    } catch (const LinkError&) {
    } catch (...) {
      ++crashes;
    }
  }
  o.require(crashes == 0, fmt::format("{} unexpected exceptions", crashes));

  int undetected = 0;
  for (int i = 0; i < 2000; ++i) {
    const Bytes frame = encode(random_message());
    for (std::size_t pos = 2; pos < frame.size(); ++pos) {
      for (int delta = 1; delta < 256; ++delta) {
        Bytes bad = frame;
        bad[pos] = static_cast<std::uint8_t>(bad[pos] ^ delta);
        try {
          decode(bad);
          ++undetected;
        } catch (const LinkError&) {
        }
      }
    }
  }
  o.require(undetected == 0, fmt::format("{} corruptions undetected", undetected));

  const ChannelConfig cfg;
  const Bytes frame = encode(StartSequence{1});
  std::string rates;
  for (const auto& [depth, expected] : {std::pair{0.0, 0.99}, {0.75, 0.495}, {1.2, 0.0}, {1.5, 0.0}}) {
    int delivered = 0;
    for (int i = 0; i < 10000; ++i) delivered += deliver(frame, depth, cfg, rng).has_value() ? 1 : 0;
    const double rate = delivered / 10000.0;
    const bool ok = expected == 0.0 ? delivered == 0 : std::abs(rate - expected) <= 0.02 * expected;
    o.require(ok, fmt::format("delivery at {} m = {:.4f}", depth, rate));
    rates += fmt::format("{}{:.4f}", rates.empty() ? "" : "/", rate);
  }
  if (o.pass) o.detail = fmt::format("1e5 round trips, fuzz clean, corruptions detected, delivery {}", rates);
  return o;
}

Outcome resampler() {
  Outcome o;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> jit(-0.004, 0.004);
  const int n = 300;
  VecXd t(n), v(n);
  for (int i = 0; i < n; ++i) {
    t(i) = 5.0 + i / 30.0 + (i == 0 ? 0.0 : jit(rng));
    v(i) = std::sin(t(i));
  }
  const auto out = resample_uniform(t, v, 30.0);
  double worst_spacing = 0.0;
  for (Eigen::Index k = 0; k < out.timestamps.size(); ++k) {
    worst_spacing = std::max(worst_spacing, std::abs(out.timestamps(k) - (t(0) + static_cast<double>(k) / 30.0)));
  }
  o.require(worst_spacing < 1e-12, fmt::format("grid error {:.2e}", worst_spacing));

  const double dt = 1.0 / 30.0, slope = 0.42;
  VecXd ramp(200);
  for (Eigen::Index i = 0; i < ramp.size(); ++i) ramp(i) = slope * static_cast<double>(i) * dt;
  const VecXd m = moving_average(ramp, 12);
  double worst_lag = 0.0;
  for (Eigen::Index i = 11; i < ramp.size(); ++i) {
    worst_lag = std::max(worst_lag, std::abs((ramp(i) - m(i)) - 5.5 * slope * dt));
  }
  o.require(worst_lag < 1e-12, fmt::format("ramp lag error {:.2e}", worst_lag));
  if (o.pass) o.detail = fmt::format("grid error {:.1e}, ramp lag error {:.1e}", worst_spacing, worst_lag);
  return o;
}

Outcome determinism() {
  Outcome o;
  int files = 0;
  for (const auto& name : builtin_scenario_names()) {
    const Scenario s = load_scenario(name);
    const fs::path a = scratch(name + "_a");
    const fs::path b = scratch(name + "_b");
    write_artifacts(run_scenario(s), a);
    write_artifacts(run_scenario(s), b);
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
      if (!entry.is_regular_file()) continue;
      ++files;
      const fs::path other = b / fs::relative(entry.path(), a);
      o.require(fs::exists(other) && slurp(entry.path()) == slurp(other),
                fmt::format("{} differs", fs::relative(entry.path(), a.parent_path()).string()));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
  if (o.pass) o.detail = fmt::format("{} artifact files identical across {} scenarios", files,
                                     builtin_scenario_names().size());
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"frames_suite", frames_suite},
      {"pipeline_oracle_equivalence", pipeline_oracle},
      {"tilt_correction", tilt_correction},
      {"end_to_end_line", end_to_end_line},
      {"end_to_end_circle", end_to_end_circle},
      {"zigzag_sign_changes", zigzag},
      {"buoyancy", buoyancy},
      {"protocol", protocol},
      {"resampler", resampler},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = fmt::format("exception: {}", e.what());
    }
    if (!o.pass) ++failures;
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
  }
  return failures;
}
