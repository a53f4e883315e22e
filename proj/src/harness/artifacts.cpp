#include "internal.hpp"

#include "../csv.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace uuv {

namespace {

namespace fs = std::filesystem;

constexpr std::string_view kTruthHeader =
    "t,x,y,z,phi,theta,psi,u,v,w,r,fill,thrust_left,thrust_right";
constexpr std::string_view kFramesHeader =
    "segment,samples,flat,a,b,d,r11,r12,r13,r21,r22,r23,r31,r32,r33,ox,oy,oz";
constexpr std::string_view kCameraFramesHeader = "t";

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path.string()));
  return in;
}

const char* source_name(CommandSource s) { return s == CommandSource::kGround ? "ground" : "onboard"; }

const char* status_name(CommandStatus s) {
  switch (s) {
    case CommandStatus::kApplied: return "applied";
    case CommandStatus::kLost: return "lost";
    case CommandStatus::kIgnored: return "ignored";
  }
  return "?";
}

std::pair<double, double> plot_xy(PlotFrame frame, double x, double y) {
  if (frame == PlotFrame::kSwapped) return {y, x};
  return {x, y};
}

void write_truth(std::ostream& os, const std::vector<TruthSample>& truth) {
  os << kTruthHeader << '\n';
  for (const auto& ts : truth) {
    const auto& s = ts.state;
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", ts.t, s.position.x(),
               s.position.y(), s.position.z(), s.phi, s.theta, s.psi, s.u, s.v, s.w, s.r,
               s.syringe_fill, s.motor_thrust_left, s.motor_thrust_right);
  }
}

std::vector<TruthSample> read_truth(std::istream& is) {
  std::vector<TruthSample> out;
  for (const auto& row : csv::read_numeric(is, kTruthHeader)) {
    TruthSample ts;
    ts.t = row[0];
    auto& s = ts.state;
    s.position = Vec3d(row[1], row[2], row[3]);
    s.phi = row[4];
    s.theta = row[5];
    s.psi = row[6];
    s.u = row[7];
    s.v = row[8];
    s.w = row[9];
    s.r = row[10];
    s.syringe_fill = row[11];
    s.motor_thrust_left = row[12];
    s.motor_thrust_right = row[13];
    out.push_back(ts);
  }
  return out;
}

void write_frames(std::ostream& os, const std::vector<SegmentEstimate>& segments) {
  os << kFramesHeader << '\n';
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& f = segments[i].frame;
    const auto& r = f.r_oc;
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", i,
               segments[i].states.size(), f.horizontal_fallback ? 1 : 0, f.plane.a, f.plane.b,
               f.plane.d, r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2), r(2, 0), r(2, 1),
               r(2, 2), f.origin.x(), f.origin.y(), f.origin.z());
  }
}

std::vector<SegmentEstimate> read_segments(std::istream& frames, std::istream& estimates) {
  const auto states = read_states_csv(estimates);
  std::vector<SegmentEstimate> out;
  std::size_t next = 0;
  for (const auto& row : csv::read_numeric(frames, kFramesHeader)) {
    SegmentEstimate seg;
    seg.frame.horizontal_fallback = row[2] != 0.0;
    seg.frame.plane.a = row[3];
    seg.frame.plane.b = row[4];
    seg.frame.plane.d = row[5];
    for (int i = 0; i < 9; ++i) seg.frame.r_oc(i / 3, i % 3) = row[6 + static_cast<std::size_t>(i)];
    seg.frame.origin = Vec3d(row[15], row[16], row[17]);
    const auto samples = static_cast<std::size_t>(row[1]);
    if (next + samples > states.size()) {
      throw std::runtime_error("frames.csv: segment sample counts exceed estimates.csv");
    }
    seg.states.assign(states.begin() + static_cast<std::ptrdiff_t>(next),
                      states.begin() + static_cast<std::ptrdiff_t>(next + samples));
    next += samples;
    out.push_back(std::move(seg));
  }
  if (next != states.size()) {
    throw std::runtime_error("frames.csv: segment sample counts do not cover estimates.csv");
  }
  return out;
}

void write_metrics(std::ostream& os, const std::map<std::string, double>& metrics) {
  os << "name,value\n";
  for (const auto& [k, v] : metrics) fmt::print(os, "{},{}\n", k, v);
}

std::map<std::string, double> read_metrics(std::istream& is) {
  std::map<std::string, double> out;
  std::string line;
  std::getline(is, line);
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != 2) throw std::runtime_error(fmt::format("metrics.csv line {}", line_no));
    out[fields[0]] = csv::to_double(fields[1], line_no);
  }
  return out;
}

void write_plotdata(const RunArtifacts& run, const fs::path& dir) {
  fs::create_directories(dir);
  const Scenario& s = run.scenario;

  auto kin = open_out(dir / "kinematics.csv");
  auto track = open_out(dir / "track.csv");
  kin << "t,segment,u,v,psi,r,truth_u,truth_v,truth_psi,truth_r\n";
  track << "t,segment,x,y,truth_x,truth_y\n";
  for (std::size_t i = 0; i < run.segments.size(); ++i) {
    const auto& seg = run.segments[i];
    const auto truth = align_truth(run.truth, seg.frame, s.camera, s.tag);
    for (const auto& e : seg.states) {
      const AlignedTruth at = aligned_truth_at(truth, e.timestamp);
      fmt::print(kin, "{},{},{},{},{},{},{},{},{},{}\n", e.timestamp, i, e.u, e.v, e.psi, e.r,
                 at.u, at.v, at.psi, at.r);
      const auto [px, py] = plot_xy(s.plot_frame, e.x, e.y);
      const auto [tx, ty] = plot_xy(s.plot_frame, at.x, at.y);
      fmt::print(track, "{},{},{},{},{},{}\n", e.timestamp, i, px, py, tx, ty);
    }
  }

  auto depth = open_out(dir / "depth_ir.csv");
  depth << "t,depth,ir1,ir2,ir3,ir4,ir5,ir6,ir7,ir8,ir9,fill_est,truth_depth,truth_fill\n";
  const double step = 1.0 / s.sim_rate;
  for (const auto& smp : run.sensors) {
    const auto k = static_cast<std::size_t>(std::llround(smp.t / step));
    const auto& truth = run.truth[std::min(k, run.truth.size() - 1)].state;
    const auto& c = smp.ir.channels;
    fmt::print(depth, "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", smp.t, smp.depth, c[0], c[1],
               c[2], c[3], c[4], c[5], c[6], c[7], c[8], smp.fill_estimate, truth.position.z(),
               truth.syringe_fill);
  }
}

}  // namespace

void write_artifacts(const RunArtifacts& run, const fs::path& dir) {
  fs::create_directories(dir);

  {
    auto out = open_out(dir / "scenario.txt");
    out << to_text(run.scenario);
  }
  {
    auto out = open_out(dir / "truth.csv");
    write_truth(out, run.truth);
  }
  {
    auto out = open_out(dir / "detections.csv");
    write_detections_csv(out, run.detections);
  }
  {
    auto out = open_out(dir / "estimates.csv");
    write_states_csv(out, run.estimates());
  }
  {
    auto out = open_out(dir / "frames.csv");
    write_frames(out, run.segments);
  }
  {
    auto out = open_out(dir / "camera_frames.csv");
    out << kCameraFramesHeader << '\n';
    for (double t : run.frame_times) fmt::print(out, "{}\n", t);
  }
  {
    auto out = open_out(dir / "metrics.csv");
    write_metrics(out, run.metrics);
  }
  {
    auto out = open_out(dir / "sensors.csv");
    out << "t,depth,ir1,ir2,ir3,ir4,ir5,ir6,ir7,ir8,ir9,fill_est,contrast,degraded\n";
    for (const auto& smp : run.sensors) {
      const auto& c = smp.ir.channels;
      fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", smp.t, smp.depth, c[0], c[1],
                 c[2], c[3], c[4], c[5], c[6], c[7], c[8], smp.fill_estimate, smp.contrast,
                 smp.degraded ? 1 : 0);
    }
  }
  {
    auto out = open_out(dir / "telemetry.csv");
    out << "t_received,depth_mm,ir1,ir2,ir3,ir4,ir5,ir6,ir7,ir8,ir9,fill_tenth_ml,flags\n";
    for (const auto& tm : run.telemetry) {
      const auto& t = tm.telemetry;
      fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{}\n", tm.t_received, t.depth_mm,
                 t.ir[0], t.ir[1], t.ir[2], t.ir[3], t.ir[4], t.ir[5], t.ir[6], t.ir[7], t.ir[8],
                 t.fill_est_tenth_ml, t.flags);
    }
  }
  {
    auto out = open_out(dir / "commands.csv");
    out << "t_sent,t_applied,source,status,depth_at_send,message\n";
    for (const auto& c : run.commands) {
      fmt::print(out, "{},{},{},{},{},{}\n", c.t_sent, c.t_applied, source_name(c.source),
                 status_name(c.status), c.depth_at_send, c.message);
    }
  }
  write_plotdata(run, dir / "plotdata");
}

std::map<std::string, double> metrics_from_run_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error(fmt::format("'{}' is not a run directory", dir.string()));
  }
  std::string text;
  {
    auto in = open_in(dir / "scenario.txt");
    std::stringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  const Scenario s = parse_scenario(text);

  std::vector<TruthSample> truth;
  {
    auto in = open_in(dir / "truth.csv");
    truth = read_truth(in);
  }
  if (truth.empty()) throw std::runtime_error("truth.csv has no samples");
  std::vector<SegmentEstimate> segments;
  {
    auto frames = open_in(dir / "frames.csv");
    auto estimates = open_in(dir / "estimates.csv");
    segments = read_segments(frames, estimates);
  }
  std::size_t frames_captured = 0;
  {
    auto in = open_in(dir / "camera_frames.csv");
    frames_captured = csv::read_numeric(in, kCameraFramesHeader).size();
  }
  std::size_t detections = 0;
  {
    auto in = open_in(dir / "detections.csv");
    detections = read_detections_csv(in).size();
  }

  // Counters describing the run itself (link traffic, skipped segments) are
  // taken from the stored metrics; everything derived from the series is
  // recomputed.
  std::map<std::string, double> out;
  if (fs::exists(dir / "metrics.csv")) {
    auto in = open_in(dir / "metrics.csv");
    out = read_metrics(in);
  }
  for (const auto& [k, v] : scenario_metrics(s, truth, segments, frames_captured, detections)) {
    out[k] = v;
  }
  out["frames_captured"] = static_cast<double>(frames_captured);
  out["detections"] = static_cast<double>(detections);
  out["segments"] = static_cast<double>(segments.size());
  return out;
}

}  // namespace uuv
