#include "uuv/tracking.hpp"

#include "csv.hpp"
#include "uuv/signal.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace uuv {

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw TrackingError(TrackingError::Kind::kInvalidConfig, what);
  };
  if (smoothing_window < 1) fail("pipeline.smoothing_window must be >= 1");
  if (!(output_rate > 0.0)) fail("pipeline.output_rate must be > 0");
  if (!(max_gap > 0.0)) fail("pipeline.max_gap must be > 0");
  if (!(outlier_z_jump > 0.0)) fail("pipeline.outlier_z_jump must be > 0");
  if (outlier_history < 1) fail("pipeline.outlier_history must be >= 1");
  if (!(min_plane_extent >= 0.0)) fail("pipeline.min_plane_extent must be >= 0");
}

RotationMatrixd axis_alignment() {
  RotationMatrixd a;
  a << 0, -1, 0,
      -1, 0, 0,
       0, 0, -1;
  return a;
}

namespace {

double median(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(),
                                         values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

PlaneCoefficientsd fit_segment_plane(const std::vector<Vec3d>& points, double min_extent,
                                     bool& fallback) {
  Vec3d mean = Vec3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  double spread = 0.0;
  for (const auto& p : points) spread += (p - mean).head<2>().squaredNorm();
  spread = std::sqrt(spread / static_cast<double>(points.size()));

  fallback = false;
  if (points.size() >= 3 && spread >= min_extent) {
    try {
      return fit_plane<double>(points);
    } catch (const FramesError& e) {
      if (e.kind() != FramesError::Kind::kDegenerateConfiguration) throw;
    }
  }
  fallback = true;
  PlaneCoefficientsd flat;
  flat.d = mean.z();
  return flat;
}

}  // namespace

std::vector<DetectionSegment> segment_stream(const std::vector<TagDetection>& detections,
                                             const PipelineConfig& config) {
  config.validate();
  if (detections.empty()) {
    throw TrackingError(TrackingError::Kind::kEmptyInput, "segment_stream: no detections");
  }

  // Outlier test against the raw history so that a rejected sample cannot
  // lock out the good samples after it.
  std::vector<TagDetection> kept;
  kept.reserve(detections.size());
  std::vector<double> history;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const TagDetection& det = detections[i];
    if (i > 0 && det.timestamp < detections[i - 1].timestamp) {
      throw TrackingError(TrackingError::Kind::kInvalidSegment,
                          "segment_stream: detections are not sorted by timestamp");
    }
    const double z = det.pose.translation.z();
    bool accept = true;
    if (!history.empty() && std::abs(z - median(history)) > config.outlier_z_jump) accept = false;
    if (accept && !kept.empty() && det.timestamp == kept.back().timestamp) accept = false;
    if (accept) kept.push_back(det);

    history.push_back(z);
    if (history.size() > static_cast<std::size_t>(config.outlier_history)) {
      history.erase(history.begin());
    }
  }

  std::vector<DetectionSegment> segments;
  DetectionSegment current;
  auto flush = [&] {
    if (current.detections.size() >= 2) segments.push_back(std::move(current));
    current = DetectionSegment{};
  };
  for (const auto& det : kept) {
    if (!current.detections.empty() &&
        det.timestamp - current.detections.back().timestamp > config.max_gap) {
      flush();
    }
    current.detections.push_back(det);
  }
  flush();
  return segments;
}

SegmentEstimate estimate_segment(const DetectionSegment& segment, const PipelineConfig& config) {
  config.validate();
  const auto& dets = segment.detections;
  if (dets.size() < 2) {
    throw TrackingError(TrackingError::Kind::kInvalidSegment,
                        "run_pipeline: a segment needs at least 2 detections");
  }
  const auto n = static_cast<Eigen::Index>(dets.size());

  std::vector<Vec3d> translations;
  translations.reserve(dets.size());
  for (const auto& d : dets) translations.push_back(d.pose.translation);

  SegmentEstimate est;
  est.frame.plane = fit_segment_plane(translations, config.min_plane_extent,
                                      est.frame.horizontal_fallback);
  const RotationMatrixd to_world_rot = axis_alignment() * world_rotation(est.frame.plane);
  est.frame.r_oc = to_world_rot.transpose();
  est.frame.origin = translations.front();

  VecXd t(n), x(n), y(n), psi_raw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& d = dets[static_cast<std::size_t>(i)];
    const Vec3d p = to_world(d.pose.translation, est.frame.origin, est.frame.r_oc);
    t(i) = d.timestamp;
    x(i) = p.x();
    y(i) = p.y();
    psi_raw(i) = extract_yaw(d.pose.rotation);
  }
  const VecXd psi = unwrap_angles(psi_raw);

  const auto xs = resample_uniform(t, x, config.output_rate);
  const auto ys = resample_uniform(t, y, config.output_rate);
  const auto ps = resample_uniform(t, psi, config.output_rate);

  const Eigen::Index m = xs.timestamps.size();
  if (m < 2 * static_cast<Eigen::Index>(config.smoothing_window)) {
    throw TrackingError(TrackingError::Kind::kSegmentTooShort,
                        fmt::format("run_pipeline: {} resampled samples, need at least {}", m,
                                    2 * config.smoothing_window));
  }

  const double dt = 1.0 / config.output_rate;
  const VecXd xdot = moving_average(finite_difference(xs.values, dt), config.smoothing_window);
  const VecXd ydot = moving_average(finite_difference(ys.values, dt), config.smoothing_window);
  const VecXd rate = moving_average(finite_difference(ps.values, dt), config.smoothing_window);

  est.states.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) {
    const Vec3d body = body_velocities(xdot(k), ydot(k), ps.values(k));
    est.states.push_back(KinematicState{xs.timestamps(k), xs.values(k), ys.values(k),
                                        wrap_angle(ps.values(k)), body.x(), body.y(), rate(k)});
  }
  return est;
}

std::vector<KinematicState> run_pipeline(const DetectionSegment& segment,
                                         const PipelineConfig& config) {
  return estimate_segment(segment, config).states;
}

namespace {
constexpr std::string_view kDetectionHeader =
    "t,tag_id,tx,ty,tz,r11,r12,r13,r21,r22,r23,r31,r32,r33";
constexpr std::string_view kStateHeader = "t,x,y,psi,u,v,r";
}  // namespace

void write_detections_csv(std::ostream& os, const std::vector<TagDetection>& detections) {
  os << kDetectionHeader << '\n';
  for (const auto& d : detections) {
    const auto& q = d.pose.translation;
    const auto& r = d.pose.rotation;
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", d.timestamp, d.tag_id, q.x(),
               q.y(), q.z(), r(0, 0), r(0, 1), r(0, 2), r(1, 0), r(1, 1), r(1, 2), r(2, 0),
               r(2, 1), r(2, 2));
  }
}

std::vector<TagDetection> read_detections_csv(std::istream& is) {
  std::vector<TagDetection> out;
  for (const auto& row : csv::read_numeric(is, kDetectionHeader)) {
    TagDetection d;
    d.timestamp = row[0];
    d.tag_id = static_cast<int>(row[1]);
    d.pose.translation = Vec3d(row[2], row[3], row[4]);
    for (int i = 0; i < 9; ++i) d.pose.rotation(i / 3, i % 3) = row[5 + static_cast<std::size_t>(i)];
    out.push_back(d);
  }
  return out;
}

void write_states_csv(std::ostream& os, const std::vector<KinematicState>& states) {
  os << kStateHeader << '\n';
  for (const auto& s : states) {
    fmt::print(os, "{},{},{},{},{},{},{}\n", s.timestamp, s.x, s.y, s.psi, s.u, s.v, s.r);
  }
}

std::vector<KinematicState> read_states_csv(std::istream& is) {
  std::vector<KinematicState> out;
  for (const auto& row : csv::read_numeric(is, kStateHeader)) {
    out.push_back(KinematicState{row[0], row[1], row[2], row[3], row[4], row[5], row[6]});
  }
  return out;
}

}  // namespace uuv
