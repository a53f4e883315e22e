#include "internal.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace uuv {

Circle circle_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    throw MetricsError(MetricsError::Kind::kCollinear, "circle_fit: need at least 3 points");
  }
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());

  // x^2 + y^2 + D x + E y + F = 0 on centered coordinates.
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = points[static_cast<std::size_t>(i)].first - mx;
    const double y = points[static_cast<std::size_t>(i)].second - my;
    a(i, 0) = x;
    a(i, 1) = y;
    a(i, 2) = 1.0;
    b(i) = -(x * x + y * y);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) {
    throw MetricsError(MetricsError::Kind::kCollinear, "circle_fit: points are collinear");
  }
  const Eigen::Vector3d sol = qr.solve(b);
  const double cx = -0.5 * sol(0);
  const double cy = -0.5 * sol(1);
  const double r2 = cx * cx + cy * cy - sol(2);
  if (!(r2 > 0.0) || !std::isfinite(r2)) {
    throw MetricsError(MetricsError::Kind::kCollinear, "circle_fit: degenerate circle");
  }
  return Circle{cx + mx, cy + my, std::sqrt(r2)};
}

std::vector<AlignedTruth> align_truth(const std::vector<TruthSample>& truth,
                                      const SegmentFrame& frame, const CameraConfig& cam,
                                      const TagConfig& tag) {
  std::vector<AlignedTruth> out;
  out.reserve(truth.size());
  for (const auto& s : truth) {
    const Posed in_cam = tag_in_camera(s.state, cam, tag);
    const Vec3d p = to_world(in_cam.translation, frame.origin, frame.r_oc);
    out.push_back(AlignedTruth{s.t, p.x(), p.y(), extract_yaw(in_cam.rotation), s.state.u,
                               s.state.v, s.state.r});
  }
  return out;
}

AlignedTruth aligned_truth_at(const std::vector<AlignedTruth>& truth, double t) {
  if (t <= truth.front().t) return truth.front();
  if (t >= truth.back().t) return truth.back();
  const auto it = std::upper_bound(truth.begin(), truth.end(), t,
                                   [](double value, const AlignedTruth& s) { return value < s.t; });
  const AlignedTruth& b = *it;
  const AlignedTruth& a = *(it - 1);
  const double alpha = (t - a.t) / (b.t - a.t);
  auto lerp = [alpha](double x, double y) { return x + alpha * (y - x); };
  return AlignedTruth{t,
                      lerp(a.x, b.x),
                      lerp(a.y, b.y),
                      wrap_angle(a.psi + alpha * wrap_angle(b.psi - a.psi)),
                      lerp(a.u, b.u),
                      lerp(a.v, b.v),
                      lerp(a.r, b.r)};
}

std::map<std::string, double> compute_metrics(const std::vector<EstimateComparison>& segments,
                                              const PipelineConfig& config,
                                              std::size_t frames_captured,
                                              std::size_t detections) {
  const int window = config.smoothing_window;
  const double lag = 0.5 * static_cast<double>(window - 1) / config.output_rate;

  double sum_xy = 0.0, sum_psi = 0.0, sum_u = 0.0, sum_v = 0.0, sum_r = 0.0;
  std::size_t count = 0;
  for (const auto& seg : segments) {
    if (seg.truth.empty() || seg.estimates.empty()) continue;
    const auto m = static_cast<long>(seg.estimates.size());
    for (long k = window; k < m - window; ++k) {
      const KinematicState& e = seg.estimates[static_cast<std::size_t>(k)];
      if (e.timestamp - lag < seg.truth.front().t || e.timestamp > seg.truth.back().t) continue;
      const AlignedTruth now = aligned_truth_at(seg.truth, e.timestamp);
      const AlignedTruth delayed = aligned_truth_at(seg.truth, e.timestamp - lag);
      const double dx = e.x - now.x;
      const double dy = e.y - now.y;
      sum_xy += dx * dx + dy * dy;
      const double dpsi = wrap_angle(e.psi - now.psi);
      sum_psi += dpsi * dpsi;
      sum_u += (e.u - delayed.u) * (e.u - delayed.u);
      sum_v += (e.v - delayed.v) * (e.v - delayed.v);
      sum_r += (e.r - delayed.r) * (e.r - delayed.r);
      ++count;
    }
  }
  if (count == 0) {
    throw MetricsError(MetricsError::Kind::kNoOverlap,
                       "compute_metrics: no estimate samples overlap the truth record");
  }
  const double n = static_cast<double>(count);
  std::map<std::string, double> out;
  out["rmse_xy"] = std::sqrt(sum_xy / n);
  out["rmse_psi"] = std::sqrt(sum_psi / n);
  out["rmse_u"] = std::sqrt(sum_u / n);
  out["rmse_v"] = std::sqrt(sum_v / n);
  out["rmse_r"] = std::sqrt(sum_r / n);
  out["compared_samples"] = n;
  out["detection_coverage"] =
      frames_captured > 0 ? static_cast<double>(detections) / static_cast<double>(frames_captured)
                          : 0.0;
  return out;
}

int count_sign_changes(const std::vector<double>& series, double threshold) {
  int state = 0;
  int changes = 0;
  for (double x : series) {
    int next = state;
    if (x > threshold) next = 1;
    if (x < -threshold) next = -1;
    if (state != 0 && next != state) ++changes;
    state = next;
  }
  return changes;
}

int count_reversals(const std::vector<double>& series, double hysteresis) {
  if (series.empty()) return 0;
  int direction = 0;  // +1 rising, -1 falling, 0 undecided
  double hi = series.front();
  double lo = series.front();
  double extreme = series.front();
  int reversals = 0;
  for (double x : series) {
    if (direction == 0) {
      hi = std::max(hi, x);
      lo = std::min(lo, x);
      if (x - lo > hysteresis) {
        direction = 1;
        extreme = x;
      } else if (hi - x > hysteresis) {
        direction = -1;
        extreme = x;
      }
    } else if (direction == 1) {
      if (x > extreme) {
        extreme = x;
      } else if (extreme - x > hysteresis) {
        direction = -1;
        extreme = x;
        ++reversals;
      }
    } else {
      if (x < extreme) {
        extreme = x;
      } else if (x - extreme > hysteresis) {
        direction = 1;
        extreme = x;
        ++reversals;
      }
    }
  }
  return reversals;
}

}  // namespace uuv
