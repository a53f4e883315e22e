#include "uuv/camera.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uuv {

namespace {

void check_probability(double p, const std::string& name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(fmt::format("{} must lie in [0, 1] (got {})", name, p));
  }
}

void check_non_negative(double v, const std::string& name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(fmt::format("{} must be >= 0 (got {})", name, v));
  }
}

double clamped_jitter(double sigma, double period, std::mt19937_64& rng) {
  if (!(sigma > 0.0)) return 0.0;
  std::normal_distribution<double> jitter(0.0, sigma);
  const double limit = 0.4 * period;
  return std::clamp(jitter(rng), -limit, limit);
}

}  // namespace

void CameraConfig::validate() const {
  if (!(frame_rate > 0.0)) {
    throw std::invalid_argument(
        fmt::format("camera.frame_rate must be > 0 (got {})", frame_rate));
  }
  if (!is_rotation(pose.rotation)) {
    throw std::invalid_argument("camera pose rotation is not a proper rotation");
  }
  check_non_negative(timestamp_jitter_sigma, "camera.timestamp_jitter_sigma");
  check_non_negative(translation_noise_sigma, "camera.translation_noise_sigma");
  check_non_negative(rotation_noise_sigma, "camera.rotation_noise_sigma");
  check_probability(dropout_prob, "camera.dropout_prob");
  check_probability(spurious_prob, "camera.spurious_prob");
  for (std::size_t i = 0; i < glare_regions.size(); ++i) {
    check_probability(glare_regions[i].dropout_prob,
                      fmt::format("camera.glare[{}].dropout_prob", i));
    check_non_negative(glare_regions[i].radius, fmt::format("camera.glare[{}].radius", i));
  }
}

void TagConfig::validate() const {
  if (!(size > 0.0)) throw std::invalid_argument(fmt::format("tag.size must be > 0 (got {})", size));
  if (tag_id < 0) throw std::invalid_argument("tag.id must be >= 0");
  if (!is_rotation(mount_offset.rotation)) {
    throw std::invalid_argument("tag mount rotation is not a proper rotation");
  }
}

Posed tag_in_camera(const VehicleState& state, const CameraConfig& cam, const TagConfig& tag) {
  return cam.pose.inverse() * (state.pose() * tag.mount_offset);
}

std::optional<TagDetection> observe(const VehicleState& state, const CameraConfig& cam,
                                    const TagConfig& tag, double t, std::mt19937_64& rng) {
  if (state.position.z() >= cam.visibility_depth) return std::nullopt;

  double drop = cam.dropout_prob;
  for (const auto& g : cam.glare_regions) {
    const double dx = state.position.x() - g.center_x;
    const double dy = state.position.y() - g.center_y;
    if (dx * dx + dy * dy <= g.radius * g.radius) drop = std::max(drop, g.dropout_prob);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (drop > 0.0 && unit(rng) < drop) return std::nullopt;

  TagDetection det;
  det.tag_id = tag.tag_id;
  det.pose = tag_in_camera(state, cam, tag);

  if (cam.translation_noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, cam.translation_noise_sigma);
    for (int i = 0; i < 3; ++i) det.pose.translation(i) += noise(rng);
  }
  if (cam.rotation_noise_sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3d axis(gauss(rng), gauss(rng), gauss(rng));
    if (axis.norm() < 1e-12) axis = Vec3d::UnitZ();
    const double angle = cam.rotation_noise_sigma * gauss(rng);
    det.pose.rotation =
        Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix() * det.pose.rotation;
  }
  if (cam.spurious_outliers && cam.spurious_prob > 0.0 && unit(rng) < cam.spurious_prob) {
    det.pose.translation.z() += cam.spurious_z_offset;
  }
  det.timestamp = t + clamped_jitter(cam.timestamp_jitter_sigma, 1.0 / cam.frame_rate, rng);
  return det;
}

std::vector<double> frame_clock(const CameraConfig& cam, double duration, std::mt19937_64& rng) {
  if (!(duration > 0.0)) throw std::invalid_argument("frame_clock: duration must be > 0");
  const double period = 1.0 / cam.frame_rate;
  std::vector<double> stamps;
  for (long k = 0;; ++k) {
    const double nominal = static_cast<double>(k) / cam.frame_rate;
    if (!(nominal < duration)) break;
    stamps.push_back(
        std::max(0.0, nominal + clamped_jitter(cam.timestamp_jitter_sigma, period, rng)));
  }
  return stamps;
}

}  // namespace uuv
