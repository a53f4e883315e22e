#pragma once

// Pose-level overhead camera: turns ground-truth vehicle states into noisy,
// occasionally missing tag detections on a jittered frame clock.

#include "uuv/frames.hpp"
#include "uuv/tracking.hpp"
#include "uuv/vehicle.hpp"

#include <optional>
#include <random>
#include <vector>

namespace uuv {

struct GlareRegion {
  double center_x = 0.0;  // world, m
  double center_y = 0.0;
  double radius = 0.0;
  double dropout_prob = 1.0;
};

struct CameraConfig {
  Posed pose;  // camera frame expressed in the world (NED) frame
  double frame_rate = 30.0;
  double timestamp_jitter_sigma = 0.003;
  double translation_noise_sigma = 0.003;
  double rotation_noise_sigma = 0.01;
  double dropout_prob = 0.02;
  std::vector<GlareRegion> glare_regions;
  bool spurious_outliers = false;
  double spurious_prob = 0.005;
  double spurious_z_offset = 0.2;
  double visibility_depth = 0.05;  // tag visible only while shallower than this

  void validate() const;
};

struct TagConfig {
  int tag_id = 0;
  double size = 0.07112;  // m, edge length
  Posed mount_offset;     // tag in body frame

  void validate() const;
};

/// Tag pose in the camera frame without any noise.
Posed tag_in_camera(const VehicleState& state, const CameraConfig& cam, const TagConfig& tag);

std::optional<TagDetection> observe(const VehicleState& state, const CameraConfig& cam,
                                    const TagConfig& tag, double t, std::mt19937_64& rng);

/// Capture times k/rate + jitter for k/rate < duration. Jitter is clamped to
/// +/-40% of the frame period, so the sequence is strictly increasing.
std::vector<double> frame_clock(const CameraConfig& cam, double duration, std::mt19937_64& rng);

}  // namespace uuv
