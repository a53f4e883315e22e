#pragma once

// Overhead-tag tracking pipeline: camera-frame tag detections in, uniformly
// sampled planar kinematics (x, y, psi, u, v, r) out.

#include "uuv/frames.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace uuv {

struct TagDetection {
  double timestamp = 0.0;
  int tag_id = 0;
  Posed pose;  // tag in camera frame, meters
};

struct DetectionSegment {
  std::vector<TagDetection> detections;
};

struct KinematicState {
  double timestamp = 0.0;
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double u = 0.0;
  double v = 0.0;
  double r = 0.0;
};

struct PipelineConfig {
  int smoothing_window = 12;
  double output_rate = 30.0;
  double max_gap = 0.25;
  double outlier_z_jump = 0.05;
  int outlier_history = 5;
  // Below this RMS x-y spread of a segment's detections the plane's tilt is
  // unobservable and the horizontal plane through the mean z is used instead.
  double min_plane_extent = 0.05;

  void validate() const;
};

class TrackingError : public std::runtime_error {
 public:
  enum class Kind { kEmptyInput, kSegmentTooShort, kInvalidConfig, kInvalidSegment };

  TrackingError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Constant rotation applied after world_rotation so that an un-tilted,
/// downward-looking camera yields a world frame equal to the camera frame.
/// It is world_rotation() of the horizontal plane z = d.
RotationMatrixd axis_alignment();

/// Frame the pipeline used for one segment: world = R_OC^T (q - origin).
struct SegmentFrame {
  PlaneCoefficientsd plane;
  bool horizontal_fallback = false;
  RotationMatrixd r_oc = RotationMatrixd::Identity();
  Vec3d origin = Vec3d::Zero();
};

struct SegmentEstimate {
  SegmentFrame frame;
  std::vector<KinematicState> states;
};

/// Splits a time-sorted stream at gaps larger than max_gap after rejecting
/// z-jump outliers and duplicate timestamps. Segments with fewer than two
/// detections are dropped.
std::vector<DetectionSegment> segment_stream(const std::vector<TagDetection>& detections,
                                             const PipelineConfig& config);

/// The full estimate for one segment, including the fitted frame.
SegmentEstimate estimate_segment(const DetectionSegment& segment, const PipelineConfig& config);

std::vector<KinematicState> run_pipeline(const DetectionSegment& segment,
                                         const PipelineConfig& config);

// CSV I/O. Detections: t,tag_id,tx,ty,tz,r11..r33. States: t,x,y,psi,u,v,r.
void write_detections_csv(std::ostream& os, const std::vector<TagDetection>& detections);
std::vector<TagDetection> read_detections_csv(std::istream& is);
void write_states_csv(std::ostream& os, const std::vector<KinematicState>& states);
std::vector<KinematicState> read_states_csv(std::istream& is);

}  // namespace uuv
