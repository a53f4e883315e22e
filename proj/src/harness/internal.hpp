#pragma once

#include "uuv/harness.hpp"

namespace uuv {

/// Truth, estimate-comparison and shape metrics for one run. Shared by the
/// runner and by metrics recomputation from a run directory.
std::map<std::string, double> scenario_metrics(const Scenario& s,
                                               const std::vector<TruthSample>& truth,
                                               const std::vector<SegmentEstimate>& segments,
                                               std::size_t frames_captured,
                                               std::size_t detections);

/// Linear interpolation of aligned truth at time t, clamped to the ends.
AlignedTruth aligned_truth_at(const std::vector<AlignedTruth>& truth, double t);

}  // namespace uuv
