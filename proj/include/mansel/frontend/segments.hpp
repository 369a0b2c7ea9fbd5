#pragma once

#include <vector>

#include "mansel/core/rng.hpp"
#include "mansel/frontend/labeling.hpp"

namespace mansel::frontend {

struct SegmentParams {
  int min_inliers = 50;        // pixels
  double min_extent = 0.25;    // m^2
  double ransac_tol = 0.03;    // meters, inlier distance to the plane
  int ransac_iters = 100;
  int k = 5;                   // labeling window
  double min_fraction = 0.6;
  double plane_tol = 0.03;     // labeling plane-distance tolerance
};

/// Connected components of the label image, each fit with an
/// axis-constrained one-parameter RANSAC plane (offset only, orientation
/// fixed by the label). Components with too few inliers or too little
/// extent are dropped. segment_id is left at -1 for the caller to assign.
std::vector<SegmentObservation> extract_segments(const AxisLabelImage& labels,
                                                 const sim::DepthImage& depth,
                                                 double yaw,
                                                 const SegmentParams& params,
                                                 Rng rng);

}  // namespace mansel::frontend
